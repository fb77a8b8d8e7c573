"""Conjunctive-query containment by binary polynomial minimization.

Every ``Contained`` verdict carries a witness homomorphism that has been
checked against both queries, so heuristic solvers cannot produce false
positives.
"""

__version__ = "0.1.0"
