import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; qcp._kernels falls back at import
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("QCP_NO_EXTENSION"):
    ext_modules = cythonize(
        [
            Extension(
                "qcp._kernels._ckernels",
                ["src/qcp/_kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
