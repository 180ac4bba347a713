"""Build script for the optional compiled kernel.

The package is fully functional without the extension (a numpy/scipy
fallback is selected at import time); building it just makes long
transports much faster.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "transportq._kernels._core",
        ["src/transportq/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
