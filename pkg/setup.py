"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-numpy fallback is selected
at import time); building it just speeds up the hot solver kernels.
"""
import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

PYX = "src/danisac/conic/_kernels.pyx"

if cythonize is not None and os.path.exists(PYX):
    ext = Extension(
        "danisac.conic._kernels",
        sources=[PYX],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)
else:
    ext_modules = []

setup(ext_modules=ext_modules)
