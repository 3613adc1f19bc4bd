"""Build script for the optional compiled replay kernels.

The pure-Python fallback in ``fifarank._kernels_py`` is used whenever the
extension is missing, so a failed compile is not fatal.
"""
import os

import numpy
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("FIFARANK_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "fifarank._kernels",
                    ["src/fifarank/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
