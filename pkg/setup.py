"""Build the optional Cython kernels.

The package works without them: ``nsmhall.kernels`` falls back to numpy
implementations when the extension is missing.
"""
import os

import numpy as np
from setuptools import setup

ext_modules = []
if os.environ.get("NSMHALL_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "nsmhall._kernels",
                    ["src/nsmhall/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
