"""Builds the optional Cython kernel extension.

When Cython or a C compiler is unavailable the package still installs and
``rtrlbench._kernels`` falls back to the pure-Python implementations.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("RTRLBENCH_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "rtrlbench._kernels._ckernels",
                    ["src/rtrlbench/_kernels/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
        for ext in ext_modules:
            ext.optional = True
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
