"""Build script: compiles the optional fixed-point extension.

The package works without the extension (a pure-Python kernel is selected
at import time), so the build degrades gracefully when Cython or a C
compiler is unavailable. Set TENSOR_RMT_NO_EXT=1 to skip the extension
build entirely.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TENSOR_RMT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "tensor_rmt._fpcore",
                    ["src/tensor_rmt/_fpcore.pyx"],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
