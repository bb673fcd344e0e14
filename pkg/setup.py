"""Builds the optional compiled kernel extension.

The package works without it (a numpy reference backend is selected at
import time); set TREECAST_NO_EXT=1 to skip the build explicitly.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("TREECAST_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "treecast._accel",
                    ["src/treecast/_accel.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except Exception as exc:  # no Cython or no compiler: install pure python
        print(f"treecast: compiled kernels disabled ({exc})")

setup(ext_modules=ext_modules)
