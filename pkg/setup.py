"""Optional compiled kernel; the package falls back to numpy when it is absent."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("KLRLOC_NO_EXT"):
    try:
        import numpy  # noqa: F401
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/klrloc/_kernel.pyx"],
            compiler_directives={"language_level": "3"},
            quiet=True,
        )
    except Exception:  # pragma: no cover - build without Cython
        ext_modules = []

setup(ext_modules=ext_modules)
