"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension: the kernel layer
falls back to a pure-numpy implementation at import time. Compilation
failures therefore downgrade to a warning instead of aborting the install.
"""
import warnings

from setuptools import setup

try:
    from Cython.Build import cythonize
    import numpy

    extensions = cythonize(
        ["src/estimand_lab/_kernels/_core.pyx"],
        language_level=3,
    )
    for ext in extensions:
        ext.include_dirs.append(numpy.get_include())
except Exception as exc:  # pragma: no cover - build environment dependent
    warnings.warn(f"building without compiled kernels: {exc}")
    extensions = []

setup(ext_modules=extensions)
