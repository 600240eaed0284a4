"""Build script: compiles the optional C kernel extension.

The package is fully functional without the extension; the kernel package
falls back to its pure-Python twin at import time.  Compilation failures
therefore downgrade to a warning instead of aborting the install.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/searchtrace/_kernel/ckernel.pyx"],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - depends on toolchain
    warnings.warn(f"C kernel extension skipped: {exc}")

setup(ext_modules=ext_modules)
