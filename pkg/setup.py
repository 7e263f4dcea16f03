"""Build shim: compiles the optional fast kernel when Cython is available.

The package is fully functional without the extension; ``cliquerace._kernel``
falls back to the pure-Python implementation at import time.
"""

import os

from setuptools import setup

PYX = os.path.join("src", "cliquerace", "_fastcore.pyx")

ext_modules = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "cliquerace._fastcore",
                    sources=[PYX],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
