import os

from setuptools import Extension, setup

# The compiled scoring kernel is optional: if Cython (or a C compiler) is
# missing, the package falls back to the pure-Python kernel at import time.
# Set ODQA_PURE=1 to skip the extension build entirely.
ext_modules = []
if os.environ.get("ODQA_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("odqa._scoring_cy", ["src/odqa/_scoring_cy.pyx"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
