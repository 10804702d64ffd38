"""Build script: compiles the optional Cython term-kernel extension.

The package works without the extension (a pure-Python twin is selected at
import time), so a missing Cython or C compiler only costs speed.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/niprover/_kernels/_term_ops_cy.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
