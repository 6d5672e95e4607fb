"""Build script.

The solver kernels ship in two forms: a Cython extension
(proxymig.kernels._compiled) and a numpy reference implementation.  The
extension is optional; when Cython or a C compiler is unavailable the
package installs without it and the reference backend is used at import
time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/proxymig/kernels/_compiled.pyx",
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
