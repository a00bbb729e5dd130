"""Build script.  The compiled Volterra marcher is optional: if Cython or a
C compiler is missing the package installs anyway and falls back to the
pure-numpy implementation at import time."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/greenmodes/_volterra.pyx"],
        compiler_directives={"language_level": 3},
    )
    for ext in ext_modules:
        ext.extra_compile_args = ["-O3"]
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
