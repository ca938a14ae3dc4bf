"""Build script: compiles the allocation kernels when Cython and a C
compiler are available.  The package works without the extension (a pure
Python fallback is selected at import time), so a failed extension build
is not fatal to installation.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "aerofed._kernels._speedups",
                ["src/aerofed/_kernels/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
