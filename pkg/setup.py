"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a numpy fallback is selected at
import time), so any build failure here downgrades to a pure-Python install
instead of aborting.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "rda_bench._kernels._ckernels",
        sources=["src/rda_bench/_kernels/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": 3})
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"rda-bench: skipping compiled kernels ({exc}); pure fallback will be used")

setup(ext_modules=ext_modules)
