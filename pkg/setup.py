"""Build script: compiles the Cython kernels when a toolchain is available.

The package is fully functional without the extension (a NumPy fallback is
selected at import), so a missing compiler or Cython only costs speed.
Force a pure build with GASKETSLICE_PURE=1.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("GASKETSLICE_PURE"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "gasketslice._kernels._fast",
                    sources=["src/gasketslice/_kernels/_fast.pyx"],
                    language="c++",
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
