"""Build script for the optional compiled Jacobi kernel.

The extension is marked optional: if the compiler or Cython is missing,
installation proceeds and the package falls back to the pure-Python kernel.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "bipartite._jacobi_ext",
                ["src/bipartite/_jacobi_ext.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
