import os

import numpy as np
from setuptools import Extension, setup

# Building without Cython (or with ENTROPLIN_NO_EXT=1) leaves only the
# pure-Python kernels; the package selects them at import time.
ext_modules = []
if os.getenv("ENTROPLIN_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "entroplin._ckernels",
                    ["src/entroplin/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
