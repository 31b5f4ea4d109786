"""Build script: compiles the subsequence-kernel hot loop as a C extension.

The extension is optional.  If Cython (or a C compiler) is unavailable, or
SEQTUNE_SKIP_EXT is set, the package installs without it and falls back to
the pure numpy implementation at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("SEQTUNE_SKIP_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "seqtune._sskfast",
                    ["src/seqtune/_sskfast.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
