"""Build script for the optional compiled LSTM kernels.

The package is pure Python plus one Cython extension holding the recurrent
hot loops. If Cython or a C compiler is unavailable the build falls back to
a pure-Python wheel; warnsift.nn.kernels then selects the numpy backend at
import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "warnsift.nn._core",
                ["src/warnsift/nn/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
