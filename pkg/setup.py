"""Build script: the Cython kernel is optional, the numpy fallback always ships."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("FORBIDTRANS_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("forbidtrans._kernels._bath",
                       ["src/forbidtrans/_kernels/_bath.pyx"],
                       include_dirs=[np.get_include()],
                       extra_compile_args=["-O3"])],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
