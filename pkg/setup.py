import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext = Extension(
    "crystalgym._ckernels",
    ["src/crystalgym/_ckernels.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    optional=True,  # pure-python fallback in crystalgym.kernels takes over
)

setup(ext_modules=cythonize([ext]) if cythonize else [])
