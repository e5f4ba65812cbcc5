from setuptools import setup, Extension
from Cython.Build import cythonize
import numpy as np

# fp-contract off: the compiled lane must stay bit-identical to the pure
# Python lane, so the compiler may not fuse a*x + b*y into an fma
ext_module = Extension(
    "ulamadd._kernels",
    ["src/ulamadd/_kernels.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-ffp-contract=off"],
)

setup(ext_modules=cythonize(ext_module, language_level=3))
