from setuptools import setup, Extension
from Cython.Build import cythonize

ext_module = Extension(
    "phylex._kernels_c",
    ["src/phylex/_kernels_c.pyx"],
)

setup(
    ext_modules=cythonize([ext_module], language_level=3),
)
