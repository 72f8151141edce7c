from Cython.Build import cythonize
from setuptools import Extension, setup

ext_module = Extension(
    "ciasr._kernels",
    ["src/ciasr/_kernels.pyx"],
    extra_compile_args=["-O3"],
)

setup(ext_modules=cythonize([ext_module], language_level=3))
