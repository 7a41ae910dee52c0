from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [Extension("radnav._kernels", ["src/radnav/_kernels.pyx"])],
        language_level="3",
    ),
)
