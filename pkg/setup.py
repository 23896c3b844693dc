import os

import numpy
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("RYDGATE_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rydgate._kernel",
                sources=["src/rydgate/_kernel.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
