"""Build the optional Cython kernels.

Developers: ``python3 setup.py build_ext --inplace`` rebuilds them in place.
If compilation fails the package still installs and falls back to the
numpy/scipy kernels.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "chartkit._ckernels",
        ["src/chartkit/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-fopenmp"],
        extra_link_args=["-fopenmp"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
