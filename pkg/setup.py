import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "busyhour._kernels._native",
        ["src/busyhour/_kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    # The compiled kernels are an optional fast path; the package falls back
    # to the NumPy implementations in busyhour._kernels.pyref when the
    # extension is unavailable.
    ext_modules=cythonize(extensions, compiler_directives={"language_level": 3})
    if cythonize is not None
    else [],
)
