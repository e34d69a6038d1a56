"""Build the optional Cython kernels.

The package works without them: ``mrcov._backend`` falls back to the
NumPy/SciPy implementations when the extension is missing.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MRCOV_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:  # build without the compiled core
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "mrcov._kernels",
                    ["src/mrcov/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
