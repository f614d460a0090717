"""Build script for the compiled splat kernel.

The extension is optional: if it fails to build (e.g. no C compiler), the
package still installs and falls back to the pure-NumPy kernel at import.
"""

import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "bokehbench._splat",
        sources=["src/bokehbench/_splat.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
