"""Build script: compiles the optional C phase-space kernels.

The package is pure Python plus one optional Cython extension holding the
hot loops (upwind advection, shared-matrix tridiagonal solves, collision
fluxes).  If the extension cannot be built (no compiler, no Cython, or
VPFPLAB_NO_EXT=1), installation proceeds and the package falls back to the
NumPy kernels at import time.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


def _extensions():
    if os.environ.get("VPFPLAB_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"vpfplab: skipping C kernels ({exc})", file=sys.stderr)
        return []
    ext = Extension(
        "vpfplab.kernels._impl_c",
        ["src/vpfplab/kernels/_impl_c.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


class optional_build_ext(build_ext):
    """Never fail the install over the extension; the fallback is complete."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"vpfplab: C kernels not built ({exc}); "
                  "NumPy fallback will be used", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"vpfplab: failed to build {ext.name} ({exc}); "
                  "NumPy fallback will be used", file=sys.stderr)


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
