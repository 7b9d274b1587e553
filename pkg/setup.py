"""Build script for the optional compiled kernel backend.

The package is fully functional without the extension (the numpy reference
backend is selected at import time), so a failed compilation only emits a
warning instead of aborting the install.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"skipping compiled backend: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping compiled backend ({ext.name}): {exc}")


if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "weaklight.backends._core",
                ["src/weaklight/backends/_core.pyx"],
                # -ffp-contract=off keeps the compiled kernels bit-identical
                # to the numpy reference backend (no fused multiply-add).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
else:
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
