"""Build script: compiles the optional accelerated stepper.

The package works without the extension (a pure-numpy stepper is selected
at import time), so a failed compile only costs speed.  Set EVANSKIT_NO_EXT=1
to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Treat extension build failures as non-fatal."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"skipping compiled stepper: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping {ext.name}: {exc}")


ext_modules = []
if not os.environ.get("EVANSKIT_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "evanskit._stepper_c",
                    ["src/evanskit/_stepper_c.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        print("Cython not available; building without the compiled stepper")

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
