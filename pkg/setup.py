"""Build script: compiles the optional fast-kernel extension.

The package works without the extension (a pure-Python kernel backend is
selected at import time), so any compiler failure downgrades to a plain
pure-Python install instead of aborting.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "maccal._kernels",
        ["src/maccal/_kernels.pyx"],
        # -ffp-contract=off keeps results bit-identical to the pure-Python
        # backend (no FMA fusion); -ffast-math must never be added here.
        extra_compile_args=["-O3", "-march=native", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


class optional_build_ext(build_ext):
    """Degrade to a pure-Python install when the extension cannot build."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, bad flags, ...
            print(f"WARNING: fast-kernel extension not built ({exc}); "
                  "falling back to the pure-Python backend", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception:
            # retry without -march=native before giving up
            ext.extra_compile_args = ["-O3", "-ffp-contract=off"]
            super().build_extension(ext)


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
