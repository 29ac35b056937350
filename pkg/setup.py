"""Build script: compiles the optional Cython kernel.

The package is fully functional without the extension (a pure-Python
training loop takes over), so any build failure degrades to a pure install
instead of aborting. Set DYNSCALE_PURE_PYTHON=1 to skip the compile step
entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Allow the extension build to fail and fall back to pure Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or toolchain missing
            print(f"WARNING: skipping compiled speedups ({exc}); "
                  "dynscale will use the pure-Python training loop")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: failed to build {ext.name} ({exc}); "
                  "dynscale will use the pure-Python training loop")


def extension_modules():
    if os.environ.get("DYNSCALE_PURE_PYTHON"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"WARNING: {exc}; building without compiled speedups")
        return []
    ext = Extension(
        "dynscale._speedups",
        ["src/dynscale/_speedups.pyx"],
        include_dirs=[np.get_include()],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=extension_modules(),
    cmdclass={"build_ext": optional_build_ext},
)
