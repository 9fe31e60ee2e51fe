"""Build script: compiles the optional Kloosterman C kernel.

The package is fully functional without the extension; arith falls back
to a vectorized numpy kernel when the import fails, so build errors here
are demoted to a warning rather than aborting the install.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/momentlab/_kloosterman.pyx"],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - environment dependent
    print(f"warning: skipping C kernel build ({exc}); numpy fallback will be used",
          file=sys.stderr)

setup(ext_modules=ext_modules)
