"""Build script: optionally compiles the simulator event core as a C extension.

The same source file (src/nimbus/simkernel/_engine.py) serves both as the
pure-Python fallback and as the input to Cython.  When a compiler or Cython
is unavailable the install silently degrades to the interpreted engine;
`nimbus.simkernel.backend` picks whichever is importable at runtime.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("NIMBUS_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/nimbus/simkernel/_engine.py"],
            compiler_directives={"language_level": "3"},
            quiet=True,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
