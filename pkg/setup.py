"""Build script for the compiled trajectory kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs without it and falls back to the pure-Python path loop
(see blochfb.backend).  IEEE semantics are pinned with -ffp-contract=off
and no fast-math so that compiled and pure trajectories agree bitwise.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "blochfb._pathloop_c",
                ["src/blochfb/_pathloop_c.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
