"""Build script: compiles the optional Cython kernel for the dual descent loop.

The package works without the extension (a numpy fallback is selected at
import time), so a missing compiler or Cython only costs speed, not
functionality.
"""

from setuptools import find_packages, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "capot.kernels._dualcore",
                ["src/capot/kernels/_dualcore.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

# Explicit layout args keep legacy setup.py code paths (old pip) working;
# modern installs read pyproject.toml.
setup(
    name="capot",
    package_dir={"": "src"},
    packages=find_packages("src"),
    ext_modules=ext_modules,
)
