from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    # optional=True: a failed compile falls back to the pure-Python kernels.
    extensions = cythonize(
        [
            Extension(
                "bellshrink._native",
                ["src/bellshrink/_native.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )
else:
    extensions = []

setup(ext_modules=extensions)
