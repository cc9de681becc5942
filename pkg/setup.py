from setuptools import setup, Extension

# The compiled kernel is optional: the package falls back to the pure-Python
# implementation in entrodyn._pure when the extension is unavailable.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("entrodyn._kernels", ["src/entrodyn/_kernels.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
