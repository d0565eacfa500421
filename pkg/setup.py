"""Build the optional compiled cycle kernel; the package works without it."""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SUPCORE_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("supcore._cycles_ext", ["src/supcore/_cycles_ext.pyx"],
                       include_dirs=[numpy.get_include()])],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
