import os

from setuptools import setup

ext_modules = []
if os.environ.get("CYLINDER_LAB_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            "src/cylinder_lab/_levelcore.pyx",
            language_level=3,
        )
    except ImportError:
        # Pure-python fallback kernel is used when the extension is absent.
        ext_modules = []

setup(ext_modules=ext_modules)
