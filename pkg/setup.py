"""Builds the optional compiled closure kernel; the package works without it."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("ODDFORM_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension(
                "oddform.subgroup_engine._closure",
                ["src/oddform/subgroup_engine/_closure.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-fopenmp"],
                extra_link_args=["-fopenmp"],
            )],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
