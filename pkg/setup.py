import os

from setuptools import setup

ext_modules = []
if not os.environ.get("FASTPAM_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "fastpam._ckernels",
                    sources=["src/fastpam/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no -ffast-math: both backends must round identically
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
