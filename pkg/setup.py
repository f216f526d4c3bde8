import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "haulpath._kernels._fastpath",
        ["src/haulpath/_kernels/_fastpath.pyx"],
        include_dirs=[numpy.get_include()],
        language="c++",
        # -ffp-contract=off: the pure-Python fallback must produce
        # bit-identical results, so no FMA contraction in the kernels.
        extra_compile_args=["-O3", "-ffp-contract=off", "-std=c++17"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
