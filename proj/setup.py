import glob
import os

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

ParallelCompile("ORBIZETA_NUM_BUILD_JOBS", default=0).install()

include_dirs = ["include", "vendor"]
# prefer the system Eigen when present; vendor/ carries a fallback copy
if os.path.isdir("/usr/include/eigen3"):
    include_dirs.append("/usr/include/eigen3")

ext = Pybind11Extension(
    "orbizeta._orbizeta",
    sorted(glob.glob("src/*.cpp")) + ["python/bindings.cpp"],
    include_dirs=include_dirs,
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
