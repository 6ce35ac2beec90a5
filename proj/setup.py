"""CMake-driven build of the `cotwd._cotwd` extension module."""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        import pybind11

        configure = [
            "cmake",
            "-S", str(source_dir),
            "-B", str(build_dir),
            "-DCOTWD_BUILD_PYTHON=ON",
            "-DCOTWD_BUILD_TESTS=OFF",
            "-DCMAKE_BUILD_TYPE=Release",
            f"-DPython_EXECUTABLE={sys.executable}",
            f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
        ]
        if shutil.which("ninja"):
            configure += ["-G", "Ninja"]
        subprocess.run(configure, check=True)
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_cotwd", "--parallel"],
            check=True,
        )

        built = sorted(build_dir.glob("_cotwd.*.so")) or sorted(build_dir.glob("_cotwd.so"))
        if not built:
            raise RuntimeError("CMake did not produce the _cotwd module")
        destination = Path(self.get_ext_fullpath(ext.name))
        destination.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[-1], destination)


setup(
    ext_modules=[CMakeExtension("cotwd._cotwd")],
    cmdclass={"build_ext": CMakeBuild},
)
