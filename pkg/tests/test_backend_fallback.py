import os
import subprocess
import sys

from fifarank import kernels


def test_pure_python_selected_when_forced():
    env = dict(os.environ, FIFARANK_PURE_PYTHON="1")
    code = "import fifarank.kernels as k; print(k.BACKEND, k.available_backends())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split()[0] == "python"


def test_default_backend_is_listed():
    assert kernels.BACKEND in kernels.available_backends()
