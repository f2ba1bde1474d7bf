import os
import subprocess
import sys

import pytest

from fuzzyrank._accel import HAVE_NUMBA

PROBE = "from fuzzyrank._accel import backend_name; from fuzzyrank.tagger import kernels; " \
        "print(backend_name(), kernels.forward is kernels.forward_np)"


def _probe(flag):
    env = dict(os.environ)
    env.pop("FUZZYRANK_NO_NUMBA", None)
    if flag is not None:
        env["FUZZYRANK_NO_NUMBA"] = flag
    return subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True).stdout.split()


def test_flag_forces_numpy():
    assert _probe("1") == ["numpy", "True"]


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_numba_is_default():
    assert _probe(None) == ["numba", "False"]
    assert _probe("0") == ["numba", "False"]
