import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from klrloc import linalg
from klrloc.linalg import DEFAULT_LARGE_PRIME, make_field, rref_modp_numpy

P = DEFAULT_LARGE_PRIME


@st.composite
def matrices(draw):
    r = draw(st.integers(1, 9))
    c = draw(st.integers(1, 9))
    rank = draw(st.integers(0, min(r, c)))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    A = rng.integers(0, P, size=(r, rank)) @ rng.integers(0, P, size=(rank, c)) % P if rank else np.zeros((r, c), dtype=np.int64)
    return np.ascontiguousarray(A.astype(np.int64))


@pytest.mark.skipif(linalg._ck is None, reason="compiled kernel not built")
@settings(max_examples=60, deadline=None)
@given(matrices())
def test_kernels_agree(A):
    B = A.copy()
    pa = rref_modp_numpy(A, P)
    pb = list(linalg._ck.rref_modp(B, P))
    assert pa == pb
    assert np.array_equal(A, B)


@settings(max_examples=40, deadline=None)
@given(matrices())
def test_rank_against_sympy(A):
    from sympy import GF
    from sympy.polys.matrices import DomainMatrix

    Fp = make_field(f"F_{P}")
    dm = DomainMatrix([[GF(P)(int(x)) for x in row] for row in A.tolist()], A.shape, GF(P))
    assert Fp.rank(A.copy()) == dm.rank()


def test_pure_python_switch():
    env = dict(os.environ, KLRLOC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from klrloc import linalg; print(linalg.KERNEL)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_pure_python_computation():
    env = dict(os.environ, KLRLOC_PURE_PYTHON="1")
    code = ("from klrloc.cartan import build_cartan; from klrloc.linalg import make_field;"
            "from klrloc.klr import make_L; print(make_L(build_cartan('A2'), make_field('F_16777213'), 1, 3).dim)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "6"
