"""The numba chunk kernels and the per-step numpy path consume identical
substreams, so they must produce the same chains."""

import numpy as np
import pytest

import mtmlab.samplers.chain as chain_mod
from mtmlab import oracle as orc
from mtmlab.model import RwProposal, WeightSpec, standard_gaussian
from mtmlab.samplers import IDEAL, LAZY_MTM, MH, MTM, KernelSpec, run_chain

pytest.importorskip("numba")


def spec_of(kind, d=3, sigma=0.8, theta=0.5, n=4):
    return KernelSpec(
        kind=kind,
        target=standard_gaussian(d),
        proposal=RwProposal(sigma=sigma, d=d),
        weight=WeightSpec(theta),
        n_tries=n,
    )


@pytest.mark.parametrize("kind", [MH, IDEAL, MTM, LAZY_MTM])
@pytest.mark.parametrize("theta", [0.0, 0.5, 1.0])
def test_backends_agree(kind, theta):
    spec = spec_of(kind, theta=theta)
    x0 = np.array([0.3, -0.7, 1.1])
    a = run_chain(spec, x0, steps=400, seed=42, backend="numba")
    b = run_chain(spec, x0, steps=400, seed=42, backend="numpy")
    np.testing.assert_allclose(a.states, b.states, atol=1e-9)
    np.testing.assert_array_equal(a.accepted, b.accepted)
    np.testing.assert_array_equal(a.selected, b.selected)
    np.testing.assert_array_equal(a.lazy_holds, b.lazy_holds)
    finite = np.isfinite(b.log_accepts)
    np.testing.assert_allclose(a.log_accepts[finite], b.log_accepts[finite], atol=1e-10)


def test_chunk_boundaries_do_not_matter(monkeypatch):
    spec = spec_of(MTM, d=2, n=3)
    x0 = np.zeros(2)
    want = run_chain(spec, x0, steps=230, burnin=37, seed=7, backend="numpy")
    monkeypatch.setattr(chain_mod, "_CHUNK_BUDGET", 600)  # forces many tiny chunks
    got = run_chain(spec, x0, steps=230, burnin=37, seed=7, backend="numba")
    np.testing.assert_allclose(got.states, want.states, atol=1e-9)
    np.testing.assert_array_equal(got.accepted, want.accepted)
    assert got.total_accepts == want.total_accepts


def test_conductance_backends_agree(rng):
    for _ in range(3):
        m = 13  # above the vectorized-numpy cutoff, exercises the Gray walk
        pi = rng.dirichlet(np.ones(m))
        q = np.vstack([rng.dirichlet(np.ones(m)) for _ in range(m)])
        w = np.exp(rng.uniform(-1, 1, size=(m, m)))
        spec = orc.FiniteChainSpec(pi=pi, q=q, w=w, n=1)
        P = orc.build_mh(spec)
        a = orc.conductance(P, pi, backend="numba")
        b = orc.conductance(P, pi, backend="numpy")
        assert a == pytest.approx(b, rel=1e-12)


def test_env_flag_selects_numpy_backend(tmp_path):
    import os
    import subprocess
    import sys

    code = (
        "import mtmlab, numpy as np\n"
        "from mtmlab.backend import default_backend\n"
        "assert default_backend() == 'numpy', default_backend()\n"
        "assert 'numba' not in __import__('sys').modules\n"
        "from mtmlab.model import RwProposal, WeightSpec, standard_gaussian\n"
        "from mtmlab.samplers import KernelSpec, run_chain, MTM\n"
        "spec = KernelSpec(kind=MTM, target=standard_gaussian(2),\n"
        "                  proposal=RwProposal(sigma=1.0, d=2),\n"
        "                  weight=WeightSpec(0.5), n_tries=3)\n"
        "tr = run_chain(spec, np.zeros(2), steps=50, seed=1)\n"
        "assert tr.backend == 'numpy'\n"
        "print('ok')\n"
    )
    env = dict(os.environ, MTMLAB_BACKEND="numpy")
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "ok"
