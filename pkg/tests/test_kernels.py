import numpy as np
import pytest

from projlab import kernels
from projlab.kernels import _pykernels
from projlab.linalg_core import as_generator

BACKENDS = kernels.available_backends()
needs_ext = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def _cells(n, rng):
    e = np.sort(rng.random(n + 1))
    return np.ascontiguousarray(e[:-1]), np.ascontiguousarray(e[1:])


def test_backend_is_selected():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.BACKEND in BACKENDS


def test_cell_log_kernel_diagonal_is_cell_self_energy():
    lo = np.array([0.1, 0.4])
    hi = np.array([0.3, 0.5])
    K = _pykernels.cell_log_kernel(lo, hi)
    np.testing.assert_allclose(np.diag(K), np.log(hi - lo) - 1.5, rtol=1e-14)


def test_cell_log_kernel_matches_quadrature_for_separated_cells():
    # average of log|x - y| over two cells by a fine midpoint rule
    lo, hi = np.array([0.1, 0.6]), np.array([0.2, 0.65])
    K = _pykernels.cell_log_kernel(lo, hi)
    m = 2000
    x = lo[0] + (np.arange(m) + 0.5) / m * (hi[0] - lo[0])
    y = lo[1] + (np.arange(m) + 0.5) / m * (hi[1] - lo[1])
    ref = np.mean(np.log(np.abs(x[:, None] - y[None, :])))
    assert K[0, 1] == pytest.approx(ref, abs=1e-7)
    assert K[0, 1] == pytest.approx(K[1, 0], abs=1e-15)


def test_cell_log_energy_equals_quadratic_form():
    rng = as_generator(1)
    lo, hi = _cells(300, rng)
    w = rng.random(300)
    K = _pykernels.cell_log_kernel(lo, hi)
    assert _pykernels.cell_log_energy(lo, hi, w) == pytest.approx(w @ K @ w, rel=1e-12)


def test_offdiag_log_energy_small_case():
    x = np.array([0.25, 0.75])
    w = np.array([0.5, 0.5])
    assert _pykernels.offdiag_log_energy(x, w) == pytest.approx(2 * 0.25 * np.log(0.5), rel=1e-14)


@needs_ext
@pytest.mark.parametrize("n", [5, 257, 900])
def test_parity_cell_kernels(n):
    c, p = BACKENDS["cython"], BACKENDS["python"]
    rng = as_generator(n)
    lo, hi = _cells(n, rng)
    w = rng.random(n)
    np.testing.assert_allclose(c.cell_log_kernel(lo, hi), p.cell_log_kernel(lo, hi), rtol=1e-10, atol=1e-10)
    assert c.cell_log_energy(lo, hi, w) == pytest.approx(p.cell_log_energy(lo, hi, w), rel=1e-10)
    x = np.ascontiguousarray(np.sort(rng.random(n)))
    assert c.offdiag_log_energy(x, w) == pytest.approx(p.offdiag_log_energy(x, w), rel=1e-12)


@needs_ext
def test_parity_metropolis_chain_is_identical():
    c, p = BACKENDS["cython"], BACKENDS["python"]
    rng = as_generator(7)
    k, n_sweeps = 6, 40
    normals = rng.standard_normal((n_sweeps, k))
    uniforms = rng.random((n_sweeps, k))
    field = np.ascontiguousarray(np.linspace(0.0, 3.0, 513))
    x0 = np.sort(rng.random(k))
    xc, xp = x0.copy(), x0.copy()
    tc, ac = c.metropolis_sweeps(xc, 1.0, 2.0, field, 0.1, normals, uniforms)
    tp, ap = p.metropolis_sweeps(xp, 1.0, 2.0, field, 0.1, normals, uniforms)
    assert ac == ap
    np.testing.assert_allclose(tc, tp, rtol=0, atol=1e-13)
    np.testing.assert_allclose(xc, xp, rtol=0, atol=1e-13)


def test_metropolis_stays_inside_unit_interval():
    rng = as_generator(3)
    normals = rng.standard_normal((200, 4)) * 5
    uniforms = rng.random((200, 4))
    x = np.array([0.1, 0.3, 0.6, 0.9])
    traj, _ = kernels.metropolis_sweeps(x, 0.0, 0.0, np.zeros(65), 0.3, normals, uniforms)
    assert np.all((traj > 0) & (traj < 1))


def test_pure_python_fallback_is_selectable():
    import os
    import subprocess
    import sys
    env = dict(os.environ, PROJLAB_PURE_PYTHON="1")
    code = ("from projlab import kernels; from projlab.entropy_functionals import chi_proj_pair; "
            "from projlab.two_projection_model import free_pair_state; "
            "print(kernels.BACKEND, abs(chi_proj_pair(free_pair_state(0.5, 0.5, 400)).chi) < 1e-3)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "True"]


def test_benchmark_script_runs(capsys):
    import runpy
    from pathlib import Path
    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    mod = runpy.run_path(str(path))
    assert mod["main"](["--repeat", "1"]) == 0
    assert "metropolis_sweeps" in capsys.readouterr().out
