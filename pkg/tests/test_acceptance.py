"""Acceptance gate: one group of tests per criterion.

Each test carries ``@pytest.mark.criterion(k)``; conftest prints one
PASS/FAIL line per criterion at the end of the run. Tolerances here are the
contract and must not be loosened.
"""
import io
import os
import time
import warnings

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from _instances import (
    random_diag_dominant,
    random_nonsymmetric,
    random_sparse_csr,
    random_spd,
)
from grcsolve import (
    CSRMatrix,
    GridSpec,
    SolverConfig,
    Status,
    cr_solve,
    gen_convection_diffusion,
    gmres_solve,
    grc_solve,
    mm_read,
    mm_write,
    rc_solve,
    symmetrize,
    triangular_split,
)
from grcsolve.counters import active_counters
from grcsolve.generators import conv_diff_nnz, convection_diffusion_header
from grcsolve.oracle import distance_to_span, full_minres_oracle, krylov_basis
from grcsolve.solvers import SymmetryWarning, bicgstab_solve, sor_sweeps

REFERENCE_SIZES = {
    100: (1_000_000, 6_940_000),
    170: (4_913_000, 34_217_600),
    215: (9_938_375, 69_291_275),
    270: (19_683_000, 137_343_600),
}

PROPERTY = settings(max_examples=50, deadline=None, derandomize=True, database=None)
SEEDS = st.integers(min_value=0, max_value=2**31 - 1)


# --- criterion 1 ----------------------------------------------------------


@pytest.mark.criterion(1)
@pytest.mark.parametrize("n", sorted(REFERENCE_SIZES))
def test_c1_closed_form_nnz_matches_table(n):
    size, nnz = REFERENCE_SIZES[n]
    assert n ** 3 == size
    assert conv_diff_nnz(n) == nnz


@pytest.mark.criterion(1)
def test_c1_full_build_n100():
    t0 = time.perf_counter()
    A, b = gen_convection_diffusion(GridSpec(n=100))
    elapsed = time.perf_counter() - t0
    assert (A.n, A.nnz) == REFERENCE_SIZES[100]
    assert b.shape == (A.n,)
    assert elapsed < 30.0, f"n=100 build took {elapsed:.1f}s"


@pytest.mark.criterion(1)
def test_c1_header_only_n170():
    rows, cols, nnz = convection_diffusion_header(GridSpec(n=170))
    assert (rows, nnz) == REFERENCE_SIZES[170]
    assert cols == rows


# --- criterion 2 ----------------------------------------------------------

C2_SEEDS = range(10)
C2_STEPS = 15


def _residual_history(solver, A, b, cfg):
    res = solver(A, b, cfg.with_(max_iter=C2_STEPS, tol=1e-300))
    return np.asarray(res.trace.residual_norm[: C2_STEPS + 1])


def _assert_matches_cr(A, b, L):
    ref = _residual_history(cr_solve, A, b, SolverConfig(method="cr"))
    got = _residual_history(grc_solve, A, b, SolverConfig(L=L, psi_mode="damped"))
    assert len(ref) == len(got) == C2_STEPS + 1
    rel = np.abs(got - ref) / ref
    assert rel.max() <= 1e-6, f"L={L}: max relative gap {rel.max():.3e}"


@pytest.mark.criterion(2)
def test_c2_grc_matches_cr_on_random_spd():
    t0 = time.perf_counter()
    for seed in C2_SEEDS:
        A = random_spd(100, seed)
        b = np.random.default_rng(1000 + seed).standard_normal(100)
        for L in (3, 5, 10):
            _assert_matches_cr(A, b, L)
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"criterion 2 instances took {elapsed:.1f}s"


@pytest.mark.criterion(2)
def test_c2_grc_matches_cr_on_symmetrized_olm100():
    path = os.environ.get("GRC_OLM100")
    if not path or not os.path.exists(path):
        pytest.skip("olm100 not available locally (set GRC_OLM100 to its .mtx path)")
    A = symmetrize(mm_read(path))
    b = A @ np.ones(A.n)
    for L in (3, 5, 10):
        _assert_matches_cr(A, b, L)


# --- criterion 3 ----------------------------------------------------------


def _iterates(solver, A, b, cfg, steps):
    xs = []
    solver(A, b, cfg.with_(max_iter=steps, tol=1e-300), callback=lambda s: xs.append(s.x.copy()))
    return xs


@pytest.mark.criterion(3)
def test_c3_residual_mode_l2_reproduces_cr_iterates():
    for seed in C2_SEEDS:
        A = random_spd(100, seed)
        b = np.random.default_rng(1000 + seed).standard_normal(100)
        ref = _iterates(cr_solve, A, b, SolverConfig(method="cr"), C2_STEPS)
        got = _iterates(grc_solve, A, b, SolverConfig(L=2, psi_mode="residual"), C2_STEPS)
        assert len(ref) == len(got) == C2_STEPS
        for m, (xr, xg) in enumerate(zip(ref, got)):
            gap = np.linalg.norm(xg - xr) / np.linalg.norm(xr)
            assert gap <= 1e-10, f"seed {seed}, iterate {m + 1}: relative gap {gap:.3e}"


# --- criterion 4 ----------------------------------------------------------


def _per_step_matvecs(res):
    return set(res.trace.matvecs_per_iteration().tolist())


@pytest.mark.criterion(4)
@pytest.mark.parametrize("L", [2, 5, 10])
def test_c4_grc_counter_contract(conv_diff_20, L):
    A, b = conv_diff_20
    dots = []
    res = grc_solve(A, b, SolverConfig(L=L, max_iter=300),
                    callback=lambda s: dots.append(active_counters().dot_count))
    assert res.iterations == 300 or res.converged
    assert _per_step_matvecs(res) == {1}
    assert res.counters.matvec_count == res.iterations
    per_step = np.diff([1] + dots)  # one norm before the first step
    assert per_step.max() <= 2 * L + 2, f"dots per iteration peaked at {per_step.max()}"
    assert res.counters.peak_vectors <= 2 * L


@pytest.mark.criterion(4)
def test_c4_baseline_matvec_counts(conv_diff_20):
    A, b = conv_diff_20
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SymmetryWarning)
        cr = cr_solve(A, b, SolverConfig(method="cr", max_iter=200))
    gm = gmres_solve(A, b, SolverConfig(method="gmres", max_iter=200))
    bi = bicgstab_solve(A, b, SolverConfig(method="bicgstab", max_iter=100))
    assert _per_step_matvecs(cr) == {1}
    assert _per_step_matvecs(gm) == {1}
    assert _per_step_matvecs(bi) == {2}
    assert bi.iterations >= 1


# --- criterion 5 ----------------------------------------------------------


@pytest.mark.criterion(5)
@pytest.mark.parametrize("L", [8, 12])
@pytest.mark.parametrize("psi_mode", ["damped", "residual"])
def test_c5_untruncated_grc_matches_oracle(L, psi_mode):
    steps = 6
    for seed in range(10):
        A = random_nonsymmetric(12, seed)
        b = np.random.default_rng(500 + seed).standard_normal(12)
        oracle = full_minres_oracle(A, b, steps)
        res = grc_solve(A, b, SolverConfig(L=L, psi_mode=psi_mode, max_iter=steps, tol=1e-300))
        got = np.asarray(res.trace.residual_norm[: steps + 1])
        rel = np.abs(got - oracle) / oracle
        assert rel.max() <= 1e-8, f"seed {seed}: max relative gap {rel.max():.3e}"


# --- criterion 6 ----------------------------------------------------------


@pytest.mark.criterion(6)
def test_c6_small_grid_convection_diffusion():
    t0 = time.perf_counter()
    A, b = gen_convection_diffusion(GridSpec(n=20, convection=1000.0))

    rc = rc_solve(A, b, SolverConfig(method="rc", omega=1.9, inner_iters=50))
    assert rc.status is Status.STAGNATED, (rc.status, rc.message)
    rel = np.asarray(rc.trace.relative_residual)
    assert rel.min() >= 0.99, f"RC residual moved to {rel.min():.3e}"

    grc = grc_solve(A, b, SolverConfig(L=5))
    gm = gmres_solve(A, b, SolverConfig(method="gmres", restart_K=40))
    for res in (grc, gm):
        assert res.status is Status.CONVERGED, (res.status, res.message)
        assert min(res.trace.relative_residual) <= 1e-10
        assert res.true_relative_residual <= 1e-10

    bi = bicgstab_solve(A, b, SolverConfig(method="bicgstab"))
    peak = max(bi.trace.relative_residual)
    print(f"BiCGSTAB (observed only): status={bi.status.value}, peak relative residual {peak:.3e}")

    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"criterion 6 took {elapsed:.1f}s"


# --- criterion 7 ----------------------------------------------------------

_c7_elapsed = {}


def _timed(name):
    def wrap(fn):
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                return fn(*args, **kwargs)
            finally:
                _c7_elapsed[name] = _c7_elapsed.get(name, 0.0) + time.perf_counter() - t0
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


def _non_increasing(values, slack=1e-12):
    v = np.asarray(values)
    return np.all(v[1:] <= v[:-1] * (1.0 + slack))


@pytest.mark.criterion(7)
@PROPERTY
@given(seed=SEEDS, n=st.integers(5, 40), L=st.integers(2, 8),
       psi=st.sampled_from(["damped", "residual"]), K=st.integers(2, 12))
@_timed("monotonicity")
def test_c7_monotonicity(seed, n, L, psi, K):
    A = random_nonsymmetric(n, seed)
    b = np.random.default_rng(seed + 1).standard_normal(n)
    grc = grc_solve(A, b, SolverConfig(L=L, psi_mode=psi, max_iter=60))
    assert _non_increasing(grc.trace.residual_norm)

    D = random_diag_dominant(n, seed)
    rc = rc_solve(D, b, SolverConfig(method="rc", L=L, omega=1.0, inner_iters=3, max_iter=60))
    assert _non_increasing(rc.trace.residual_norm)

    gm = gmres_solve(A, b, SolverConfig(method="gmres", restart_K=K, max_iter=60))
    r = np.asarray(gm.trace.residual_norm)
    for start in range(0, len(r), K):
        assert _non_increasing(r[start:start + K + 1])


@pytest.mark.criterion(7)
@PROPERTY
@given(seed=SEEDS, n=st.integers(12, 30), L=st.integers(2, 8),
       psi=st.sampled_from(["damped", "residual"]))
@_timed("least squares optimality")
def test_c7_least_squares_optimality(seed, n, L, psi):
    # n > L and dense RC matrices: no step may land on an exact solve, where
    # the residual is pure rounding and the ratio below measures nothing
    b = np.random.default_rng(seed + 7).standard_normal(n)
    checked = []

    def check(step):
        rn = np.linalg.norm(step.r)
        for img in step.images:
            assert abs(step.r @ img) <= 1e-10 * rn * np.linalg.norm(img), f"step {step.m}"
        checked.append(step.m)

    grc_solve(random_nonsymmetric(n, seed), b,
              SolverConfig(L=L, psi_mode=psi, max_iter=25), callback=check)
    rc_solve(random_diag_dominant(n, seed, density=0.8), b,
             SolverConfig(method="rc", L=L, omega=1.2, inner_iters=2, max_iter=25), callback=check)
    assert checked


@pytest.mark.criterion(7)
@PROPERTY
@given(seed=SEEDS, n=st.integers(8, 30), L=st.integers(3, 8),
       psi=st.sampled_from(["damped", "residual"]))
@_timed("window orthogonality")
def test_c7_window_orthogonality(seed, n, L, psi):
    A = random_nonsymmetric(n, seed)
    b = np.random.default_rng(seed + 3).standard_normal(n)
    pairs = []

    def check(step):
        hn = np.linalg.norm(step.hphi)
        for hw in step.window_images[1:]:
            assert abs(step.hphi @ hw) <= 1e-8 * hn * np.linalg.norm(hw), f"step {step.m}"
            pairs.append(step.m)

    grc_solve(A, b, SolverConfig(L=L, psi_mode=psi, max_iter=25), callback=check)
    assert pairs


@pytest.mark.criterion(7)
@PROPERTY
@given(seed=SEEDS, L=st.integers(3, 10), psi=st.sampled_from(["damped", "residual"]))
@_timed("krylov membership")
def test_c7_krylov_membership(seed, L, psi):
    A = random_nonsymmetric(12, seed)
    b = np.random.default_rng(seed + 11).standard_normal(12)
    seen = []

    def check(step):
        m = step.m + 1  # the step produced r^m and phi^{m-1}
        if m > 8:
            return
        Q = krylov_basis(A, b, m + 1)
        rn = np.linalg.norm(step.r)
        assert distance_to_span(Q, step.r) <= 1e-9 * rn, f"r^{m}"
        assert distance_to_span(Q, step.phi) <= 1e-9 * np.linalg.norm(step.phi), f"phi^{m - 1}"
        seen.append(m)

    grc_solve(A, b, SolverConfig(L=L, psi_mode=psi, max_iter=8, tol=1e-300), callback=check)
    assert seen == list(range(1, 9))


def _dense_gauss_seidel(A, rhs, x, sweeps):
    low = np.tril(A)
    up = np.triu(A, 1)
    for _ in range(sweeps):
        x = sla.solve_triangular(low, rhs - up @ x, lower=True)
    return x


@pytest.mark.criterion(7)
@PROPERTY
@given(seed=SEEDS, sweeps=st.integers(1, 6), zero_start=st.booleans())
@_timed("sor equals gauss-seidel")
def test_c7_sor_unit_omega_is_gauss_seidel(seed, sweeps, zero_start):
    A = random_diag_dominant(20, seed)
    rng = np.random.default_rng(seed + 5)
    rhs = rng.standard_normal(20)
    x0 = np.zeros(20) if zero_start else rng.standard_normal(20)
    got = sor_sweeps(triangular_split(CSRMatrix.from_dense(A)), rhs, 1.0, sweeps, x0=x0.copy())
    ref = _dense_gauss_seidel(A, rhs, x0, sweeps)
    scale = max(1.0, np.abs(ref).max())
    assert np.abs(got - ref).max() <= 1e-13 * scale


@pytest.mark.criterion(7)
@PROPERTY
@given(seed=SEEDS, n=st.integers(1, 60), density=st.floats(0.01, 0.6),
       symmetric=st.booleans())
@_timed("matrix market round trip")
def test_c7_matrix_market_round_trip(seed, n, density, symmetric):
    A = random_sparse_csr(n, seed, density, symmetric)
    buf = io.StringIO()
    mm_write(A, buf)
    B = mm_read(io.StringIO(buf.getvalue()))
    assert B.equals(A)
    np.testing.assert_array_equal(B.values, A.values)


@pytest.mark.criterion(7)
def test_c7_total_runtime_budget():
    expected = {"monotonicity", "least squares optimality", "window orthogonality",
                "krylov membership", "sor equals gauss-seidel", "matrix market round trip"}
    missing = expected - set(_c7_elapsed)
    if missing:
        pytest.skip(f"property suites not run in this session: {sorted(missing)}")
    total = sum(_c7_elapsed.values())
    assert total < 120.0, f"property suites took {total:.1f}s"
