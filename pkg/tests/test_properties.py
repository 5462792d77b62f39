"""Property tests over seeded random inputs."""
import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from bipartite.classify import classify
from bipartite.criteria import is_cq, is_ppt, is_qc
from bipartite.linalg import herm_eig, hs_norm, pseudo_inverse
from bipartite.measures import gmqd_a, min_a
from bipartite.sppt import block_cholesky, extract_separable_ensemble, is_ssppt
from bipartite.states import (
    local_unitary,
    make_cq,
    make_qc,
    partial_trace_a,
    partial_trace_b,
    partial_transpose_a,
    partial_transpose_b,
    random_density,
    random_state,
    random_unitary,
    ssppt_random,
    state_from_json,
    state_to_json,
    swap_parties,
)

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.integers(2, 4)


@given(seeds, st.integers(1, 9))
def test_eigendecomposition_reconstructs(seed, n):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = m + m.conj().T
    e = herm_eig(h)
    assert hs_norm(e.reconstruct() - h) <= 1e-10 * max(hs_norm(h), 1.0)
    assert np.all(np.diff(e.values) >= 0)


@given(seeds, st.integers(1, 6), st.integers(1, 6))
def test_pseudo_inverse_identities(seed, r, c):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))
    p = pseudo_inverse(a)
    assert hs_norm(a @ p @ a - a) <= 1e-9 * max(1.0, hs_norm(a))
    assert hs_norm(p @ a @ p - p) <= 1e-9 * max(1.0, hs_norm(p))


@given(seeds, dims, dims)
def test_partial_operations(seed, da, db):
    s = random_state(da, db, seed=seed)
    pt = partial_transpose_a(s).reshape(da, db, da, db)
    assert np.allclose(pt.transpose(2, 1, 0, 3).reshape(da * db, -1), s.rho)
    assert np.allclose(partial_transpose_a(s), partial_transpose_b(s).T)
    assert np.isclose(np.trace(partial_trace_a(s)), 1) and np.isclose(np.trace(partial_trace_b(s)), 1)
    assert np.allclose(partial_trace_b(swap_parties(s)), partial_trace_a(s))


@given(seeds, dims, dims)
def test_state_json_round_trip(seed, da, db):
    s = random_state(da, db, seed=seed)
    t = state_from_json(state_to_json(s))
    assert (t.dim_a, t.dim_b) == (da, db) and np.array_equal(t.rho, s.rho)


@given(seeds, dims, dims)
def test_cq_and_qc_generators_satisfy_predicates(seed, da, db):
    rng = np.random.default_rng(seed)
    cq = make_cq(rng.dirichlet(np.ones(da)), random_unitary(da, rng), [random_density(db, rng) for _ in range(da)])
    qc = make_qc(rng.dirichlet(np.ones(db)), random_unitary(db, rng), [random_density(da, rng) for _ in range(db)])
    assert is_cq(cq) and is_qc(qc) and is_ppt(cq) and is_ppt(qc)
    assert is_ssppt(cq, "a") and is_ssppt(qc, "b")


@given(seeds, st.integers(2, 3), st.integers(2, 3))
def test_full_rank_factor_is_exact(seed, da, db):
    s = random_state(da, db, seed=seed)
    for side in ("a", "b"):
        assert block_cholesky(s, side).reconstruction_error <= 1e-8


@given(seeds, st.integers(2, 3), st.integers(2, 3), st.sampled_from("ab"))
def test_generated_ssppt_decomposes(seed, da, db, side):
    s = ssppt_random(da, db, seed, side)
    ens = extract_separable_ensemble(s, side)
    assert ens.residual <= 1e-8 and all(t.p >= 0 for t in ens.terms)


@given(seeds, st.integers(2, 3), st.integers(2, 3), st.integers(0, 3))
def test_report_respects_chain(seed, da, db, family):
    rng = np.random.default_rng(seed)
    if family == 0:
        s = random_state(da, db, int(rng.integers(1, da * db + 1)), seed)
    elif family == 1:
        s = ssppt_random(da, db, seed, "ab"[seed % 2])
    elif family == 2:
        s = make_cq(rng.dirichlet(np.ones(da)), random_unitary(da, rng), [random_density(db, rng) for _ in range(da)])
    else:
        s = make_qc(rng.dirichlet(np.ones(db)), random_unitary(db, rng), [random_density(da, rng) for _ in range(db)])
    rep = classify(s)
    assert rep.hard_violations == []
    if rep.flags["ppt"] == "no":
        assert rep.separability.verdict == "Entangled"


@given(seeds, st.integers(2, 3))
def test_measure_ordering(seed, db):
    s = random_state(2, db, seed=seed)
    g, m = gmqd_a(s, restarts=4), min_a(s, restarts=4)
    assert g.raw_value >= -1e-9 and 0 <= m.value < 4
    assert g.value <= m.value + 1e-9


@given(seeds)
def test_ppt_is_local_unitary_invariant(seed):
    rng = np.random.default_rng(seed)
    s = random_state(2, 3, seed=seed)
    t = local_unitary(s, random_unitary(2, rng), random_unitary(3, rng))
    assert abs(is_ppt(s).min_eigenvalue - is_ppt(t).min_eigenvalue) < 1e-10
