"""Correlation measures: MiN, geometric discord, entropic discord.

All three are optimizations over a local von Neumann measurement, i.e. an
orthonormal basis ``{u_a}`` of the measured party. With
``B_ab = <u_a| rho |u_b>`` (an operator on the other party) the measured
state is ``sum_a |u_a><u_a| (x) B_aa`` and

    ``||rho - Pi(rho)||_2^2 = ||rho||_2^2 - sum_a ||B_aa||_2^2``.

The optimizers move the basis by rotations inside one pair ``(u_p, u_q)`` at
a time. A pair rotation is described by the Bloch vector ``n`` of the new
``u_p`` in the pair's coordinates; writing the pair block as
``I (x) M0 + sum_i sigma_i (x) G_i`` the two new diagonal blocks are
``M0 +- n.G``. For the quadratic objectives the best ``n`` is an extreme
eigenvector of the 3x3 matrix ``Q_ij = Re Tr(G_i G_j)``; for the entropic
objective the sphere is searched numerically.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import NotOrthonormal, NotPSD, ShapeMismatch, TraceNotOne, UnsupportedDimension
from .linalg import (
    POSITIVITY_TOL,
    as_matrix,
    dagger,
    herm_eig,
    herm_eigvalsh,
    herm_eigvalsh_batch,
    hs_norm,
    kron,
)
from .states import (
    new_bipartite,
    partial_trace_a,
    partial_trace_b,
    random_unitary,
    swap_parties,
)

SWEEP_TOL = 1e-10
DEFAULT_RESTARTS = 16
DISCORD_RESTARTS = 4
MAX_SWEEPS = 200
AGREEMENT_TOL = 1e-8
CLUSTER_GAP_TOL = 1e-7
MIN_OUTCOME_WEIGHT = 1e-12
BLOCH_GRID = 64


@dataclass(frozen=True)
class Measurement:
    """Rank-one projective measurement given by the columns of a unitary."""

    basis: np.ndarray

    @classmethod
    def from_basis(cls, basis, tol=1e-10):
        u = as_matrix(basis)
        if u.shape[0] != u.shape[1] or hs_norm(dagger(u) @ u - np.eye(u.shape[0])) > tol:
            raise NotOrthonormal("measurement basis is not unitary")
        return cls(u)

    @property
    def dim(self):
        return self.basis.shape[0]

    def projectors(self):
        return [np.outer(self.basis[:, k], self.basis[:, k].conj()) for k in range(self.dim)]


@dataclass(frozen=True)
class MeasureResult:
    """Value of a measure with the measurement achieving it.

    ``certificate`` is ``"Exact"`` when the measurement is forced (or the
    optimum is closed-form) and ``"Bound"`` when it comes from a search:
    a lower bound for MiN, an upper bound for GMQD and discord.
    ``raw_value`` keeps the value before clamping at zero.
    """

    value: float
    optimizer: Measurement
    certificate: str
    iterations: int
    seed: int
    raw_value: float
    restarts_agreeing: int = 1
    side: str = "a"


# -- basic quantities ----------------------------------------------------------


def apply_measurement_a(s, m):
    """``sum_k (Pi_k (x) I) rho (Pi_k (x) I)`` for the measurement ``m`` on A."""
    u = m.basis if isinstance(m, Measurement) else as_matrix(m)
    if u.shape != (s.dim_a, s.dim_a):
        raise ShapeMismatch(f"measurement of size {u.shape[0]} on a {s.dim_a}-dimensional party")
    blocks = _diag_blocks(s.tensor(), u)
    out = sum(kron(np.outer(u[:, k], u[:, k].conj()), blocks[k]) for k in range(s.dim_a))
    return new_bipartite(out, s.dim_a, s.dim_b)


def apply_measurement_b(s, m):
    return swap_parties(apply_measurement_a(swap_parties(s), m))


def _entropy_from_eigs(lam):
    lam = lam[lam > 0.0]
    return float(-np.sum(lam * np.log2(lam)))


def von_neumann_entropy(m, tol=POSITIVITY_TOL):
    """``-Tr(M log2 M)`` of a unit-trace PSD matrix."""
    a = as_matrix(m)
    if abs(np.trace(a).real - 1.0) > 1e-9:
        raise TraceNotOne(f"trace is {np.trace(a).real!r}")
    lam = herm_eigvalsh(a)
    if lam.size and lam[0] < -tol:
        raise NotPSD(f"eigenvalue {lam[0]:.3e} is negative")
    return _entropy_from_eigs(lam)


def mutual_information(s):
    return (
        von_neumann_entropy(partial_trace_b(s))
        + von_neumann_entropy(partial_trace_a(s))
        - von_neumann_entropy(s.rho)
    )


# -- pair machinery -------------------------------------------------------------


def _diag_blocks(r, u):
    """``B_aa`` for every column ``u_a``; shape ``(d, dim_b, dim_b)``."""
    return np.einsum("xa,xiyj,ya->aij", u.conj(), r, u)


def _block(r, ua, ub):
    return np.einsum("x,xiyj,y->ij", ua.conj(), r, ub)


def _pair_generators(r, u, p, q):
    bpp = _block(r, u[:, p], u[:, p])
    bqq = _block(r, u[:, q], u[:, q])
    bpq = _block(r, u[:, p], u[:, q])
    bqp = dagger(bpq)
    m0 = 0.5 * (bpp + bqq)
    g = np.stack([0.5 * (bpq + bqp), 0.5j * (bpq - bqp), 0.5 * (bpp - bqq)])
    g = 0.5 * (g + np.conj(np.swapaxes(g, 1, 2)))
    return m0, g


def _q_matrix(g):
    return np.einsum("aij,bji->ab", g, g).real


def _rotate_pair(u, p, q, n):
    """Rotate columns ``p, q`` so the new ``u_p`` has Bloch vector ``n`` in the old pair."""
    x, y, z = n
    alpha2 = 0.5 * (1.0 + z)
    if alpha2 <= 1e-300:
        alpha, beta = 0.0, 1.0 + 0j
    else:
        alpha = np.sqrt(alpha2)
        beta = complex(x, y) / (2.0 * alpha)
    nb = np.sqrt(alpha * alpha + abs(beta) ** 2)
    alpha, beta = alpha / nb, beta / nb
    up = alpha * u[:, p] + beta * u[:, q]
    uq = -np.conj(beta) * u[:, p] + alpha * u[:, q]
    out = u.copy()
    out[:, p] = up
    out[:, q] = uq
    return out


def _extreme_axis(q, largest):
    eig = herm_eig(q.astype(np.complex128), tie_break=False)
    n = eig.vectors[:, -1 if largest else 0].real
    n = n / np.linalg.norm(n)
    return n if n[2] >= 0 else -n


def _kept_weight(r, u):
    return float(np.sum(np.abs(_diag_blocks(r, u)) ** 2))


def _quadratic_sweeps(r, u, pairs, maximize_kept, sweep_tol, max_sweeps=MAX_SWEEPS):
    """Pairwise exact coordinate steps on ``sum_a ||B_aa||^2``.

    ``maximize_kept=True`` drives the basis toward the closest measured
    state (GMQD); ``False`` toward the farthest (MiN).
    """
    kept = _kept_weight(r, u)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        before = kept
        for p, q in pairs:
            _, g = _pair_generators(r, u, p, q)
            n = _extreme_axis(_q_matrix(g), maximize_kept)
            cand = _rotate_pair(u, p, q, n)
            new = _kept_weight(r, cand)
            if (new > kept) if maximize_kept else (new < kept):
                u, kept = cand, new
        if abs(kept - before) < sweep_tol:
            break
    return u, kept, sweeps


def _all_pairs(d):
    return [(p, q) for p in range(d) for q in range(p + 1, d)]


def _oriented(s, side):
    if side not in ("a", "b"):
        raise ShapeMismatch(f"side must be 'a' or 'b', got {side!r}")
    return s if side == "a" else swap_parties(s)


def _agreeing(values, best, tol=AGREEMENT_TOL):
    return int(sum(1 for v in values if abs(v - best) <= tol))


# -- MiN ---------------------------------------------------------------------------


def _marginal_clusters(rho_a, gap_tol):
    eig = herm_eig(rho_a)
    scale = max(float(np.max(np.abs(eig.values))), 1e-300)
    runs, start = [], 0
    vals = eig.values
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > gap_tol * scale:
            runs.append(list(range(start, i)))
            start = i
    return eig.vectors, runs


def _min_side(s, side, seed, restarts, sweep_tol, gap_tol, start):
    st = _oriented(s, side)
    r = st.tensor()
    total = hs_norm(st.rho) ** 2
    v, runs = _marginal_clusters(partial_trace_b(st), gap_tol)
    if all(len(c) == 1 for c in runs):
        kept = _kept_weight(r, v)
        val = max(total - kept, 0.0)
        return MeasureResult(val, Measurement(v), "Exact", 0, seed, total - kept, 1, side)
    pairs = [(c[i], c[j]) for c in runs for i in range(len(c)) for j in range(i + 1, len(c))]
    rng = np.random.default_rng(seed)
    starts = []
    if start is not None:
        starts.append(_project_to_marginal_basis(as_matrix(start), v, runs))
    starts.append(v)
    while len(starts) < max(restarts, 1) + (start is not None):
        w = v.copy()
        for c in runs:
            if len(c) > 1:
                w[:, c] = v[:, c] @ random_unitary(len(c), rng)
        starts.append(w)
    best, best_u, values, its = -np.inf, None, [], 0
    for u0 in starts:
        u, kept, sw = _quadratic_sweeps(r, u0, pairs, False, sweep_tol)
        its += sw
        val = total - kept
        values.append(val)
        if val > best:
            best, best_u = val, u
    return MeasureResult(
        max(best, 0.0), Measurement(best_u), "Bound", its, seed, best, _agreeing(values, best), side
    )


def _project_to_marginal_basis(u, v, runs):
    """Closest basis to ``u`` that stays inside the eigenspaces of the marginal."""
    w = v.copy()
    for c in runs:
        if len(c) == 1:
            continue
        sub = v[:, c]
        m = dagger(sub) @ u
        # polar factor of the overlap with the best-aligned columns
        cols = np.argsort(-np.sum(np.abs(m) ** 2, axis=0))[: len(c)]
        a = m[:, np.sort(cols)]
        uu, _, vh = np.linalg.svd(a)
        w[:, c] = sub @ (uu @ vh)
    return w


def min_a(s, seed=0, restarts=DEFAULT_RESTARTS, sweep_tol=SWEEP_TOL, gap_tol=CLUSTER_GAP_TOL, start=None):
    """Measurement-induced nonlocality on A.

    Exact when ``rho_A`` has a simple spectrum (the measurement is then the
    eigenbasis of ``rho_A``); otherwise a lower bound from seeded restarts of
    pair sweeps confined to the eigenspaces of ``rho_A``.
    """
    return _min_side(s, "a", seed, restarts, sweep_tol, gap_tol, start)


def min_b(s, seed=0, restarts=DEFAULT_RESTARTS, sweep_tol=SWEEP_TOL, gap_tol=CLUSTER_GAP_TOL, start=None):
    return _min_side(s, "b", seed, restarts, sweep_tol, gap_tol, start)


def min_pure(p):
    """``1 - sum_k lambda_k^4`` for a pure state with Schmidt coefficients ``lambda``."""
    lam = np.asarray(p.schmidt, dtype=float)
    return float(1.0 - np.sum(lam ** 4))


# -- geometric discord ---------------------------------------------------------------


def _fibonacci_like_grid(n_theta, n_phi):
    theta = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    phi = np.arange(n_phi) * 2.0 * np.pi / n_phi
    t, f = np.meshgrid(theta, phi, indexing="ij")
    return t.ravel(), f.ravel()


def _bloch(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _qubit_grid_gmqd(r, total, grid):
    """Dense Bloch-angle search for a qubit measured party, refined locally."""
    u0 = np.eye(2, dtype=np.complex128)
    m0, g = _pair_generators(r, u0, 0, 1)
    q = _q_matrix(g)
    base = 2.0 * hs_norm(m0) ** 2

    def dist(angles):
        n = _bloch(angles[0], angles[1])
        return total - base - 2.0 * float(n @ q @ n)

    t, f = _fibonacci_like_grid(grid, grid)
    ns = _bloch(t, f)
    vals = total - base - 2.0 * np.einsum("ki,ij,kj->k", ns, q, ns)
    k = int(np.argmin(vals))
    res = minimize(dist, [t[k], f[k]], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-16})
    n = _bloch(*res.x)
    return min(float(res.fun), float(vals[k])), _rotate_pair(u0, 0, 1, n if n[2] >= 0 else -n)


def _gmqd_side(s, side, seed, restarts, sweep_tol, start, grid):
    st = _oriented(s, side)
    r = st.tensor()
    d = st.dim_a
    total = hs_norm(st.rho) ** 2
    rng = np.random.default_rng(seed)
    starts = []
    if start is not None:
        starts.append(as_matrix(start))
    starts.append(herm_eig(partial_trace_b(st)).vectors)
    while len(starts) < max(restarts, 1) + (start is not None):
        starts.append(random_unitary(d, rng))
    pairs = _all_pairs(d)
    best, best_u, values, its = np.inf, None, [], 0
    for u0 in starts:
        u, kept, sw = _quadratic_sweeps(r, u0, pairs, True, sweep_tol)
        its += sw
        val = total - kept
        values.append(val)
        if val < best:
            best, best_u = val, u
    if d == 2 and grid:
        gval, gu = _qubit_grid_gmqd(r, total, grid)
        if gval < best:
            best, best_u = gval, gu
    return MeasureResult(
        max(best, 0.0), Measurement(best_u), "Bound", its, seed, best, _agreeing(values, best), side
    )


def gmqd_a(s, seed=0, restarts=DEFAULT_RESTARTS, sweep_tol=SWEEP_TOL, start=None, grid=BLOCH_GRID):
    """Geometric discord ``min ||rho - Pi^A(rho)||_2^2`` over all measurements on A.

    Upper bound from seeded restarts of pair sweeps; for a qubit A a
    ``grid x grid`` Bloch search with local refinement runs as well and the
    smaller value wins.
    """
    return _gmqd_side(s, "a", seed, restarts, sweep_tol, start, grid)


def gmqd_b(s, seed=0, restarts=DEFAULT_RESTARTS, sweep_tol=SWEEP_TOL, start=None, grid=BLOCH_GRID):
    return _gmqd_side(s, "b", seed, restarts, sweep_tol, start, grid)


# -- entropic discord ------------------------------------------------------------------


def _h_terms(eigs):
    """``-Tr B log2 B + Tr B log2 Tr B`` per row of eigenvalues; tiny outcomes count as zero."""
    lam = np.clip(eigs, 0.0, None)
    tr = lam.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = -np.where(lam > 0, lam * np.log2(np.where(lam > 0, lam, 1.0)), 0.0).sum(axis=-1)
        ent = ent + np.where(tr > 0, tr * np.log2(np.where(tr > 0, tr, 1.0)), 0.0)
    return np.where(tr < MIN_OUTCOME_WEIGHT, 0.0, ent)


def _conditional_entropy(r, u):
    """``sum_k p_k S(rho_k)`` for the measurement ``u``."""
    return float(np.sum(_h_terms(herm_eigvalsh_batch(_diag_blocks(r, u)))))


_COARSE = _fibonacci_like_grid(9, 16)


def _pair_entropy_step(r, u, p, q):
    """Best rotation of the pair ``(p, q)`` for the conditional entropy."""
    m0, g = _pair_generators(r, u, p, q)

    def f_many(ns):
        ng = np.einsum("ki,iab->kab", ns, g)
        stack = np.concatenate([m0 + ng, m0 - ng])
        h = _h_terms(herm_eigvalsh_batch(stack))
        k = ns.shape[0]
        return h[:k] + h[k:]

    def f(angles):
        return float(f_many(_bloch(np.array([angles[0]]), np.array([angles[1]])))[0])

    t, ph = _COARSE
    vals = f_many(_bloch(t, ph))
    here = f((0.0, 0.0))
    k = int(np.argmin(vals))
    x0 = (0.0, 0.0) if here <= vals[k] else (t[k], ph[k])
    res = minimize(f, x0, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-15, "maxiter": 1000})
    best_n, best_v = np.array([0.0, 0.0, 1.0]), here
    if res.fun < best_v:
        best_n = _bloch(res.x[0], res.x[1])
    if best_n[2] < 0:
        best_n = -best_n
    return _rotate_pair(u, p, q, best_n)


def _entropy_sweeps(r, u, sweep_tol, max_sweeps=30):
    pairs = _all_pairs(u.shape[0])
    val = _conditional_entropy(r, u)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        before = val
        for p, q in pairs:
            cand = _pair_entropy_step(r, u, p, q)
            new = _conditional_entropy(r, cand)
            if new < val:
                u, val = cand, new
        if before - val < sweep_tol or len(pairs) == 1:
            break
    return u, val, sweeps


def _discord_side(s, side, seed, restarts, sweep_tol, start):
    st = _oriented(s, side)
    if st.dim_a > 3:
        raise UnsupportedDimension(f"discord on a {st.dim_a}-dimensional party is not supported")
    r = st.tensor()
    base = von_neumann_entropy(partial_trace_b(st)) - von_neumann_entropy(st.rho)
    rng = np.random.default_rng(seed)
    starts = []
    if start is not None:
        starts.append(as_matrix(start))
    starts.append(_gmqd_side(s, side, seed, 4, SWEEP_TOL, None, 0).optimizer.basis)
    starts.append(herm_eig(partial_trace_b(st)).vectors)
    while len(starts) < 2 + max(restarts, 0) + (start is not None):
        starts.append(random_unitary(st.dim_a, rng))
    best, best_u, values, its = np.inf, None, [], 0
    for u0 in starts:
        u, cond, sw = _entropy_sweeps(r, u0, sweep_tol)
        its += sw
        val = base + cond
        values.append(val)
        if val < best:
            best, best_u = val, u
    return MeasureResult(
        max(best, 0.0), Measurement(best_u), "Bound", its, seed, best, _agreeing(values, best), side
    )


def discord_a(s, seed=0, restarts=DISCORD_RESTARTS, sweep_tol=SWEEP_TOL, start=None):
    """Entropic discord measured on A (``dim_a <= 3``).

    ``S(rho_A) - S(rho) + min sum_k p_k S(rho_k)``, searched from the GMQD
    optimum, the marginal eigenbasis and ``restarts`` random bases. The
    value is an upper bound, clamped at zero with the raw value retained.
    """
    return _discord_side(s, "a", seed, restarts, sweep_tol, start)


def discord_b(s, seed=0, restarts=DISCORD_RESTARTS, sweep_tol=SWEEP_TOL, start=None):
    return _discord_side(s, "b", seed, restarts, sweep_tol, start)
