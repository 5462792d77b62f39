"""Structure predicates: PPT, CQ/QC, marginal commutation, zero MiN, product.

Every predicate that can be near a boundary returns a result object carrying
its residual next to the verdict; these objects are truthy exactly when the
property holds.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ReconstructionFailed
from .linalg import (
    COMMUTATIVITY_TOL,
    POSITIVITY_TOL,
    check_commuting_normal_family,
    commutator,
    dagger,
    herm_eig,
    herm_eigvalsh,
    hs_norm,
    kron,
    simultaneous_diagonalize,
    trace_norm,
    _clusters,
)
from .states import (
    blocks_a,
    partial_trace_a,
    partial_trace_b,
    partial_transpose_a,
    swap_parties,
)

WEIGHT_GAP_TOL = 1e-7
# past this many B-indices the commutator loop stops at the first violation
_SHORT_CIRCUIT_DIM = 16


@dataclass(frozen=True)
class PptResult:
    holds: bool
    min_eigenvalue: float
    tol: float

    def __bool__(self):
        return self.holds


def is_ppt(s, tol=POSITIVITY_TOL):
    """PPT test on ``rho^{T_A}`` (``T_B`` has the same spectrum)."""
    lam = float(herm_eigvalsh(partial_transpose_a(s))[0])
    return PptResult(lam >= -tol, lam, tol)


@dataclass(frozen=True)
class CqWitness:
    """Outcome of the CQ test.

    ``basis`` columns are the common eigenvectors ``|k>`` on the classical
    side, ``weights[k]`` the probabilities and ``sigmas[k]`` the conditional
    states on the other side. ``side`` is ``"a"`` for CQ and ``"b"`` for QC.
    """

    is_cq: bool
    max_violation: float
    tol: float
    side: str = "a"
    basis: np.ndarray = None
    weights: np.ndarray = None
    sigmas: list = field(default_factory=list)
    reconstruction_error: float = float("nan")

    def __bool__(self):
        return self.is_cq


def _family_a(s):
    t = blocks_a(s)
    return [t[i, j] for i in range(s.dim_b) for j in range(i, s.dim_b)]


def _family_residual(family, tol):
    if len(family) <= _SHORT_CIRCUIT_DIM * (_SHORT_CIRCUIT_DIM + 1) // 2:
        return check_commuting_normal_family(family, tol)
    # large families: growing prefixes, stop as soon as one fails
    worst = 0.0
    norms = [hs_norm(m) for m in family]
    for i, a in enumerate(family):
        worst = max(worst, hs_norm(a @ dagger(a) - dagger(a) @ a) / max(1.0, norms[i] ** 2))
        for j in range(i):
            b = family[j]
            scale = max(1.0, norms[i] * norms[j])
            worst = max(worst, hs_norm(commutator(a, b)) / scale, hs_norm(commutator(a, dagger(b))) / scale)
        if worst > tol:
            return worst
    return worst


def _cq_side_a(s, tol):
    family = _family_a(s)
    worst = _family_residual(family, tol)
    if worst > tol:
        return CqWitness(False, worst, tol)
    u = simultaneous_diagonalize(family, tol, check=False)
    t = blocks_a(s)
    # diag[i, j, k] = (U^dagger A_ij U)_kk
    diag = np.einsum("ak,ijab,bk->ijk", u.conj(), t, u)
    weights = np.clip(np.einsum("iik->k", diag).real, 0.0, None)
    sigmas = []
    rebuilt = np.zeros_like(s.rho)
    for k in range(s.dim_a):
        block = diag[:, :, k]
        block = 0.5 * (block + dagger(block))
        if weights[k] > 0.0:
            sig = block / weights[k]
        else:
            sig = np.eye(s.dim_b, dtype=np.complex128) / s.dim_b
        sigmas.append(sig)
        rebuilt += kron(np.outer(u[:, k], u[:, k].conj()), block)
    err = hs_norm(rebuilt - s.rho)
    if err > 10.0 * tol:
        raise ReconstructionFailed(
            f"commuting-family checks passed ({worst:.2e}) but the CQ rebuild is off by {err:.2e}"
        )
    return CqWitness(True, worst, tol, "a", u, weights, sigmas, err)


def is_cq(s, tol=COMMUTATIVITY_TOL):
    """CQ test: the blocks ``A_ij`` must form a commuting family of normal operators.

    Raises
    ------
    ReconstructionFailed
        The family passed at ``tol`` but the rebuilt CQ form misses ``rho``
        by more than ``10 * tol``.
    """
    return _cq_side_a(s, tol)


def is_qc(s, tol=COMMUTATIVITY_TOL):
    """QC test; the witness basis and weights live on H_B, sigmas on H_A."""
    w = _cq_side_a(swap_parties(s), tol)
    return CqWitness(w.is_cq, w.max_violation, tol, "b", w.basis, w.weights, w.sigmas, w.reconstruction_error)


def marginal_commutator_residual(s):
    """``||[rho, rho_A (x) I]||_2``."""
    m = kron(partial_trace_b(s), np.eye(s.dim_b))
    return hs_norm(s.rho @ m - m @ s.rho)


def marginal_commutes_a(s, tol=COMMUTATIVITY_TOL):
    return marginal_commutator_residual(s) <= tol


def marginal_commutes_b(s, tol=COMMUTATIVITY_TOL):
    return marginal_commutator_residual(swap_parties(s)) <= tol


@dataclass(frozen=True)
class EigenspaceDecomposition:
    values: np.ndarray
    multiplicities: tuple
    bases: tuple
    min_gap: float

    def projector(self, i):
        b = self.bases[i]
        return b @ dagger(b)


def _weight_clusters(values, gap_tol):
    """Index runs of ascending ``values`` separated by more than ``gap_tol * max|value|``."""
    scale = max(float(np.max(np.abs(values))) if len(values) else 0.0, 1e-300)
    return _clusters(values, gap_tol * scale)


def eigenspace_decomposition(m, gap_tol=WEIGHT_GAP_TOL):
    """Eigenspaces of a Hermitian matrix, merging eigenvalues closer than ``gap_tol`` (relative)."""
    eig = herm_eig(m)
    runs = _weight_clusters(eig.values, gap_tol)
    values = np.array([eig.values[list(r)].mean() for r in runs])
    bases = tuple(eig.vectors[:, list(r)] for r in runs)
    gaps = np.diff(values)
    return EigenspaceDecomposition(
        values,
        tuple(len(r) for r in runs),
        bases,
        float(gaps.min()) if gaps.size else float("inf"),
    )


@dataclass(frozen=True)
class ZeroMinWitness:
    """Outcome of the zero-MiN test.

    ``violating_pair`` names two classical indices with equal weight but
    different conditional states (``distance`` apart in trace norm).
    ``min_weight_gap`` is the smallest gap between weight clusters; when it is
    close to the clustering threshold the verdict is fragile.
    """

    holds: bool
    cq: CqWitness
    tol: float
    violating_pair: tuple = None
    distance: float = 0.0
    min_weight_gap: float = float("inf")

    def __bool__(self):
        return self.holds


def _zero_min_from_cq(w, tol, gap_tol):
    if not w.is_cq:
        return ZeroMinWitness(False, w, tol)
    order = np.argsort(w.weights, kind="stable")
    sorted_w = w.weights[order]
    runs = _weight_clusters(sorted_w, gap_tol)
    means = [sorted_w[list(r)].mean() for r in runs]
    min_gap = float(np.min(np.diff(means))) if len(means) > 1 else float("inf")
    worst = 0.0
    pair = None
    zero_level = gap_tol * max(float(sorted_w[-1]), 1e-300)
    for r, mean in zip(runs, means):
        members = [int(order[i]) for i in r]
        if len(members) < 2 or mean <= zero_level:
            continue
        ref = members[0]
        for other in members[1:]:
            d = trace_norm(w.sigmas[ref] - w.sigmas[other])
            if d > worst:
                worst, pair = d, (ref, other)
    holds = worst <= tol
    return ZeroMinWitness(holds, w, tol, None if holds else pair, worst, min_gap)


def is_zero_min_a(s, tol=COMMUTATIVITY_TOL, gap_tol=WEIGHT_GAP_TOL, cq=None):
    """Zero MiN on the A side: CQ with equal conditional states wherever weights coincide.

    ``cq`` may pass a precomputed :func:`is_cq` witness.
    """
    return _zero_min_from_cq(cq if cq is not None else is_cq(s, tol), tol, gap_tol)


def is_zero_min_b(s, tol=COMMUTATIVITY_TOL, gap_tol=WEIGHT_GAP_TOL, qc=None):
    return _zero_min_from_cq(qc if qc is not None else is_qc(s, tol), tol, gap_tol)


def product_residual(s):
    """``||rho - rho_A (x) rho_B||_2``."""
    return hs_norm(s.rho - kron(partial_trace_b(s), partial_trace_a(s)))


def is_product(s, tol=COMMUTATIVITY_TOL):
    return product_residual(s) <= tol
