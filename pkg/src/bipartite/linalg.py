"""Dense complex linear algebra on small matrices.

Everything here operates on ``numpy.ndarray`` of dtype ``complex128``. The
Hermitian eigensolver is a cyclic Jacobi iteration (see
:mod:`bipartite._kernels` for the compiled/pure-Python backends); the rest
of the module builds on it.

Norm conventions
----------------
``hs_norm`` is the Hilbert-Schmidt (Frobenius) norm and is the norm meant
whenever a tolerance is scaled "by the matrix norm".
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    NoConvergence,
    NonSquare,
    NotCommutingFamily,
    NotHermitian,
    NotPSD,
    ShapeMismatch,
    ValidationError,
)

HERMITICITY_TOL = 1e-9
POSITIVITY_TOL = 1e-9
COMMUTATIVITY_TOL = 1e-8

JACOBI_REL_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
DEGENERACY_REL_GAP = 1e-9

SIMDIAG_SEED = 7
SIMDIAG_ATTEMPTS = 8
# clusters of the random combination are split at this relative gap; anything
# closer is resolved by recursing into the cluster
_SIMDIAG_CLUSTER_GAP = 1e-6


@dataclass(frozen=True)
class HermEigen:
    """Spectral decomposition ``H = vectors @ diag(values) @ vectors^dagger``."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_matrix(m):
    """Coerce to a finite 2-D complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def _square(m):
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"matrix of shape {a.shape} is not square")
    return a


def dagger(m):
    return np.conj(m).T


def hs_norm(m):
    """Hilbert-Schmidt norm ``sqrt(Tr(M^dagger M))``."""
    a = np.asarray(m)
    return float(np.sqrt(np.vdot(a, a).real))


def offdiag_norm(m):
    """Hilbert-Schmidt norm of the off-diagonal part."""
    off = np.array(m, dtype=np.complex128)
    np.fill_diagonal(off, 0.0)
    return float(np.sqrt(np.vdot(off, off).real))


def kron(a, b):
    """Tensor product, A-major: ``(|i> (x) |k>)`` sits at flat index ``i*dim_b + k``."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def commutator(a, b):
    return a @ b - b @ a


def commutator_norm(a, b):
    """``||AB - BA||_2``."""
    a = _square(a)
    b = _square(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes {a.shape} and {b.shape} differ")
    return hs_norm(commutator(a, b))


def is_normal(m, tol=COMMUTATIVITY_TOL):
    """True iff ``||M M^dagger - M^dagger M||_2 <= tol * max(1, ||M||_2^2)``."""
    a = _square(m)
    scale = max(1.0, hs_norm(a) ** 2)
    return hs_norm(a @ dagger(a) - dagger(a) @ a) <= tol * scale


def normality_residual(m):
    a = np.asarray(m)
    return hs_norm(a @ dagger(a) - dagger(a) @ a)


def _jacobi(h, want_vectors):
    a = np.array(h, dtype=np.complex128, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    conv = JACOBI_REL_TOL * hs_norm(a)
    sweeps = _kernels.jacobi_hermitian(a, v, conv, JACOBI_MAX_SWEEPS, want_vectors)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    return np.diagonal(a).real.copy(), v


def _clusters(values, gap):
    """Split ascending ``values`` into index runs whose consecutive gaps are <= gap."""
    runs = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > gap:
            runs.append(range(start, i))
            start = i
    return runs


def _canonical_basis(vectors):
    """Deterministic orthonormal basis of span(vectors).

    Ordered Gram-Schmidt of the projected canonical basis vectors; a
    candidate is accepted when its residual squared norm is at least
    ``1/(2n)``, which always yields a full basis. Each accepted vector has a
    real positive component at its pivot index.
    """
    n, m = vectors.shape
    proj = vectors @ dagger(vectors)
    out = np.zeros((n, m), dtype=np.complex128)
    k = 0
    threshold = 1.0 / (2.0 * n)
    for i in range(n):
        r = proj[:, i].copy()
        for _ in range(2):
            r -= out[:, :k] @ (dagger(out[:, :k]) @ r)
        nrm2 = np.vdot(r, r).real
        if nrm2 >= threshold:
            r /= np.sqrt(nrm2)
            # pin the phase at the pivot
            r *= np.conj(r[i]) / abs(r[i])
            out[:, k] = r
            k += 1
            if k == m:
                break
    if k < m:  # pragma: no cover - excluded by the threshold argument
        raise NoConvergence("degenerate eigenspace basis selection failed")
    return out


def herm_eig(h, tol=HERMITICITY_TOL, tie_break=True):
    """Full spectral decomposition of a Hermitian matrix.

    Eigenvalues come back ascending. Inside every cluster of eigenvalues
    closer than ``1e-9 * ||H||_2`` the eigenvectors are replaced by the
    ordered projection of the canonical basis onto the cluster's span, so
    the output depends only on the eigenspaces and not on rotation order.
    ``tie_break=False`` keeps the raw Jacobi vectors, each of which stays
    paired with its own eigenvalue; spectral functions that threshold
    individual eigenvalues need that pairing.

    Raises
    ------
    NonSquare, NotHermitian, NoConvergence
    """
    a = _square(h)
    nrm = hs_norm(a)
    if hs_norm(a - dagger(a)) > tol * max(1.0, nrm):
        raise NotHermitian(f"Hermiticity residual {hs_norm(a - dagger(a)):.3e} exceeds tolerance")
    n = a.shape[0]
    if n == 0:
        return HermEigen(np.zeros(0), np.zeros((0, 0), dtype=np.complex128))
    if nrm == 0.0:
        return HermEigen(np.zeros(n), np.eye(n, dtype=np.complex128))
    a = 0.5 * (a + dagger(a))
    values, vectors = _jacobi(a, True)
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    if not tie_break:
        return HermEigen(values, vectors)
    for run in _clusters(values, DEGENERACY_REL_GAP * nrm):
        idx = list(run)
        vectors[:, idx] = _canonical_basis(vectors[:, idx])
    return HermEigen(values, vectors)


def herm_eigvalsh(h):
    """Ascending eigenvalues of a Hermitian matrix; no validation, no vectors."""
    a = np.asarray(h, dtype=np.complex128)
    if a.shape[0] == 0:
        return np.zeros(0)
    if a.shape[0] == 1:
        return np.array([a[0, 0].real])
    values, _ = _jacobi(0.5 * (a + dagger(a)), False)
    return np.sort(values)


def herm_eigvalsh_batch(stack):
    """Eigenvalues (ascending per row) of a stack of Hermitian matrices."""
    a = np.asarray(stack, dtype=np.complex128)
    a = np.ascontiguousarray(0.5 * (a + np.conj(np.swapaxes(a, 1, 2))))
    out = np.empty(a.shape[:2])
    failures = _kernels.jacobi_eigvals_batch(a, out, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS)
    if failures:
        raise NoConvergence(f"{failures} matrices did not converge")
    out.sort(axis=1)
    return out


def trace_norm(m):
    """Sum of singular values."""
    a = _square(m)
    gram = dagger(a) @ a
    return float(np.sum(np.sqrt(np.clip(herm_eigvalsh(gram), 0.0, None))))


def psd_sqrt(p, tol=POSITIVITY_TOL):
    """Hermitian PSD square root; eigenvalues in ``[-tol*scale, 0)`` are clamped.

    Raises
    ------
    NotPSD
        If an eigenvalue is below ``-tol * max(1, ||P||_2)``.
    """
    eig = herm_eig(p, tie_break=False)
    scale = max(1.0, hs_norm(p))
    if eig.values.size and eig.values[0] < -tol * scale:
        raise NotPSD(f"minimal eigenvalue {eig.values[0]:.3e} is negative")
    root = np.sqrt(np.clip(eig.values, 0.0, None))
    r = (eig.vectors * root) @ dagger(eig.vectors)
    return 0.5 * (r + dagger(r))


def pseudo_inverse(m, rank_tol=1e-7):
    """Moore-Penrose pseudoinverse via the spectral decomposition of ``M^dagger M``.

    Singular values below ``rank_tol`` times the largest are treated as zero.
    The default sits above the ``~1e-8`` relative noise floor that squaring
    into ``M^dagger M`` puts on numerically-zero singular values.
    """
    a = as_matrix(m)
    gram = dagger(a) @ a
    eig = herm_eig(gram, tie_break=False)
    lam = eig.values
    out_shape = (a.shape[1], a.shape[0])
    if lam.size == 0 or lam[-1] <= 0.0:
        return np.zeros(out_shape, dtype=np.complex128)
    keep = lam > (rank_tol ** 2) * lam[-1]
    v = eig.vectors[:, keep]
    return (v / lam[keep]) @ dagger(v) @ dagger(a)


def _hermitian_parts(m):
    return 0.5 * (m + dagger(m)), (m - dagger(m)) / 2j


def _is_scalar(r, tol):
    n = r.shape[0]
    if n <= 1:
        return True
    shifted = r - (np.trace(r) / n) * np.eye(n)
    return hs_norm(shifted) <= tol * max(1.0, hs_norm(r))


def check_commuting_normal_family(family, tol=COMMUTATIVITY_TOL):
    """Largest normalized normality/commutator residual over a family.

    Each residual is divided by its scale (``max(1, ||A|| ||B||)``), so the
    family passes at tolerance ``tol`` iff the returned value is ``<= tol``.
    Pairs are checked both as ``[A, B]`` and ``[A, B^dagger]``.
    """
    worst = 0.0
    norms = [hs_norm(m) for m in family]
    for i, a in enumerate(family):
        worst = max(worst, normality_residual(a) / max(1.0, norms[i] ** 2))
        for j in range(i + 1, len(family)):
            b = family[j]
            scale = max(1.0, norms[i] * norms[j])
            worst = max(
                worst,
                hs_norm(commutator(a, b)) / scale,
                hs_norm(commutator(a, dagger(b))) / scale,
            )
    return worst


def simultaneous_diagonalize(family, tol=COMMUTATIVITY_TOL, seed=SIMDIAG_SEED, check=True):
    """Common unitary eigenbasis of a commuting family of normal matrices.

    The family is split into Hermitian parts; a random real combination of
    them is diagonalized, and any eigenvalue cluster on which the family is
    not yet scalar is handled recursively with a fresh combination. A
    combination that makes no progress is redrawn, up to eight times.

    Parameters
    ----------
    family : sequence of square matrices, all the same size
    tol : float
        Commutativity tolerance; also the target off-diagonal mass
        (relative to ``max(1, ||M||_2)``) of every ``U^dagger M U``.
    seed : int
        Seed of the coefficient generator; output is deterministic in it.
    check : bool
        Verify normality and pairwise commutation first.

    Returns
    -------
    numpy.ndarray
        Unitary ``U`` whose columns are the common eigenvectors.

    Raises
    ------
    NotCommutingFamily, NoConvergence
    """
    mats = [_square(m) for m in family]
    if not mats:
        raise ValidationError("empty family")
    n = mats[0].shape[0]
    if any(m.shape != (n, n) for m in mats):
        raise ShapeMismatch("family members differ in size")
    if check:
        worst = check_commuting_normal_family(mats, tol)
        if worst > tol:
            raise NotCommutingFamily(f"family fails commutation/normality by {worst:.3e}")

    herm = []
    for m in mats:
        for part in _hermitian_parts(m):
            if hs_norm(part) > 0.0:
                herm.append(part)
    rng = np.random.default_rng(seed)

    def solve(w):
        m = w.shape[1]
        restricted = [dagger(w) @ h @ w for h in herm]
        if m == 1 or all(_is_scalar(r, tol) for r in restricted):
            return w
        for _ in range(SIMDIAG_ATTEMPTS):
            coeffs = rng.standard_normal(len(restricted))
            combo = sum(c * r for c, r in zip(coeffs, restricted))
            eig = herm_eig(combo)
            runs = _clusters(eig.values, _SIMDIAG_CLUSTER_GAP * max(hs_norm(combo), 1e-300))
            if len(runs) == 1:
                continue
            blocks = [solve(w @ eig.vectors[:, list(run)]) for run in runs]
            return np.hstack(blocks)
        raise NoConvergence("random combinations failed to split a degenerate cluster")

    u = solve(np.eye(n, dtype=np.complex128))
    for m in mats:
        if offdiag_norm(dagger(u) @ m @ u) > 10.0 * tol * max(1.0, hs_norm(m)):
            raise NoConvergence("common eigenbasis does not diagonalize the family within tolerance")
    return u
