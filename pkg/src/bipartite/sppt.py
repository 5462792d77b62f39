"""Block Cholesky factorization, SPPT/SSPPT tests and separable ensembles.

Orientation
-----------
``side="b"`` (SSPPT up to part B) views ``rho`` as the block matrix
``[B_kl]`` indexed by H_A; the factor's coefficient operators ``S_kl`` act on
H_B and the partial transpose is taken on A. ``side="a"`` is the mirror
image and is computed on the party-swapped state. Internally everything runs
in this "oriented" frame: an *index* space of size ``n`` and an *operator*
space of size ``m``.

The factor has block rows ``[0 ... 0, X_k, S_{k,k+1} X_k, ..., S_{k,n} X_k]``
so that ``rho = X^dagger X``. The canonical choice takes ``X_k`` Hermitian
PSD and ``S_kl = X_k^+ R_kl X_k^+`` where ``R`` is the running Schur
complement. Replacing every ``S_kl`` by its adjoint gives ``Y``; the state is
SPPT when ``Y^dagger Y`` equals the partial transpose.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NotFactorizable,
    NotPSD,
    NotPSDResidual,
    NotSSPPT,
    ReconstructionFailed,
    ShapeMismatch,
    ValidationError,
    WrongShape,
)
from .linalg import (
    COMMUTATIVITY_TOL,
    POSITIVITY_TOL,
    as_matrix,
    commutator,
    dagger,
    herm_eig,
    herm_eigvalsh,
    hs_norm,
    kron,
    normality_residual,
    pseudo_inverse,
    psd_sqrt,
    simultaneous_diagonalize,
)
from .states import (
    matrix_from_json,
    matrix_to_json,
    partial_trace_a,
    partial_trace_b,
    swap_parties,
)

SUPPORT_TOL = 1e-8
# eigenvalues of a Schur-complement block below this fraction of ||rho||_2 count as zero
SUPPORT_EIG_TOL = 1e-13
SUPPORT_RANK_TOL = 1e-7
ENSEMBLE_TOL = 1e-9

_SIDE_ALIASES = {"b": "b", "B": "b", "UpToB": "b", "a": "a", "A": "a", "UpToA": "a"}


def _side(side):
    try:
        return _SIDE_ALIASES[side]
    except KeyError:
        raise ValidationError(f"side must be 'a' or 'b', got {side!r}") from None


def oriented_matrix(s, side, index_basis=None):
    """``rho`` in the frame of ``side``, with the index space rotated to ``index_basis``.

    Returns ``(matrix, n_index, n_op)``. The columns of ``index_basis`` are the
    new index basis vectors, so the matrix is ``(V^dagger (x) I) rho (V (x) I)``.
    """
    side = _side(side)
    st = s if side == "b" else swap_parties(s)
    n, m = st.dim_a, st.dim_b
    rho = st.rho
    if index_basis is not None:
        v = as_matrix(index_basis)
        if v.shape != (n, n):
            raise ShapeMismatch(f"index basis must be {n}x{n}")
        w = kron(v, np.eye(m))
        rho = dagger(w) @ rho @ w
        rho = 0.5 * (rho + dagger(rho))
    return rho, n, m


def _pt_index(rho, n, m):
    """Partial transpose on the index factor of an oriented matrix."""
    return rho.reshape(n, m, n, m).transpose(2, 1, 0, 3).reshape(n * m, n * m)


@dataclass(frozen=True)
class BlockCholeskyFactor:
    """Block upper-triangular factor ``X`` with ``rho = X^dagger X``.

    ``s_blocks[(k, l)]`` for ``k < l`` holds ``S_kl``; ``ranks[k]`` is the
    numerical rank of ``X_k``. ``index_basis`` (``None`` for the canonical
    basis) records the index-space basis the factor was computed in.
    """

    side: str
    n_index: int
    n_op: int
    x_blocks: tuple
    s_blocks: dict
    ranks: tuple = ()
    index_basis: np.ndarray = None
    off_support: float = 0.0
    reconstruction_error: float = float("nan")

    def _assemble(self, adjoint):
        n, m = self.n_index, self.n_op
        out = np.zeros((n * m, n * m), dtype=np.complex128)
        for k in range(n):
            xk = self.x_blocks[k]
            out[k * m:(k + 1) * m, k * m:(k + 1) * m] = xk
            for l in range(k + 1, n):
                s = self.s_blocks[(k, l)]
                out[k * m:(k + 1) * m, l * m:(l + 1) * m] = (dagger(s) if adjoint else s) @ xk
        return out

    def assemble_x(self):
        return self._assemble(False)

    def assemble_y(self):
        return self._assemble(True)

    def gram(self):
        x = self.assemble_x()
        return dagger(x) @ x


def _factor_blocks(r, tol, support_tol, scale):
    """Canonical Schur-complement recursion on a block array ``r[k, l]`` (modified in place).

    Eigenvalues of a diagonal block at or below ``SUPPORT_EIG_TOL * scale``
    are treated as zero, so rounding left behind by earlier eliminations is
    not inverted.
    """
    n = r.shape[0]
    xs, ss, ranks = [], {}, []
    worst_off = 0.0
    floor = SUPPORT_EIG_TOL * scale
    for k in range(n):
        rkk = 0.5 * (r[k, k] + dagger(r[k, k]))
        eig = herm_eig(rkk, tie_break=False)
        if eig.values[0] < -tol * max(1.0, hs_norm(rkk)):
            raise NotPSDResidual(
                f"Schur complement at block row {k} has eigenvalue {eig.values[0]:.3e}"
            )
        keep = eig.values > floor
        v = eig.vectors[:, keep]
        root = np.sqrt(eig.values[keep])
        xk = (v * root) @ dagger(v)
        xp = (v / root) @ dagger(v)
        proj = v @ dagger(v)
        ranks.append(int(keep.sum()))
        xs.append(xk)
        rows = []
        for l in range(k + 1, n):
            rkl = r[k, l]
            off = hs_norm(rkl - rkl @ proj)
            worst_off = max(worst_off, off)
            if off > support_tol:
                raise NotFactorizable(
                    f"block ({k}, {l}) has mass {off:.3e} outside the support of X_{k}"
                )
            s = xp @ rkl @ xp
            ss[(k, l)] = s
            rows.append(s @ xk)
        if rows:
            # R_ij -= (S_ki X_k)^dagger (S_kj X_k)
            stacked = np.stack(rows)
            r[k + 1:, k + 1:] -= np.einsum("iba,jbc->ijac", stacked.conj(), stacked)
    return xs, ss, ranks, worst_off


def block_cholesky(s, side="b", tol=POSITIVITY_TOL, index_basis=None, support_tol=SUPPORT_TOL):
    """Canonical block Cholesky factor of ``s`` in the frame of ``side``.

    Rows whose ``X_k`` is singular get coefficient operators supported on
    ``range(X_k)``, so a zero direction of ``X_k`` is zero across the whole
    row.

    Raises
    ------
    NotFactorizable
        An off-diagonal block has more than ``support_tol`` mass on the
        kernel of ``X_k`` from the right; no factor of this shape exists.
    NotPSDResidual
        A Schur complement dips below ``-tol``.
    ReconstructionFailed
        ``||X^dagger X - rho||_2 > 10 * support_tol``.
    """
    side = _side(side)
    rho, n, m = oriented_matrix(s, side, index_basis)
    r = np.array(rho.reshape(n, m, n, m).transpose(0, 2, 1, 3), copy=True)
    xs, ss, ranks, off = _factor_blocks(r, tol, support_tol, hs_norm(rho))
    f = BlockCholeskyFactor(side, n, m, tuple(xs), ss, tuple(ranks), index_basis, off)
    err = hs_norm(f.gram() - rho)
    if err > 10.0 * support_tol:
        raise ReconstructionFailed(f"X^dagger X misses rho by {err:.3e}")
    return BlockCholeskyFactor(side, n, m, tuple(xs), ss, tuple(ranks), index_basis, off, err)


def lemma1_normalize(factor, tol=POSITIVITY_TOL, support_tol=SUPPORT_TOL):
    """Equivalent factor whose rows vanish along every kernel direction of their diagonal block.

    The Gram matrix of ``factor`` is refactored by the canonical recursion,
    which has this property by construction; the result reproduces the same
    ``X^dagger X``.
    """
    a = factor.gram()
    n, m = factor.n_index, factor.n_op
    r = np.array(a.reshape(n, m, n, m).transpose(0, 2, 1, 3), copy=True)
    try:
        xs, ss, ranks, off = _factor_blocks(r, tol, support_tol, hs_norm(a))
    except NotFactorizable as exc:
        raise ReconstructionFailed(str(exc)) from None
    out = BlockCholeskyFactor(factor.side, n, m, tuple(xs), ss, tuple(ranks), factor.index_basis, off)
    err = hs_norm(out.gram() - a)
    if err > 10.0 * support_tol * max(1.0, hs_norm(a)):
        raise ReconstructionFailed(f"normalized factor misses the Gram matrix by {err:.3e}")
    return BlockCholeskyFactor(factor.side, n, m, tuple(xs), ss, tuple(ranks), factor.index_basis, off, err)


def lemma1_normalize_matrix(a, tol=1e-12):
    """Upper-triangular ``Y`` with ``Y^dagger Y = A`` and ``y_kk = 0`` implying row ``k`` is zero.

    Outer-product Cholesky without pivoting; a pivot at or below
    ``tol * max(1, ||A||)`` zeroes its row.
    """
    r = np.array(as_matrix(a), copy=True)
    n = r.shape[0]
    scale = max(1.0, hs_norm(r))
    y = np.zeros_like(r)
    for k in range(n):
        piv = r[k, k].real
        if piv < -tol * scale * 1e3:
            raise NotPSD(f"pivot {piv:.3e} at row {k} is negative")
        if piv <= tol * scale:
            continue
        row = r[k, k:] / np.sqrt(piv)
        y[k, k:] = row
        r[k:, k:] -= np.outer(row.conj(), row)
    if hs_norm(dagger(y) @ y - as_matrix(a)) > 1e3 * tol * scale + 1e-9 * scale:
        raise ReconstructionFailed("row-zeroed factor does not reproduce the matrix")
    return y


# -- SPPT / SSPPT -------------------------------------------------------------


@dataclass(frozen=True)
class SpptReport:
    """Verdict of :func:`is_sppt` / :func:`is_ssppt` with its residuals.

    ``sppt_residual`` is ``||Y^dagger Y - rho^T||_2``; ``normality`` and
    ``commutator`` are the largest scaled residuals of the coefficient
    conditions (zero when only SPPT was asked for). ``worst`` names the
    block triple ``(k, i, j)`` behind the largest commutator residual.
    """

    holds: bool
    side: str
    tol: float
    factorizable: bool
    sppt_residual: float = float("inf")
    normality: float = 0.0
    commutator: float = 0.0
    worst: tuple = None
    factor: BlockCholeskyFactor = None
    reason: str = ""
    checked_commutation: bool = False

    def __bool__(self):
        return self.holds

    @property
    def residual(self):
        if not self.factorizable:
            return float("inf")
        return max(self.sppt_residual, self.normality, self.commutator)

    @property
    def score(self):
        return self.residual / self.tol


def _sppt_residual(factor, rho, n, m):
    y = factor.assemble_y()
    return hs_norm(dagger(y) @ y - _pt_index(rho, n, m))


def _report(s, side, tol, index_basis, want_commutation):
    side = _side(side)
    rho, n, m = oriented_matrix(s, side, index_basis)
    try:
        factor = block_cholesky(s, side, index_basis=index_basis)
    except NotFactorizable as exc:
        return SpptReport(False, side, tol, False, reason=str(exc), checked_commutation=want_commutation)
    res = _sppt_residual(factor, rho, n, m)
    norm_worst, comm_worst, worst = 0.0, 0.0, None
    if want_commutation:
        for k in range(n):
            for i in range(k + 1, n):
                si = factor.s_blocks[(k, i)]
                ni = hs_norm(si)
                r = normality_residual(si) / max(1.0, ni * ni)
                if r > norm_worst:
                    norm_worst = r
                    if r >= comm_worst:
                        worst = (k, i, i)
                for j in range(i + 1, n):
                    sj = factor.s_blocks[(k, j)]
                    c = hs_norm(commutator(si, dagger(sj))) / max(1.0, ni * hs_norm(sj))
                    if c > comm_worst:
                        comm_worst = c
                        if c >= norm_worst:
                            worst = (k, i, j)
    holds = max(res, norm_worst, comm_worst) <= tol
    reason = "" if holds else ("partial transpose not reproduced" if res > tol else "coefficients fail commutation")
    return SpptReport(holds, side, tol, True, res, norm_worst, comm_worst, worst, factor, reason, want_commutation)


def is_sppt(s, side="b", tol=COMMUTATIVITY_TOL, index_basis=None):
    """SPPT relative to the canonical factor in the given index basis.

    A state whose off-diagonal blocks leave the support of the diagonal
    factor has no factor of the required shape and is reported as not SPPT.
    """
    return _report(s, side, tol, index_basis, False)


def is_ssppt(s, side="b", tol=COMMUTATIVITY_TOL, index_basis=None):
    """SSPPT: SPPT plus normal coefficients with ``[S_ki, S_kj^dagger] = 0`` for ``k < i <= j``."""
    return _report(s, side, tol, index_basis, True)


def candidate_index_bases(s, side, classical_basis=None):
    """Index-space bases worth trying for an SSPPT certificate.

    The canonical basis, the CQ/QC classical basis when one is supplied,
    and the eigenbasis of the index-side marginal. Any basis that certifies
    SSPPT certifies separability, so the search is sound.
    """
    side = _side(side)
    marginal = partial_trace_b(s) if side == "b" else partial_trace_a(s)
    out = [("canonical", None)]
    if classical_basis is not None:
        out.append(("classical", np.asarray(classical_basis)))
    out.append(("marginal", herm_eig(marginal).vectors))
    return out


def find_ssppt_basis(s, side="b", tol=COMMUTATIVITY_TOL, classical_basis=None):
    """First candidate basis in which :func:`is_ssppt` holds.

    Returns ``(label, report)``; when no candidate passes, the report with
    the smallest residual is returned with its label.
    """
    best = None
    for label, basis in candidate_index_bases(s, side, classical_basis):
        rep = is_ssppt(s, side, tol, basis)
        if rep.holds:
            return label, rep
        if best is None or rep.residual < best[1].residual:
            best = (label, rep)
    return best


# -- 2 (x) n criteria ---------------------------------------------------------


@dataclass(frozen=True)
class Corollary1Result:
    """``verdict`` is ``"Separable"`` or ``"Inconclusive"``.

    ``clause`` is ``"i"`` (SPPT with invertible leading block) or ``"ii"``
    (ordered diagonal blocks with a verified witness); ``orientation`` says
    which factor served as the two-dimensional index and ``swapped_order``
    whether the two index vectors were exchanged.
    """

    verdict: str
    clause: str = None
    orientation: str = None
    swapped_order: bool = False
    residuals: dict = field(default_factory=dict)

    @property
    def separable(self):
        return self.verdict == "Separable"


_SWAP2 = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def _clause_ii_witness(rho, m, tol):
    """Construct and verify the SSPPT witness for ``rho_22 <= rho_11`` (oriented 2 (x) m matrix)."""
    r = rho.reshape(2, m, 2, m).transpose(0, 2, 1, 3)
    r11, r12, r22 = r[0, 0], r[0, 1], r[1, 1]
    sq11 = psd_sqrt(r11, tol)
    sq22 = psd_sqrt(r22, tol)
    sq11p = pseudo_inverse(sq11, SUPPORT_RANK_TOL)
    s_c = sq11p @ sq22
    t_c = sq11p @ r12 @ pseudo_inverse(sq22, SUPPORT_RANK_TOL)
    s12 = t_c @ dagger(s_c)
    gap = r22 - sq11 @ dagger(s12) @ s12 @ sq11
    try:
        x2 = psd_sqrt(0.5 * (gap + dagger(gap)), tol)
    except NotPSD:
        return None
    x = np.zeros((2 * m, 2 * m), dtype=np.complex128)
    y = np.zeros_like(x)
    for mat, s_use in ((x, s12), (y, dagger(s12))):
        mat[:m, :m] = sq11
        mat[:m, m:] = s_use @ sq11
        mat[m:, m:] = x2
    res = {
        "rebuild": hs_norm(dagger(x) @ x - rho),
        "partial_transpose": hs_norm(dagger(y) @ y - _pt_index(rho, 2, m)),
        "normality": normality_residual(s12) / max(1.0, hs_norm(s12) ** 2),
    }
    return res


def corollary1_separability(s, tol=COMMUTATIVITY_TOL):
    """Sufficient separability tests for states with a two-dimensional factor.

    Clause (i): SPPT in the canonical factor with an invertible leading
    block. Clause (ii): when one diagonal block dominates the other, the
    explicit witness is built from the contraction factorizations and is
    accepted only after it is verified to reproduce ``rho``, its partial
    transpose and a normal coefficient; otherwise the clause is inconclusive.

    Raises
    ------
    WrongShape
        Neither factor has dimension 2.
    """
    orientations = [o for o, d in (("b", s.dim_a), ("a", s.dim_b)) if d == 2]
    if not orientations:
        raise WrongShape(f"no two-dimensional factor in {s.dim_a} x {s.dim_b}")
    residuals = {}
    for side in orientations:
        rho, n, m = oriented_matrix(s, side)
        r = rho.reshape(2, m, 2, m)
        r11, r22 = r[0, :, 0, :], r[1, :, 1, :]
        rep = is_sppt(s, side, tol)
        lam11 = herm_eigvalsh(r11)[0]
        residuals[f"{side}:i"] = rep.residual
        if rep.holds and lam11 > tol:
            return Corollary1Result("Separable", "i", side, False, residuals)
        diff = herm_eigvalsh(r11 - r22)
        for swapped, ordered in ((False, diff[0] >= -tol), (True, diff[-1] <= tol)):
            if not ordered:
                continue
            mat = rho
            if swapped:
                w = kron(_SWAP2, np.eye(m))
                mat = w @ rho @ w
            res = _clause_ii_witness(mat, m, POSITIVITY_TOL)
            if res is None:
                continue
            residuals[f"{side}:ii:{int(swapped)}"] = max(res.values())
            if max(res.values()) <= tol:
                return Corollary1Result("Separable", "ii", side, swapped, residuals)
    return Corollary1Result("Inconclusive", None, None, False, residuals)


# -- separable ensembles ------------------------------------------------------


@dataclass(frozen=True)
class EnsembleTerm:
    p: float
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class SeparableEnsemble:
    """``sum_t p_t a_t (x) b_t`` with unit-trace factors."""

    dim_a: int
    dim_b: int
    terms: tuple
    residual: float = float("nan")

    def reconstruct(self):
        out = np.zeros((self.dim_a * self.dim_b,) * 2, dtype=np.complex128)
        for t in self.terms:
            out += t.p * kron(t.a, t.b)
        return out

    @property
    def total_weight(self):
        return float(sum(t.p for t in self.terms))

    def to_json(self):
        import json

        return json.dumps(
            {
                "terms": [
                    {"p": float(t.p), "a": matrix_to_json(t.a), "b": matrix_to_json(t.b)}
                    for t in self.terms
                ]
            }
        )

    @classmethod
    def from_json(cls, text):
        import json

        obj = json.loads(text)
        terms = tuple(
            EnsembleTerm(float(t["p"]), matrix_from_json(t["a"]), matrix_from_json(t["b"]))
            for t in obj["terms"]
        )
        if not terms:
            raise ValidationError("empty ensemble")
        return cls(terms[0].a.shape[0], terms[0].b.shape[0], terms)


def _row_eigenbasis(family, xk, tol):
    if not family or all(hs_norm(f) == 0.0 for f in family):
        return herm_eig(0.5 * (xk + dagger(xk))).vectors
    return simultaneous_diagonalize(family, tol, check=False)


def ensemble_from_factor(factor, tol=ENSEMBLE_TOL, commute_tol=COMMUTATIVITY_TOL):
    """Rank-one product terms from the rows of an SSPPT factor.

    Row ``k`` contributes ``C_k^dagger C_k``. With the common eigenvectors
    ``phi_j`` of ``{S_kl}_{l>k}`` (eigenvalues ``b_j^(l)``), it splits into
    ``|beta_j><beta_j| (x) |w_j><w_j|`` where ``beta_j`` has ``1`` at ``k``
    and ``conj(b_j^(l))`` at ``l > k``, and ``w_j = X_k phi_j``. Returns the
    terms in the original party order (index side first for ``side="b"``).
    """
    n, m = factor.n_index, factor.n_op
    v = None if factor.index_basis is None else np.asarray(factor.index_basis)
    terms = []
    for k in range(n):
        xk = factor.x_blocks[k]
        family = [factor.s_blocks[(k, l)] for l in range(k + 1, n)]
        u = _row_eigenbasis(family, xk, commute_tol)
        for j in range(m):
            phi = u[:, j]
            beta = np.zeros(n, dtype=np.complex128)
            beta[k] = 1.0
            for l in range(k + 1, n):
                beta[l] = np.conj(np.vdot(phi, factor.s_blocks[(k, l)] @ phi))
            w = dagger(xk) @ phi
            nb = np.vdot(beta, beta).real
            nw = np.vdot(w, w).real
            p = nb * nw
            if p < tol:
                continue
            if v is not None:
                beta = v @ beta
            idx = np.outer(beta, beta.conj()) / nb
            op = np.outer(w, w.conj()) / nw
            terms.append((p, idx, op))
    if factor.side == "b":
        out = [EnsembleTerm(p, a, b) for p, a, b in terms]
        return SeparableEnsemble(n, m, tuple(out))
    out = [EnsembleTerm(p, b, a) for p, a, b in terms]
    return SeparableEnsemble(m, n, tuple(out))


def extract_separable_ensemble(s, side="b", tol=ENSEMBLE_TOL, index_basis=None, ssppt_tol=COMMUTATIVITY_TOL):
    """Separable decomposition of an SSPPT state.

    Raises
    ------
    NotSSPPT
        ``is_ssppt`` fails for ``side`` in ``index_basis``.
    ReconstructionFailed
        The terms miss ``rho`` by more than ``10 * tol``.
    """
    rep = is_ssppt(s, side, ssppt_tol, index_basis)
    if not rep.holds:
        raise NotSSPPT(f"state is not SSPPT up to part {_side(side).upper()}: {rep.reason}")
    ens = ensemble_from_factor(rep.factor, tol, ssppt_tol)
    err = hs_norm(ens.reconstruct() - s.rho)
    if err > 10.0 * tol:
        raise ReconstructionFailed(f"ensemble misses rho by {err:.3e}")
    return SeparableEnsemble(ens.dim_a, ens.dim_b, ens.terms, err)
