"""Bipartite density matrices, block views and the state families used here.

Index convention: the basis vector ``|i> (x) |k'>`` of ``H_A (x) H_B`` sits at
flat index ``i * dim_b + k`` (A-major, the convention of ``numpy.kron``).
Reshaping ``rho`` to ``(dim_a, dim_b, dim_a, dim_b)`` gives
``R[a, i, b, j] = <a i| rho |b j>``, which is how every view below is taken.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadNormalization,
    BadProbabilities,
    BadRank,
    BadSigma,
    IndexOutOfRange,
    NotContraction,
    NotHermitian,
    NotOrthonormal,
    NotPositive,
    NotPSD,
    ShapeMismatch,
    TraceNotOne,
)
from .linalg import (
    HERMITICITY_TOL,
    POSITIVITY_TOL,
    as_matrix,
    dagger,
    herm_eig,
    herm_eigvalsh,
    hs_norm,
    kron,
    psd_sqrt,
)

TRACE_TOL = 1e-9
UNIT_NORM_TOL = 1e-10


@dataclass(frozen=True)
class BipartiteState:
    """A validated density matrix on ``C^dim_a (x) C^dim_b``.

    Build through :func:`new_bipartite`; the constructor itself does not
    validate. ``rho`` is stored read-only.
    """

    dim_a: int
    dim_b: int
    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.rho.setflags(write=False)

    @property
    def dim(self):
        return self.dim_a * self.dim_b

    def tensor(self):
        """``rho`` reshaped to ``(dim_a, dim_b, dim_a, dim_b)``."""
        return self.rho.reshape(self.dim_a, self.dim_b, self.dim_a, self.dim_b)


@dataclass(frozen=True)
class PureState:
    """Pure bipartite vector together with its Schmidt coefficients (descending)."""

    dim_a: int
    dim_b: int
    amplitudes: np.ndarray
    schmidt: np.ndarray

    def density(self):
        psi = self.amplitudes
        return new_bipartite(np.outer(psi, psi.conj()), self.dim_a, self.dim_b)


def new_bipartite(matrix, dim_a, dim_b, tol=HERMITICITY_TOL):
    """Validate ``matrix`` as a density matrix and wrap it.

    A Hermiticity residual up to ``tol`` (relative to ``max(1, ||rho||_2)``)
    is removed by symmetrizing; anything larger is rejected.

    Raises
    ------
    ShapeMismatch, NotHermitian, NotPositive, TraceNotOne
    """
    rho = as_matrix(matrix)
    d = int(dim_a) * int(dim_b)
    if dim_a < 1 or dim_b < 1 or rho.shape != (d, d):
        raise ShapeMismatch(f"matrix shape {rho.shape} does not match dims ({dim_a}, {dim_b})")
    resid = hs_norm(rho - dagger(rho))
    if resid > tol * max(1.0, hs_norm(rho)):
        raise NotHermitian(f"Hermiticity residual {resid:.3e} exceeds {tol:.1e}")
    rho = 0.5 * (rho + dagger(rho))
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOne(f"trace is {tr!r}")
    lam_min = herm_eigvalsh(rho)[0]
    if lam_min < -POSITIVITY_TOL:
        raise NotPositive(f"minimal eigenvalue {lam_min:.3e} is negative")
    return BipartiteState(int(dim_a), int(dim_b), np.ascontiguousarray(rho))


def _normalized(matrix, dim_a, dim_b):
    m = as_matrix(matrix)
    return new_bipartite(m / np.trace(m).real, dim_a, dim_b)


# -- block views --------------------------------------------------------------


def block_a(s, i, j):
    """Operator ``A_ij`` on H_A: ``A_ij[a, b] = rho[a*dim_b + i, b*dim_b + j]``."""
    if not (0 <= i < s.dim_b and 0 <= j < s.dim_b):
        raise IndexOutOfRange(f"block_a indices ({i}, {j}) outside range({s.dim_b})")
    return s.tensor()[:, i, :, j].copy()


def block_b(s, k, l):
    """Operator ``B_kl`` on H_B: ``B_kl[i, j] = rho[k*dim_b + i, l*dim_b + j]``."""
    if not (0 <= k < s.dim_a and 0 <= l < s.dim_a):
        raise IndexOutOfRange(f"block_b indices ({k}, {l}) outside range({s.dim_a})")
    return s.tensor()[k, :, l, :].copy()


def blocks_a(s):
    """All ``A_ij`` as an array of shape ``(dim_b, dim_b, dim_a, dim_a)``."""
    return np.ascontiguousarray(s.tensor().transpose(1, 3, 0, 2))


def blocks_b(s):
    """All ``B_kl`` as an array of shape ``(dim_a, dim_a, dim_b, dim_b)``."""
    return np.ascontiguousarray(s.tensor().transpose(0, 2, 1, 3))


def assemble_from_blocks_a(blocks):
    """Inverse of :func:`blocks_a`: ``sum_ij A_ij (x) |i'><j'|``."""
    blocks = np.asarray(blocks)
    db, _, da, _ = blocks.shape
    return blocks.transpose(2, 0, 3, 1).reshape(da * db, da * db)


def assemble_from_blocks_b(blocks):
    """Inverse of :func:`blocks_b`: ``sum_kl |k><l| (x) B_kl``."""
    blocks = np.asarray(blocks)
    da, _, db, _ = blocks.shape
    return blocks.transpose(0, 2, 1, 3).reshape(da * db, da * db)


# -- partial operations -------------------------------------------------------


def partial_transpose_a(s):
    r = s.tensor()
    return np.ascontiguousarray(r.transpose(2, 1, 0, 3).reshape(s.dim, s.dim))


def partial_transpose_b(s):
    r = s.tensor()
    return np.ascontiguousarray(r.transpose(0, 3, 2, 1).reshape(s.dim, s.dim))


def partial_trace_b(s):
    """Reduced state ``rho_A``."""
    return np.einsum("aibi->ab", s.tensor())


def partial_trace_a(s):
    """Reduced state ``rho_B``."""
    return np.einsum("aiaj->ij", s.tensor())


def swap_parties(s):
    """The same state with the roles of A and B exchanged (no revalidation)."""
    r = s.tensor().transpose(1, 0, 3, 2)
    return BipartiteState(s.dim_b, s.dim_a, np.ascontiguousarray(r.reshape(s.dim, s.dim)))


def local_unitary(s, u=None, v=None):
    """``(U (x) V) rho (U (x) V)^dagger``; either factor may be omitted."""
    u = np.eye(s.dim_a) if u is None else as_matrix(u)
    v = np.eye(s.dim_b) if v is None else as_matrix(v)
    w = kron(u, v)
    out = w @ s.rho @ dagger(w)
    return BipartiteState(s.dim_a, s.dim_b, np.ascontiguousarray(0.5 * (out + dagger(out))))


def is_pure(s, tol=POSITIVITY_TOL):
    return herm_eigvalsh(s.rho)[-1] >= 1.0 - tol


# -- constructors -------------------------------------------------------------


def _check_probabilities(weights):
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0 or np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
        raise BadProbabilities(f"weights {w} are not a probability vector")
    return np.clip(w, 0.0, None)


def _check_orthonormal_columns(kets):
    k = as_matrix(kets)
    if k.shape[1] > k.shape[0] or hs_norm(dagger(k) @ k - np.eye(k.shape[1])) > UNIT_NORM_TOL * 10:
        raise NotOrthonormal("kets are not orthonormal columns")
    return k


def _check_sigma(sigma, dim):
    m = as_matrix(sigma)
    if m.shape != (dim, dim):
        raise BadSigma(f"sigma of shape {m.shape}, expected ({dim}, {dim})")
    if hs_norm(m - dagger(m)) > HERMITICITY_TOL or abs(np.trace(m).real - 1.0) > TRACE_TOL:
        raise BadSigma("sigma is not a unit-trace Hermitian matrix")
    if herm_eigvalsh(m)[0] < -POSITIVITY_TOL:
        raise BadSigma("sigma is not positive semidefinite")
    return 0.5 * (m + dagger(m))


def make_cq(weights, kets, sigmas):
    """``sum_k p_k |k><k| (x) sigma_k`` with ``kets`` as columns in H_A."""
    w = _check_probabilities(weights)
    k = _check_orthonormal_columns(kets)
    if k.shape[1] != w.size or len(sigmas) != w.size:
        raise ShapeMismatch("weights, kets and sigmas must have equal length")
    dim_a = k.shape[0]
    dim_b = as_matrix(sigmas[0]).shape[0]
    rho = sum(
        p * kron(np.outer(k[:, i], k[:, i].conj()), _check_sigma(sig, dim_b))
        for i, (p, sig) in enumerate(zip(w, sigmas))
    )
    return new_bipartite(rho, dim_a, dim_b)


def make_qc(weights, kets, sigmas):
    """``sum_j q_j sigma_j (x) |j'><j'|`` with ``kets`` as columns in H_B."""
    w = _check_probabilities(weights)
    k = _check_orthonormal_columns(kets)
    if k.shape[1] != w.size or len(sigmas) != w.size:
        raise ShapeMismatch("weights, kets and sigmas must have equal length")
    dim_b = k.shape[0]
    dim_a = as_matrix(sigmas[0]).shape[0]
    rho = sum(
        p * kron(_check_sigma(sig, dim_a), np.outer(k[:, i], k[:, i].conj()))
        for i, (p, sig) in enumerate(zip(w, sigmas))
    )
    return new_bipartite(rho, dim_a, dim_b)


def make_product(rho_a, rho_b):
    ra = _check_sigma(rho_a, as_matrix(rho_a).shape[0])
    rb = _check_sigma(rho_b, as_matrix(rho_b).shape[0])
    return new_bipartite(kron(ra, rb), ra.shape[0], rb.shape[0])


def make_circulant(a11, a22, b11, b22, a12=0.0, b12=0.0):
    """The 2x2 circulant state

    ::

        [[a11, 0,   0,   a12],
         [0,   b11, b12, 0  ],
         [0,   b21, b22, 0  ],
         [a21, 0,   0,   a22]]

    with ``a21 = conj(a12)`` and ``b21 = conj(b12)``; the layout is already
    A-major.
    """
    a12 = complex(a12)
    b12 = complex(b12)
    rho = np.array(
        [
            [a11, 0, 0, a12],
            [0, b11, b12, 0],
            [0, b12.conjugate(), b22, 0],
            [a12.conjugate(), 0, 0, a22],
        ],
        dtype=np.complex128,
    )
    return new_bipartite(rho, 2, 2)


def _operator_norm(m):
    return float(np.sqrt(max(herm_eigvalsh(dagger(m) @ m)[-1], 0.0)))


def make_example1(rho11, d, t):
    """The 2 (x) n family

    ::

        [[rho11,                   sqrt(rho11) T M^(1/2)],
         [M^(1/2) T^dagger sqrt(rho11), M               ]] / Tr(rho11 + M)

    with ``M = sqrt(rho11) D D^dagger sqrt(rho11)``; ``D`` and ``T`` must be
    contractions.
    """
    r11 = as_matrix(rho11)
    d = as_matrix(d)
    t = as_matrix(t)
    for name, m in (("D", d), ("T", t)):
        if _operator_norm(m) > 1.0 + 1e-12:
            raise NotContraction(f"{name} has operator norm above 1")
    try:
        sq = psd_sqrt(r11)
    except NotPSD:
        raise
    m = sq @ d @ dagger(d) @ sq
    m = 0.5 * (m + dagger(m))
    msq = psd_sqrt(m)
    off = sq @ t @ msq
    rho = np.block([[r11, off], [dagger(off), m]])
    return _normalized(rho, 2, r11.shape[0])


def example3_matrix(a, b, c, d, e, f, g):
    """The 6x6 matrix of the 3 (x) 2 example, in its displayed (B-major) order."""
    e, f, g = complex(e), complex(f), complex(g)
    m = np.zeros((6, 6), dtype=np.complex128)
    m[np.arange(3), np.arange(3)] = [a, a, b]
    m[np.arange(3, 6), np.arange(3, 6)] = [c, c, d]
    for k, z in enumerate((e, f, g)):
        m[k, 3 + k] = z
        m[3 + k, k] = z.conjugate()
    return m


def b_major_to_a_major(matrix, dim_a, dim_b):
    """Permute a matrix indexed ``i_B * dim_a + a`` into A-major order."""
    m = as_matrix(matrix).reshape(dim_b, dim_a, dim_b, dim_a)
    return np.ascontiguousarray(m.transpose(1, 0, 3, 2).reshape(dim_a * dim_b, dim_a * dim_b))


def make_example3(a, b, c, d, e=0.0, f=0.0, g=0.0):
    """3 (x) 2 state with diagonal blocks ``A_00 = diag(a, a, b)``,
    ``A_11 = diag(c, c, d)``, ``A_01 = diag(e, f, g)``.

    The constraint ``a + c = b + d`` is not imposed.
    """
    rho = b_major_to_a_major(example3_matrix(a, b, c, d, e, f, g), 3, 2)
    return new_bipartite(rho, 3, 2)


def make_pure_schmidt(lambdas):
    """``sum_k lambda_k |k>|k'>`` in ``C^L (x) C^L`` with ``L = len(lambdas)``.

    Returns ``(PureState, BipartiteState)``.
    """
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size == 0 or np.any(lam < 0) or abs(np.sum(lam ** 2) - 1.0) > UNIT_NORM_TOL:
        raise BadNormalization(f"Schmidt coefficients {lam} do not square-sum to 1")
    n = lam.size
    psi = np.zeros(n * n, dtype=np.complex128)
    psi[np.arange(n) * n + np.arange(n)] = lam
    pure = PureState(n, n, psi, np.sort(lam)[::-1])
    return pure, pure.density()


def pure_from_vector(psi, dim_a, dim_b):
    """Wrap a state vector; the Schmidt coefficients come from its singular values."""
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if psi.size != dim_a * dim_b:
        raise ShapeMismatch("vector length does not match dims")
    if abs(np.linalg.norm(psi) - 1.0) > UNIT_NORM_TOL:
        raise BadNormalization("state vector is not normalized")
    amp = psi.reshape(dim_a, dim_b)
    rho_a = amp @ dagger(amp)
    lam = np.sqrt(np.clip(herm_eig(rho_a).values[::-1], 0.0, None))
    return PureState(dim_a, dim_b, psi, lam)


def random_state(dim_a, dim_b, rank=None, seed=None):
    """``G G^dagger / Tr(G G^dagger)`` for a seeded complex Gaussian ``G`` of shape (d, rank)."""
    d = dim_a * dim_b
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise BadRank(f"rank {rank} outside [1, {d}]")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    return _normalized(g @ dagger(g), dim_a, dim_b)


def random_density(dim, rng, rank=None):
    """Random ``dim x dim`` density matrix (helper for the generators)."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ dagger(g)
    return m / np.trace(m).real


def random_unitary(dim, rng):
    """Haar-random unitary via QR with the phase correction."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def werner(p):
    """``p |Phi+><Phi+| + (1 - p) I/4``."""
    phi = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)
    return new_bipartite(p * np.outer(phi, phi.conj()) + (1 - p) * np.eye(4) / 4, 2, 2)


def bell_state():
    """``|Phi+> = (|00> + |11>)/sqrt(2)``."""
    return werner(1.0)


def maximally_mixed(dim_a, dim_b):
    d = dim_a * dim_b
    return new_bipartite(np.eye(d) / d, dim_a, dim_b)


def ssppt_random(dim_a, dim_b, seed=None, side="b"):
    """Random state that is SSPPT by construction.

    On the operator side a random unitary ``W`` fixes a common eigenbasis,
    every coefficient block is ``S_kl = W D_kl W^dagger`` with a random complex
    diagonal ``D_kl``, and the diagonal blocks ``X_k`` are random positive
    definite matrices. ``rho = X^dagger X`` is normalized. With ``side="b"``
    the operator side is H_B (index side H_A); ``side="a"`` mirrors it.
    """
    rng = np.random.default_rng(seed)
    n_idx, n_op = (dim_a, dim_b) if side == "b" else (dim_b, dim_a)
    w = random_unitary(n_op, rng)
    x = np.zeros((n_idx * n_op, n_idx * n_op), dtype=np.complex128)
    for k in range(n_idx):
        xk = psd_sqrt(random_density(n_op, rng))
        x[k * n_op:(k + 1) * n_op, k * n_op:(k + 1) * n_op] = xk
        for l in range(k + 1, n_idx):
            d = rng.standard_normal(n_op) + 1j * rng.standard_normal(n_op)
            s = (w * d) @ dagger(w)
            x[k * n_op:(k + 1) * n_op, l * n_op:(l + 1) * n_op] = s @ xk
    rho = dagger(x) @ x
    rho = rho / np.trace(rho).real
    st = new_bipartite(rho, n_idx, n_op)
    return st if side == "b" else swap_parties(st)


# -- JSON ---------------------------------------------------------------------


def matrix_to_json(m):
    """``[[[re, im], ...], ...]`` nested lists (row-major)."""
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ShapeMismatch("matrix must be a nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _fmt(x):
    return "%.17g" % x


def dumps_matrix(m):
    """Compact JSON text of a matrix with 17 significant digits per number."""
    rows = (
        "[" + ",".join("[" + _fmt(z.real) + "," + _fmt(z.imag) + "]" for z in row) + "]"
        for row in np.asarray(m, dtype=np.complex128)
    )
    return "[" + ",\n ".join(rows) + "]"


def state_to_json(s):
    return (
        '{"dim_a": %d, "dim_b": %d, "matrix": ' % (s.dim_a, s.dim_b)
        + dumps_matrix(s.rho)
        + "}\n"
    )


def state_from_json(text):
    import json

    try:
        obj = json.loads(text)
        dim_a = int(obj["dim_a"])
        dim_b = int(obj["dim_b"])
        raw = obj["matrix"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ShapeMismatch(f"malformed state file: {exc}") from None
    return new_bipartite(matrix_from_json(raw), dim_a, dim_b)


def save_state(s, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(state_to_json(s))


def load_state(path):
    with open(path, encoding="utf-8") as fh:
        return state_from_json(fh.read())
