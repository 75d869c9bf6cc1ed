"""Linear algebra over tripartite Hilbert spaces.

The ambient space is ordered logical (leftmost) ⊗ wall ⊗ environment (rightmost).
Operators are plain complex ``numpy`` arrays; the helpers here validate and
normalize them at the boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10

_AXES = {"l": 0, "w": 1, "e": 2}


class DimensionError(ValueError):
    """Operator shape incompatible with the declared factorization."""


class HermiticityError(ValueError):
    """Operator deviates from Hermitian beyond construction tolerance."""


@dataclass(frozen=True)
class Dims:
    """Factor dimensions ``(n_l, n_w, n_e)``."""

    n_l: int
    n_w: int
    n_e: int = 1

    def __post_init__(self):
        for name in ("n_l", "n_w", "n_e"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DimensionError(f"{name} must be a positive integer, got {v!r}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_l, self.n_w, self.n_e)

    @property
    def total(self) -> int:
        return self.n_l * self.n_w * self.n_e

    @property
    def n_s(self) -> int:
        """Dimension of the controllable block (logical ⊗ wall)."""
        return self.n_l * self.n_w

    def check(self, op: np.ndarray) -> None:
        if op.ndim != 2 or op.shape != (self.total, self.total):
            raise DimensionError(f"operator of shape {op.shape} does not match dims {self.shape}")


def as_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(M + M†)/2`` if ``M`` is Hermitian within ``tol``; raise otherwise."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    resid = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if resid > tol * scale:
        raise HermiticityError(f"hermiticity residual {resid:.3e} exceeds {tol:.1e}")
    return 0.5 * (m + m.conj().T)


def as_density(rho, tol: float = TRACE_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, no eigenvalue below ``-tol``."""
    rho = as_hermitian(rho, tol=max(tol, HERMITIAN_TOL))
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace {tr!r} differs from 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def kron(*ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def ket(n: int, index: int) -> np.ndarray:
    v = np.zeros(n, dtype=complex)
    v[index] = 1.0
    return v


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


# ---------------------------------------------------------------------------
# Hermitian operator basis


@lru_cache(maxsize=None)
def _gellmann_cached(n: int) -> np.ndarray:
    basis = [np.eye(n, dtype=complex) / np.sqrt(n)]
    s = 1 / np.sqrt(2)
    for j in range(n):
        for k in range(j):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = m[k, j] = s
            basis.append(m)
    for j in range(n):
        for k in range(j + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = -1j * s
            m[k, j] = 1j * s
            basis.append(m)
    for k in range(1, n):
        d = np.zeros(n)
        d[:k] = 1.0
        d[k] = -k
        basis.append(np.diag(d / np.sqrt(k * (k + 1))).astype(complex))
    out = np.array(basis)
    out.setflags(write=False)
    return out


def gellmann_basis(n: int) -> np.ndarray:
    """Orthonormal Hermitian basis of ``n×n`` matrices, shape ``(n², n, n)``.

    Order: ``𝟙/√n``; symmetric ``(|j⟩⟨k| + |k⟩⟨j|)/√2`` for ``k < j`` in
    lexicographic ``(j, k)`` order; antisymmetric ``(−i|j⟩⟨k| + i|k⟩⟨j|)/√2``
    for ``j < k``; diagonal ``(Σ_{m<k}|m⟩⟨m| − k|k⟩⟨k|)/√(k(k+1))`` for
    ``k = 1..n−1``.  For ``n = 2`` this is ``(𝟙, σx, σy, σz)/√2``.

    ``n = 1`` is accepted as the trivial basis ``{[1]}`` so that a missing
    environment factor can be handled uniformly.
    """
    if int(n) != n or n < 1:
        raise DimensionError(f"basis dimension must be a positive integer, got {n!r}")
    return _gellmann_cached(int(n))


def gellmann_basis_strict(n: int) -> np.ndarray:
    """As :func:`gellmann_basis` but rejecting ``n < 2``."""
    if n < 2:
        raise DimensionError("gellmann basis requires n >= 2")
    return gellmann_basis(n)


# ---------------------------------------------------------------------------
# Partial trace


def partial_trace(op: np.ndarray, dims: Dims | Iterable[int], keep) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    ``dims`` is a :class:`Dims` or a sequence of factor sizes.  ``keep`` holds
    factor labels (``"l"``, ``"w"``, ``"e"``) or integer positions.  Kept
    factors retain their original order.
    """
    shape = dims.shape if isinstance(dims, Dims) else tuple(int(d) for d in dims)
    op = np.asarray(op)
    total = int(np.prod(shape))
    if op.shape != (total, total):
        raise DimensionError(f"operator shape {op.shape} does not match factors {shape}")
    if isinstance(keep, str):
        keep = list(keep)
    keep_idx = sorted({_AXES[k] if isinstance(k, str) else int(k) for k in keep})
    if any(k < 0 or k >= len(shape) for k in keep_idx):
        raise DimensionError(f"keep indices {keep_idx} out of range for {len(shape)} factors")
    m = len(shape)
    t = op.reshape(shape + shape)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:m])
    col = list(letters[m : 2 * m])
    for i in range(m):
        if i not in keep_idx:
            col[i] = row[i]
    out_sub = "".join(row[i] for i in keep_idx) + "".join(col[i] for i in keep_idx)
    res = np.einsum("".join(row) + "".join(col) + "->" + out_sub, t)
    d = int(np.prod([shape[i] for i in keep_idx])) if keep_idx else 1
    return res.reshape(d, d)


# ---------------------------------------------------------------------------
# Coefficient tensors


@dataclass(frozen=True)
class CoeffTensor:
    """Real coefficients ``g[i, j, k] = tr((σ_i ⊗ σ_j ⊗ σ_k) H)``."""

    dims: Dims
    g: np.ndarray

    def __post_init__(self):
        exp = (self.dims.n_l**2, self.dims.n_w**2, self.dims.n_e**2)
        if self.g.shape != exp:
            raise DimensionError(f"coefficient shape {self.g.shape} != {exp}")

    def reconstruct(self) -> np.ndarray:
        return reconstruct(self)

    def delta_norm2(self) -> float:
        """‖Δ‖² : all terms with a logical and an environment index."""
        return float(np.sum(self.g[1:, :, 1:] ** 2))

    def lw_norm2(self) -> float:
        """‖H_lw‖²."""
        return float(np.sum(self.g[1:, 1:, 0] ** 2))


def decompose_hamiltonian(H: np.ndarray, dims: Dims) -> CoeffTensor:
    """Expand ``H`` in the product Gell-Mann basis of ``dims``."""
    H = as_hermitian(H)
    dims.check(H)
    nl, nw, ne = dims.shape
    sl, sw, se = gellmann_basis(nl), gellmann_basis(nw), gellmann_basis(ne)
    # tr(A H) = Σ A[x, y] H[y, x]; A = σ_i ⊗ σ_j ⊗ σ_k
    h6 = H.reshape(nl, nw, ne, nl, nw, ne)
    t = np.einsum("kef,bdface->bdack", se, h6, optimize=True)
    t = np.einsum("jcd,bdack->bajk", sw, t, optimize=True)
    g = np.einsum("iab,bajk->ijk", sl, t, optimize=True)
    return CoeffTensor(dims, np.ascontiguousarray(g.real))


def reconstruct(coeff: CoeffTensor) -> np.ndarray:
    nl, nw, ne = coeff.dims.shape
    sl, sw, se = gellmann_basis(nl), gellmann_basis(nw), gellmann_basis(ne)
    t = np.einsum("ijk,kef->ijef", coeff.g.astype(complex), se, optimize=True)
    t = np.einsum("ijef,jcd->icedf", t, sw, optimize=True)
    t = np.einsum("icedf,iab->acebdf", t, sl, optimize=True)
    n = coeff.dims.total
    return t.reshape(n, n)


class Terms(NamedTuple):
    """Partition of a Hamiltonian by the index pattern of its coefficients.

    ``offset`` holds the multiple of the identity so that the fields sum to the
    source operator.
    """

    l: np.ndarray
    w: np.ndarray
    e: np.ndarray
    lw: np.ndarray
    we: np.ndarray
    delta: np.ndarray
    offset: np.ndarray

    def total(self) -> np.ndarray:
        return sum(self)


def _masked(coeff: CoeffTensor, mask: np.ndarray) -> np.ndarray:
    return reconstruct(CoeffTensor(coeff.dims, np.where(mask, coeff.g, 0.0)))


def extract_terms(coeff: CoeffTensor) -> Terms:
    g = coeff.g
    i = np.arange(g.shape[0])[:, None, None] > 0
    j = np.arange(g.shape[1])[None, :, None] > 0
    k = np.arange(g.shape[2])[None, None, :] > 0
    return Terms(
        l=_masked(coeff, i & ~j & ~k),
        w=_masked(coeff, ~i & j & ~k),
        e=_masked(coeff, ~i & ~j & k),
        lw=_masked(coeff, i & j & ~k),
        we=_masked(coeff, ~i & j & k),
        delta=_masked(coeff, i & k),
        offset=_masked(coeff, ~i & ~j & ~k),
    )


# ---------------------------------------------------------------------------
# States


def purity(rho: np.ndarray) -> float:
    """``tr(ρ²)``, computed as the squared Frobenius norm (valid for Hermitian ρ)."""
    return float(np.vdot(rho, rho).real)


def logical_purity(rho: np.ndarray, dims: Dims) -> float:
    return purity(partial_trace(rho, dims, "l"))


def thermal_state(H: np.ndarray, beta: float) -> np.ndarray:
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    H = as_hermitian(H)
    vals, vecs = np.linalg.eigh(H)
    p = np.exp(-beta * (vals - vals.min()))
    p /= p.sum()
    rho = (vecs * p) @ vecs.conj().T
    return 0.5 * (rho + rho.conj().T)


def haar_random_ket(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def haar_random_kets(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent Haar kets as rows."""
    v = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def haar_random_pure(n: int, rng: np.random.Generator) -> np.ndarray:
    return projector(haar_random_ket(n, rng))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


# ---------------------------------------------------------------------------
# Spin operators

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def spin_op(N: int, i: int, axis: str) -> np.ndarray:
    """``J_i^axis`` on an ``N``-site spin-½ chain; sites are 1-based."""
    if not 1 <= i <= N:
        raise DimensionError(f"site {i} outside 1..{N}")
    return kron(np.eye(2 ** (i - 1)), 0.5 * PAULI[axis], np.eye(2 ** (N - i)))


def pauli_string(N: int, ops: dict[int, str]) -> np.ndarray:
    """Tensor product of Pauli matrices at the given 1-based sites."""
    return kron(*[PAULI[ops.get(s, "i")] for s in range(1, N + 1)])


def spin32_op(axis: str) -> np.ndarray:
    """Spin-3/2 operators in the basis ``m = 3/2, 1/2, −1/2, −3/2``."""
    m = np.array([1.5, 0.5, -0.5, -1.5])
    if axis == "z":
        return np.diag(m).astype(complex)
    # ⟨m+1|J+|m⟩ = √(j(j+1) − m(m+1))
    jp = np.zeros((4, 4), dtype=complex)
    for c in range(1, 4):
        jp[c - 1, c] = np.sqrt(3.75 - m[c] * (m[c] + 1))
    if axis == "x":
        return 0.5 * (jp + jp.conj().T)
    if axis == "y":
        return -0.5j * (jp - jp.conj().T)
    raise ValueError(f"unknown axis {axis!r}")
