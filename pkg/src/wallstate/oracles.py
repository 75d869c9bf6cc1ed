"""Independent reference implementations used by the test suite.

These favour transparency over speed: index loops, realignment instead of
basis expansions, brute-force time sampling and Monte Carlo averages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .linalg import Dims, gellmann_basis, haar_random_kets, kron, partial_trace
from .dynamics import liouvillian


@dataclass(frozen=True)
class OracleResult:
    estimate: float
    target: float
    error: float
    """Standard error (statistical) or exact residual."""
    samples: int
    statistical: bool
    tolerance: float

    @property
    def passed(self) -> bool:
        bound = 3 * self.error if self.statistical else self.tolerance
        return abs(self.estimate - self.target) <= bound


# ---------------------------------------------------------------------------
# Partial trace and OSD


def naive_partial_trace(op: np.ndarray, shape: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace by explicit summation over multi-indices."""
    shape = list(shape)
    keep = sorted(keep)
    drop = [i for i in range(len(shape)) if i not in keep]
    kd = [shape[i] for i in keep]
    dd = [shape[i] for i in drop]
    nk = int(np.prod(kd)) if kd else 1
    out = np.zeros((nk, nk), dtype=complex)
    strides = [int(np.prod(shape[i + 1 :])) for i in range(len(shape))]

    def flat(idx):
        return sum(i * s for i, s in zip(idx, strides))

    for r in np.ndindex(*kd) if kd else [()]:
        for c in np.ndindex(*kd) if kd else [()]:
            acc = 0j
            for d in np.ndindex(*dd) if dd else [()]:
                ri, ci = [0] * len(shape), [0] * len(shape)
                for pos, v in zip(keep, r):
                    ri[pos] = v
                for pos, v in zip(keep, c):
                    ci[pos] = v
                for pos, v in zip(drop, d):
                    ri[pos] = ci[pos] = v
                acc += op[flat(ri), flat(ci)]
            rr = int(np.ravel_multi_index(r, kd)) if kd else 0
            cc = int(np.ravel_multi_index(c, kd)) if kd else 0
            out[rr, cc] = acc
    return out


def realigned_schmidt_values(op: np.ndarray, n_a: int, n_b: int) -> np.ndarray:
    """Operator-Schmidt coefficients of ``op`` on ``A ⊗ B`` by realignment.

    Reshape ``op[(a b), (a' b')]`` to ``R[(a a'), (b b')]``; its singular values
    are the Schmidt coefficients w.r.t. Frobenius-orthonormal operator bases.
    """
    r = op.reshape(n_a, n_b, n_a, n_b).transpose(0, 2, 1, 3).reshape(n_a * n_a, n_b * n_b)
    return np.linalg.svd(r, compute_uv=False)


# ---------------------------------------------------------------------------
# Wall objectives from first principles


def gamma2_direct(w: np.ndarray, s: np.ndarray, D: np.ndarray) -> float:
    """``Σ s_i² (⟨D_i²⟩ − ⟨D_i⟩²)`` by direct expectation values."""
    total = 0.0
    for si, d in zip(s, D):
        m1 = np.vdot(w, d @ w).real
        m2 = np.vdot(w, d @ d @ w).real
        total += si**2 * (m2 - m1**2)
    return float(total)


def gamma1_coefficients(g: np.ndarray, dims: Dims, rho_w: np.ndarray, rho_e: np.ndarray) -> float:
    """Coefficient-sum form of the averaged acceleration objective.

    ``Σ_{i>0} g_ibc g_ijk (W_bj τ_ck − ⟨σ_b⟩⟨σ_j⟩⟨σ_c⟩⟨σ_k⟩)`` with
    ``W_bj = tr(σ_b σ_j ρ_w)`` and ``τ_ck = tr(σ_c σ_k ρ_e)``.
    """
    sw, se = gellmann_basis(dims.n_w), gellmann_basis(dims.n_e)
    W = np.einsum("bxy,jyz,zx->bj", sw, sw, rho_w)
    T = np.einsum("cxy,kyz,zx->ck", se, se, rho_e)
    mw = np.einsum("bxy,yx->b", sw, rho_w)
    me = np.einsum("cxy,yx->c", se, rho_e)
    total = 0j
    for i in range(1, g.shape[0]):
        G = g[i]
        total += np.einsum("bc,jk,bj,ck->", G, G, W, T)
        total -= np.einsum("bc,b,c->", G, mw, me) ** 2
    return float(total.real)


# ---------------------------------------------------------------------------
# Purity acceleration


def _apply_L(H, Ls, rho):
    out = -1j * (H @ rho - rho @ H)
    for L in Ls:
        LdL = L.conj().T @ L
        out = out + L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def purity_derivatives(rho0: np.ndarray, H: np.ndarray, dims: Dims, Ls=()) -> tuple[float, float]:
    """Exact ``(γ̇(0), γ̈(0))`` of the logical purity from the double generator."""
    l1 = _apply_L(H, Ls, rho0)
    l2 = _apply_L(H, Ls, l1)
    r = partial_trace(rho0, dims, "l")
    r1 = partial_trace(l1, dims, "l")
    r2 = partial_trace(l2, dims, "l")
    return 2 * float(np.trace(r1 @ r).real), 2 * float(np.trace(r2 @ r + r1 @ r1).real)


def purity_accel_fd(rho0, H, dims: Dims, Ls=(), h: float = 1e-3) -> float:
    """Second central difference of the simulated logical purity at ``t = 0``."""
    n = dims.total
    Lv = liouvillian(H, Ls)
    vals = []
    for t in (-h, 0.0, h):
        rho = (scipy.linalg.expm(Lv * t) @ rho0.reshape(-1)).reshape(n, n)
        rl = partial_trace(rho, dims, "l")
        vals.append(np.vdot(rl, rl).real)
    return float((vals[0] - 2 * vals[1] + vals[2]) / h**2)


def purity_accel_oracle(
    rho_w: np.ndarray,
    rho_e: np.ndarray,
    H: np.ndarray,
    dims: Dims,
    Ls=(),
    n_samples: int = 10_000,
    seed=0,
    target: float | None = None,
    rel_tol: float = 0.01,
) -> OracleResult:
    """Haar average of the exact ``γ̈(0)`` over pure logical states."""
    rng = np.random.default_rng(seed)
    rest = np.kron(rho_w, rho_e)
    vals = np.empty(n_samples)
    for s, psi in enumerate(haar_random_kets(dims.n_l, n_samples, rng)):
        rho0 = np.kron(np.outer(psi, psi.conj()), rest)
        vals[s] = purity_derivatives(rho0, H, dims, Ls)[1]
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(len(vals)))
    tgt = est if target is None else target
    return OracleResult(est, tgt, se, n_samples, False, rel_tol * abs(tgt))


# ---------------------------------------------------------------------------
# Haar moments


def haar_moment_check(n: int, moment: str, samples: int = 100_000, seed=0) -> list[OracleResult]:
    """Monte Carlo check of Haar moment identities, one result per entry.

    ``first``: ``⟨ρ_jk⟩ = δ_jk/n``.  ``second``: ``⟨ρ_jk ρ_cb⟩ =
    (δ_jk δ_bc + δ_jb δ_kc)/(n(n+1))``.  ``trace``: ``⟨tr(σ_i ρ σ_a ρ)⟩ =
    δ_ia/(n(n+1))`` over the traceless Gell-Mann elements, which includes the
    cross-kind zeros.
    """
    rng = np.random.default_rng(seed)
    psi = haar_random_kets(n, samples, rng)
    rho = np.einsum("sj,sk->sjk", psi, psi.conj())
    out = []

    def add(vals, target):
        vals = np.asarray(vals)
        for part, tgt in ((vals.real, target.real), (vals.imag, target.imag)):
            se = part.std(ddof=1) / np.sqrt(samples)
            out.append(OracleResult(float(part.mean()), float(tgt), float(max(se, 1e-15)), samples, True, 0.0))

    if moment == "first":
        for j in range(n):
            for k in range(n):
                add(rho[:, j, k], complex(j == k) / n)
    elif moment == "second":
        norm = n * (n + 1)
        for j, k, c, b in np.ndindex(n, n, n, n):
            tgt = ((j == k) * (b == c) + (j == b) * (k == c)) / norm
            add(rho[:, j, k] * rho[:, c, b], complex(tgt))
    elif moment == "trace":
        basis = gellmann_basis(n)[1:]
        sr = np.einsum("iab,sbc->siac", basis, rho)
        for i in range(len(basis)):
            for a in range(len(basis)):
                v = np.einsum("sab,sba->s", sr[:, i], sr[:, a])
                add(v, complex(i == a) / (n * (n + 1)))
    else:
        raise ValueError(f"unknown moment {moment!r}")
    return out


# ---------------------------------------------------------------------------
# Time-domain purity


def sampled_purity(rho0: np.ndarray, H: np.ndarray, dims: Dims, times) -> np.ndarray:
    """Logical purity at arbitrary times by exact unitary propagation."""
    vals, vecs = np.linalg.eigh(H)
    r = vecs.conj().T @ rho0 @ vecs
    out = []
    for t in np.asarray(times, dtype=float):
        ph = np.exp(-1j * vals * t)
        rt = vecs @ (ph[:, None] * r * ph.conj()[None, :]) @ vecs.conj().T
        rl = partial_trace(rt, dims, "l")
        out.append(np.vdot(rl, rl).real)
    return np.array(out)


def swap_logical(dims: Dims) -> np.ndarray:
    """Permutation on ``H ⊗ H`` exchanging the two logical factors."""
    nl, nw, ne = dims.shape
    n = dims.total
    P = np.zeros((n * n, n * n))
    for a, b, c, a2, b2, c2 in np.ndindex(nl, nw, ne, nl, nw, ne):
        src = ((a * nw + b) * ne + c) * n + (a2 * nw + b2) * ne + c2
        dst = ((a2 * nw + b) * ne + c) * n + (a * nw + b2) * ne + c2
        P[dst, src] = 1.0
    return P


def swap_overlap(psi_b, psi_j, psi_a, psi_i, P_swap) -> complex:
    """``(⟨ψ_b| ⊗ ⟨ψ_j|) SWAP_ll (|ψ_a⟩ ⊗ |ψ_i⟩)``."""
    return complex(np.vdot(np.kron(psi_b, psi_j), P_swap @ np.kron(psi_a, psi_i)))


def product_rho(rho_l, w, rho_e):
    return kron(rho_l, np.outer(w, np.conj(w)), rho_e)
