"""Search for the logical/wall frame of the controllable system.

The cost ``J(U) = ‖Δ‖²`` measures every coefficient of the rotated Hamiltonian
``(U⊗𝟙)† H (U⊗𝟙)`` that couples the logical factor to the environment.  The
regularized cost adds ``η ‖H_lw‖²``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .linalg import (
    CoeffTensor,
    Dims,
    DimensionError,
    Terms,
    as_hermitian,
    decompose_hamiltonian,
    gellmann_basis,
    kron,
    random_unitary,
)
from .manifold import DescentConfig, DescentStalled, UnitaryGroup, descend, project_su

log = logging.getLogger(__name__)

STALL_GRAD_TOL = 1e-8


@dataclass(frozen=True)
class FrameSearchConfig:
    restarts: int = 8
    include_identity: bool = True
    """Also descend from the identity frame, so the result is never worse than it."""
    descent: DescentConfig = DescentConfig(g_min=1e-26, max_iter=5000)


class FrameProblem:
    """Hamiltonian, factorization and regularization weight of a frame search."""

    def __init__(self, H: np.ndarray, dims: Dims, eta_reg: float = 0.01):
        if eta_reg < 0:
            raise ValueError("eta_reg must be nonnegative")
        H = as_hermitian(H)
        dims.check(H)
        self.H = H
        self.dims = dims
        self.eta_reg = float(eta_reg)

    @cached_property
    def basis_s(self) -> np.ndarray:
        """Product basis σ_ij of the controllable block, index ``i·n_w² + j``."""
        sl, sw = gellmann_basis(self.dims.n_l), gellmann_basis(self.dims.n_w)
        n = self.dims.n_s
        return np.einsum("iab,jcd->ijacbd", sl, sw).reshape(-1, n, n)

    @cached_property
    def env_ops(self) -> np.ndarray:
        """``C_k = tr_e((𝟙 ⊗ σ_k) H)``; shape ``(n_e², n_s, n_s)``."""
        ns, ne = self.dims.n_s, self.dims.n_e
        se = gellmann_basis(ne)
        h4 = self.H.reshape(ns, ne, ns, ne)
        # C_k[x, y] = Σ_{e,f} σ_k[f, e] H[(x e), (y f)]
        return np.einsum("kfe,xeyf->kxy", se, h4, optimize=True)

    @cached_property
    def masks(self) -> tuple[np.ndarray, np.ndarray]:
        nl2, nw2 = self.dims.n_l**2, self.dims.n_w**2
        i = np.repeat(np.arange(nl2), nw2)
        j = np.tile(np.arange(nw2), nl2)
        return (i > 0), (i > 0) & (j > 0)

    def rotated_coeffs(self, U: np.ndarray) -> np.ndarray:
        """``g[ij, k] = tr(σ_ij U† C_k U)``, shape ``(n_s², n_e²)``."""
        if U.shape != (self.dims.n_s, self.dims.n_s):
            raise DimensionError(f"frame unitary shape {U.shape} != ({self.dims.n_s},)*2")
        m = np.einsum("xa,kxy,yb->kab", U.conj(), self.env_ops, U, optimize=True)
        return np.einsum("sba,kab->sk", self.basis_s, m, optimize=True).real

    def costs(self, U: np.ndarray) -> tuple[float, float]:
        """``(J, ‖H_lw‖²)`` at ``U``."""
        g = self.rotated_coeffs(U)
        mj, mlw = self.masks
        return float(np.sum(g[mj, 1:] ** 2)), float(np.sum(g[mlw, 0] ** 2))

    def cost_J(self, U) -> float:
        return self.costs(U)[0]

    def cost_J_reg(self, U) -> float:
        j, lw = self.costs(U)
        return j + self.eta_reg * lw

    def _omega(self, U, eta: float) -> np.ndarray:
        g = self.rotated_coeffs(U)
        mj, mlw = self.masks
        # P_k = Σ_{ij∈S} g_ijk σ_ij, then A-weighted sum U P_k U†
        w = np.zeros_like(g)
        w[mj, 1:] = g[mj, 1:]
        if eta:
            w[mlw, 0] = eta * g[mlw, 0]
        p = np.einsum("sk,sab->kab", w, self.basis_s, optimize=True)
        a = np.einsum("xa,kab,yb->kxy", U, p, U.conj(), optimize=True)
        c = self.env_ops
        omega = -2.0 * np.sum(a @ c - c @ a, axis=0)
        return 0.5 * (omega - omega.conj().T)

    def grad_J(self, U) -> np.ndarray:
        return self._omega(U, 0.0) @ U

    def grad_J_reg(self, U) -> np.ndarray:
        return self._omega(U, self.eta_reg) @ U

    def rotate(self, U) -> np.ndarray:
        big = kron(U, np.eye(self.dims.n_e))
        return big.conj().T @ self.H @ big


@dataclass
class FrameSolution:
    U_hat: np.ndarray
    H_hat: np.ndarray
    coeff: CoeffTensor
    J: float
    J_reg: float
    lw_norm2: float
    stalled: bool = False
    restart_costs: list = field(default_factory=list)


def _solution(prob: FrameProblem, U, stalled=False, restart_costs=()) -> FrameSolution:
    H_hat = prob.rotate(U)
    coeff = decompose_hamiltonian(H_hat, prob.dims)
    j, lw = prob.costs(U)
    return FrameSolution(U, H_hat, coeff, j, j + prob.eta_reg * lw, lw, stalled, list(restart_costs))


def find_wall_frame(prob: FrameProblem, cfg: FrameSearchConfig = FrameSearchConfig(), seed=0) -> FrameSolution:
    """Minimize ``J_reg`` over SU(n_s) from several starting frames; keep the best."""
    n = prob.dims.n_s
    man = UnitaryGroup(n)
    streams = np.random.SeedSequence(seed).spawn(cfg.restarts)
    starts = [np.eye(n, dtype=complex)] if cfg.include_identity else []
    starts += [project_su(random_unitary(n, np.random.default_rng(s))) for s in streams]
    best, best_cost, any_stall, costs = None, np.inf, False, []
    for r, U0 in enumerate(starts):
        stalled = False
        try:
            tr = descend(man, prob.cost_J_reg, prob.grad_J_reg, U0, cfg.descent)
        except DescentStalled as exc:
            tr = exc.trace
            # a failed line search with a negligible gradient is convergence at
            # the floating-point floor of the cost, not a stall
            stalled = tr.grad_norms[-1] > STALL_GRAD_TOL * max(1.0, tr.cost)
        c = tr.cost
        costs.append(c)
        log.debug("frame restart %d: J_reg=%.6e iters=%d reason=%s", r, c, tr.iterations, tr.reason)
        if c < best_cost:
            best, best_cost, any_stall = tr.x, c, stalled
    flag = any_stall
    if flag:
        log.warning("frame search stalled; returning best point with J_reg=%.6e", best_cost)
    return _solution(prob, best, flag, costs)


def identity_solution(prob: FrameProblem) -> FrameSolution:
    return _solution(prob, np.eye(prob.dims.n_s, dtype=complex))


# ---------------------------------------------------------------------------
# Perfect wall detection


def wall_operators(H: np.ndarray, dims: Dims, tol: float = 1e-12) -> list[np.ndarray]:
    """Wall-side factors of the local wall term and of both wall couplings."""
    coeff = decompose_hamiltonian(H, dims)
    g = coeff.g
    sw = gellmann_basis(dims.n_w)
    ops = []

    def op(vec):
        return np.einsum("j,jab->ab", vec.astype(complex), sw)

    local = g[0, :, 0].copy()
    local[0] = 0.0
    if np.max(np.abs(local)) > tol:
        ops.append(op(local))
    for i in range(1, g.shape[0]):
        v = g[i, :, 0].copy()
        v[0] = 0.0
        if np.max(np.abs(v)) > tol:
            ops.append(op(v))
    for k in range(1, g.shape[2]):
        v = g[0, :, k].copy()
        v[0] = 0.0
        if np.max(np.abs(v)) > tol:
            ops.append(op(v))
    return ops


def detect_perfect_wall(H_or_terms, dims: Dims, tol: float = 1e-8) -> np.ndarray | None:
    """Common eigenvector of all wall-side operators, or ``None``.

    Requires ``Δ = 0``; a Hamiltonian with a nonzero logical/environment coupling
    has no perfect wall state in the given frame.
    """
    H = H_or_terms.total() if isinstance(H_or_terms, Terms) else np.asarray(H_or_terms)
    coeff = decompose_hamiltonian(H, dims)
    if np.sqrt(coeff.delta_norm2()) > tol:
        return None
    ops = wall_operators(H, dims)
    n = dims.n_w
    if not ops:
        v = np.zeros(n, dtype=complex)
        v[0] = 1.0
        return v
    for a in ops:
        for b in ops:
            if np.linalg.norm(a @ b - b @ a) > tol:
                return None
    # generic combination of commuting Hermitian operators separates joint eigenspaces
    weights = np.sqrt(np.arange(2, len(ops) + 2, dtype=float))
    mix = sum(w * a for w, a in zip(weights, ops))
    _, vecs = np.linalg.eigh(mix)
    for v in vecs.T:
        if all(np.linalg.norm(a @ v - np.vdot(v, a @ v) * v) < tol for a in ops):
            return v
    return None
