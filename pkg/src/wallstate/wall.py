"""Wall-state selection.

Two objectives are available.  ``Γ₁`` is the averaged initial purity-loss
acceleration of the logical factor, rescaled to be positive:

    Γ₁(w) = Σ_{i>0} Var_{|w⟩⟨w|⊗ρ_e}(O_i),   O_i = Σ_{b,c} g_ibc σ_b ⊗ σ_c,

so that ``⟨γ̈⟩ = −4 ν_n Γ₁`` with ``ν_n = 1/n_l − 1/(n_l(n_l+1))``.  ``Γ₂``
keeps only the logical/wall interaction, written through its operator-Schmidt
decomposition ``H_lw = Σ s_i C_i ⊗ D_i``:

    Γ₂(w) = Σ_i s_i² Var_w(D_i).

When the logical factor couples only through the wall the two coincide.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .linalg import CoeffTensor, Dims, DimensionError, decompose_hamiltonian, gellmann_basis, partial_trace
from .manifold import ComplexSphere, DescentConfig, DescentStalled, descend

log = logging.getLogger(__name__)

DEGENERACY_GAP = 1e-6


class DegeneracyError(ValueError):
    """Leading singular values too close for the analytic qubit wall."""


class LocalTermsError(ValueError):
    """Operator handed to the OSD still carries local or identity parts."""


def nu(n_l: int) -> float:
    return 1.0 / n_l - 1.0 / (n_l * (n_l + 1))


# ---------------------------------------------------------------------------
# Operator-Schmidt decomposition


@dataclass(frozen=True)
class OsdResult:
    s: np.ndarray
    C: np.ndarray
    """Logical operators, shape ``(n_u², n_l, n_l)``."""
    D: np.ndarray
    """Wall operators, shape ``(n_u², n_w, n_w)``."""

    def reconstruct(self) -> np.ndarray:
        return sum(s * np.kron(c, d) for s, c, d in zip(self.s, self.C, self.D))

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.s < 1e-12))


def _fix_sign(v: np.ndarray, tol: float = 1e-12) -> float:
    idx = np.flatnonzero(np.abs(v) > tol)
    return 1.0 if idx.size == 0 or v[idx[0]] > 0 else -1.0


def osd(H_lw: np.ndarray, dims: Dims, tol: float = 1e-10) -> OsdResult:
    """Operator-Schmidt decomposition of a logical/wall interaction.

    ``H_lw`` may act on the full space (then it must be ``⊗ 𝟙_e``) or on the
    logical ⊗ wall block only.  Singular values are the coefficients of the
    logical ⊗ wall operator, i.e. ``g_ij0 / √n_e``.
    """
    H_lw = np.asarray(H_lw, dtype=complex)
    if H_lw.shape[0] == dims.n_s:
        d2 = Dims(dims.n_l, dims.n_w, 1)
        scale = 1.0
    else:
        d2 = dims
        scale = 1.0 / np.sqrt(dims.n_e)
    g = decompose_hamiltonian(H_lw, d2).g
    if np.max(np.abs(g[:, :, 1:]), initial=0.0) > tol:
        raise LocalTermsError("operator acts nontrivially on the environment")
    G = g[:, :, 0] * scale
    local = max(abs(G[0, 0]), np.max(np.abs(G[1:, 0]), initial=0.0), np.max(np.abs(G[0, 1:]), initial=0.0))
    if local > tol:
        raise LocalTermsError("local or identity components present; pass the H_lw field of extract_terms")
    u, s, vh = np.linalg.svd(G[1:, 1:])
    nu2 = min(dims.n_l, dims.n_w) ** 2
    m = nu2 - 1
    sl, sw = gellmann_basis(dims.n_l), gellmann_basis(dims.n_w)
    C = np.empty((nu2, dims.n_l, dims.n_l), dtype=complex)
    D = np.empty((nu2, dims.n_w, dims.n_w), dtype=complex)
    for r in range(m):
        sign = _fix_sign(vh[r])
        C[r] = np.einsum("i,iab->ab", sign * u[:, r], sl[1:])
        D[r] = np.einsum("j,jab->ab", sign * vh[r], sw[1:])
    C[m] = sl[0]
    D[m] = sw[0]
    svals = np.concatenate([s[:m], [0.0]])
    return OsdResult(svals, C, D)


def lw_operator(coeff: CoeffTensor) -> np.ndarray:
    """``H_lw`` of a coefficient tensor as an operator on logical ⊗ wall."""
    dims = coeff.dims
    sl, sw = gellmann_basis(dims.n_l), gellmann_basis(dims.n_w)
    G = np.zeros((dims.n_l**2, dims.n_w**2))
    G[1:, 1:] = coeff.g[1:, 1:, 0] / np.sqrt(dims.n_e)
    return np.einsum("ij,iab,jcd->acbd", G, sl, sw).reshape(dims.n_s, dims.n_s)


def osd_of(coeff: CoeffTensor) -> OsdResult:
    return osd(lw_operator(coeff), coeff.dims)


# ---------------------------------------------------------------------------
# Objectives


def _var_terms(w, P, Q):
    ew = [np.vdot(w, q @ w).real for q in Q]
    return np.vdot(w, P @ w).real, ew


def _riemannian(w, e):
    """Project the Euclidean gradient ``e`` onto the sphere's tangent space."""
    return e - w * np.vdot(w, e)


class QuadraticVarianceObjective:
    """``f(w) = ⟨w|P|w⟩ − Σ_i ⟨w|Q_i|w⟩²`` with Hermitian ``P`` and ``Q_i``."""

    def __init__(self, P: np.ndarray, Q: np.ndarray):
        self.P = P
        self.Q = np.asarray(Q).reshape(-1, P.shape[0], P.shape[0])

    def __call__(self, w) -> float:
        p, ew = _var_terms(w, self.P, self.Q)
        return float(p - sum(x * x for x in ew))

    def grad(self, w) -> np.ndarray:
        _, ew = _var_terms(w, self.P, self.Q)
        e = 2 * self.P @ w
        for x, q in zip(ew, self.Q):
            e = e - 4 * x * (q @ w)
        return _riemannian(w, e)


@dataclass
class WallContext:
    """Precomputed data for ``Γ₁`` at fixed frame Hamiltonian and environment state."""

    coeff: CoeffTensor
    rho_e: np.ndarray
    tau: np.ndarray = field(init=False)
    nu_n: float = field(init=False)
    objective: QuadraticVarianceObjective = field(init=False)

    def __post_init__(self):
        dims = self.coeff.dims
        nw, ne = dims.n_w, dims.n_e
        if self.rho_e.shape != (ne, ne):
            raise DimensionError("environment state has the wrong dimension")
        se, sw = gellmann_basis(ne), gellmann_basis(nw)
        # τ_ck = tr(σ_c σ_k ρ_e)
        self.tau = np.einsum("cab,kbd,da->ck", se, se, self.rho_e, optimize=True)
        self.nu_n = nu(dims.n_l)
        g = self.coeff.g[1:].astype(complex)
        O = np.einsum("ibc,bxy,cuv->ixuyv", g, sw, se, optimize=True).reshape(-1, nw * ne, nw * ne)
        env = np.kron(np.eye(nw), self.rho_e)
        P = sum(partial_trace(o @ o @ env, (nw, ne), [0]) for o in O)
        Q = np.array([partial_trace(o @ env, (nw, ne), [0]) for o in O])
        P = 0.5 * (P + P.conj().T) if len(O) else np.zeros((nw, nw), dtype=complex)
        Q = 0.5 * (Q + Q.conj().transpose(0, 2, 1))
        self.objective = QuadraticVarianceObjective(P, Q)

    @classmethod
    def from_hamiltonian(cls, H, dims: Dims, rho_e) -> "WallContext":
        return cls(decompose_hamiltonian(H, dims), rho_e)


def gamma1(w, ctx: WallContext) -> float:
    return ctx.objective(w)


def grad_gamma1(w, ctx: WallContext) -> np.ndarray:
    return ctx.objective.grad(w)


def _gamma2_objective(res: OsdResult) -> QuadraticVarianceObjective:
    s2 = res.s**2
    P = np.einsum("i,iab,ibc->ac", s2, res.D, res.D)
    Q = np.sqrt(s2)[:, None, None] * res.D
    return QuadraticVarianceObjective(P, Q)


def gamma2(w, res: OsdResult) -> float:
    return _gamma2_objective(res)(w)


def grad_gamma2(w, res: OsdResult) -> np.ndarray:
    return _gamma2_objective(res).grad(w)


def mean_accel_from_gamma1(value: float, n_l: int) -> float:
    """Averaged initial purity acceleration ``⟨γ̈⟩ = −4 ν_n Γ₁``."""
    return -4.0 * nu(n_l) * value


# ---------------------------------------------------------------------------
# Optimization


def d1_eigenvector(res: OsdResult) -> np.ndarray:
    """Lowest-eigenvalue eigenvector of ``D_1`` (deterministic tie-break)."""
    _, vecs = np.linalg.eigh(res.D[0])
    return vecs[:, 0]


def optimal_qubit_wall(res: OsdResult, gap: float = DEGENERACY_GAP) -> np.ndarray:
    if res.D.shape[1] != 2:
        raise DimensionError("analytic wall state requires a qubit wall")
    if res.s[0] <= res.s[1] + gap:
        raise DegeneracyError("s1 is degenerate; optimize Γ1 with find_wall_state instead")
    return d1_eigenvector(res)


@dataclass(frozen=True)
class WallSearchConfig:
    objective: str = "gamma2"
    perturbation: float = 0.1
    descent: DescentConfig = DescentConfig(g_min=1e-24, max_iter=5000, eps_max=100.0)


@dataclass
class WallSearchResult:
    w: np.ndarray
    value: float
    objective: str
    init: str
    stalled: bool = False


def _normalize(v):
    return v / np.linalg.norm(v)


def find_wall_state(
    ctx: WallContext | None,
    res: OsdResult | None,
    cfg: WallSearchConfig = WallSearchConfig(),
    seed=0,
) -> WallSearchResult:
    """Descend ``Γ₁`` or ``Γ₂`` on the sphere from ``μ(|w_D⟩ + |w_r⟩/10)``.

    ``|w_D⟩`` is the chosen eigenvector of ``D_1``.  Without a usable OSD the
    start is a random state.
    """
    if cfg.objective == "gamma1":
        if ctx is None:
            raise ValueError("gamma1 objective needs a WallContext")
        f = ctx.objective
    elif cfg.objective == "gamma2":
        if res is None:
            raise ValueError("gamma2 objective needs an OSD")
        f = _gamma2_objective(res)
    else:
        raise ValueError(f"unknown objective {cfg.objective!r}")
    n = f.P.shape[0]
    rng = np.random.default_rng(seed)
    w_r = _normalize(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    if res is not None and not res.is_zero:
        w0 = _normalize(d1_eigenvector(res) + cfg.perturbation * w_r)
        init = "d1"
    else:
        if cfg.objective == "gamma2":
            log.warning("OSD is identically zero; Γ2 is flat, starting from a random state")
        w0 = w_r
        init = "random"
    stalled = False
    try:
        tr = descend(ComplexSphere(n), f, f.grad, w0, cfg.descent)
    except DescentStalled as exc:
        tr = exc.trace
        stalled = tr.grad_norms[-1] > 1e-10
    return WallSearchResult(tr.x, float(tr.cost), cfg.objective, init, stalled)
