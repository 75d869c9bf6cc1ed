"""Lindblad dynamics with the wall stabilization schemes.

Closed systems are propagated exactly through the eigendecomposition of ``H``.
Open systems use the matrix exponential of the Liouvillian when it is small
enough (``n ≤ 32``) and an adaptive Runge–Kutta integrator otherwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp
from scipy.linalg import null_space

from .linalg import Dims, kron, logical_purity, partial_trace, projector

log = logging.getLogger(__name__)

SUPEROP_MAX_DIM = 32
RTOL, ATOL = 1e-10, 1e-12


class NumericalError(RuntimeError):
    """Propagation left the physical state space or the integrator failed."""


# ---------------------------------------------------------------------------
# Control schemes


@dataclass(frozen=True)
class NoControl:
    kind: str = "none"


@dataclass(frozen=True)
class Measurement:
    f: float
    w_hat: np.ndarray
    kind: str = "measurement"

    def __post_init__(self):
        if self.f <= 0:
            raise ValueError("measurement frequency must be positive")


@dataclass(frozen=True)
class Dissipation:
    eta: float
    w_hat: np.ndarray
    kind: str = "dissipation"

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("dissipation rate must be nonnegative")


@dataclass(frozen=True)
class Driving:
    kappa: float
    H_u: np.ndarray
    kind: str = "driving"


ControlScheme = NoControl | Measurement | Dissipation | Driving


# ---------------------------------------------------------------------------
# Generators


def dissipator(L: np.ndarray, rho: np.ndarray) -> np.ndarray:
    LdL = L.conj().T @ L
    return L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)


def lindblad_rhs(rho: np.ndarray, H: np.ndarray, Ls: Sequence[np.ndarray] = ()) -> np.ndarray:
    out = -1j * (H @ rho - rho @ H)
    for L in Ls:
        out = out + dissipator(L, rho)
    return out


def liouvillian(H: np.ndarray, Ls: Sequence[np.ndarray] = ()) -> np.ndarray:
    """Superoperator on row-major ``vec(ρ)``: ``vec(AρB) = (A ⊗ Bᵀ) vec(ρ)``."""
    n = H.shape[0]
    I = np.eye(n)
    out = -1j * (np.kron(H, I) - np.kron(I, H.T))
    for L in Ls:
        LdL = L.conj().T @ L
        out = out + np.kron(L, L.conj()) - 0.5 * (np.kron(LdL, I) + np.kron(I, LdL.T))
    return out


def zeno_hamiltonian(H: np.ndarray, Pi: np.ndarray) -> np.ndarray:
    Q = np.eye(H.shape[0]) - Pi
    return Pi @ H @ Pi + Q @ H @ Q


def wall_projector(w_hat: np.ndarray, dims: Dims) -> np.ndarray:
    return kron(np.eye(dims.n_l), projector(w_hat), np.eye(dims.n_e))


def wall_dissipators(w_hat: np.ndarray, dims: Dims) -> list[np.ndarray]:
    """``𝟙 ⊗ |ŵ⟩⟨ŵ_i^⊥| ⊗ 𝟙`` for an orthonormal basis of the complement of ``ŵ``."""
    w = np.asarray(w_hat, dtype=complex)
    if abs(np.linalg.norm(w) - 1) > 1e-10:
        raise ValueError("wall state must be normalized")
    perp = null_space(w.conj()[None, :])
    return [kron(np.eye(dims.n_l), np.outer(w, p.conj()), np.eye(dims.n_e)) for p in perp.T]


def drive_hamiltonian(H_u: np.ndarray, dims: Dims) -> np.ndarray:
    return kron(np.eye(dims.n_l), H_u, np.eye(dims.n_e))


# ---------------------------------------------------------------------------
# Propagation


class Propagator:
    """Exact or integrated propagation under a fixed generator."""

    def __init__(self, H: np.ndarray, Ls: Sequence[np.ndarray] = ()):
        self.H = H
        self.Ls = [L for L in Ls if np.any(L)]
        self.n = H.shape[0]
        self._cache: dict = {}
        if not self.Ls:
            self.vals, self.vecs = np.linalg.eigh(H)
            self.mode = "unitary"
        elif self.n <= SUPEROP_MAX_DIM:
            self.L = liouvillian(H, self.Ls)
            self.mode = "superop"
        else:
            self.mode = "ode"

    def unitary(self, dt: float) -> np.ndarray:
        if self.mode != "unitary":
            raise ValueError("open-system generator has no unitary propagator")
        return (self.vecs * np.exp(-1j * self.vals * dt)) @ self.vecs.conj().T

    def step(self, rho: np.ndarray, dt: float) -> np.ndarray:
        if dt == 0:
            return rho
        if self.mode == "unitary":
            key = round(dt, 14)
            U = self._cache.get(key)
            if U is None:
                U = self.unitary(dt)
                if len(self._cache) < 256:
                    self._cache[key] = U
            return U @ rho @ U.conj().T
        if self.mode == "superop":
            key = round(dt, 14)
            P = self._cache.get(key)
            if P is None:
                P = scipy.linalg.expm(self.L * dt)
                if len(self._cache) < 64:
                    self._cache[key] = P
            return (P @ rho.reshape(-1)).reshape(self.n, self.n)
        return self._ode(rho, dt)

    def _ode(self, rho, dt):
        n = self.n
        H, Ls = self.H, self.Ls
        LdL = sum(L.conj().T @ L for L in Ls)
        Heff = H - 0.5j * LdL

        def rhs(_, y):
            r = y.reshape(n, n)
            out = -1j * (Heff @ r - r @ Heff.conj().T)
            for L in Ls:
                out = out + L @ r @ L.conj().T
            return out.reshape(-1)

        sol = solve_ivp(rhs, (0.0, dt), rho.reshape(-1).astype(complex), method="DOP853", rtol=RTOL, atol=ATOL)
        if not sol.success:
            raise NumericalError(f"integrator failed: {sol.message}")
        r = sol.y[:, -1].reshape(n, n)
        return 0.5 * (r + r.conj().T)


@dataclass
class Trajectory:
    t: np.ndarray
    gamma: np.ndarray
    states: list | None = None
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        write_csv(path, ["t", "gamma_l"], [self.t, self.gamma])

    @property
    def min_gamma(self) -> float:
        return float(np.min(self.gamma))


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def write_csv(path, header: list[str], columns: list) -> None:
    rows = [",".join(header)]
    for vals in zip(*columns):
        rows.append(",".join(v if isinstance(v, str) else fmt(v) for v in vals))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


def _check_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0) or t[0] < 0:
        raise ValueError("time grid must be nonnegative and strictly increasing")
    return t


def _record(rho, dims, out_g, out_s, store):
    rl = partial_trace(rho, dims, "l")
    out_g.append(float(np.vdot(rl, rl).real))
    if store:
        out_s.append(rl)


def _validate(traj: Trajectory, rho_final: np.ndarray, dims: Dims) -> Trajectory:
    lo = 1.0 / dims.n_l - 1e-8
    if np.any(traj.gamma < lo) or np.any(traj.gamma > 1 + 1e-8) or not np.all(np.isfinite(traj.gamma)):
        raise NumericalError("purity left [1/n_l, 1]")
    if abs(np.trace(rho_final).real - 1) > 1e-8:
        raise NumericalError("trace drifted beyond 1e-8")
    return traj


def evolve(
    rho0: np.ndarray,
    H: np.ndarray,
    dims: Dims,
    t_grid,
    Ls: Sequence[np.ndarray] = (),
    scheme: ControlScheme | None = None,
    store_states: bool = False,
    meta: dict | None = None,
) -> Trajectory:
    """Logical purity along ``t_grid`` under ``H``, Lindblad operators and a control scheme."""
    t = _check_grid(t_grid)
    scheme = scheme or NoControl()
    Ls = list(Ls)
    events = None
    if isinstance(scheme, Driving):
        H = H + scheme.kappa * drive_hamiltonian(scheme.H_u, dims)
    elif isinstance(scheme, Dissipation):
        if scheme.eta > 0:
            Ls += [np.sqrt(scheme.eta) * L for L in wall_dissipators(scheme.w_hat, dims)]
    elif isinstance(scheme, Measurement):
        Pi = wall_projector(scheme.w_hat, dims)
        events = (scheme.f, Pi, np.eye(dims.total) - Pi)
    prop = Propagator(H, Ls)
    gam, states = [], []
    rho = np.asarray(rho0, dtype=complex)
    now = 0.0
    if events is None:
        for tk in t:
            rho = prop.step(rho, tk - now)
            now = tk
            _record(rho, dims, gam, states, store_states)
    else:
        f, Pi, Qp = events
        m = 1
        for tk in t:
            # apply every measurement with time ≤ tk
            while m / f <= tk * (1 + 1e-14):
                rho = prop.step(rho, m / f - now)
                rho = Pi @ rho @ Pi + Qp @ rho @ Qp
                now = m / f
                m += 1
            rho = prop.step(rho, tk - now)
            now = tk
            _record(rho, dims, gam, states, store_states)
    info = {"scheme": scheme.kind, "propagator": prop.mode}
    info.update(meta or {})
    traj = Trajectory(t, np.array(gam), states if store_states else None, info)
    return _validate(traj, rho, dims)


def evolve_measured(rho0, H, dims: Dims, w_hat, f: float, T: float, n_points: int = 600, Ls=()) -> Trajectory:
    if f <= 0:
        raise ValueError("measurement frequency must be positive")
    grid = np.linspace(0, T, n_points)
    return evolve(rho0, H, dims, grid, Ls, Measurement(f, np.asarray(w_hat)))


def time_to_threshold(traj: Trajectory, threshold: float) -> float | None:
    """First time with ``γ ≤ threshold``, linearly interpolated; ``None`` if never."""
    g, t = traj.gamma, traj.t
    idx = np.flatnonzero(g <= threshold)
    if idx.size == 0:
        return None
    k = int(idx[0])
    if k == 0:
        return float(t[0])
    g0, g1 = g[k - 1], g[k]
    return float(t[k - 1] + (g0 - threshold) / (g0 - g1) * (t[k] - t[k - 1]))


def product_state(rho_l, w, rho_e) -> np.ndarray:
    rho_w = projector(w) if np.ndim(w) == 1 else w
    return kron(rho_l, rho_w, rho_e)


def purity_at(rho: np.ndarray, dims: Dims) -> float:
    return logical_purity(rho, dims)


def drive_operator(w_hat: np.ndarray) -> np.ndarray:
    """``|ŵ⟩⟨ŵ| − (𝟙 − |ŵ⟩⟨ŵ|)``; nondegenerate only for a qubit wall."""
    P = projector(np.asarray(w_hat, dtype=complex))
    return 2 * P - np.eye(P.shape[0])
