"""Dynamical decoupling on the logical factor.

Universal cycles flip the logical factor with ``X, Z, X, Z`` at the end of each
quarter cycle; selective cycles use ``X`` at the end of each half cycle.  Pulses
are rectangular with Pauli generators, so amplitude ``κ_p`` held for ``τ`` with
``κ_p τ = π/2`` gives ``exp(−iπ/2 P) = −iP``, a flip up to a global phase.

For ``n_l = 2^m`` the flips are collective (``X^{⊗m}``, ``Z^{⊗m}``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import Propagator, Trajectory, _check_grid, _record, _validate, drive_hamiltonian
from .linalg import PAULI, Dims, DimensionError, as_hermitian, decompose_hamiltonian, kron

PULSES_PER_CYCLE = {"universal": 4, "selective": 2}
DEFAULT_DUTY = 0.2


class ScheduleError(ValueError):
    """Pulses overlap or the cycle parameters are inconsistent."""


class UnsupportedLogicalDimension(DimensionError):
    pass


@dataclass(frozen=True)
class DdConfig:
    """Cycle parameters.

    ``duty`` is the fraction of the cycle during which some pulse is on; the
    pulse length is ``τ = duty·T / pulses_per_cycle``.  Passing ``kappa_p``
    instead fixes ``τ = π/(2κ_p)``.
    """

    mode: str = "universal"
    f: float = 10.0
    duty: float = DEFAULT_DUTY
    kappa_p: float | None = None
    ideal: bool = False
    wall_kappa: float = 0.0
    H_u: np.ndarray | None = None
    drive_during_pulses: bool = True

    def __post_init__(self):
        if self.mode not in PULSES_PER_CYCLE:
            raise ValueError(f"mode must be universal or selective, got {self.mode!r}")
        if not self.f > 0:
            raise ValueError("cycle frequency must be positive")
        if self.wall_kappa and self.H_u is None:
            raise ValueError("wall drive requested without H_u")
        if not self.ideal and self.tau * self.pulses_per_cycle >= self.T:
            raise ScheduleError(f"pulses of length {self.tau:.3g} overlap in a cycle of {self.T:.3g}")

    @property
    def T(self) -> float:
        return 1.0 / self.f

    @property
    def pulses_per_cycle(self) -> int:
        return PULSES_PER_CYCLE[self.mode]

    @property
    def tau(self) -> float:
        if self.ideal:
            return 0.0
        if self.kappa_p is not None:
            return np.pi / (2.0 * self.kappa_p)
        return self.duty * self.T / self.pulses_per_cycle

    @property
    def amplitude(self) -> float:
        return np.inf if self.ideal else np.pi / (2.0 * self.tau)

    def describe(self) -> dict:
        """Run metadata, including the pulse-angle convention in use."""
        return dict(
            mode=self.mode,
            f=self.f,
            T=self.T,
            ideal=self.ideal,
            tau=self.tau,
            kappa_p=None if self.ideal else self.amplitude,
            duty_per_cycle=0.0 if self.ideal else self.tau * self.pulses_per_cycle / self.T,
            pulse_convention="Pauli generator, kappa_p*tau = pi/2, exp(-i pi/2 P) = -iP",
            wall_kappa=self.wall_kappa,
            drive_during_pulses=self.drive_during_pulses,
        )


@dataclass(frozen=True)
class Segment:
    """Constant control Hamiltonian for ``duration``, or an instantaneous kick."""

    duration: float
    H_ctrl: np.ndarray | None = None
    kick: np.ndarray | None = None
    drive: bool = True
    label: str = "free"


@dataclass
class PulseSchedule:
    segments: list[Segment]
    T: float
    meta: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(sum(s.duration for s in self.segments))


def logical_paulis(dims: Dims) -> tuple[np.ndarray, np.ndarray]:
    """Collective ``X`` and ``Z`` on the logical factor, embedded in the full space."""
    m = int(round(np.log2(dims.n_l))) if dims.n_l > 1 else 0
    if dims.n_l < 2 or 2**m != dims.n_l:
        raise UnsupportedLogicalDimension(f"DD needs n_l = 2^m, got n_l={dims.n_l}")
    X = kron(*[PAULI["x"]] * m)
    Z = kron(*[PAULI["z"]] * m)
    rest = np.eye(dims.n_w * dims.n_e)
    return np.kron(X, rest), np.kron(Z, rest)


def _pulse_order(mode: str) -> list[str]:
    return ["x", "z", "x", "z"] if mode == "universal" else ["x", "x"]


def build_pulse_schedule(cfg: DdConfig, dims: Dims) -> PulseSchedule:
    """Free evolution then a pulse closing each of the equal sub-intervals."""
    X, Z = logical_paulis(dims)
    ops = {"x": X, "z": Z}
    k = cfg.pulses_per_cycle
    sub = cfg.T / k
    segs = []
    for axis in _pulse_order(cfg.mode):
        if cfg.ideal:
            segs.append(Segment(sub))
            segs.append(Segment(0.0, kick=ops[axis], label=axis))
        else:
            segs.append(Segment(sub - cfg.tau))
            segs.append(Segment(cfg.tau, H_ctrl=cfg.amplitude * ops[axis], drive=cfg.drive_during_pulses, label=axis))
    for s in segs:
        if s.kick is None and not s.duration > 0:
            raise ScheduleError("non-positive segment duration")
    return PulseSchedule(segs, cfg.T, cfg.describe())


def dd_cycle_ideal(H: np.ndarray, T: float, mode: str, dims: Dims | None = None) -> np.ndarray:
    """One cycle with instantaneous flips, first pulse applied last in time order."""
    H = as_hermitian(H)
    if dims is None:
        n = H.shape[0]
        if n % 2:
            raise UnsupportedLogicalDimension("odd total dimension has no logical qubit")
        dims = Dims(2, n // 2, 1)
    if dims.n_l != 2:
        raise UnsupportedLogicalDimension(f"ideal cycle is defined for a logical qubit, got n_l={dims.n_l}")
    dims.check(H)
    X, Z = logical_paulis(dims)
    k = PULSES_PER_CYCLE[mode] if mode in PULSES_PER_CYCLE else None
    if k is None:
        raise ValueError(f"unknown mode {mode!r}")
    vals, vecs = np.linalg.eigh(H)
    free = (vecs * np.exp(-1j * vals * T / k)) @ vecs.conj().T
    U = np.eye(H.shape[0], dtype=complex)
    for axis in _pulse_order(mode):
        U = (X if axis == "x" else Z) @ free @ U
    return U


class _ScheduleRunner:
    def __init__(self, H, dims: Dims, sched: PulseSchedule, cfg: DdConfig, Ls):
        drive = cfg.wall_kappa * drive_hamiltonian(cfg.H_u, dims) if cfg.wall_kappa else 0.0
        self.sched = sched
        self.n = H.shape[0]
        self.ops = []
        cache: dict = {}
        for s in sched.segments:
            if s.kick is not None:
                self.ops.append(("kick", 0.0, s.kick))
                continue
            Hs = H + (drive if s.drive else 0.0)
            if s.H_ctrl is not None:
                Hs = Hs + s.H_ctrl
            key = (s.label, s.drive)
            prop = cache.get(key)
            if prop is None:
                prop = cache[key] = Propagator(Hs, Ls)
            self.ops.append(("free", s.duration, prop))
        self.unitary = all(op[2].mode == "unitary" for op in self.ops if op[0] == "free")
        self.starts = np.concatenate([[0.0], np.cumsum([op[1] for op in self.ops])])
        self._cycle = None

    def cycle_unitary(self) -> np.ndarray:
        if self._cycle is None:
            self._cycle = self.partial_unitary(len(self.ops), 0.0)
        return self._cycle

    def partial_unitary(self, upto: int, extra: float) -> np.ndarray:
        """Ops ``0..upto−1`` then ``extra`` time into op ``upto``."""
        U = np.eye(self.n, dtype=complex)
        for kind, dur, obj in self.ops[:upto]:
            U = (obj if kind == "kick" else obj.unitary(dur)) @ U
        if extra > 0:
            U = self.ops[upto][2].unitary(extra) @ U
        return U

    def advance_partial(self, rho, r0: float, r1: float):
        """Evolve from offset ``r0`` to ``r1`` within one cycle (kicks at ``r1`` excluded)."""
        for (kind, dur, obj), s in zip(self.ops, self.starts[:-1]):
            e = s + dur
            if kind == "kick":
                if r0 <= s < r1:
                    rho = obj @ rho @ obj.conj().T
                continue
            lo, hi = max(s, r0), min(e, r1)
            if hi > lo:
                rho = obj.step(rho, hi - lo)
        return rho


def cycle_unitary(H: np.ndarray, dims: Dims, cfg: DdConfig) -> np.ndarray:
    """Propagator of one full cycle of the schedule (closed system)."""
    H = as_hermitian(H)
    dims.check(H)
    run = _ScheduleRunner(H, dims, build_pulse_schedule(cfg, dims), cfg, [])
    return run.cycle_unitary()


def evolve_dd(
    rho0: np.ndarray,
    H: np.ndarray,
    dims: Dims,
    cfg: DdConfig,
    t_grid,
    Ls=(),
    store_states: bool = False,
) -> Trajectory:
    """Logical purity along ``t_grid`` under the pulse schedule of ``cfg``.

    Each segment is propagated exactly.  Whole cycles are applied as a single
    cycle operator when the dynamics is unitary.  Pulses that end exactly at a
    grid time are included before recording.
    """
    t = _check_grid(t_grid)
    H = as_hermitian(H)
    dims.check(H)
    sched = build_pulse_schedule(cfg, dims)
    run = _ScheduleRunner(H, dims, sched, cfg, list(Ls))
    T = cfg.T
    rho = np.asarray(rho0, dtype=complex)
    gam, states = [], []
    cycles_done = 0
    # rho_b is the state at the last recorded cycle boundary
    rho_b = rho
    Ucyc = run.cycle_unitary() if run.unitary else None
    eps = 1e-12 * T
    for tk in t:
        n_full = int(np.floor(tk / T + 1e-9))
        r = tk - n_full * T
        if abs(r) < eps:
            r = 0.0
        while cycles_done < n_full:
            rho_b = Ucyc @ rho_b @ Ucyc.conj().T if Ucyc is not None else run.advance_partial(rho_b, 0.0, T + eps)
            cycles_done += 1
        if r == 0.0:
            rho = rho_b
        elif Ucyc is not None:
            idx = int(np.searchsorted(run.starts, r, side="right")) - 1
            U = run.partial_unitary(idx, r - run.starts[idx])
            # kicks sitting exactly at r are included
            while idx < len(run.ops) and run.ops[idx][0] == "kick" and abs(run.starts[idx] - r) < eps:
                U = run.ops[idx][2] @ U
                idx += 1
            rho = U @ rho_b @ U.conj().T
        else:
            rho = run.advance_partial(rho_b, 0.0, r + eps)
        _record(rho, dims, gam, states, store_states)
    meta = dict(scheme=f"dd-{cfg.mode}", **cfg.describe())
    traj = Trajectory(t, np.array(gam), states if store_states else None, meta)
    return _validate(traj, rho, dims)


def average_hamiltonian(H: np.ndarray, dims: Dims, mode: str) -> np.ndarray:
    """Zeroth-order average of ``H`` over the toggling frames of one cycle."""
    X, Z = logical_paulis(dims)
    frames = [np.eye(H.shape[0]), X, Z @ X, X @ Z @ X] if mode == "universal" else [np.eye(H.shape[0]), X]
    return sum(g.conj().T @ H @ g for g in frames) / len(frames)


def align_logical_axis(H: np.ndarray, dims: Dims) -> tuple[np.ndarray, np.ndarray]:
    """Rotate the logical qubit so its weakest coupling axis is ``x``.

    Returns ``(V, H')`` with ``H' = (V⊗𝟙)† H (V⊗𝟙)``.  Selective cycles flip
    with ``X`` and so refocus every ``y`` and ``z`` coupling of the logical
    qubit but none along ``x``.  The rotation is local to the logical factor,
    so the frame cost is unchanged.
    """
    if dims.n_l != 2:
        raise UnsupportedLogicalDimension("axis alignment is defined for a logical qubit")
    g = decompose_hamiltonian(H, dims).g
    # logical Bloch components of every coupling to wall or environment
    M = g[1:].reshape(3, -1).copy()
    M[:, 0] = 0.0
    u, _, _ = np.linalg.svd(M)
    # Gell-Mann order for a qubit is (σx, σy, σz)/√2
    V = _rotation_taking(np.array([1.0, 0.0, 0.0]), u[:, 2])
    big = kron(V, np.eye(dims.n_w * dims.n_e))
    return V, big.conj().T @ H @ big


def logical_coupling_axes(H: np.ndarray, dims: Dims) -> np.ndarray:
    """Singular values of the logical Bloch-component coupling matrix."""
    g = decompose_hamiltonian(H, dims).g
    M = g[1:].reshape(dims.n_l**2 - 1, -1).copy()
    M[:, 0] = 0.0
    return np.linalg.svd(M, compute_uv=False)


def _rotation_taking(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """SU(2) element ``V`` with ``V (a·σ) V† = b·σ`` for unit vectors ``a, b``."""
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    axis = np.cross(a, b)
    s, c = np.linalg.norm(axis), float(np.dot(a, b))
    if s < 1e-14:
        if c > 0:
            return np.eye(2, dtype=complex)
        perp = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        axis = np.cross(a, perp)
        s = np.linalg.norm(axis)
    axis = axis / s
    theta = np.arctan2(s, c)
    gen = sum(x * PAULI[k] for x, k in zip(axis, "xyz"))
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * gen
