"""Shared setup for experiments: model, frame, wall state and initial state."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .artifacts import read_matrix
from .config import ConfigError, ExperimentConfig, task_rng
from .dynamics import drive_operator
from .frame import FrameProblem, FrameSearchConfig, FrameSolution, find_wall_frame
from .linalg import Dims, decompose_hamiltonian, haar_random_ket, kron, projector, thermal_state
from .manifold import DescentConfig
from .models import ModelSpec, env_hamiltonian, get_model
from .wall import OsdResult, WallContext, WallSearchConfig, find_wall_state, gamma2, osd_of

log = logging.getLogger(__name__)

DELTA_ZERO = 1e-12


def load_model(cfg: ExperimentConfig) -> ModelSpec:
    m = cfg.model
    if m.hamiltonian_file is not None:
        H = read_matrix(m.hamiltonian_file)
        spec = ModelSpec("custom", Dims(*[int(x) for x in m.dims]), {"file": m.hamiltonian_file}, H)
    else:
        try:
            spec = get_model(m.id, m.params or None)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        except TypeError as exc:
            raise ConfigError(f"bad parameters for model {m.id}: {exc}") from None
    if m.H_u is not None:
        spec.H_u = read_matrix(m.H_u)
    return spec


@dataclass
class Setup:
    spec: ModelSpec
    frame: str
    U: np.ndarray
    H: np.ndarray
    """Hamiltonian in the chosen frame."""
    rho_e: np.ndarray
    w_hat: np.ndarray
    rho_l: np.ndarray
    H_u: np.ndarray
    Ls: list
    solution: FrameSolution | None = None
    wall_info: dict = field(default_factory=dict)

    @property
    def dims(self) -> Dims:
        return self.spec.dims

    @property
    def rho0(self) -> np.ndarray:
        return kron(self.rho_l, projector(self.w_hat), self.rho_e)


def frame_search(spec: ModelSpec, cfg: ExperimentConfig) -> FrameSolution:
    prob = FrameProblem(spec.H, spec.dims, cfg.frame.eta_reg)
    fcfg = FrameSearchConfig(
        restarts=cfg.frame.restarts, descent=DescentConfig(g_min=1e-26, max_iter=cfg.frame.max_iter)
    )
    return find_wall_frame(prob, fcfg, seed=int(task_rng(cfg.seed, "frame").integers(2**63)))


def frame_unitary(spec: ModelSpec, cfg: ExperimentConfig, frame: str, cache: dict | None = None):
    cache = {} if cache is None else cache
    n = spec.dims.n_s
    if frame == "identity":
        return np.eye(n, dtype=complex), None
    if frame == "optimized":
        if "optimized" not in cache:
            cache["optimized"] = frame_search(spec, cfg)
        sol = cache["optimized"]
        return sol.U_hat, sol
    if frame.startswith("extra:"):
        name = frame.split(":", 1)[1]
        if name not in spec.extras:
            raise ConfigError(f"model {spec.id} has no unitary {name!r}")
        return np.asarray(spec.extras[name], dtype=complex), None
    raise ConfigError(f"unknown frame {frame!r}")


def rotate(op: np.ndarray, U: np.ndarray, dims: Dims) -> np.ndarray:
    big = kron(U, np.eye(dims.n_e))
    return big.conj().T @ op @ big


def choose_wall(H: np.ndarray, dims: Dims, rho_e: np.ndarray, objective: str, seed) -> tuple[np.ndarray, dict]:
    """Wall state minimizing ``Γ₂`` (when applicable) or ``Γ₁``."""
    ctx = WallContext.from_hamiltonian(H, dims, rho_e)
    res = osd_of(ctx.coeff)
    delta = ctx.coeff.delta_norm2()
    gamma2_usable = not res.is_zero
    if objective == "auto":
        objective = "gamma2" if gamma2_usable and delta < DELTA_ZERO else "gamma1"
    if objective == "gamma2" and not gamma2_usable:
        log.warning("OSD of H_lw vanishes; Γ2 is flat, using Γ1")
        objective = "gamma1"
    out = find_wall_state(ctx, res, WallSearchConfig(objective=objective), seed=seed)
    info = dict(
        objective=objective,
        gamma2_usable=gamma2_usable,
        delta_norm2=delta,
        osd=res,
        ctx=ctx,
        value=out.value,
        stalled=out.stalled,
    )
    return out.w, info


def build_setup(cfg: ExperimentConfig, frame: str | None = None, spec: ModelSpec | None = None, cache=None) -> Setup:
    spec = spec or load_model(cfg)
    frame = frame or cfg.frame.use
    dims = spec.dims
    U, sol = frame_unitary(spec, cfg, frame, cache)
    H = rotate(spec.H, U, dims)
    rho_e = thermal_state(env_hamiltonian(spec.H, dims), cfg.wall.beta)
    if cfg.wall.use_model_state and spec.w_hat is not None and frame == "identity":
        w = np.asarray(spec.w_hat, dtype=complex)
        info = {"objective": "model"}
    else:
        w, info = choose_wall(H, dims, rho_e, cfg.wall.objective, int(task_rng(cfg.seed, "wall").integers(2**63)))
    if "rho_l" in spec.extras:
        rho_l = np.asarray(spec.extras["rho_l"], dtype=complex)
    else:
        rho_l = projector(haar_random_ket(dims.n_l, task_rng(cfg.seed, "rho_l")))
    if spec.H_u is not None and info.get("objective") == "model":
        H_u = spec.H_u
    else:
        H_u = drive_operator(w)
    Ls = [rotate(L, U, dims) for L in spec.lindblads] if cfg.model.pumping else []
    return Setup(spec, frame, U, H, rho_e, w, rho_l, H_u, Ls, sol, info)


def gamma_table(H: np.ndarray, dims: Dims, rho_e: np.ndarray, w_hat: np.ndarray, n_random: int, rng) -> list[tuple]:
    """``(label, Γ₁, Γ₂)`` at ``ŵ`` and at ``n_random`` Haar-random wall states."""
    ctx = WallContext(decompose_hamiltonian(H, dims), rho_e)
    res: OsdResult = osd_of(ctx.coeff)
    rows = [("w_hat", ctx.objective(w_hat), gamma2(w_hat, res))]
    for k in range(n_random):
        w = haar_random_ket(dims.n_w, rng)
        rows.append((f"random_{k}", ctx.objective(w), gamma2(w, res)))
    return rows
