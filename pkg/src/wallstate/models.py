"""Hamiltonians and auxiliary operators of the benchmark models.

Every constructor returns a :class:`ModelSpec`.  Spin operators follow
``J = σ/2`` so that ``J^z`` has eigenvalues ``±½``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .linalg import (
    Dims,
    DimensionError,
    PAULI,
    as_hermitian,
    kron,
    ket,
    partial_trace,
    spin32_op,
    spin_op,
    thermal_state,
)

DEFAULT_BETA = 0.01


@dataclass
class ModelSpec:
    """A benchmark Hamiltonian with its factorization and optional extras.

    ``params`` holds the named couplings; ``H_u`` is the wall control Hamiltonian
    and ``w_hat`` the designated wall state when the model prescribes one.
    """

    id: str
    dims: Dims
    params: dict
    H: np.ndarray
    H_u: np.ndarray | None = None
    w_hat: np.ndarray | None = None
    lindblads: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.H = as_hermitian(self.H)
        self.dims.check(self.H)

    def env_hamiltonian(self) -> np.ndarray:
        """Environment-local part of ``H`` (up to an additive constant)."""
        return env_hamiltonian(self.H, self.dims)

    def env_state(self, beta: float = DEFAULT_BETA) -> np.ndarray:
        return thermal_state(self.env_hamiltonian(), beta)


def env_hamiltonian(H: np.ndarray, dims: Dims) -> np.ndarray:
    return partial_trace(H, dims, "e") / dims.n_s


def _chain(N: int):
    return lambda i, a: spin_op(N, i, a)


def ising_chain(N: int = 4, j_split: int = 2, h: float = 1.0, g_z: float = 1.0) -> ModelSpec:
    """Longitudinal Ising chain with the wall at site ``j_split``."""
    if not 2 <= j_split < N:
        raise DimensionError(f"need 2 <= j_split < N, got j={j_split}, N={N}")
    J = _chain(N)
    H = h * sum(J(i, "z") for i in range(1, N + 1))
    H = H + g_z * sum(J(i, "z") @ J(i + 1, "z") for i in range(1, N))
    dims = Dims(2 ** (j_split - 1), 2, 2 ** (N - j_split))
    return ModelSpec(
        "ising-chain",
        dims,
        dict(N=N, j_split=j_split, h=h, g_z=g_z),
        H,
        w_hat=ket(2, 0),
    )


def toy_regularization_model() -> ModelSpec:
    """``H₀ = Σ J_i^z + J_1^x J_3^x`` with the two decoupling frames ``U1``, ``U2``."""
    J = _chain(3)
    H = sum(J(i, "z") for i in range(1, 4)) + J(1, "x") @ J(3, "x")

    def outer(a, b):
        return np.outer(ket(4, a), ket(4, b))

    U1 = outer(0, 3) + outer(1, 0) + outer(2, 2) + outer(3, 1)
    U2 = outer(0, 0) + outer(1, 2) + outer(2, 1) + outer(3, 3)
    spec = ModelSpec("toy-reg", Dims(2, 2, 2), {}, H, extras=dict(U1=U1, U2=U2))
    spec.lindblads = [pumping_operator(3, 3, 0.5)]
    return spec


def transversal_ising3() -> ModelSpec:
    """``H = Σ J_i^z + Σ J_i^x J_{i+1}^x`` on three spins, one per factor."""
    J = _chain(3)
    H = sum(J(i, "z") for i in range(1, 4)) + sum(J(i, "x") @ J(i + 1, "x") for i in (1, 2))
    minus = np.array([1, -1], dtype=complex) / np.sqrt(2)
    return ModelSpec(
        "ising3",
        Dims(2, 2, 2),
        {},
        H,
        H_u=-PAULI["x"],
        w_hat=minus,
        lindblads=[pumping_operator(3, 3, 0.5)],
    )


LATTICE5_PARAMS = dict(
    omega=(1.13, 1.13, 1.55, 2.51, 2.51),
    g_zz=(0.77, 0.77, 0.46, 0.46),
    g_xx=(0.21, 0.21, 0.19, 0.19),
    g_zzz=(0.08, 0.08, 0.08),
    g_xzx=(0.06, 0.06, 0.06),
)


def spin_lattice5(params: dict | None = None) -> ModelSpec:
    """Five-site chain with two- and three-body couplings; dims (4, 2, 4).

    ``g_xx`` multiplies ``XX + YY`` and ``g_xzx`` multiplies ``XZX + YZY``.
    The third three-body coupling acts on sites (3, 4, 5).
    """
    p = {**LATTICE5_PARAMS, **(params or {})}
    N = 5
    J = _chain(N)
    H = sum(w * J(i, "z") for i, w in enumerate(p["omega"], start=1))
    for i in range(1, N):
        H = H + p["g_zz"][i - 1] * J(i, "z") @ J(i + 1, "z")
        H = H + p["g_xx"][i - 1] * (J(i, "x") @ J(i + 1, "x") + J(i, "y") @ J(i + 1, "y"))
    for i in range(1, N - 1):
        H = H + p["g_zzz"][i - 1] * J(i, "z") @ J(i + 1, "z") @ J(i + 2, "z")
        H = H + p["g_xzx"][i - 1] * (
            J(i, "x") @ J(i + 1, "z") @ J(i + 2, "x") + J(i, "y") @ J(i + 1, "z") @ J(i + 2, "y")
        )
    params_out = {k: list(v) for k, v in p.items()}
    return ModelSpec("lattice5", Dims(4, 2, 4), params_out, H)


CENTRAL_SPIN_PARAMS = dict(
    omega_s=1.01,
    eta_s=0.0,
    A_x=0.71,
    A_y=0.0,
    A_z=0.19,
    omega_e=1.92,
    eta_e=0.0,
    lambda_e=0.31,
    n_bath=4,
    n_coupled=3,
    logical_qubit=2,
)


def central_spin(params: dict | None = None) -> ModelSpec:
    """Spin-3/2 coupled to a bath of spin-½ sites.

    The spin-3/2 space is split into two virtual qubits in the ``J^z`` basis,
    ``|00⟩ = |3/2⟩, |01⟩ = |1/2⟩, |10⟩ = |−1/2⟩, |11⟩ = |−3/2⟩``.
    ``logical_qubit`` picks which virtual qubit is logical (1 = left, 2 = right);
    the other one is the wall.  Bath couplings ``λ_e Σ J^x_i J^x_j`` run over
    pairs ``i < j``.
    """
    p = {**CENTRAL_SPIN_PARAMS, **(params or {})}
    nb = int(p["n_bath"])
    ne = 2**nb
    S = {a: kron(spin32_op(a), np.eye(ne)) for a in "xyz"}

    def bath(i, a):
        return kron(np.eye(4), spin_op(nb, i, a))

    Je = {a: sum(bath(i, a) for i in range(1, nb + 1)) for a in "xyz"}
    nc = int(p.get("n_coupled", nb))
    if not 0 <= nc <= nb:
        raise ValueError("n_coupled must lie in 0..n_bath")
    Jc = {a: sum((bath(i, a) for i in range(1, nc + 1)), np.zeros((4 * ne, 4 * ne))) for a in "xyz"}
    H = p["omega_s"] * S["z"] + p["eta_s"] * S["x"]
    H = H + p["A_x"] * S["x"] @ Jc["x"] + p["A_y"] * S["y"] @ Jc["y"] + p["A_z"] * S["z"] @ Jc["z"]
    H = H + p["omega_e"] * Je["z"] + p["eta_e"] * Je["x"]
    H = H + p["lambda_e"] * sum(
        (bath(i, "x") @ bath(j, "x") for i, j in combinations(range(1, nb + 1), 2)),
        np.zeros_like(H),
    )
    if p["logical_qubit"] == 2:
        swap = _swap_virtual(ne)
        H = swap @ H @ swap
    elif p["logical_qubit"] != 1:
        raise ValueError("logical_qubit must be 1 or 2")
    return ModelSpec("central-spin", Dims(2, 2, ne), dict(p), H)


def _swap_virtual(ne: int) -> np.ndarray:
    """Permutation exchanging the two virtual qubits of the spin-3/2 factor."""
    sw = np.zeros((4, 4))
    for a in range(2):
        for b in range(2):
            sw[2 * b + a, 2 * a + b] = 1.0
    return kron(sw, np.eye(ne))


def eternal_example() -> ModelSpec:
    """``H₀ = J1z + J2z + J3z + J1z J2z + J2x J3z`` with ``H_u = σz`` and ``ŵ = |0⟩``."""
    J = _chain(3)
    H = J(1, "z") + J(2, "z") + J(3, "z") + J(1, "z") @ J(2, "z") + J(2, "x") @ J(3, "z")
    plus_i = np.array([1, 1j], dtype=complex) / np.sqrt(2)
    return ModelSpec(
        "eternal3q",
        Dims(2, 2, 2),
        {},
        H,
        H_u=PAULI["z"].copy(),
        w_hat=ket(2, 0),
        extras=dict(rho_l=np.outer(plus_i, plus_i.conj())),
    )


def pumping_operator(N: int, site: int, Lambda: float = 0.5) -> np.ndarray:
    """``Λ (J^x + i J^y)`` at ``site`` of an ``N``-site chain."""
    return Lambda * (spin_op(N, site, "x") + 1j * spin_op(N, site, "y"))


MODELS = {
    "ising3": transversal_ising3,
    "toy-reg": toy_regularization_model,
    "lattice5": spin_lattice5,
    "central-spin": central_spin,
    "eternal3q": eternal_example,
    "ising-chain": ising_chain,
}


def get_model(model_id: str, params: dict | None = None) -> ModelSpec:
    try:
        ctor = MODELS[model_id]
    except KeyError:
        raise KeyError(f"unknown model {model_id!r}; known: {sorted(MODELS)}") from None
    if params:
        if model_id in ("lattice5", "central-spin"):
            return ctor(params)
        return ctor(**params)
    return ctor()
