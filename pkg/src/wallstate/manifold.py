"""Riemannian gradient descent on SU(n) and on the complex unit sphere.

Both manifolds expose the same small surface used by :func:`descend`:
``retract(x, grad, eps)`` moves a distance ``eps`` against ``grad``,
``inner(x, a, b)`` is the metric and ``check(x)`` returns the constraint
residual.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)


class TangentError(ValueError):
    """Direction does not lie in the tangent space."""


class DescentStalled(RuntimeError):
    """Armijo line search could not find an acceptable step."""

    def __init__(self, message: str, trace: "DescentTrace"):
        super().__init__(message)
        self.trace = trace


def expm_antihermitian(a: np.ndarray) -> np.ndarray:
    """``exp(A)`` for anti-Hermitian ``A`` via the eigendecomposition of ``iA``."""
    h = 1j * a
    h = 0.5 * (h + h.conj().T)
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals)) @ vecs.conj().T


def project_su(u: np.ndarray) -> np.ndarray:
    """Remove the determinant phase so that ``det U = 1``."""
    n = u.shape[0]
    phase = np.angle(np.linalg.det(u))
    return u * np.exp(-1j * phase / n)


def su_retract(u: np.ndarray, tangent: np.ndarray, eps: float) -> np.ndarray:
    """``exp(−Ω ε) U`` with ``Ω = tangent · U†``."""
    if eps == 0:
        return u
    omega = tangent @ u.conj().T
    scale = max(1.0, float(np.max(np.abs(omega))))
    if np.max(np.abs(omega + omega.conj().T)) > 1e-8 * scale:
        raise TangentError("Ω = tangent·U† is not anti-Hermitian")
    omega = 0.5 * (omega - omega.conj().T)
    return expm_antihermitian(-eps * omega) @ u


def sphere_retract(w: np.ndarray, grad: np.ndarray, eps: float) -> np.ndarray:
    """Move along ``X = −grad`` with ``exp((QX⟨w| − |w⟩X†Q) ε)|w⟩``, ``Q = 𝟙 − |w⟩⟨w|/2``."""
    if eps == 0:
        return w
    x = -grad
    qx = x - 0.5 * w * np.vdot(w, x)
    gen = np.outer(qx, w.conj()) - np.outer(w, qx.conj())
    out = expm_antihermitian(eps * gen) @ w
    return out / np.linalg.norm(out)


class UnitaryGroup:
    """SU(n) with metric ``Re tr(A†B)``; tangent vectors are ``Ω U`` with Ω anti-Hermitian."""

    kind = "unitary"

    def __init__(self, n: int):
        self.n = n

    def retract(self, u, grad, eps):
        return su_retract(u, grad, eps)

    def inner(self, u, a, b) -> float:
        return float(np.vdot(a, b).real)

    def check(self, u) -> float:
        return float(np.linalg.norm(u.conj().T @ u - np.eye(self.n)))

    def random_tangent(self, u, rng):
        a = rng.standard_normal((self.n, self.n)) + 1j * rng.standard_normal((self.n, self.n))
        omega = 0.5 * (a - a.conj().T)
        omega -= np.trace(omega) / self.n * np.eye(self.n)
        return omega @ u

    def curve(self, u, xi, t):
        """Point reached from ``u`` along tangent ``xi`` after time ``t``."""
        return expm_antihermitian(t * (xi @ u.conj().T)) @ u


class ComplexSphere:
    """Unit sphere in ``C^n`` with metric ``Re x†(𝟙 − ½|w⟩⟨w|)y``."""

    kind = "sphere"

    def __init__(self, n: int):
        self.n = n

    def retract(self, w, grad, eps):
        return sphere_retract(w, grad, eps)

    def inner(self, w, a, b) -> float:
        return float((np.vdot(a, b) - 0.5 * np.vdot(a, w) * np.vdot(w, b)).real)

    def check(self, w) -> float:
        return abs(float(np.linalg.norm(w)) - 1.0)

    def random_tangent(self, w, rng):
        v = rng.standard_normal(self.n) + 1j * rng.standard_normal(self.n)
        return v - w * np.vdot(w, v).real

    def curve(self, w, xi, t):
        return sphere_retract(w, -xi, t)


@dataclass(frozen=True)
class DescentConfig:
    eps0: float = 0.1
    max_iter: int = 5000
    g_min: float = 1e-10
    beta: float = 0.5
    armijo_c: float = 1e-4
    max_contractions: int = 60
    grow: float = 2.0
    """Factor applied to the last accepted step before the next line search."""
    eps_max: float = 10.0

    def __post_init__(self):
        if not (self.eps0 > 0 and self.max_iter >= 0 and self.g_min > 0):
            raise ValueError("eps0, g_min must be positive and max_iter nonnegative")
        if not (0 < self.beta < 1 and 0 < self.armijo_c < 1):
            raise ValueError("beta and armijo_c must lie in (0, 1)")
        if self.grow < 1:
            raise ValueError("grow must be >= 1")


@dataclass
class DescentTrace:
    costs: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    x: np.ndarray | None = None
    reason: str = ""

    @property
    def cost(self) -> float:
        return self.costs[-1]

    @property
    def iterations(self) -> int:
        return len(self.steps)


def descend(
    manifold,
    cost: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    cfg: DescentConfig = DescentConfig(),
) -> DescentTrace:
    """Armijo-backtracked Riemannian gradient descent.

    Stops when the squared Riemannian gradient norm falls to ``cfg.g_min`` or
    after ``cfg.max_iter`` iterations.  Raises :class:`DescentStalled` when no
    step passes the Armijo test; the exception carries the trace so far.
    """
    x = x0
    f = cost(x)
    tr = DescentTrace(costs=[f], x=x)
    eps = cfg.eps0
    for _ in range(cfg.max_iter):
        g = grad(x)
        gn2 = manifold.inner(x, g, g)
        tr.grad_norms.append(gn2)
        if gn2 <= cfg.g_min:
            tr.reason = "gradient"
            return tr
        step = min(eps * cfg.grow, cfg.eps_max) if tr.steps else eps
        for _ in range(cfg.max_contractions):
            x_new = manifold.retract(x, g, step)
            f_new = cost(x_new)
            if f_new <= f - cfg.armijo_c * step * gn2:
                break
            step *= cfg.beta
        else:
            tr.reason = "stalled"
            raise DescentStalled(f"line search failed at cost {f:.6e}, |grad|^2 {gn2:.3e}", tr)
        x, f, eps = x_new, f_new, step
        tr.costs.append(f)
        tr.steps.append(step)
        tr.x = x
    g = grad(x)
    tr.grad_norms.append(manifold.inner(x, g, g))
    tr.reason = "gradient" if tr.grad_norms[-1] <= cfg.g_min else "max_iter"
    return tr


def grad_check(manifold, cost, grad, x, h: float = 1e-5, n_dirs: int = 5, rng=None) -> float:
    """Max relative error between ``⟨grad, ξ⟩`` and central differences of ``cost`` along ``ξ``.

    The directional derivative is normalized by ``‖grad‖‖ξ‖`` so that directions
    nearly orthogonal to the gradient do not inflate the error.
    """
    if not 1e-8 < h < 1e-3:
        raise ValueError("probe step must lie in (1e-8, 1e-3)")
    rng = np.random.default_rng(rng)
    g = grad(x)
    gn = np.sqrt(max(manifold.inner(x, g, g), 0.0))
    worst = 0.0
    for _ in range(n_dirs):
        xi = manifold.random_tangent(x, rng)
        xi = xi / np.sqrt(manifold.inner(x, xi, xi))
        fd = (cost(manifold.curve(x, xi, h)) - cost(manifold.curve(x, xi, -h))) / (2 * h)
        an = manifold.inner(x, g, xi)
        denom = max(gn, 1e-12)
        worst = max(worst, abs(fd - an) / denom)
    return worst
