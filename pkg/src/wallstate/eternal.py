"""Time-independent purity bounds under strong wall driving.

With ``H_κ = H₀ + κ 𝟙⊗H_u⊗𝟙`` and eigenpairs ``(λ_i, |ψ_i⟩)`` the logical
purity is

    γ(t) = Σ_{abij} exp(−i λ_abij t) ρ_ab ρ_ij tr(τ_ab τ_ij),

with ``λ_abij = λ_a − λ_b + λ_i − λ_j``, ``ρ_ij = ⟨ψ_i|ρ₀|ψ_j⟩`` and
``τ_ij = tr_we |ψ_i⟩⟨ψ_j|``.  Terms with ``λ_abij = 0`` sum to ``γ̄``; the rest
form the oscillating vector ``ρ⃗``, and ``γ(t) ≥ γ̄ − ‖ρ⃗‖₁``.

Quadruples are reported with 1-based labels that order the asymptotic
eigenstates by their energy at large ``κ``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import polar
from scipy.optimize import linear_sum_assignment

from .linalg import Dims, DimensionError, as_hermitian, kron, logical_purity

log = logging.getLogger(__name__)

ZERO_TOL = 1e-9
SWAP_TOL = 1e-9
CLUSTER_GAP = 1e-10
MAX_DIM = 64
PRUNE = 1e-14


class DegeneracyError(ValueError):
    """Driving Hamiltonian is degenerate."""


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Spectra


@dataclass
class SpectralData:
    kappa: float
    values: np.ndarray
    vectors: np.ndarray
    """Columns are eigenvectors."""

    def residual(self, H: np.ndarray) -> float:
        return float(np.max(np.abs(H @ self.vectors - self.vectors * self.values)))


def driven_hamiltonian(H0: np.ndarray, H_u: np.ndarray, dims: Dims, kappa: float) -> np.ndarray:
    return H0 + kappa * kron(np.eye(dims.n_l), H_u, np.eye(dims.n_e))


def spectral_data(H0, H_u, dims: Dims, kappa: float, reference: np.ndarray | None = None) -> SpectralData:
    """Eigenpairs of ``H_κ``; degenerate clusters are rotated towards ``reference`` columns."""
    H = as_hermitian(driven_hamiltonian(H0, H_u, dims, kappa))
    vals, vecs = np.linalg.eigh(H)
    if reference is not None:
        vecs = align_clusters(vals, vecs, reference)
    return SpectralData(float(kappa), vals, vecs)


def eigen_clusters(vals: np.ndarray, gap: float = CLUSTER_GAP) -> list[np.ndarray]:
    """Index groups of (sorted) eigenvalues closer than ``gap``."""
    groups, cur = [], [0]
    for k in range(1, len(vals)):
        if vals[k] - vals[k - 1] < gap:
            cur.append(k)
        else:
            groups.append(np.array(cur))
            cur = [k]
    groups.append(np.array(cur))
    return groups


def align_clusters(vals, vecs, reference, gap: float = CLUSTER_GAP) -> np.ndarray:
    """Rotate each degenerate cluster to maximal overlap with reference states."""
    vecs = vecs.copy()
    for idx in eigen_clusters(vals, gap):
        if len(idx) < 2:
            continue
        V = vecs[:, idx]
        proj = V.conj().T @ reference
        weight = np.sum(np.abs(proj) ** 2, axis=0)
        pick = np.sort(np.argsort(weight)[::-1][: len(idx)])
        A = proj[:, pick]
        # unitary polar factor: closest rotation taking V to the chosen references
        Up, _ = polar(A)
        vecs[:, idx] = V @ Up
    return vecs


# ---------------------------------------------------------------------------
# Asymptotic eigenstates


@dataclass
class AsymptoticEigens:
    states: np.ndarray
    """Columns ``|ψ̃_j⟩`` in label order."""
    wall_index: np.ndarray
    """Index ``b`` of the ``H_u`` eigenvector carried by each state."""
    shifts: np.ndarray
    """``⟨ψ̃_j|H₀|ψ̃_j⟩``."""
    u_values: np.ndarray
    u_vectors: np.ndarray
    dims: Dims

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def leakage(self) -> float:
        """Largest weight of any state outside its own ``H_u`` eigenspace."""
        out = 0.0
        for j in range(self.n):
            w = self.u_vectors[:, self.wall_index[j]]
            P = kron(np.eye(self.dims.n_l), np.outer(w, w.conj()), np.eye(self.dims.n_e))
            psi = self.states[:, j]
            out = max(out, float(np.linalg.norm(psi - P @ psi)))
        return out


def asymptotic_eigenstates(H0: np.ndarray, H_u: np.ndarray, dims: Dims, gap: float = 1e-9) -> AsymptoticEigens:
    """Diagonalize ``H₀`` inside each eigenspace of ``𝟙⊗H_u⊗𝟙``.

    Labels sort states by ``(λ^u_b, ⟨H₀⟩)``, the order of the exact energies
    at large ``κ``.
    """
    H0 = as_hermitian(H0)
    dims.check(H0)
    H_u = as_hermitian(H_u)
    if H_u.shape != (dims.n_w, dims.n_w):
        raise DimensionError("H_u must act on the wall factor")
    uv, uV = np.linalg.eigh(H_u)
    if len(uv) > 1 and np.min(np.diff(uv)) < gap:
        raise DegeneracyError("H_u is degenerate; asymptotic states are not determined")
    El, Ee = np.eye(dims.n_l), np.eye(dims.n_e)
    states, walls, shifts, keys = [], [], [], []
    for b in range(dims.n_w):
        B = kron(El, uV[:, [b]], Ee)
        blk = B.conj().T @ H0 @ B
        ev, evec = np.linalg.eigh(0.5 * (blk + blk.conj().T))
        for k in range(len(ev)):
            psi = B @ evec[:, k]
            states.append(_fix_phase(psi))
            walls.append(b)
            shifts.append(float(ev[k]))
            keys.append((uv[b], ev[k]))
    order = sorted(range(len(keys)), key=lambda i: keys[i])
    S = np.array(states).T[:, order]
    return AsymptoticEigens(S, np.array(walls)[order], np.array(shifts)[order], uv, uV, dims)


def _fix_phase(psi: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(psi) > 1e-12 * np.max(np.abs(psi))))
    return psi * np.exp(-1j * np.angle(psi[k]))


def label_eigenvectors(
    H0, H_u, dims: Dims, kappa: float, asymp: AsymptoticEigens, kappa_far: float | None = None, steps: int = 80
) -> tuple[SpectralData, np.ndarray]:
    """Exact spectrum at ``κ`` and, for each label, the index of its eigenvector.

    Eigenvectors are followed on a geometric ``κ`` grid up to ``kappa_far`` by
    maximal overlap, then matched to the asymptotic states there.
    """
    kappa_far = kappa_far or max(1e4, 100.0 * max(kappa, 1.0))
    ref = asymp.states
    spec = spectral_data(H0, H_u, dims, kappa, ref)
    start = max(kappa, 1e-3)
    grid = np.geomspace(start, kappa_far, steps)
    if kappa < start:
        grid = np.concatenate([[kappa], grid])
    # track[i] = column at the current grid point carried by the eigenvector i at κ
    prev = spec.vectors
    track = np.arange(prev.shape[1])
    for k in grid[1:]:
        cur = spectral_data(H0, H_u, dims, k, ref).vectors
        ov = np.abs(prev.conj().T @ cur) ** 2
        r, c = linear_sum_assignment(-ov)
        step = np.empty_like(c)
        step[r] = c
        track = step[track]
        prev = cur
    ov = np.abs(asymp.states.conj().T @ prev) ** 2
    r, c = linear_sum_assignment(-ov)
    if np.min(ov[r, c]) < 0.5:
        log.warning("weak match between far-κ eigenvectors and asymptotic states (min overlap %.3f)", ov[r, c].min())
    # label r ↔ far column c ↔ original eigenvector idx with track[idx] == c
    inv = np.empty_like(track)
    inv[track] = np.arange(len(track))
    by_label = np.empty(len(r), dtype=int)
    by_label[r] = inv[c]
    return spec, by_label


# ---------------------------------------------------------------------------
# Purity decomposition


@dataclass
class EternalVerdict:
    empty: bool
    witness: tuple | None = None
    """1-based quadruple in ``𝒞₁ ∩ 𝒦₁ ∩ 𝒦₂``."""
    witness_lambda: float | None = None


@dataclass
class IndexSets:
    K1: np.ndarray
    K2: np.ndarray
    C1: np.ndarray
    """Boolean masks of shape ``(n, n, n, n)`` over labels ``(a, b, i, j)``."""
    lam: np.ndarray

    @property
    def triple(self) -> np.ndarray:
        return self.C1 & self.K1 & self.K2

    def members(self, mask: np.ndarray) -> list[tuple]:
        return [tuple(int(x) + 1 for x in q) for q in np.argwhere(mask)]


@dataclass
class BoundReport:
    kappa: float
    gamma_bar: float
    rho_l1: float
    gamma0: float
    n_c1: int
    consistency: float
    """``|γ̄ + Σ_{𝒞₁} Re γ_abij(0) − γ(0)|``."""
    imag_residue: float
    sets: IndexSets | None = None
    verdict: EternalVerdict | None = None
    meta: dict = field(default_factory=dict)

    @property
    def bound(self) -> float:
        return eternal_lower_bound(self)

    def census(self) -> dict:
        if self.sets is None:
            return {"C1": self.n_c1}
        s = self.sets
        return {
            "C1": int(s.C1.sum()),
            "K1": int(s.K1.sum()),
            "K2": int(s.K2.sum()),
            "K1_K2": int((s.K1 & s.K2).sum()),
            "C1_K1_K2": int(s.triple.sum()),
        }

    def summary_lines(self) -> list[str]:
        v = self.verdict
        lines = [
            f"kappa={self.kappa:.12g}",
            f"gamma_bar={self.gamma_bar:.12g}",
            f"rho_l1={self.rho_l1:.12g}",
            f"bound={self.bound:.12g}",
            f"gamma0={self.gamma0:.12g}",
        ]
        if v is not None:
            lines.append(f"c1_k1_k2_empty={'true' if v.empty else 'false'}")
            lines.append("witness=" + ("none" if v.witness is None else ",".join(map(str, v.witness))))
        return lines


def zero_tolerance(values: np.ndarray, rel: float = ZERO_TOL) -> float:
    return rel * max(1.0, float(np.ptp(values)))


def _tau_tensor(vectors: np.ndarray, dims: Dims) -> np.ndarray:
    """``τ_ab`` for all pairs, shape ``(n, n, n_l, n_l)``."""
    n = vectors.shape[1]
    psi = vectors.T.reshape(n, dims.n_l, dims.n_w * dims.n_e)
    return np.einsum("axr,byr->abxy", psi, psi.conj(), optimize=True)


def tau_overlaps(vectors: np.ndarray, dims: Dims) -> np.ndarray:
    """``M[a, b, i, j] = tr(τ_ab τ_ij)``."""
    n = vectors.shape[1]
    T = _tau_tensor(vectors, dims)
    Tf = T.reshape(n * n, -1)
    Ts = T.transpose(0, 1, 3, 2).reshape(n * n, -1)
    return (Tf @ Ts.T).reshape(n, n, n, n)


def purity_decomposition(rho0: np.ndarray, spec: SpectralData, dims: Dims, zero_tol: float | None = None) -> BoundReport:
    """``γ̄`` and ``‖ρ⃗‖₁`` from the eigen-expansion at fixed ``κ``."""
    n = spec.vectors.shape[0]
    if rho0.shape != (n, n) or dims.total != n:
        raise DimensionError("state and spectrum dimensions differ")
    if n > MAX_DIM:
        raise DimensionError(f"quadruple census capped at n <= {MAX_DIM}")
    tol = zero_tolerance(spec.values) if zero_tol is None else zero_tol
    V, lam = spec.vectors, spec.values
    R = V.conj().T @ rho0 @ V
    rf = R.reshape(-1)
    T = _tau_tensor(V, dims)
    Tf = T.reshape(n * n, -1)
    Ts = T.transpose(0, 1, 3, 2).reshape(n * n, -1)
    dl = (lam[:, None] - lam[None, :]).reshape(-1)
    live = np.flatnonzero(np.abs(rf) >= PRUNE)
    gbar, l1, osc_re, n_c1 = 0j, 0.0, 0.0, 0
    for lo in range(0, live.size, 256):
        rows = live[lo : lo + 256]
        amp = (rf[rows, None] * rf[None, live]) * (Tf[rows] @ Ts[live].T)
        zero = np.abs(dl[rows, None] + dl[None, live]) < tol
        gbar += amp[zero].sum()
        osc = amp[~zero]
        l1 += float(np.abs(osc).sum())
        osc_re += float(osc.real.sum())
        n_c1 += int((~zero).sum())
    g0 = logical_purity(rho0, dims)
    return BoundReport(
        kappa=spec.kappa,
        gamma_bar=float(gbar.real),
        rho_l1=l1,
        gamma0=g0,
        n_c1=n_c1,
        consistency=abs(gbar.real + osc_re - g0),
        imag_residue=abs(gbar.imag),
        meta={"zero_tol": tol},
    )


def eternal_lower_bound(report: BoundReport) -> float:
    return report.gamma_bar - report.rho_l1


def purity_from_spectrum(rho0, spec: SpectralData, dims: Dims, times) -> np.ndarray:
    """Evaluate the eigen-expansion of ``γ(t)`` directly (no truncation)."""
    V, lam = spec.vectors, spec.values
    R = V.conj().T @ rho0 @ V
    out = []
    for t in np.atleast_1d(times):
        ph = np.exp(-1j * lam * t)
        Vt = V * ph
        rho = Vt @ R @ Vt.conj().T
        out.append(logical_purity(rho, dims))
    return np.array(out)


# ---------------------------------------------------------------------------
# Index sets and the eternal condition


def _wall_label(w_hat: np.ndarray, asymp: AsymptoticEigens, tol: float = 1e-10) -> int:
    w = np.asarray(w_hat, dtype=complex)
    w = w / np.linalg.norm(w)
    fid = np.abs(asymp.u_vectors.conj().T @ w) ** 2
    b = int(np.argmax(fid))
    if fid[b] < 1 - tol:
        raise PreconditionError("wall state is not an eigenvector of H_u")
    return b


def index_sets(
    asymp: AsymptoticEigens,
    w_hat: np.ndarray,
    spec: SpectralData,
    by_label: np.ndarray,
    zero_tol: float | None = None,
    swap_tol: float = SWAP_TOL,
) -> IndexSets:
    """``𝒦₁``, ``𝒦₂`` and ``𝒞₁`` over asymptotic labels at the spectrum's ``κ``."""
    b_hat = _wall_label(w_hat, asymp)
    on = asymp.wall_index == b_hat
    K1 = on[:, None, None, None] & on[None, :, None, None] & on[None, None, :, None] & on[None, None, None, :]
    M = tau_overlaps(asymp.states, asymp.dims)
    K2 = np.abs(M) > swap_tol
    lam = spec.values[by_label]
    tol = zero_tolerance(spec.values) if zero_tol is None else zero_tol
    d = lam[:, None] - lam[None, :]
    L = d[:, :, None, None] + d[None, None, :, :]
    return IndexSets(K1, K2, np.abs(L) >= tol, L)


def check_eternal_condition(sets: IndexSets) -> EternalVerdict:
    hit = np.argwhere(sets.triple)
    if hit.size == 0:
        return EternalVerdict(True)
    q = tuple(int(x) for x in hit[0])
    return EternalVerdict(False, tuple(x + 1 for x in q), float(sets.lam[q]))


# ---------------------------------------------------------------------------
# Product-state corollary


@dataclass
class CorollaryVerdict:
    applicable: bool
    holds: bool | None = None
    max_mismatch: float | None = None
    witness: tuple | None = None
    """``(i_l, j_l, b_e, j_e)`` of the largest mismatch."""
    table: np.ndarray | None = None
    """``λ_[j_l, ŵ, j_e]`` indexed by the factor labels."""
    reason: str = ""


def _entropy(m: np.ndarray) -> float:
    s = np.linalg.svd(m, compute_uv=False) ** 2
    s = s[s > 1e-300]
    return float(-(s * np.log(s)).sum())


def corollary_check(
    asymp: AsymptoticEigens,
    w_hat: np.ndarray,
    spec: SpectralData,
    by_label: np.ndarray,
    gap_tol: float | None = None,
) -> CorollaryVerdict:
    """Spectral-gap uniformity test for product asymptotic states in the ŵ sector."""
    dims = asymp.dims
    b_hat = _wall_label(w_hat, asymp)
    w = asymp.u_vectors[:, b_hat]
    sector = np.flatnonzero(asymp.wall_index == b_hat)
    lf, ef = [], []
    for j in sector:
        m = np.einsum("awc,w->ac", asymp.states[:, j].reshape(dims.shape), w.conj())
        if _entropy(m) > 1e-8:
            return CorollaryVerdict(False, reason=f"asymptotic state {j + 1} is entangled across l|e")
        u, s, vh = np.linalg.svd(m)
        lf.append(u[:, 0])
        ef.append(vh[0].conj())

    def classes(vecs):
        basis, idx = [], []
        for v in vecs:
            for k, b in enumerate(basis):
                ov = abs(np.vdot(b, v))
                if ov > 1 - 1e-8:
                    idx.append(k)
                    break
                if ov > 1e-8:
                    return None, None
            else:
                basis.append(v)
                idx.append(len(basis) - 1)
        return basis, idx

    lb, li = classes(lf)
    eb, ei = classes(ef)
    if lb is None or eb is None or len(lb) != dims.n_l or len(eb) != dims.n_e:
        return CorollaryVerdict(False, reason="factors do not form product bases")
    table = np.full((dims.n_l, dims.n_e), np.nan)
    lam = spec.values[by_label]
    for j, a, c in zip(sector, li, ei):
        table[a, c] = lam[j]
    if np.isnan(table).any():
        return CorollaryVerdict(False, reason="product labels do not cover every pair")
    tol = zero_tolerance(spec.values) if gap_tol is None else gap_tol
    # D[i, j, b, c] = (λ[j,b] − λ[i,b]) − (λ[j,c] − λ[i,c])
    diff = table[None, :, :] - table[:, None, :]
    D = diff[:, :, :, None] - diff[:, :, None, :]
    k = np.unravel_index(int(np.argmax(np.abs(D))), D.shape)
    worst = float(np.abs(D[k]))
    return CorollaryVerdict(True, worst < tol, worst, tuple(int(x) for x in k), table)


# ---------------------------------------------------------------------------
# Driver


def analyze(
    H0: np.ndarray,
    H_u: np.ndarray,
    dims: Dims,
    rho0: np.ndarray,
    w_hat: np.ndarray,
    kappa: float,
    asymp: AsymptoticEigens | None = None,
) -> BoundReport:
    """Bound, index-set census and verdict at one driving strength."""
    asymp = asymp or asymptotic_eigenstates(H0, H_u, dims)
    spec, by_label = label_eigenvectors(H0, H_u, dims, kappa, asymp)
    rep = purity_decomposition(rho0, spec, dims)
    rep.sets = index_sets(asymp, w_hat, spec, by_label, rep.meta["zero_tol"])
    rep.verdict = check_eternal_condition(rep.sets)
    rep.meta["by_label"] = by_label
    rep.meta["spectrum"] = spec
    return rep


def kappa_sweep(H0, H_u, dims: Dims, rho0, w_hat, kappas) -> list[BoundReport]:
    asymp = asymptotic_eigenstates(H0, H_u, dims)
    return [analyze(H0, H_u, dims, rho0, w_hat, k, asymp) for k in kappas]
