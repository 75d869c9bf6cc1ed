"""Acceptance criteria, one test and one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import itertools
import time
from pathlib import Path

import numpy as np

from wallstate.config import load
from wallstate.decoupling import DdConfig, align_logical_axis, dd_cycle_ideal, evolve_dd
from wallstate.dynamics import Dissipation, Driving, Measurement, NoControl, evolve, product_state, time_to_threshold
from wallstate.eternal import asymptotic_eigenstates, corollary_check, driven_hamiltonian, kappa_sweep
from wallstate.frame import FrameProblem, FrameSearchConfig, find_wall_frame
from wallstate.linalg import (
    PAULI,
    Dims,
    decompose_hamiltonian,
    extract_terms,
    haar_random_ket,
    haar_random_pure,
    kron,
    logical_purity,
    projector,
    random_hermitian,
    random_unitary,
    thermal_state,
)
from wallstate.manifold import ComplexSphere, UnitaryGroup, grad_check, project_su
from wallstate.models import (
    central_spin,
    env_hamiltonian,
    eternal_example,
    ising_chain,
    pumping_operator,
    spin_lattice5,
    toy_regularization_model,
    transversal_ising3,
)
from wallstate.oracles import haar_moment_check, purity_accel_oracle, purity_derivatives, sampled_purity
from wallstate.pipeline import build_setup, frame_search
from wallstate.wall import (
    WallContext,
    WallSearchConfig,
    find_wall_state,
    gamma2,
    grad_gamma1,
    grad_gamma2,
    mean_accel_from_gamma1,
    osd,
    osd_of,
)

CONFIGS = Path(__file__).resolve().parents[1] / "scripts" / "configs"
MINUS = np.array([1, -1]) / np.sqrt(2)

LINES: dict[int, str] = {}


class Checks:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.items: list[tuple[str, bool, str]] = []

    def add(self, name: str, ok, detail: str = "") -> None:
        self.items.append((name, bool(ok), detail))

    def finish(self) -> None:
        ok = all(o for _, o, _ in self.items)
        bad = [f"{n} ({d})" for n, o, d in self.items if not o]
        tail = "; failed: " + ", ".join(bad) if bad else ""
        line = f"[{'PASS' if ok else 'FAIL'}] {self.number:>2}. {self.title}: {len(self.items) - len(bad)}/{len(self.items)} checks{tail}"
        LINES[self.number] = line
        print(line)
        assert ok, line


def _fid(a, b):
    return abs(np.vdot(a, b)) ** 2


def _never_later(times):
    """Nondecreasing, with ``None`` (threshold never reached) as +∞."""
    vals = [np.inf if t is None else t for t in times]
    return all(a <= b for a, b in zip(vals, vals[1:]))


_CENTRAL = {}


def central_solution():
    if "sol" not in _CENTRAL:
        cfg = load(CONFIGS / "central_dd.yaml")
        spec = central_spin()
        _CENTRAL.update(cfg=cfg, spec=spec, sol=frame_search(spec, cfg))
    return _CENTRAL


# ---------------------------------------------------------------------------


def test_01_toy_frame():
    c = Checks(1, "toy model frame cost and regularized frame")
    m = toy_regularization_model()
    prob = FrameProblem(m.H, m.dims, 0.01)
    j0 = prob.cost_J(np.eye(4))
    c.add("J(1)=0.5", abs(j0 - 0.5) < 1e-12, f"{j0:.15g}")
    cfg = load(CONFIGS / "toy_frame.yaml")
    cfg.frame.use = "optimized"
    st = build_setup(cfg, spec=m)
    sol = st.solution
    c.add("J(U)<1e-6", sol.J < 1e-6, f"{sol.J:.3g}")
    c.add("J_reg(U)<1e-6", sol.J_reg < 1e-6, f"{sol.J_reg:.3g}")
    tr = evolve(st.rho0, st.H, st.dims, np.linspace(0, 15, 301), [], NoControl())
    dev = float(np.max(np.abs(tr.gamma - 1)))
    c.add("purity const over [0,15]", dev < 1e-8, f"{dev:.3g}")
    c.finish()


def test_02_ising_wall():
    c = Checks(2, "transversal Ising OSD and wall state")
    m = transversal_ising3()
    res = osd_of(decompose_hamiltonian(m.H, m.dims))
    err = float(np.max(np.abs(res.s - [0.5, 0, 0, 0])))
    c.add("s=(0.5,0,0,0)", err < 1e-12, f"{err:.3g}")
    ctx = WallContext.from_hamiltonian(m.H, m.dims, m.env_state())
    out = find_wall_state(ctx, res, WallSearchConfig(objective="gamma2"), seed=0)
    f = _fid(out.w, MINUS)
    c.add("converges to |->", f > 1 - 1e-6, f"1-F={1 - f:.3g}")
    g2 = gamma2(out.w, res)
    c.add("Gamma2(opt)=0.875", abs(g2 - 0.875) < 1e-10, f"got {g2:.6g}")
    c.finish()


def test_03_lattice():
    c = Checks(3, "spin lattice costs and OSD")
    m = spin_lattice5()
    prob = FrameProblem(m.H, m.dims, 0.01)
    j0, lw0 = prob.costs(np.eye(8))
    c.add("J(1)=0.00680", abs(j0 - 0.00680) < 1e-4, f"{j0:.6g}")
    c.add("J_reg(1)=0.02049", abs(j0 + 0.01 * lw0 - 0.02049) < 1e-4, f"{j0 + 0.01 * lw0:.6g}")
    s = osd_of(decompose_hamiltonian(m.H, m.dims)).s
    err = float(np.max(np.abs(s - [0.5452, 0.1500, 0.1500, 0])))
    c.add("OSD(1)", err < 1e-3, np.array2string(s, precision=5))
    sol = find_wall_frame(prob, FrameSearchConfig(), seed=0)
    c.add("J(U)<=0.00680", sol.J <= 0.00680, f"{sol.J:.6g}")
    c.finish()


def test_04_central_spin():
    c = Checks(4, "central spin costs and OSD")
    m = central_spin()
    prob = FrameProblem(m.H, m.dims, 0.01)
    j0 = prob.cost_J(np.eye(4))
    c.add("J(1)=30.6792", abs(j0 - 30.6792) < 1e-3, f"{j0:.7g}")
    s0 = osd_of(decompose_hamiltonian(m.H, m.dims)).s
    c.add("H_lw(1)=0", np.all(s0 < 1e-12), f"max s {s0.max():.3g}")
    sol = central_solution()["sol"]
    c.add("J(U)<=8.0", sol.J <= 8.0, f"{sol.J:.6g}")
    s = osd_of(sol.coeff).s
    c.add("s1>0.99", s[0] > 0.99, f"s1={s[0]:.6g}")
    c.add("s2<0.01", s[1] < 0.01, f"s2={s[1]:.3g}")
    c.finish()


def test_05_haar_moments():
    c = Checks(5, "Haar moment identities at 3 sigma")
    t0 = time.perf_counter()
    for n, kind in itertools.product((2, 3), ("first", "second", "trace")):
        res = haar_moment_check(n, kind, samples=100_000, seed=0)
        worst = max(abs(r.estimate - r.target) / r.error for r in res)
        c.add(f"n={n} {kind}", all(r.passed for r in res), f"max z={worst:.2f}")
    dt = time.perf_counter() - t0
    c.add("runtime<60s", dt < 60, f"{dt:.1f}s")
    c.finish()


def _accel_case(H, dims, rho_e, w):
    ctx = WallContext.from_hamiltonian(H, dims, rho_e)
    target = mean_accel_from_gamma1(ctx.objective(w), dims.n_l)
    return purity_accel_oracle(projector(w), rho_e, H, dims, n_samples=10_000, seed=0, target=target)


def test_06_purity_acceleration():
    c = Checks(6, "closed-form Gamma1 against the Monte Carlo acceleration")
    rng = np.random.default_rng(0)
    m = transversal_ising3()
    r = _accel_case(m.H, m.dims, m.env_state(), haar_random_ket(2, rng))
    rel = abs(r.estimate - r.target) / abs(r.target)
    c.add("Ising within 1%", rel < 0.01, f"rel={rel:.2g}")
    d = Dims(2, 2, 2)
    H = random_hermitian(8, rng)
    rho_e = thermal_state(env_hamiltonian(H, d), 0.5)
    r = _accel_case(H, d, rho_e, haar_random_ket(2, rng))
    rel = abs(r.estimate - r.target) / abs(r.target)
    c.add("random 2x2x2 within 1%", rel < 0.01, f"rel={rel:.2g}")
    worst = 0.0
    for H_, d_ in ((m.H, m.dims), (H, d)):
        for _ in range(5):
            rho0 = product_state(haar_random_pure(2, rng), haar_random_ket(2, rng), haar_random_pure(2, rng))
            worst = max(worst, abs(purity_derivatives(rho0, H_, d_)[0]))
    c.add("|d gamma/dt(0)|<1e-6", worst < 1e-6, f"{worst:.2g}")
    c.finish()


def test_07_gradients():
    c = Checks(7, "finite-difference gradient checks")
    rng = np.random.default_rng(0)
    d = Dims(2, 2, 2)
    prob = FrameProblem(random_hermitian(8, rng), d, 0.01)
    grp = UnitaryGroup(4)
    sph = ComplexSphere(2)
    ctx = WallContext.from_hamiltonian(random_hermitian(8, rng), d, thermal_state(random_hermitian(2, rng), 0.5))
    res = osd(extract_terms(decompose_hamiltonian(random_hermitian(4, rng), Dims(2, 2, 1))).lw, Dims(2, 2, 1))
    errs = {"J": 0.0, "J_reg": 0.0, "Gamma1": 0.0, "Gamma2": 0.0}
    for _ in range(20):
        U = project_su(random_unitary(4, rng))
        errs["J"] = max(errs["J"], grad_check(grp, prob.cost_J, prob.grad_J, U, rng=rng))
        errs["J_reg"] = max(errs["J_reg"], grad_check(grp, prob.cost_J_reg, prob.grad_J_reg, U, rng=rng))
        w = haar_random_ket(2, rng)
        errs["Gamma1"] = max(errs["Gamma1"], grad_check(sph, ctx.objective, lambda x: grad_gamma1(x, ctx), w, rng=rng))
        errs["Gamma2"] = max(
            errs["Gamma2"], grad_check(sph, lambda x: gamma2(x, res), lambda x: grad_gamma2(x, res), w, rng=rng)
        )
    for k, e in errs.items():
        c.add(f"grad {k}", e < 1e-5, f"{e:.2g}")
    c.finish()


def test_08_control_schemes():
    c = Checks(8, "control schemes on the transversal Ising")
    cfg = load(CONFIGS / "ising3_simulate.yaml")
    st = build_setup(cfg)
    c.add("wall is |->", _fid(st.w_hat, MINUS) > 1 - 1e-12)
    t = cfg.grid

    def t97(scheme):
        return time_to_threshold(evolve(st.rho0, st.H, st.dims, t, st.Ls, scheme), 0.97)

    tm = [t97(Measurement(f, st.w_hat)) for f in (1.0, 5.0, 25.0)]
    c.add("measurement f=1,5,25", _never_later(tm), str(tm))
    td = [t97(Dissipation(eta, st.w_hat)) for eta in (1.0, 2.0, 4.0)]
    c.add("dissipation eta=1,2,4", _never_later(td), str(td))
    g = evolve(st.rho0, st.H, st.dims, t, st.Ls, Driving(10.0, st.H_u)).min_gamma
    c.add("driving kappa=10 min>0.97", g > 0.97, f"{g:.6g}")
    c.finish()


def test_09_perfect_wall():
    c = Checks(9, "perfect wall on the Ising chain")
    m = ising_chain(4, 2)
    rho0 = product_state(haar_random_pure(2, np.random.default_rng(0)), m.w_hat, m.env_state())
    t = np.linspace(0, 50, 501)
    for name, Ls in (("closed", []), ("pumped", [pumping_operator(4, 4, 0.5)])):
        dev = float(np.max(np.abs(evolve(rho0, m.H, m.dims, t, Ls, NoControl()).gamma - 1)))
        c.add(name, dev < 1e-10, f"{dev:.2g}")
    c.finish()


def test_10_dynamical_decoupling():
    c = Checks(10, "dynamical decoupling")
    rng = np.random.default_rng(0)
    vb, vc = rng.standard_normal(4), rng.standard_normal(4)
    V = random_unitary(4, rng)
    B, C = (V * vb) @ V.conj().T, (V * vc) @ V.conj().T
    H = np.kron(PAULI["z"], B) + np.kron(np.eye(2), C)
    d = Dims(2, 2, 2)
    U = dd_cycle_ideal(H, 0.5, "selective", d)
    r = product_state(haar_random_pure(2, rng), haar_random_pure(2, rng), haar_random_pure(2, rng))
    worst = 0.0
    for _ in range(10):
        r = U @ r @ U.conj().T
        worst = max(worst, abs(logical_purity(r, d) - 1))
    c.add("selective exact on dephasing", worst < 1e-10, f"{worst:.2g}")

    cen = central_solution()
    cfg, spec = cen["cfg"], cen["spec"]
    st = build_setup(cfg, frame="optimized", spec=spec, cache={"optimized": cen["sol"]})
    _, H_sel = align_logical_axis(st.H, st.dims)
    t = cfg.grid
    sel = evolve_dd(st.rho0, H_sel, st.dims, DdConfig("selective", cfg.dd.f, cfg.dd.duty), t)
    c.add("central selective min>0.99", sel.min_gamma > 0.99, f"{sel.min_gamma:.6g}")

    az = load(CONFIGS / "central_antizeno.yaml")
    st = build_setup(az, frame="optimized", spec=spec, cache={"optimized": cen["sol"]})
    _, H_sel = align_logical_axis(st.H, st.dims)
    t = az.grid
    only = evolve_dd(st.rho0, H_sel, st.dims, DdConfig("selective", az.dd.f, az.dd.duty), t)
    both = evolve_dd(
        st.rho0, H_sel, st.dims, DdConfig("selective", az.dd.f, az.dd.duty, wall_kappa=az.dd.kappa, H_u=st.H_u), t
    )
    c.add(
        "kappa=33 anti-Zeno",
        both.min_gamma < only.min_gamma,
        f"{both.min_gamma:.6g} vs {only.min_gamma:.6g}",
    )
    c.finish()


def test_11_eternal_bound():
    c = Checks(11, "eternal bound on the three-qubit example")
    m = eternal_example()
    rho0 = kron(m.extras["rho_l"], projector(m.w_hat), m.env_state())
    kappas = [1.0, 3.0, 10.0, 30.0, 100.0]
    reps = dict(zip(kappas, kappa_sweep(m.H, m.H_u, m.dims, rho0, m.w_hat, kappas)))
    cf = 1 / (2 * np.sqrt(2))
    worst = 0.0
    for k in (1.0, 10.0, 100.0):
        r1, r5 = np.sqrt(1 + 4 * k + 8 * k * k), np.sqrt(5 + 12 * k + 8 * k * k)
        ref = np.array([-1 - cf * r1, -cf * r5, -cf * r1, 1 - cf * r5, -1 + cf * r1, cf * r1, cf * r5, 1 + cf * r5])
        lam = reps[k].meta["spectrum"].values[reps[k].meta["by_label"]]
        worst = max(worst, float(np.max(np.abs(lam - ref))))
    c.add("closed-form spectrum", worst < 1e-9, f"{worst:.2g}")
    s = reps[10.0].sets
    k1 = set(s.members(s.K1))
    c.add("K1={5..8}^4", k1 == set(itertools.product(range(5, 9), repeat=4)), f"|K1|={len(k1)}")
    nontrivial = {q for q in s.members(s.K1 & s.K2) if len(set(q)) == 4}
    expect = {(5, 7, 8, 6), (8, 6, 5, 7), (6, 8, 7, 5), (7, 5, 6, 8)}
    c.add("nontrivial K1&K2", nontrivial == expect, str(sorted(nontrivial)))
    lz = max(abs(r.sets.lam[4, 6, 7, 5]) for r in reps.values())
    c.add("lambda_5786 zero", lz < 1e-9 and not any(r.sets.C1[4, 6, 7, 5] for r in reps.values()), f"{lz:.2g}")
    c.add("verdict empty", all(r.verdict.empty for r in reps.values()))
    b = [reps[k].bound for k in kappas]
    c.add("bound increasing", all(x < y for x, y in zip(b, b[1:])), ", ".join(f"{x:.6g}" for x in b))
    c.add("bound(100)>0.99", b[-1] > 0.99, f"{b[-1]:.7g}")
    times = np.sort(np.random.default_rng(0).uniform(0, 500, 200))
    gap = min(
        float(sampled_purity(rho0, driven_hamiltonian(m.H, m.H_u, m.dims, k), m.dims, times).min()) - reps[k].bound
        for k in kappas
    )
    c.add("sim >= bound - 1e-6", gap >= -1e-6, f"min margin {gap:.3g}")
    v = corollary_check(asymptotic_eigenstates(m.H, m.H_u, m.dims), m.w_hat, reps[10.0].meta["spectrum"], reps[10.0].meta["by_label"])
    c.add("corollary identity", v.applicable and v.max_mismatch < 1e-9, f"{v.max_mismatch:.2g}")
    c.finish()


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
            except AssertionError:
                pass
