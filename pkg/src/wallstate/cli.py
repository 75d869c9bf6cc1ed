"""Command-line runner.

    wallstate <command> --config exp.yaml --out results/ [--seed N] [--plots]

Exit status is 0 on success, 2 for configuration problems and 3 for
numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import MatrixFileError, RunManifest, plot_curves, write_matrix, write_vector
from .config import ConfigError, ExperimentConfig, load, task_rng
from .decoupling import DdConfig, align_logical_axis, evolve_dd
from .dynamics import (
    Dissipation,
    Driving,
    Measurement,
    NoControl,
    NumericalError,
    Trajectory,
    evolve,
    fmt,
    time_to_threshold,
    write_csv,
)
from .eternal import analyze, asymptotic_eigenstates, driven_hamiltonian
from .frame import FrameProblem
from .linalg import DimensionError, HermiticityError
from .manifold import DescentStalled
from .oracles import sampled_purity
from .pipeline import build_setup, choose_wall, frame_search, gamma_table, load_model

log = logging.getLogger("wallstate")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _t097(tr: Trajectory, thr: float) -> str:
    t = time_to_threshold(tr, thr)
    return "none" if t is None else fmt(t)


# ---------------------------------------------------------------------------
# Commands


def cmd_find_frame(cfg: ExperimentConfig, out: Path, man: RunManifest, plots: bool) -> None:
    spec = load_model(cfg)
    prob = FrameProblem(spec.H, spec.dims, cfg.frame.eta_reg)
    eye = np.eye(spec.dims.n_s, dtype=complex)
    with man.time("frame_search"):
        sol = frame_search(spec, cfg)
    j0, lw0 = prob.costs(eye)
    write_matrix(out / "U_hat.txt", sol.U_hat)
    write_csv(
        out / "frame_summary.csv",
        ["quantity", "identity", "optimized"],
        [
            ["J", "J_reg", "lw_norm2"],
            [j0, j0 + prob.eta_reg * lw0, lw0],
            [sol.J, sol.J_reg, sol.lw_norm2],
        ],
    )
    man.notes.update(stalled=sol.stalled, restart_costs=sol.restart_costs, eta_reg=cfg.frame.eta_reg)
    print(f"J(1)={fmt(j0)} J_reg(1)={fmt(j0 + prob.eta_reg * lw0)}")
    print(f"J(U)={fmt(sol.J)} J_reg(U)={fmt(sol.J_reg)} lw_norm2(U)={fmt(sol.lw_norm2)} stalled={sol.stalled}")


def cmd_find_wall(cfg: ExperimentConfig, out: Path, man: RunManifest, plots: bool) -> None:
    st = build_setup(cfg)
    dims = st.dims
    seed = int(task_rng(cfg.seed, "wall").integers(2**63))
    w, info = choose_wall(st.H, dims, st.rho_e, cfg.wall.objective, seed)
    res = info["osd"]
    write_csv(out / "osd.csv", ["index", "s"], [list(range(1, len(res.s) + 1)), res.s])
    write_vector(out / "wall_state.txt", w)
    rows = gamma_table(st.H, dims, st.rho_e, w, cfg.wall.n_random, task_rng(cfg.seed, "random-walls"))
    write_csv(out / "gamma_compare.csv", ["state", "gamma1", "gamma2"], [list(c) for c in zip(*rows)])
    man.notes.update(
        frame=st.frame,
        objective=info["objective"],
        gamma2_usable=info["gamma2_usable"],
        delta_norm2=info["delta_norm2"],
        stalled=info["stalled"],
    )
    print("s=" + ",".join(fmt(x) for x in res.s))
    if not info["gamma2_usable"]:
        print("gamma2_usable=false (H_lw vanishes in this frame); objective=gamma1")
    else:
        print(f"gamma2_usable=true; objective={info['objective']}")
    print(f"gamma1(w_hat)={fmt(rows[0][1])} gamma2(w_hat)={fmt(rows[0][2])}")
    print("w_hat=" + " ".join(f"{fmt(x.real)}{x.imag:+.12g}j" for x in w))


def _scheme(kind: str, gain: float, st) -> object:
    if kind == "none":
        return NoControl()
    if kind == "measurement":
        return Measurement(gain, st.w_hat)
    if kind == "dissipation":
        return Dissipation(gain, st.w_hat)
    return Driving(gain, st.H_u)


def cmd_simulate(cfg: ExperimentConfig, out: Path, man: RunManifest, plots: bool) -> None:
    st = build_setup(cfg)
    t = cfg.grid
    rho0 = st.rho0
    thr = cfg.simulate.threshold
    for sweep in cfg.simulate.schemes:
        def run(gain, kind=sweep.kind):
            tr = evolve(rho0, st.H, st.dims, t, st.Ls, _scheme(kind, gain, st))
            tr.to_csv(out / f"traj_{kind}_{fmt(gain)}.csv")
            return gain, tr

        with man.time(f"simulate_{sweep.kind}"):
            results = _pmap(run, list(sweep.gains), cfg.workers)
        write_csv(
            out / f"threshold_{sweep.kind}.csv",
            ["gain", "time_to_097"],
            [[g for g, _ in results], [_t097(tr, thr) for _, tr in results]],
        )
        if plots:
            plot_curves(
                out / f"purity_{sweep.kind}.svg",
                t,
                {f"{sweep.kind} {fmt(g)}": tr.gamma for g, tr in results},
                sweep.kind,
                thr,
            )
        for g, tr in results:
            print(f"{sweep.kind} gain={fmt(g)} min_gamma={fmt(tr.min_gamma)} t097={_t097(tr, thr)}")
    man.notes.update(frame=st.frame, wall_objective=st.wall_info.get("objective"))


def cmd_dd_compare(cfg: ExperimentConfig, out: Path, man: RunManifest, plots: bool) -> None:
    spec = load_model(cfg)
    t = cfg.grid
    cache: dict = {}
    cols, names, meta = [t], ["t"], {}
    dd = cfg.dd
    for frame in dd.frames:
        with man.time(f"setup_{frame}"):
            st = build_setup(cfg, frame=frame, spec=spec, cache=cache)
        H = st.H
        tag = "U" if frame == "optimized" else "1"
        H_sel = H
        if dd.align_selective and frame == "optimized" and st.dims.n_l == 2:
            _, H_sel = align_logical_axis(H, st.dims)
        meta[frame] = dict(wall_objective=st.wall_info.get("objective"), aligned=H_sel is not H)

        def run(scheme, st=st, H=H, H_sel=H_sel):
            base = scheme.split("+")[0]
            drive = scheme.endswith("+drive")
            if scheme == "wall-drive":
                return evolve(st.rho0, H, st.dims, t, st.Ls, Driving(dd.kappa, st.H_u))
            dcfg = DdConfig(
                base,
                dd.f,
                dd.duty,
                wall_kappa=dd.kappa if drive else 0.0,
                H_u=st.H_u if drive else None,
            )
            return evolve_dd(st.rho0, H_sel if base == "selective" else H, st.dims, dcfg, t, st.Ls)

        with man.time(f"dd_{frame}"):
            trajs = _pmap(run, list(dd.schemes), cfg.workers)
        for scheme, tr in zip(dd.schemes, trajs):
            names.append(f"{scheme}_{tag}")
            cols.append(tr.gamma)
    write_csv(out / "dd_compare.csv", names, cols)
    rows = []
    for name, g in zip(names[1:], cols[1:]):
        tr = Trajectory(t, np.asarray(g))
        rows.append((name, fmt(tr.min_gamma), _t097(tr, dd.threshold)))
        print(f"{name} min_gamma={fmt(tr.min_gamma)} t097={_t097(tr, dd.threshold)}")
    write_csv(out / "dd_summary.csv", ["scheme", "min_gamma", "time_to_097"], [list(c) for c in zip(*rows)])
    if plots:
        plot_curves(out / "dd_compare.svg", t, dict(zip(names[1:], cols[1:])), "DD comparison", dd.threshold)
    man.notes.update(frames=meta, dd=DdConfig("universal", dd.f, dd.duty).describe(), kappa=dd.kappa)


def cmd_eternal_bound(cfg: ExperimentConfig, out: Path, man: RunManifest, plots: bool) -> None:
    st = build_setup(cfg)
    if st.frame != "identity":
        log.info("eternal analysis in the %s frame", st.frame)
    dims = st.dims
    H0, H_u = st.H, st.H_u
    rho0 = st.rho0
    with man.time("asymptotics"):
        asymp = asymptotic_eigenstates(H0, H_u, dims)
    ks = [float(k) for k in cfg.eternal.kappas]

    def run(k):
        return analyze(H0, H_u, dims, rho0, st.w_hat, k, asymp)

    with man.time("sweep"):
        reports = _pmap(run, ks, cfg.workers)
    write_csv(
        out / "kappa_sweep.csv",
        ["kappa", "gamma_bar", "rho_l1", "bound"],
        [ks, [r.gamma_bar for r in reports], [r.rho_l1 for r in reports], [r.bound for r in reports]],
    )
    rng = task_rng(cfg.seed, "bound-check")
    times = np.sort(rng.uniform(0.0, cfg.eternal.check_t_max, cfg.eternal.check_samples))
    sim = [float(sampled_purity(rho0, driven_hamiltonian(H0, H_u, dims, k), dims, times).min()) for k in ks]
    write_csv(out / "bound_check.csv", ["kappa", "bound", "sim_min_gamma"], [ks, [r.bound for r in reports], sim])
    lines = ["# eternal purity bound", f"model={st.spec.id}", f"frame={st.frame}"]
    for r in reports:
        lines.append("")
        lines += r.summary_lines()
        lines.append("census=" + ",".join(f"{k}:{v}" for k, v in r.census().items()))
    last = reports[-1]
    lines += ["", "# summary"] + last.summary_lines()
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    for r, s in zip(reports, sim):
        print(f"kappa={fmt(r.kappa)} bound={fmt(r.bound)} sim_min={fmt(s)}")
    print("\n".join(last.summary_lines()))
    if plots:
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt

            fig, ax = plt.subplots(figsize=(5, 3.5))
            ax.semilogx(ks, [r.bound for r in reports], "o-")
            ax.set_xlabel("kappa")
            ax.set_ylabel("lower bound")
            fig.tight_layout()
            fig.savefig(out / "bound.svg", metadata={"Date": None, "Creator": None})
            plt.close(fig)
        except Exception as exc:
            log.warning("plot skipped: %s", exc)


COMMANDS = {
    "find-frame": cmd_find_frame,
    "find-wall": cmd_find_wall,
    "simulate": cmd_simulate,
    "dd-compare": cmd_dd_compare,
    "eternal-bound": cmd_eternal_bound,
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wallstate", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True)
        s.add_argument("--out", default=None)
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--plots", action="store_true")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            cfg.seed = args.seed
        out = Path(args.out or cfg.out or "results")
        out.mkdir(parents=True, exist_ok=True)
        cfg.save(out / "config.yaml")
        man = RunManifest(args.command, cfg.to_dict(), __version__, cfg.seed)
        with man.time("total"):
            COMMANDS[args.command](cfg, out, man, args.plots)
        man.write(out)
    except (ConfigError, MatrixFileError, DimensionError, HermiticityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DescentStalled, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
