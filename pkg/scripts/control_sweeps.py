"""Time-to-threshold of the three wall-control schemes across their gains.

    python scripts/control_sweeps.py --model ising3 --out results/sweeps

Gains are swept on a log grid and the first time with ``γ ≤ threshold`` is
tabulated per scheme ("none" when the threshold is never reached).
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from wallstate.artifacts import plot_curves
from wallstate.config import ExperimentConfig, ModelSection
from wallstate.dynamics import Dissipation, Driving, Measurement, NoControl, evolve, fmt, time_to_threshold, write_csv
from wallstate.pipeline import build_setup


@dataclass
class SweepConfig:
    model: str = "ising3"
    pumping: bool = False
    t_max: float = 30.0
    n_points: int = 601
    threshold: float = 0.97
    gains: dict = field(
        default_factory=lambda: {
            "measurement": [1.0, 2.0, 5.0, 10.0, 25.0, 50.0],
            "dissipation": [0.5, 1.0, 2.0, 4.0, 8.0],
            "driving": [0.5, 1.0, 2.0, 5.0, 10.0, 20.0],
        }
    )
    seed: int = 0
    out: str = "results/sweeps"
    plots: bool = False


def scheme(kind: str, gain: float, st):
    if kind == "measurement":
        return Measurement(gain, st.w_hat)
    if kind == "dissipation":
        return Dissipation(gain, st.w_hat)
    return Driving(gain, st.H_u)


def main(argv=None) -> None:
    cfg = SweepConfig()
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--model", default=cfg.model)
    p.add_argument("--pumping", action="store_true")
    p.add_argument("--t-max", type=float, default=cfg.t_max)
    p.add_argument("--seed", type=int, default=cfg.seed)
    p.add_argument("--out", default=cfg.out)
    p.add_argument("--plots", action="store_true")
    a = p.parse_args(argv)
    cfg = SweepConfig(model=a.model, pumping=a.pumping, t_max=a.t_max, seed=a.seed, out=a.out, plots=a.plots)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    exp = ExperimentConfig(model=ModelSection(id=cfg.model, pumping=cfg.pumping), seed=cfg.seed)
    st = build_setup(exp)
    t = np.linspace(0.0, cfg.t_max, cfg.n_points)
    free = evolve(st.rho0, st.H, st.dims, t, st.Ls, NoControl())
    print(f"model={cfg.model} pumping={cfg.pumping} free min_gamma={fmt(free.min_gamma)}")

    for kind, gains in cfg.gains.items():
        curves, t97, mins = {"free": free.gamma}, [], []
        for g in gains:
            tr = evolve(st.rho0, st.H, st.dims, t, st.Ls, scheme(kind, g, st))
            t_hit = time_to_threshold(tr, cfg.threshold)
            t97.append("none" if t_hit is None else fmt(t_hit))
            mins.append(tr.min_gamma)
            curves[f"{kind} {g:g}"] = tr.gamma
        write_csv(out / f"{kind}.csv", ["gain", "min_gamma", "time_to_threshold"], [gains, mins, t97])
        print(kind)
        for g, m, th in zip(gains, mins, t97):
            print(f"  gain={g:<6g} min_gamma={m:.6f} t_thr={th}")
        if cfg.plots:
            plot_curves(out / f"{kind}.svg", t, curves, kind, cfg.threshold)


if __name__ == "__main__":
    main()
