"""Frame costs and operator-Schmidt spectra for the benchmark models.

    python scripts/frame_tables.py --out results/tables
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from wallstate.dynamics import write_csv
from wallstate.frame import FrameProblem, FrameSearchConfig, find_wall_frame
from wallstate.linalg import decompose_hamiltonian
from wallstate.models import get_model
from wallstate.wall import osd_of


@dataclass
class TablesConfig:
    models: list = field(default_factory=lambda: ["toy-reg", "ising3", "lattice5", "central-spin"])
    eta_reg: float = 0.01
    restarts: int = 8
    seed: int = 0
    out: str = "results/tables"


def frame_row(model_id: str, cfg: TablesConfig) -> dict:
    m = get_model(model_id)
    prob = FrameProblem(m.H, m.dims, cfg.eta_reg)
    n_s = m.dims.n_s
    j0, lw0 = prob.costs(np.eye(n_s))
    t0 = time.perf_counter()
    sol = find_wall_frame(prob, FrameSearchConfig(restarts=cfg.restarts), seed=cfg.seed)
    dt = time.perf_counter() - t0
    s0 = osd_of(decompose_hamiltonian(m.H, m.dims)).s
    s1 = osd_of(sol.coeff).s
    return dict(
        model=model_id,
        J_1=j0,
        J_reg_1=j0 + cfg.eta_reg * lw0,
        J_U=sol.J,
        J_reg_U=sol.J_reg,
        lw_U=sol.lw_norm2,
        s_1=s0[:4],
        s_U=s1[:4],
        seconds=dt,
    )


def main(argv=None) -> None:
    cfg = TablesConfig()
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--models", nargs="+", default=cfg.models)
    p.add_argument("--restarts", type=int, default=cfg.restarts)
    p.add_argument("--seed", type=int, default=cfg.seed)
    p.add_argument("--out", default=cfg.out)
    a = p.parse_args(argv)
    cfg = TablesConfig(models=a.models, restarts=a.restarts, seed=a.seed, out=a.out)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = [frame_row(mid, cfg) for mid in cfg.models]
    keys = ["model", "J_1", "J_reg_1", "J_U", "J_reg_U", "lw_U", "seconds"]
    write_csv(out / "frame_costs.csv", keys, [[r[k] for r in rows] for k in keys])
    osd_cols = [[r["model"] for r in rows]]
    names = ["model"]
    for tag in ("s_1", "s_U"):
        for i in range(4):
            names.append(f"{tag}{i + 1}")
            osd_cols.append([r[tag][i] if len(r[tag]) > i else 0.0 for r in rows])
    write_csv(out / "osd.csv", names, osd_cols)

    print(f"{'model':<14}{'J(1)':>12}{'J_reg(1)':>12}{'J(U)':>12}{'J_reg(U)':>12}   s(1) | s(U)")
    for r in rows:
        s = " ".join(f"{x:.4f}" for x in r["s_1"]) + " | " + " ".join(f"{x:.4f}" for x in r["s_U"])
        print(f"{r['model']:<14}{r['J_1']:>12.6g}{r['J_reg_1']:>12.6g}{r['J_U']:>12.6g}{r['J_reg_U']:>12.6g}   {s}")


if __name__ == "__main__":
    main()
