"""Eternal purity bound against the simulated minimum over a κ sweep.

    python scripts/eternal_sweep.py --out results/eternal

Without ``--model`` this runs the three-qubit example with its prescribed
logical state.  Any registered model with a wall drive works too.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from wallstate.dynamics import write_csv
from wallstate.eternal import asymptotic_eigenstates, analyze, driven_hamiltonian
from wallstate.linalg import haar_random_ket, kron, projector
from wallstate.models import get_model
from wallstate.oracles import sampled_purity


@dataclass
class EternalSweepConfig:
    model: str = "eternal3q"
    kappas: list = field(default_factory=lambda: list(np.geomspace(0.1, 100, 13)))
    t_max: float = 500.0
    samples: int = 2000
    seed: int = 0
    out: str = "results/eternal"


def main(argv=None) -> None:
    cfg = EternalSweepConfig()
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--model", default=cfg.model)
    p.add_argument("--kappas", type=float, nargs="+", default=cfg.kappas)
    p.add_argument("--samples", type=int, default=cfg.samples)
    p.add_argument("--seed", type=int, default=cfg.seed)
    p.add_argument("--out", default=cfg.out)
    a = p.parse_args(argv)
    cfg = EternalSweepConfig(model=a.model, kappas=a.kappas, samples=a.samples, seed=a.seed, out=a.out)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    m = get_model(cfg.model)
    if m.H_u is None or m.w_hat is None:
        raise SystemExit(f"model {cfg.model} has no wall drive")
    rng = np.random.default_rng(cfg.seed)
    rho_l = m.extras.get("rho_l")
    if rho_l is None:
        rho_l = projector(haar_random_ket(m.dims.n_l, rng))
    rho0 = kron(rho_l, projector(m.w_hat), m.env_state())
    asymp = asymptotic_eigenstates(m.H, m.H_u, m.dims)
    times = np.sort(rng.uniform(0, cfg.t_max, cfg.samples))

    rows = []
    for k in cfg.kappas:
        rep = analyze(m.H, m.H_u, m.dims, rho0, m.w_hat, k, asymp)
        sim = float(sampled_purity(rho0, driven_hamiltonian(m.H, m.H_u, m.dims, k), m.dims, times).min())
        rows.append((k, rep.gamma_bar, rep.rho_l1, rep.bound, sim, rep.verdict.empty))
        print(f"kappa={k:<10.4g} bound={rep.bound:.8f} sim_min={sim:.8f} eternal={rep.verdict.empty}")
    cols = list(zip(*rows))
    write_csv(
        out / "eternal_sweep.csv",
        ["kappa", "gamma_bar", "rho_l1", "bound", "sim_min", "eternal"],
        [*cols[:5], [str(x).lower() for x in cols[5]]],
    )


if __name__ == "__main__":
    main()
