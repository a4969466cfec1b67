"""Projected curvature of the KZB connection across all twists of sl_2..sl_4.

For each (N, l) a few random marked configurations are drawn and the worst
projected [∇_a, ∇_b] and [∇_a, ∇_τ] are reported, together with the size of
the unprojected curvature for contrast.

    python scripts/curvature_sweep.py --configs 3 --reps V,V*,ad
"""
import argparse
import time
from dataclasses import dataclass

import numpy as np

from twisted_kzb.gs_basis import build_gs
from twisted_kzb.kzb import MarkedConfig, curvature_ztau, curvature_zz, weight_zero_projector
from twisted_kzb.lie import build_root_system, build_twist, make_rep
from twisted_kzb.rmatrix import RMatrix, sample_marks, sample_point

SWEEP = ((2, 1), (2, 2), (3, 1), (3, 3), (4, 1), (4, 2), (4, 4))


@dataclass(frozen=True)
class Config:
    reps: tuple = ("V", "V*")
    configs: int = 2
    seed: int = 0


def run_case(n: int, l: int, cfg: Config) -> dict:
    rs = build_root_system("A", n - 1)
    ev = RMatrix(build_gs(build_twist(rs, l)))
    reps = tuple(make_rep(rs, x) for x in cfg.reps)
    rng = np.random.default_rng([cfg.seed, n, l])
    out = {"zz": 0.0, "ztau": 0.0, "raw": 0.0, "rank": 0}
    for _ in range(cfg.configs):
        tau = complex(rng.uniform(-0.4, 0.4), rng.uniform(0.85, 1.4))
        point = sample_point(ev, rng, tau)
        mc = MarkedConfig(sample_marks(rng, len(reps), tau), reps, point)
        out["rank"] = weight_zero_projector(ev, mc).rank
        for a in range(len(reps)):
            zt = curvature_ztau(ev, mc, a)
            out["ztau"] = max(out["ztau"], zt.worst)
            for b in range(a + 1, len(reps)):
                zz = curvature_zz(ev, mc, a, b)
                out["zz"] = max(out["zz"], zz.worst)
                out["raw"] = max(out["raw"], zz.norm_zeroth, zz.norm_du)
    return out


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--reps", default=",".join(Config.reps))
    p.add_argument("--configs", type=int, default=Config.configs)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args(argv)
    cfg = Config(reps=tuple(x.strip() for x in a.reps.split(",")), configs=a.configs, seed=a.seed)
    print(f"{'case':10s} {'rank':>5s} {'[a,b] proj':>11s} {'[a,tau] proj':>13s} {'[a,b] raw':>10s}")
    for n, l in SWEEP:
        start = time.perf_counter()
        r = run_case(n, l, cfg)
        print(f"sl{n} l={l:<4d} {r['rank']:5d} {r['zz']:11.2e} {r['ztau']:13.2e} {r['raw']:10.2e}"
              f"  ({time.perf_counter() - start:.1f} s)")


if __name__ == "__main__":
    main()
