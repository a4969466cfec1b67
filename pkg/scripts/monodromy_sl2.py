"""Monodromy of sl_2 conformal blocks around a marked point (order-2 twist).

With the order-2 twist the connection has no dynamical directions, so the
KZB system is a plain ODE in the marked points. The loop of z_1 around z_2
is integrated on circles of several radii; the monodromy should be
conjugate to exp(−2πi C2) with C2 = P − ½, hence equal to −Id in spectrum.

    python scripts/monodromy_sl2.py --radii 0.05,0.1,0.2
"""
import argparse
from dataclasses import dataclass

import numpy as np

from twisted_kzb.gs_basis import build_gs
from twisted_kzb.kzb import MarkedConfig, monodromy
from twisted_kzb.lie import build_root_system, build_twist, make_rep
from twisted_kzb.rmatrix import ModuliPoint, RMatrix


@dataclass(frozen=True)
class Config:
    tau: complex = 0.1 + 1.05j
    centre: complex = -0.1 + 0.05j
    radii: tuple = (0.05, 0.12, 0.2)
    nodes: int = 48


def loop(centre: complex, r: float, nodes: int) -> list:
    pts = [centre + r * np.exp(2j * np.pi * k / nodes) for k in range(nodes)]
    return pts + [pts[0]]


def run(cfg: Config) -> list:
    rs = build_root_system("A", 1)
    ev = RMatrix(build_gs(build_twist(rs, 2)))
    v = make_rep(rs, "V")
    rows = []
    for r in cfg.radii:
        mc = MarkedConfig((cfg.centre + r, cfg.centre), (v, v), ModuliPoint((), cfg.tau))
        m = monodromy(ev, mc, 0, loop(cfg.centre, r, cfg.nodes))
        eig = np.linalg.eigvals(m)
        rows.append((r, eig, float(np.abs(eig + 1).max())))
    return rows


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--radii", default=",".join(str(r) for r in Config.radii))
    p.add_argument("--nodes", type=int, default=Config.nodes)
    a = p.parse_args(argv)
    cfg = Config(radii=tuple(float(x) for x in a.radii.split(",")), nodes=a.nodes)
    for r, eig, dev in run(cfg):
        shown = ", ".join(f"{e.real:+.6f}{e.imag:+.6f}i" for e in np.sort_complex(eig))
        print(f"radius {r:.3f}: eigenvalues [{shown}]  max|λ+1| = {dev:.2e}")


if __name__ == "__main__":
    main()
