"""Acceptance criteria, one test each.

Every test prints a ``criterion N [PASS|FAIL] ...`` line (also collected in
the terminal summary) and asserts at the stated tolerance.
"""
import json
import time
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO
from math import gcd

import numpy as np
import pytest

from twisted_kzb.checks import CHECK_IDS, run_checks
from twisted_kzb.cli import main
from twisted_kzb.config import parse_config
from twisted_kzb.elliptic import IdentitySample, identity_residuals
from twisted_kzb.felder import compare_with_felder
from twisted_kzb.gs_basis import gs_bracket
from twisted_kzb.kzb import MarkedConfig, curvature_ztau, curvature_zz
from twisted_kzb.rmatrix import (
    apply_dynamical_twist,
    cdybe_residual,
    quasiperiodicity_residual,
    residue_residual,
    sample_marks,
    sample_point,
    unitarity_residual,
    zero_weight_residual,
)

from conftest import SWEEP, evaluator, random_tau, record_acceptance, rep, setup

pytestmark = pytest.mark.acceptance


def _seeded(criterion: int, n: int, l: int) -> np.random.Generator:
    return np.random.default_rng([criterion, n, l])


def _fmt(x: float) -> str:
    return f"{x:.2e}"


# ---------------------------------------------------------------- 1
def test_criterion_1_elliptic_identities():
    start = time.perf_counter()
    res = identity_residuals(IdentitySample(series_tolerance=1e-14, n_samples=64))
    wall = time.perf_counter() - start
    worst = max(res.values())
    ok = worst < 1e-9 and wall < 10
    name = max(res, key=res.get)
    record_acceptance(1, "elliptic identities", ok, f"{len(res)} identities, worst {_fmt(worst)} ({name}), {wall:.1f} s")
    assert ok, res


# ---------------------------------------------------------------- 2
def _gs_cases():
    for n in (2, 3, 4):
        for l in range(1, n + 1):
            if n % l == 0:
                for j in range(1, max(l, 2)):
                    if gcd(j, l) == 1:
                        yield n, l, j


def test_criterion_2_gs_structure():
    start = time.perf_counter()
    bracket = duality = 0.0
    graded = True
    cases = list(_gs_cases())
    for n, l, j in cases:
        _, tw, basis = setup(n, l, j)
        family = basis.generators + basis.duals
        for g in family:
            x = basis.matrix(g)
            for h in family:
                y = basis.matrix(h)
                res = gs_bracket(basis, g, h)
                got = sum(c * basis.matrices[k] for k, c in res.items()) if res else 0
                bracket = max(bracket, float(np.max(np.abs(got - (x @ y - y @ x)))))
                graded &= all(basis.generators[k].grade == (g.grade + h.grade) % l for k in res)
        for d in basis.duals:
            s = basis.dual_matrix(d)
            for i, h in enumerate(basis.generators):
                if h.kind != "cartan":
                    continue
                want = 1.0 if (h.orbit == d.orbit and (h.index + d.index) % l == 0) else 0.0
                duality = max(duality, abs(np.trace(s @ basis.matrices[i]) - want))
    wall = time.perf_counter() - start
    ok = bracket < 1e-12 and duality < 1e-13 and graded and wall < 5
    record_acceptance(
        2, "GS structure", ok,
        f"{len(cases)} twists, bracket {_fmt(bracket)}, duality {_fmt(duality)}, grading {'exact' if graded else 'broken'}, {wall:.1f} s",
    )
    assert ok


# ---------------------------------------------------------------- 3
REP_PAIRS = (("V", "V"), ("V", "V*"), ("ad", "V"))


def r_axioms(ev, n, rng, samples=16):
    worst = {"residue": 0.0, "unitarity": 0.0, "zero_weight": 0.0, "quasiperiodicity": 0.0}
    for s in range(samples):
        reps = tuple(rep(n, x) for x in REP_PAIRS[s % 3])
        tau = random_tau(rng)
        point = sample_point(ev, rng, tau)
        za, zb = sample_marks(rng, 2, tau)
        z = za - zb
        worst["residue"] = max(worst["residue"], residue_residual(ev, reps, point))
        worst["unitarity"] = max(worst["unitarity"], unitarity_residual(ev, reps, point, z))
        worst["zero_weight"] = max(worst["zero_weight"], zero_weight_residual(ev, reps, point, z))
        qp = quasiperiodicity_residual(ev, reps, point, z)
        worst["quasiperiodicity"] = max(worst["quasiperiodicity"], max(qp.values()))
    return worst


LIMITS_3 = {"residue": 1e-6, "unitarity": 1e-11, "zero_weight": 1e-11, "quasiperiodicity": 1e-10}


def test_criterion_3_r_matrix_axioms():
    start = time.perf_counter()
    worst = dict.fromkeys(LIMITS_3, 0.0)
    for n, l in SWEEP:
        got = r_axioms(evaluator(n, l), n, _seeded(3, n, l))
        worst = {k: max(worst[k], got[k]) for k in worst}
    wall = time.perf_counter() - start
    ok = all(worst[k] < LIMITS_3[k] for k in worst) and wall < 30
    detail = ", ".join(f"{k} {_fmt(v)}" for k, v in worst.items())
    record_acceptance(3, "r-matrix axioms", ok, f"{len(SWEEP)} cases x 16 points, {detail}, {wall:.1f} s")
    assert ok


# ---------------------------------------------------------------- 4
def cdybe_worst(ev, n, rng, samples=8):
    v = rep(n, "V")
    worst = 0.0
    for _ in range(samples):
        tau = random_tau(rng)
        point = sample_point(ev, rng, tau)
        z = sample_marks(rng, 3, tau)
        worst = max(worst, cdybe_residual(ev, (v, v, v), point, *z))
    return worst


def test_criterion_4_cdybe():
    start = time.perf_counter()
    worst = max(cdybe_worst(evaluator(n, l), n, _seeded(4, n, l)) for n, l in SWEEP)
    wall = time.perf_counter() - start
    ok = worst < 1e-9 and wall < 60
    record_acceptance(4, "CDYBE on VxVxV", ok, f"{len(SWEEP)} cases x 8 points, worst {_fmt(worst)}, {wall:.1f} s")
    assert ok


# ---------------------------------------------------------------- 5
def test_criterion_5_felder_limit():
    parts = {"non_cartan": 0.0, "antisymmetry": 0.0, "trace": 0.0, "z_dependence": 0.0}
    for n in (2, 3):
        ev, v = evaluator(n, 1), rep(n, "V")
        rng = _seeded(5, n, 1)
        for _ in range(8):
            tau = random_tau(rng)
            point = sample_point(ev, rng, tau)
            zs = sample_marks(rng, 3, tau)
            cmp = compare_with_felder(lambda z: ev.r(v, v, point, z), n, ev.u_vector(point), tau, zs)
            for k in parts:
                parts[k] = max(parts[k], getattr(cmp, k))
    ok = max(parts.values()) < 1e-10
    record_acceptance(5, "Felder limit", ok, "sl2, sl3 x 8 points, " + ", ".join(f"{k} {_fmt(v)}" for k, v in parts.items()))
    assert ok


# ---------------------------------------------------------------- 6
def _marked(ev, n, names, rng):
    tau = random_tau(rng)
    point = sample_point(ev, rng, tau)
    return MarkedConfig(sample_marks(rng, len(names), tau), tuple(rep(n, x) for x in names), point)


def test_criterion_6_curvature_zz():
    start = time.perf_counter()
    worst, evaluated = 0.0, 0
    for n, l in SWEEP:
        ev, rng = evaluator(n, l), _seeded(6, n, l)
        layouts = [("V", "V*"), ("V", "V*", "ad")]
        if (n, l) == (2, 2):
            layouts.append(("V", "V", "V"))
        for names in layouts:
            for _ in range(4):
                cfg = _marked(ev, n, names, rng)
                for a in range(len(names)):
                    for b in range(a + 1, len(names)):
                        worst = max(worst, curvature_zz(ev, cfg, a, b).worst)
                        evaluated += 1
    wall = time.perf_counter() - start
    ok = worst < 1e-8 and wall < 120
    record_acceptance(6, "flatness [nabla_a, nabla_b]", ok, f"{evaluated} curvatures, worst projected {_fmt(worst)}, {wall:.1f} s")
    assert ok


# ---------------------------------------------------------------- 7
def test_criterion_7_curvature_ztau():
    start = time.perf_counter()
    worst, evaluated = 0.0, 0
    for n, l in SWEEP:
        ev, rng = evaluator(n, l), _seeded(7, n, l)
        for names in [("ad",), ("V", "V*")]:
            for _ in range(4):
                cfg = _marked(ev, n, names, rng)
                for a in range(len(names)):
                    worst = max(worst, curvature_ztau(ev, cfg, a).worst)
                    evaluated += 1
    wall = time.perf_counter() - start
    ok = worst < 1e-7 and wall < 120
    record_acceptance(7, "flatness [nabla_a, nabla_tau]", ok, f"{evaluated} curvatures, worst projected {_fmt(worst)}, {wall:.1f} s")
    assert ok


# ---------------------------------------------------------------- 8
def test_criterion_8_dynamical_twist():
    rng = _seeded(8, 3, 1)
    a = rng.normal(size=(2, 2))
    ev = apply_dynamical_twist(evaluator(3, 1), a - a.T)
    axioms = r_axioms(ev, 3, rng)
    cdybe = cdybe_worst(ev, 3, rng)
    v, point = rep(3, "V"), sample_point(ev, rng, 1j)
    changed = float(np.max(np.abs(ev.r(v, v, point, 0.2) - evaluator(3, 1).r(v, v, point, 0.2))))
    ok = all(axioms[k] < LIMITS_3[k] for k in axioms) and cdybe < 1e-9
    detail = ", ".join(f"{k} {_fmt(v)}" for k, v in axioms.items())
    record_acceptance(8, "dynamical twist (sl3, l=1)", ok, f"{detail}, cdybe {_fmt(cdybe)}, |δr| {_fmt(changed)}")
    assert ok and changed > 0


# ---------------------------------------------------------------- 9
TRANSPORT_CONFIG = """\
[algebra]
series = A
rank = 1
[twist]
l = 2
[moduli]
tau = 0.1+1.05i
[run]
seed = 9
suites = transport
[marked]
n = 2
reps = V, V
"""


def test_criterion_9_transport():
    start = time.perf_counter()
    records = run_checks(parse_config(TRANSPORT_CONFIG, CHECK_IDS))
    wall = time.perf_counter() - start
    by_id = {r["id"]: r for r in records}
    homotopy = by_id["transport.homotopy"]["residual"]
    ratio = by_id["transport.convergence"]["residual"]
    loops = by_id["transport.monodromy"]["residual"]
    ok = homotopy < 1e-6 and 1 / ratio >= 8 and loops < 1e-5 and wall < 30
    record_acceptance(
        9, "transport (sl2, l=2, n=2)", ok,
        f"homotopy {_fmt(homotopy)}, convergence factor {1 / ratio:.1f}, loop independence {_fmt(loops)}, {wall:.1f} s",
    )
    assert ok and all(r["pass"] for r in records)


# --------------------------------------------------------------- 10
MINIMAL_CONFIG = """\
[algebra]
series = A
rank = 1
[twist]
l = 2
[run]
seed = 42
suites = all
"""


def _run_cli(args):
    err = StringIO()
    with redirect_stdout(StringIO()), redirect_stderr(err):
        code = main(args)
    return code


def _without_timing(text: str) -> str:
    out = []
    for line in text.splitlines():
        rec = json.loads(line)
        rec.pop("wall_time", None)
        out.append(json.dumps(rec, ensure_ascii=False))
    return "\n".join(out)


def test_criterion_10_determinism(tmp_path):
    cfg = tmp_path / "minimal.ini"
    cfg.write_text(MINIMAL_CONFIG)
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    codes = [_run_cli(["verify", "--config", str(cfg), "--out", str(p)]) for p in (a, b)]
    ta, tb = a.read_text(encoding="utf-8"), b.read_text(encoding="utf-8")
    same = _without_timing(ta) == _without_timing(tb)
    n_records = len(ta.splitlines()) - 2
    ok = same and codes == [0, 0]
    record_acceptance(10, "determinism", ok, f"{n_records} records, exit codes {codes}, identical modulo timing: {same}")
    assert ok
