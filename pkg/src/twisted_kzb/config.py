"""Run configuration for the verification harness.

Grammar (INI sections, ``#`` or ``;`` comments)::

    [algebra]
    series = A              # only the A series is supported
    rank = 1                # sl_{rank+1}

    [twist]
    l = 2                   # order of the twist, must divide rank+1
    j = 1                   # coprime to l

    [moduli]
    tau = 0.1+1.05i         # complex numbers are written re+imi

    [run]
    seed = 42               # required
    samples = 4             # seeded points per check
    suites = all            # or a comma separated list

    [marked]
    n = 2
    positions = random      # or a comma separated list of n complex numbers
    reps = V, V*            # one name per point (V, V*, ad), or one for all

    [conventions]
    coordinates = coroot    # coroot | coweight
    dual_reading = dual     # dual | coweight

    [tolerances]
    cdybe.residual = 1e-9   # override by check id or by suite name

    [transport]
    f0 = random             # or e<k> for the k-th basis vector
    rtol = 1e-10

Unknown sections and keys are rejected.  Every validation error names the
section, key and line.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ConfigError", "RunConfig", "SUITES", "format_complex", "load_config", "parse_complex", "parse_config"]

SUITES = ("elliptic", "gs", "twist", "rmatrix", "quasiperiodicity", "cdybe", "felder", "curvature", "transport")
REP_NAMES = ("V", "V*", "ad")

_SCHEMA = {
    "algebra": {"series", "rank"},
    "twist": {"l", "j"},
    "moduli": {"tau"},
    "run": {"seed", "samples", "suites"},
    "marked": {"n", "positions", "reps"},
    "conventions": {"coordinates", "dual_reading"},
    "tolerances": None,  # free keys, checked against the catalog
    "transport": {"f0", "rtol"},
}
_REQUIRED = {("algebra", "series"), ("algebra", "rank"), ("twist", "l"), ("run", "seed")}


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, section: str | None = None, key: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if section is not None:
            where.append(f"[{section}]" + (f" {key}" if key else ""))
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.section = section
        self.key = key
        self.line = line


_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_REAL = re.compile(rf"^[+-]?{_NUM}$")
_IMAG = re.compile(rf"^(?P<im>[+-]?(?:{_NUM})?)i$")
_COMPLEX = re.compile(rf"^(?P<re>[+-]?{_NUM})(?P<im>[+-](?:{_NUM})?)i$")


def _imag(text: str) -> float:
    if text in ("", "+"):
        return 1.0
    if text == "-":
        return -1.0
    return float(text)


def parse_complex(text: str) -> complex:
    """Parse ``re+imi`` forms such as ``0.3+0.9i``, ``1i``, ``-i`` or ``2``."""
    s = text.strip()
    if _REAL.match(s):
        return complex(float(s), 0.0)
    m = _IMAG.match(s)
    if m:
        return complex(0.0, _imag(m.group("im")))
    m = _COMPLEX.match(s)
    if m:
        return complex(float(m.group("re")), _imag(m.group("im")))
    raise ValueError(f"cannot parse complex number {text!r} (expected re+imi)")


def format_complex(z: complex) -> str:
    """Round-trip safe ``re+imi`` text."""
    z = complex(z)
    im = z.imag
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{z.real!r}{sign}{abs(im)!r}i"


@dataclass(frozen=True)
class RunConfig:
    series: str
    rank: int
    l: int
    seed: int
    j: int = 1
    tau: complex = 1j
    samples: int = 4
    suites: tuple[str, ...] = SUITES
    n: int = 2
    positions: tuple[complex, ...] | None = None
    reps: tuple[str, ...] = ("V", "V")
    coordinates: str = "coroot"
    dual_reading: str = "dual"
    tolerances: dict = field(default_factory=dict)
    f0: str = "random"
    rtol: float = 1e-10

    @property
    def algebra(self) -> str:
        return f"sl_{self.rank + 1}"

    def canonical(self) -> dict:
        """JSON-ready view with a fixed key order."""
        return {
            "series": self.series,
            "rank": self.rank,
            "l": self.l,
            "j": self.j,
            "tau": format_complex(self.tau),
            "seed": self.seed,
            "samples": self.samples,
            "suites": list(self.suites),
            "n": self.n,
            "positions": "random" if self.positions is None else [format_complex(p) for p in self.positions],
            "reps": list(self.reps),
            "coordinates": self.coordinates,
            "dual_reading": self.dual_reading,
            "tolerances": {k: self.tolerances[k] for k in sorted(self.tolerances)},
            "f0": self.f0,
            "rtol": self.rtol,
        }


def _line_index(text: str) -> dict:
    """(section, key) → line number, for diagnostics."""
    out, section = {}, None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and "]" in line:
            section = line[1 : line.index("]")].strip()
            out[(section, None)] = no
        elif section is not None:
            key = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
            out.setdefault((section, key), no)
    return out


def parse_config(text: str, check_ids=(), seed_override: int | None = None, suite_override=None) -> RunConfig:
    """Parse and validate configuration text.

    ``check_ids`` lists the valid keys of ``[tolerances]`` besides suite names.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as err:
        raise ConfigError("key outside of any section", line=err.lineno) from err
    except configparser.ParsingError as err:
        lineno = err.errors[0][0] if getattr(err, "errors", None) else None
        raise ConfigError("malformed line", line=lineno) from err
    except configparser.DuplicateOptionError as err:
        raise ConfigError("duplicate key", err.section, err.option, err.lineno) from err
    except configparser.DuplicateSectionError as err:
        raise ConfigError("duplicate section", err.section, line=err.lineno) from err
    except configparser.Error as err:
        raise ConfigError(str(err)) from err
    lines = _line_index(text)

    def fail(msg, section, key=None):
        raise ConfigError(msg, section, key, lines.get((section, key), lines.get((section, None))))

    for section in cp.sections():
        if section not in _SCHEMA:
            fail(f"unknown section (expected one of {', '.join(_SCHEMA)})", section)
        allowed = _SCHEMA[section]
        for key in cp[section]:
            if allowed is not None and key not in allowed:
                fail("unknown key", section, key)
    for section, key in sorted(_REQUIRED):
        if not cp.has_option(section, key):
            if seed_override is not None and (section, key) == ("run", "seed"):
                continue
            raise ConfigError("missing required key", section, key, lines.get((section, None)))

    def get(section, key, conv, default=None):
        if not cp.has_option(section, key):
            return default
        raw = cp.get(section, key).strip()
        try:
            return conv(raw)
        except (ValueError, TypeError) as err:
            fail(f"invalid value {raw!r}: {err}", section, key)

    series = get("algebra", "series", str).upper()
    rank = get("algebra", "rank", int)
    l = get("twist", "l", int)
    j = get("twist", "j", int, 1)
    tau = get("moduli", "tau", parse_complex, 1j)
    seed = seed_override if seed_override is not None else get("run", "seed", int)
    samples = get("run", "samples", int, 4)
    suites_raw = get("run", "suites", str, "all")
    n = get("marked", "n", int, 2)
    positions_raw = get("marked", "positions", str, "random")
    reps_raw = get("marked", "reps", str, "V")
    coordinates = get("conventions", "coordinates", str, "coroot")
    dual_reading = get("conventions", "dual_reading", str, "dual")
    f0 = get("transport", "f0", str, "random")
    rtol = get("transport", "rtol", float, 1e-10)

    if series != "A":
        fail(f"unsupported series {series!r}: only A is implemented", "algebra", "series")
    if rank < 1:
        fail("rank must be at least 1", "algebra", "rank")
    if l < 1 or (rank + 1) % l:
        fail(f"l = {l} does not divide N = {rank + 1}", "twist", "l")
    if math.gcd(j, l) != 1:
        fail(f"j = {j} is not coprime to l = {l}", "twist", "j")
    if not tau.imag > 0:
        fail("tau must lie in the upper half plane", "moduli", "tau")
    if samples < 1:
        fail("samples must be positive", "run", "samples")
    if suite_override:
        suites_raw = ",".join(suite_override)
    names = [s.strip() for s in suites_raw.split(",") if s.strip()]
    if names == ["all"]:
        suites = SUITES
    else:
        for s in names:
            if s not in SUITES:
                fail(f"unknown suite {s!r}", "run", "suites")
        suites = tuple(s for s in SUITES if s in names)
    if not suites:
        fail("no suites selected", "run", "suites")
    if n < 1:
        fail("n must be positive", "marked", "n")
    if positions_raw.strip().lower() == "random":
        positions = None
    else:
        try:
            positions = tuple(parse_complex(p) for p in positions_raw.split(","))
        except ValueError as err:
            fail(str(err), "marked", "positions")
        if len(positions) != n:
            fail(f"expected {n} positions, got {len(positions)}", "marked", "positions")
    reps = tuple(r.strip() for r in reps_raw.split(","))
    if len(reps) == 1:
        reps = reps * n
    if len(reps) != n:
        fail(f"expected {n} representations, got {len(reps)}", "marked", "reps")
    for r in reps:
        if r not in REP_NAMES:
            fail(f"unknown representation {r!r} (expected one of {', '.join(REP_NAMES)})", "marked", "reps")
    if coordinates not in ("coroot", "coweight"):
        fail("coordinates must be coroot or coweight", "conventions", "coordinates")
    if dual_reading not in ("dual", "coweight"):
        fail("dual_reading must be dual or coweight", "conventions", "dual_reading")
    if not re.fullmatch(r"random|e\d+", f0):
        fail("f0 must be random or e<k>", "transport", "f0")
    if not rtol > 0:
        fail("rtol must be positive", "transport", "rtol")
    tolerances = {}
    if cp.has_section("tolerances"):
        valid = set(check_ids) | set(SUITES)
        for key in cp["tolerances"]:
            if key not in valid:
                fail("tolerance for an unknown check or suite", "tolerances", key)
            val = get("tolerances", key, float)
            if not (val >= 0 and math.isfinite(val)):
                fail("tolerance must be a finite nonnegative number", "tolerances", key)
            tolerances[key] = val
    return RunConfig(
        series=series,
        rank=rank,
        l=l,
        seed=seed,
        j=j,
        tau=tau,
        samples=samples,
        suites=suites,
        n=n,
        positions=positions,
        reps=reps,
        coordinates=coordinates,
        dual_reading=dual_reading,
        tolerances=tolerances,
        f0=f0,
        rtol=rtol,
    )


def load_config(path, check_ids=(), seed_override=None, suite_override=None) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err.strerror}") from err
    return parse_config(text, check_ids, seed_override, suite_override)
