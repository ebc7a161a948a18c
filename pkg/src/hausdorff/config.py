"""Scenario configuration files.

INI-style text read with :mod:`configparser`.  Every key has a declared
type; values are normalised on parse, so serialising a parsed config and
parsing it again gives an equal :class:`ScenarioConfig`.  ``inf`` (and
``-inf`` for carrier ends) is the only accepted spelling of infinity.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigInvalid, HausdorffError
from .estimator import GaussianBump, GridVector, StepFunction, TruncatedPower
from .expr import Expression, ExpressionError
from .kernel import Exponents, Kernel, ext_real, fmt_ext
from .maps import CyclicAutomorphism, MatrixDilation, ScalarDilation
from .measure import MeasureSpace, QuadratureSpec
from .operator import OperatorInstance, SupportedFunction

__all__ = ["ScenarioConfig", "parse_config", "load_config", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1


# --------------------------------------------------------------------------
# value types: (parse, format)
def _real(tok):
    tok = tok.strip()
    if tok in ("inf", "-inf"):
        return float(tok)
    if re.search(r"[a-zA-Z]", tok.replace("e", "").replace("E", "")):
        raise ValueError(f"not a real number: {tok!r} (write infinity as 'inf')")
    v = float(tok)
    if not math.isfinite(v):
        raise ValueError(f"not a real number: {tok!r}")
    return v


def _fmt_real(v):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def _split(text, sep=","):
    parts = [t.strip() for t in text.split(sep)]
    if parts == [""]:
        return []
    if any(p == "" for p in parts):
        raise ValueError("empty list item")
    return parts


def _int(tok):
    tok = tok.strip()
    if not re.fullmatch(r"[+-]?\d+", tok):
        raise ValueError(f"not an integer: {tok!r}")
    return int(tok)


def _bool(tok):
    tok = tok.strip().lower()
    if tok not in ("true", "false"):
        raise ValueError("expected true or false")
    return tok == "true"


def _exponent(tok):
    tok = tok.strip()
    if tok.lower() in ("infinity", "+inf") or (tok.lower() == "inf" and tok != "inf"):
        raise ValueError("write infinity as 'inf'")
    return fmt_ext(ext_real(tok))


def _matrix(text):
    rows = [[_real(t) for t in r.split()] for r in _split(text, ";")]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("matrix rows must have equal length")
    return tuple(tuple(r) for r in rows)


def _fmt_matrix(m):
    return "; ".join(" ".join(_fmt_real(v) for v in row) for row in m)


class _T:
    def __init__(self, parse, fmt=str, length=None, choices=None):
        self.parse_one = parse
        self.fmt = fmt
        self.length = length
        self.choices = choices

    def parse(self, text):
        v = self.parse_one(text)
        if self.choices is not None and v not in self.choices:
            raise ValueError(f"expected one of {', '.join(self.choices)}")
        if self.length is not None and len(v) != self.length:
            raise ValueError(f"expected {self.length} values")
        return v


def _list(parse, fmt, length=None):
    return _T(lambda s: tuple(parse(t) for t in _split(s)),
              lambda v: ", ".join(fmt(x) for x in v), length)


STR = _T(lambda s: s.strip())
INT = _T(_int)
REAL = _T(_real, _fmt_real)
BOOL = _T(_bool, lambda v: "true" if v else "false")
EXP = _T(_exponent)
REALS = _list(_real, _fmt_real)
PAIR = _list(_real, _fmt_real, 2)
INTS = _list(_int, str)
NAMES = _list(lambda s: s, str)
MATRIX = _T(_matrix, _fmt_matrix)
MATRICES = _T(lambda s: tuple(_matrix(m) for m in _split(s, "|")),
              lambda v: " | ".join(_fmt_matrix(m) for m in v))


def _enum(*choices):
    return _T(lambda s: s.strip(), str, choices=choices)


_SPACE = {
    "kind": _enum("interval", "box", "index", "group"),
    "same_as": _enum("omega", "source", "target"),
    "lo": REALS, "hi": REALS, "indices": INTS, "weights": REALS,
    "order": INT, "rank": INT, "measure": _enum("haar", "counting", "weighted"),
}
_QUAD = {
    "node_budget": INT, "grading": _enum("geometric", "uniform"), "ratio": REAL,
    "truncation": PAIR, "target_rel_tol": REAL, "breakpoints": REALS,
    "singular_end": _enum("lo", "hi", "both", "none"), "gauss_order": INT,
}
_WITNESS = {
    "kind": _enum("truncated-power", "step-function", "gaussian-bump", "grid-vector"),
    "alpha": PAIR, "support": PAIR, "breakpoints": REALS, "levels": PAIR, "dim": INT,
    "center": PAIR, "width": PAIR, "carrier": PAIR,
}
SCHEMA = {
    "scenario": {"schema_version": INT, "name": STR, "description": STR},
    "omega": _SPACE, "source": _SPACE, "target": _SPACE,
    "family": {"kind": _enum("scalar-dilation", "matrix-dilation", "cyclic-automorphism"),
               "matrices": MATRICES, "diagonal": STR, "dim": INT},
    "kernel": {"expr": STR, "weights": REALS, "table": MATRIX, "nonnegative": BOOL},
    "exponents": {"p": EXP, "q": EXP},
    "quadrature": _QUAD,
    "estimator": {"method": _enum("auto", "matrix", "families"), "families": NAMES,
                  "budget": INT, "restarts": INT, "seed": INT},
    "estimator.quadrature": _QUAD,
    "estimator.omega_quadrature": _QUAD,
    "probe": {"f": STR, "x": REAL, "eps": REALS, "witness_p": REAL},
}
_ORDER = list(SCHEMA)
REQUIRED = ("scenario", "omega", "source", "target", "family", "kernel", "exponents")


def _schema_for(section):
    if section.startswith("witness."):
        return _WITNESS
    return SCHEMA.get(section)


def _section_rank(name):
    if name in SCHEMA:
        return (_ORDER.index(name), "")
    return (_ORDER.index("estimator.omega_quadrature"), name)


def _locate(text):
    """``(section, key) -> line`` and ``section -> line`` for diagnostics."""
    lines = {}
    section = None
    for n, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, None), n)
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), n)
    return lines


# --------------------------------------------------------------------------
@dataclass(frozen=True)
class ScenarioConfig:
    """Validated, normalised configuration: ``sections`` is ``((name, ((key, value), ...)), ...)``."""

    sections: tuple
    lines: tuple = ()

    def __eq__(self, other):
        return isinstance(other, ScenarioConfig) and self.sections == other.sections

    def __hash__(self):
        return hash(self.sections)

    # access ---------------------------------------------------------------
    def section(self, name) -> dict:
        for sname, items in self.sections:
            if sname == name:
                return dict(items)
        return {}

    def has(self, name):
        return any(s == name for s, _ in self.sections)

    def get(self, section, key, default=None):
        return self.section(section).get(key, default)

    def line(self, section, key=None):
        return dict(self.lines).get((section, key))

    def invalid(self, message, section, key=None):
        return ConfigInvalid(message, section, key,
                             self.line(section, key) or self.line(section, None))

    @property
    def name(self):
        return self.get("scenario", "name", "unnamed")

    def witness_names(self):
        return [s[len("witness."):] for s, _ in self.sections if s.startswith("witness.")]

    # serialisation ----------------------------------------------------------
    def to_text(self) -> str:
        out = []
        for sname, items in self.sections:
            schema = _schema_for(sname)
            out.append(f"[{sname}]")
            for key, val in items:
                out.append(f"{key} = {schema[key].fmt(val)}")
            out.append("")
        return "\n".join(out)

    def with_values(self, updates: dict) -> "ScenarioConfig":
        """Copy with ``{(section, key): value}`` replaced (values already typed)."""
        secs = {s: dict(items) for s, items in self.sections}
        for (s, k), v in updates.items():
            secs.setdefault(s, {})[k] = v
        return _normalise(secs, self.lines)

    # building ----------------------------------------------------------------
    def space(self, name, _seen=()) -> MeasureSpace:
        sec = self.section(name)
        if "same_as" in sec:
            other = sec["same_as"]
            if other == name or other in _seen:
                raise self.invalid("circular same_as", name, "same_as")
            return self.space(other, _seen + (name,))
        kind = sec.get("kind")
        if kind is None:
            raise self.invalid("missing 'kind' (or 'same_as')", name, "kind")
        try:
            if kind == "interval":
                lo, hi = self._need(name, "lo"), self._need(name, "hi")
                if len(lo) != 1 or len(hi) != 1:
                    raise self.invalid("interval takes one lo and one hi", name, "lo")
                return MeasureSpace.interval(lo[0], hi[0])
            if kind == "box":
                return MeasureSpace.box(self._need(name, "lo"), self._need(name, "hi"))
            if kind == "index":
                return MeasureSpace.index(self._need(name, "indices"), sec.get("weights"))
            return MeasureSpace.group(self._need(name, "order"), sec.get("rank", 1),
                                      sec.get("measure", "haar"), sec.get("weights"))
        except ConfigInvalid:
            raise
        except (ValueError, TypeError, HausdorffError) as exc:
            raise self.invalid(str(exc), name) from exc

    def _need(self, section, key):
        val = self.get(section, key)
        if val is None:
            raise self.invalid(f"missing required key {key!r}", section, key)
        return val

    def exponents(self) -> Exponents:
        try:
            return Exponents(self._need("exponents", "p"), self._need("exponents", "q"))
        except ValueError as exc:
            raise self.invalid(str(exc), "exponents", "p") from exc

    def quadrature(self, section="quadrature", rel_tol: Optional[float] = None,
                   base: Optional[QuadratureSpec] = None) -> QuadratureSpec:
        sec = self.section(section)
        kw = dict(sec)
        if rel_tol is not None:
            kw["target_rel_tol"] = rel_tol
        try:
            return (base or QuadratureSpec()).replace(**kw)
        except (ValueError, TypeError) as exc:
            raise self.invalid(str(exc), section) from exc

    def _kernel_vars(self, target):
        d = target.dim
        return ("u", "x") if d == 1 else ("u", "x") + tuple(f"x{i + 1}" for i in range(d))

    def kernel(self, omega, target) -> Kernel:
        sec = self.section("kernel")
        given = [k for k in ("expr", "weights", "table") if k in sec]
        if len(given) != 1:
            raise self.invalid("give exactly one of expr, weights, table", "kernel")
        nonneg = sec.get("nonnegative")
        try:
            if "weights" in sec:
                k = Kernel.weights(omega, sec["weights"])
            elif "table" in sec:
                k = Kernel.table(omega, target, sec["table"])
            else:
                k = _expr_kernel(Expression(sec["expr"], self._kernel_vars(target)), target.dim,
                                 bool(nonneg))
        except ExpressionError as exc:
            raise self.invalid(str(exc), "kernel", "expr") from exc
        except ValueError as exc:
            raise self.invalid(str(exc), "kernel") from exc
        if nonneg is not None and "expr" not in sec and k.nonnegative != nonneg:
            if nonneg:
                raise self.invalid("kernel declared nonnegative but has negative values",
                                   "kernel", "nonnegative")
        return k

    def family(self, omega, source, target):
        sec = self.section("family")
        kind = self._need("family", "kind")
        try:
            if kind == "scalar-dilation":
                return ScalarDilation(target, source)
            if kind == "cyclic-automorphism":
                if not omega.is_discrete:
                    raise ValueError("cyclic-automorphism needs an index Omega of multipliers")
                return CyclicAutomorphism(target.carrier.order,
                                          [int(v) for v in omega.points()], target, source)
            # matrix-dilation
            if not omega.is_discrete:
                raise ValueError("matrix-dilation needs an index Omega")
            ks = [int(v) for v in omega.points()]
            if "matrices" in sec:
                mats = [np.array(m) for m in sec["matrices"]]
                if len(mats) != len(ks):
                    raise ValueError(f"{len(mats)} matrices for {len(ks)} indices")
            elif "diagonal" in sec:
                d = sec.get("dim", target.dim)
                ex = Expression(sec["diagonal"], ("k",))
                mats = [float(ex(k=float(k))) * np.eye(d) for k in ks]
            else:
                raise ValueError("matrix-dilation needs 'matrices' or 'diagonal'")
            return MatrixDilation(mats, target, source, indices=ks)
        except ExpressionError as exc:
            raise self.invalid(str(exc), "family", "diagonal") from exc
        except (ValueError, TypeError) as exc:
            raise self.invalid(str(exc), "family") from exc

    def operator(self) -> OperatorInstance:
        omega = self.space("omega")
        source = self.space("source")
        target = self.space("target")
        fam = self.family(omega, source, target)
        kern = self.kernel(omega, target)
        e = self.exponents()
        try:
            return OperatorInstance(omega, source, target, fam, kern, e)
        except ValueError as exc:
            raise self.invalid(str(exc), "family") from exc

    def witness_families(self, source):
        fams = []
        names = self.get("estimator", "families", ())
        known = set(self.witness_names())
        for name in names:
            if name not in known:
                raise self.invalid(f"unknown witness family {name!r}", "estimator", "families")
            fams.append(self._witness(name, source))
        return fams

    def _witness(self, name, source):
        sname = f"witness.{name}"
        sec = self.section(sname)
        kind = self._need(sname, "kind")
        try:
            if kind == "truncated-power":
                kw = {k: sec[k] for k in ("alpha", "support") if k in sec}
                fam = TruncatedPower(**kw)
            elif kind == "step-function":
                fam = StepFunction(self._need(sname, "breakpoints"), sec.get("levels", (-1.0, 1.0)),
                                   dim=sec.get("dim", 1))
            elif kind == "gaussian-bump":
                carrier = sec.get("carrier")
                if carrier is None and source.dim == 1 and hasattr(source.carrier, "lo"):
                    carrier = (source.carrier.lo, source.carrier.hi)
                fam = GaussianBump(sec.get("center", (0.0, 1.0)), sec.get("width", (0.05, 1.0)),
                                   carrier or (-math.inf, math.inf))
            else:
                fam = GridVector(source)
        except ConfigInvalid:
            raise
        except (ValueError, TypeError) as exc:
            raise self.invalid(str(exc), sname) from exc
        fam.name = name
        return fam

    def probe(self):
        sec = self.section("probe")
        if not sec:
            return None
        try:
            f = Expression(self._need("probe", "f"), ("t",))
        except ExpressionError as exc:
            raise self.invalid(str(exc), "probe", "f") from exc
        return {"f": lambda t: f(t=np.asarray(t, dtype=float)), "f_text": f.text,
                "x": sec.get("x", 1.0), "eps": sec.get("eps", (1e-2, 1e-4, 1e-6)),
                "witness_p": sec.get("witness_p")}


def _expr_kernel(ex: Expression, d: int, nonneg: bool) -> Kernel:
    one_var = not any(ex.uses(v) for v in ex.variables if v != "u")

    def evaluate(u, x):
        x = np.asarray(x, dtype=float)
        env = {"u": np.asarray(u, dtype=float)}
        if d == 1:
            env["x"] = x
        else:
            for i in range(d):
                env[f"x{i + 1}"] = x[..., i]
            env["x"] = np.sqrt(np.sum(x * x, axis=-1))  # |x|
        return np.asarray(ex(**env), dtype=float)

    return Kernel(evaluate, one_variable=one_var, nonnegative=nonneg, description=ex.text)


def function_from_spec(spec: str, dim: int = 1) -> SupportedFunction:
    """``--f`` argument: an expression in ``t`` (or ``t1..td``), optionally ``expr on lo,hi``."""
    text, _, support = spec.partition(" on ")
    variables = ("t",) if dim == 1 else ("t",) + tuple(f"t{i + 1}" for i in range(dim))
    ex = Expression(text, variables)

    def fn(t):
        t = np.asarray(t, dtype=float)
        if dim == 1:
            return np.asarray(ex(t=t), dtype=float) * np.ones(np.shape(t))
        env = {f"t{i + 1}": t[..., i] for i in range(dim)}
        env["t"] = np.sqrt(np.sum(t * t, axis=-1))
        return np.asarray(ex(**env), dtype=float) * np.ones(t.shape[:-1])

    sup = None
    if support:
        lo, hi = (_real(v) for v in _split(support))
        sup = (lo, hi)
    return SupportedFunction(fn, sup, spec)


def grid_from_spec(spec: str) -> np.ndarray:
    """``--grid``: ``lo:hi:n`` (linear), ``log:lo:hi:n`` (geometric) or ``a,b,c``."""
    s = spec.strip()
    parts = s.split(":")
    if parts[0] == "log" and len(parts) == 4:
        return np.geomspace(_real(parts[1]), _real(parts[2]), _int(parts[3]))
    if len(parts) == 3:
        return np.linspace(_real(parts[0]), _real(parts[1]), _int(parts[2]))
    return np.array([_real(v) for v in _split(s)])


# --------------------------------------------------------------------------
def _normalise(secs: dict, lines=()) -> ScenarioConfig:
    out = []
    for name in sorted(secs, key=_section_rank):
        schema = _schema_for(name)
        items = tuple((k, secs[name][k]) for k in schema if k in secs[name])
        out.append((name, items))
    return ScenarioConfig(tuple(out), tuple(lines))


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate config text; raise ConfigInvalid with line/field on problems."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                   default_section="__defaults__", strict=True)
    try:
        cp.read_string(text)
    except configparser.DuplicateSectionError as exc:
        raise ConfigInvalid(f"duplicate section [{exc.section}]", exc.section, None, exc.lineno)
    except configparser.DuplicateOptionError as exc:
        raise ConfigInvalid(f"duplicate key {exc.option!r}", exc.section, exc.option, exc.lineno)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigInvalid("text before the first [section]", None, None, exc.lineno)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigInvalid("malformed line", None, None, line)
    lines = _locate(text)
    secs = {}
    for name in cp.sections():
        schema = _schema_for(name)
        if schema is None:
            raise ConfigInvalid(f"unknown section [{name}]", name, None, lines.get((name, None)))
        secs[name] = {}
        for key, raw in cp.items(name):
            where = lines.get((name, key))
            if key not in schema:
                raise ConfigInvalid(f"unknown key {key!r}", name, key, where)
            try:
                secs[name][key] = schema[key].parse(raw)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigInvalid(f"bad value {raw!r}: {exc}", name, key, where) from exc
    for req in REQUIRED:
        if req not in secs:
            raise ConfigInvalid(f"missing section [{req}]", req)
    version = secs["scenario"].get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigInvalid(f"schema_version must be {SCHEMA_VERSION}, got {version}", "scenario",
                            "schema_version", lines.get(("scenario", "schema_version"))
                            or lines.get(("scenario", None)))
    cfg = _normalise(secs, tuple(sorted(lines.items(), key=lambda kv: kv[1])))
    cfg.exponents()  # admissibility is part of validation
    for name in cfg.get("estimator", "families", ()):
        if name not in cfg.witness_names():
            raise cfg.invalid(f"unknown witness family {name!r}", "estimator", "families")
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
