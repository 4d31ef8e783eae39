"""``tscale`` command line.

Every subcommand writes a table as CSV (default) or JSON to stdout or
``--out``.  Exit status: 0 on success, 1 on a domain error (non-regressive
coefficient, point outside the scale, ...), 2 on a usage error.
"""
from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import dynamics, liegroup, qcalc, trigfun, verify
from .errors import TimeScaleError
from .expfun import CoefficientFunction, ExpScheme, eval_exp
from .timescale import TimeScale, parse_scale, uniform

_IMAG_LITERAL = re.compile(r"(?<![\w.])((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i\b")
_EXPR_NAMES = {
    name: getattr(cmath, name)
    for name in ("exp", "log", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "tanh", "pi", "e")
}
_EXPR_NAMES.update(abs=abs, i=1j, j=1j, floor=math.floor)


class Table:
    """Ordered rows with named columns; floats are written with ``repr`` so CSV round-trips."""

    def __init__(self, columns, rows=None, meta=None):
        self.columns = list(columns)
        self.rows = list(rows or [])
        self.meta = meta or {}

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, expected {len(self.columns)}")
        self.rows.append(list(values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [dict(zip(self.columns, [_jsonable(v) for v in row])) for row in self.rows]
        out = {"columns": self.columns, "rows": rows}
        if self.meta:
            out["meta"] = self.meta
        return json.dumps(out, indent=1) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Table":
        """Inverse of :meth:`to_csv`; numeric cells come back as floats."""
        reader = csv.reader(io.StringIO(text))
        columns = next(reader)
        rows = [[_parse_cell(v) for v in row] for row in reader]
        return cls(columns, rows)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def _parse_cell(v: str):
    try:
        return float(v)
    except ValueError:
        return v


# -- argument parsing helpers ----------------------------------------------------

def parse_complex(text: str) -> complex:
    """Complex literal ``re[+imi]``: ``1``, ``-0.5+2i``, ``3i``, ``1e-3-4.5i``."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty number")
    if s.endswith("i"):
        s = s[:-1] + "j"
        if s in ("j", "+j", "-j"):
            s = s.replace("j", "1j")
    if "j" in s[:-1] or not re.fullmatch(r"[0-9eE.+\-j]+", s):
        raise ValueError(f"not a complex literal: {text!r}")
    return complex(s)


def parse_coefficient(text: str) -> CoefficientFunction:
    """A complex literal, or an expression in ``t`` such as ``1+0.5*sin(t)`` or ``2i*t``."""
    try:
        return CoefficientFunction.const(parse_complex(text))
    except ValueError:
        pass
    source = _IMAG_LITERAL.sub(r"\1j", text)
    try:
        code = compile(source, "<alpha>", "eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse coefficient {text!r}: {exc.msg}") from None
    unknown = set(code.co_names) - set(_EXPR_NAMES) - {"t"}
    if unknown:
        raise ValueError(f"unknown names in coefficient {text!r}: {', '.join(sorted(unknown))}")

    def func(t):
        return complex(eval(code, {"__builtins__": {}}, {**_EXPR_NAMES, "t": t}))

    func(0.0)  # surface evaluation errors while parsing
    return CoefficientFunction(func)


def parse_floats(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:count`` (inclusive linspace)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:count, got {text!r}")
        return [float(v) for v in np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))]
    return [float(v) for v in text.split(",") if v.strip()]


def parse_matrix(text: str) -> np.ndarray:
    """JSON nested list (inline or a file path); complex entries as ``re[+imi]`` strings or ``[re, im]``."""
    raw = Path(text).read_text() if Path(text).is_file() else text
    data = json.loads(raw)

    def conv(v):
        if isinstance(v, str):
            return parse_complex(v)
        if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
            return complex(v[0], v[1])
        return complex(v)

    M = np.array([[conv(v) for v in row] for row in data], dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    return M.real.copy() if not np.any(M.imag) else M


def parse_group(text: str) -> liegroup.QuadraticGroupSpec:
    """``so:n``, ``su:n``, ``sp:m`` (2m x 2m), ``lorentz:n``."""
    name, _, n = text.lower().partition(":")
    n = int(n or 2)
    makers = {
        "so": liegroup.QuadraticGroupSpec.orthogonal,
        "o": liegroup.QuadraticGroupSpec.orthogonal,
        "su": liegroup.QuadraticGroupSpec.unitary,
        "u": liegroup.QuadraticGroupSpec.unitary,
        "sp": liegroup.QuadraticGroupSpec.symplectic,
        "lorentz": liegroup.QuadraticGroupSpec.lorentz,
    }
    if name not in makers:
        raise ValueError(f"unknown group {text!r}; use so:n, su:n, sp:m or lorentz:n")
    return makers[name](n)


def _typed(func, what):
    def conv(text):
        try:
            return func(text)
        except (ValueError, TypeError, OSError) as exc:
            raise argparse.ArgumentTypeError(f"invalid {what} {text!r}: {exc}") from None
    conv.__name__ = what
    return conv


ScaleArg = _typed(parse_scale, "scale")
ComplexArg = _typed(parse_complex, "complex number")
CoeffArg = _typed(parse_coefficient, "coefficient")
FloatsArg = _typed(parse_floats, "number list")
SchemeArg = _typed(ExpScheme.parse, "scheme")
MatrixArg = _typed(parse_matrix, "matrix")
GroupArg = _typed(parse_group, "group")


def _sample_times(ts: TimeScale, t_list, samples: int) -> list[float]:
    if t_list:
        return [ts.snap(t) for t in t_list]
    out = []
    for lo, hi in ts.pieces:
        if hi > lo and samples > 0:
            out.extend(float(v) for v in np.linspace(lo, hi, samples + 2)[:-1])
        else:
            out.append(lo)
        if hi > lo:
            out.append(hi)
    return out


def _anchor(args, ts):
    return trigfun.default_anchor(ts) if args.t0 is None else ts.snap(args.t0)


# -- subcommands ------------------------------------------------------------------

def cmd_exp(args) -> Table:
    ts = args.scale
    t0 = _anchor(args, ts)
    table = Table(["t", "re", "im"], meta={"scheme": str(args.scheme), "t0": t0})
    for t in _sample_times(ts, args.points, args.samples):
        v = eval_exp(args.scheme, args.alpha, ts, t, t0)
        table.add(t, v.real, v.imag)
    return table


def cmd_trig(args) -> Table:
    ts = args.scale
    t0 = _anchor(args, ts)
    names = ("cosh", "sinh") if args.hyperbolic else ("cos", "sin")
    cols = ["t"] + [f"{p}_{n}" for n in names for p in ("re", "im")]
    table = Table(cols, meta={"family": args.family, "t0": t0})
    for t in _sample_times(ts, args.points, args.samples):
        c, s = trigfun.trig_pair(args.family, ts, args.omega, t, t0, hyperbolic=args.hyperbolic)
        c, s = complex(c), complex(s)
        table.add(t, c.real, c.imag, s.real, s.imag)
    return table


def _field_for(spec: str):
    """``oscillator:w``, ``pendulum:g`` or ``linear:alpha``; returns (VectorField | None, Hamiltonian | None)."""
    name, _, arg = spec.partition(":")
    if name == "oscillator":
        w = float(arg or 1.0)
        return dynamics.oscillator_field(w), dynamics.HamiltonianSpec(
            lambda p: 0.5 * w * p * p, lambda q: 0.5 * w * q * q, lambda p: w * p, lambda q: w * q,
        )
    if name == "pendulum":
        g = float(arg or 1.0)
        h = dynamics.HamiltonianSpec.pendulum(g)
        vf = dynamics.VectorField(
            lambda x, t: np.array([x[1], -g * np.sin(x[0])]), 2, True,
            lambda x, t: np.array([[0, 1], [-g * np.cos(x[0]), 0]]),
        )
        return vf, h
    if name == "linear":
        return dynamics.VectorField.linear(parse_coefficient(arg or "1")), None
    raise ValueError(f"unknown field {spec!r}; use oscillator:w, pendulum:g or linear:alpha")


def cmd_compare(args) -> Table:
    ts = args.scale
    field, ham = _field_for(args.field)
    x0 = np.array(args.x0 or ([1.0] if field.dim == 1 else [1.0, 0.0]), dtype=complex)
    if x0.size != field.dim:
        raise ValueError(f"--x0 needs {field.dim} values for field {args.field!r}")
    t0 = _anchor(args, ts)
    t1 = ts.max if args.t1 is None else args.t1
    cols = ["scheme", "t"] + [f"{p}_x{i}" for i in range(field.dim) for p in ("re", "im")]
    if ham is not None:
        cols.append("energy")
    table = Table(cols, meta={"field": args.field})
    for name in args.schemes:
        scheme = dynamics.SchemeKind(name)
        if scheme is dynamics.SchemeKind.DISCRETE_GRADIENT:
            if ham is None:
                raise ValueError("discrete_gradient needs a Hamiltonian field (oscillator or pendulum)")
            traj = dynamics.integrate(scheme, ham, ts, x0.real, t0, t1)
        else:
            traj = dynamics.integrate(scheme, field, ts, x0, t0, t1)
        for t, x in zip(traj.times, traj.states):
            row = [scheme.value, t]
            for v in x:
                row += [v.real, v.imag]
            if ham is not None:
                row.append(ham.energy(x[0].real, x[1].real))
            table.add(*row)
    return table


def cmd_oscillator(args) -> Table:
    """Cayley Sin/Cos analogue with its residual, or a scheme trajectory of the oscillator."""
    w = args.omega0
    ts = args.scale if args.scale is not None else uniform(0.0, args.mu, args.steps)
    if args.scheme == "cayley":
        sin, cos = verify.cayley_sin_cos(w, ts)
        table = Table(["t", "cos", "sin", "residual_cos", "residual_sin"], meta={"omega0": w})
        nodes = ts.nodes()
        for k, t in enumerate(nodes):
            c, s = complex(cos(t)), complex(sin(t))
            if k < len(nodes) - 2 and ts.graininess(t) > 0 and ts.graininess(ts.sigma(t)) > 0:
                rc = abs(dynamics.oscillator_residual(cos, w, ts, t))
                rs = abs(dynamics.oscillator_residual(sin, w, ts, t))
            else:
                rc = rs = float("nan")
            table.add(t, c.real, s.real, rc, rs)
        return table
    scheme = dynamics.SchemeKind(args.scheme)
    field, ham = _field_for(f"oscillator:{w}")
    x0 = np.array([1.0, 0.0])
    if scheme is dynamics.SchemeKind.DISCRETE_GRADIENT:
        traj = dynamics.integrate(scheme, ham, ts, x0, ts.min, ts.max)
    else:
        traj = dynamics.integrate(scheme, field, ts, x0.astype(complex), ts.min, ts.max)
    table = Table(["t", "q", "p", "energy"], meta={"omega0": w, "scheme": scheme.value})
    for t, x in zip(traj.times, traj.states):
        q, p = x[0].real, x[1].real
        table.add(t, q, p, 0.5 * (q * q + p * p))
    return table


def cmd_qexp(args) -> Table:
    params = qcalc.QParams(args.q, series_tol=args.tol) if args.tol is not None else qcalc.QParams(args.q)
    table = Table(["x", "re_E", "im_E", "cos", "sin"], meta={"q": args.q, "radius": params.radius})
    for x in args.x_grid:
        e = qcalc.q_exp(x, params)
        c, s = qcalc.q_trig(x, params)
        table.add(x, e.real, e.imag, c, s)
    return table


def cmd_lieflow(args) -> Table:
    group = args.group
    A = args.A
    if args.A1 is not None:
        A0, A1 = A, args.A1
        A = lambda t: A0 + math.sin(t) * A1
    ts = args.scale
    t0 = ts.min if args.t0 is None else args.t0
    t1 = ts.max if args.t1 is None else args.t1
    problem = liegroup.LieFlowProblem(group, A, np.eye(group.n), ts)
    pts = liegroup.flow(problem, t0, t1)
    n = group.n
    cols = ["t", "defect"] + [f"{p}_phi{i}{j}" for i in range(n) for j in range(n) for p in ("re", "im")]
    table = Table(cols)
    for p in pts:
        row = [p.t, p.defect]
        for v in p.Phi.ravel():
            v = complex(v)
            row += [v.real, v.imag]
        table.add(*row)
    return table


def cmd_verify(args) -> tuple[Table, bool]:
    kwargs = {}
    if args.family is not None:
        if args.suite != "pythagorean":
            raise argparse.ArgumentTypeError("--family only applies to the pythagorean suite")
        kwargs["family"] = args.family
    checks = verify.run_suite(args.suite, **kwargs)
    table = Table(["suite", "check", "value", "tol", "status"])
    for c in checks:
        table.add(c.suite, c.name, c.value, c.tol, "PASS" if c.passed else "FAIL")
    return table, all(c.passed for c in checks)


def _format_report(table: Table) -> str:
    width = max(len(r[1]) for r in table.rows) if table.rows else 10
    lines = [f"{'suite':<12} {'check':<{width}} {'value':>12} {'tol':>10}  status"]
    for suite, name, value, tol, status in table.rows:
        lines.append(f"{suite:<12} {name:<{width}} {value:>12.3e} {tol:>10.1e}  {status}")
    n_fail = sum(r[4] == "FAIL" for r in table.rows)
    lines.append(f"{len(table.rows) - n_fail}/{len(table.rows)} checks passed")
    return "\n".join(lines) + "\n"


# -- parser ----------------------------------------------------------------------------

def _global_options(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--format", choices=("csv", "json"), default=d("csv"), help="output format (default csv)")
    p.add_argument("--out", default=d(None), help="write output to this file instead of stdout")
    p.add_argument("--tol", type=float, default=d(None), help="series truncation tolerance for qexp")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tscale", description="Exponential, trigonometric and flow functions on time scales.")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help):
        p = sub.add_parser(name, help=help)
        _global_options(p, suppress=True)
        return p

    def scale_opts(p, required=True):
        p.add_argument("--scale", type=ScaleArg, required=required,
                       help="JSON spec file or shorthand: uniform:start:step:count, qgrid:q:scale:count[:zero], points:a,b,c, interval:a:b (join with +)")
        p.add_argument("--t0", type=float, default=None, help="base point (default 0 if in the scale, else min)")

    def sample_opts(p):
        p.add_argument("--points", type=FloatsArg, default=None, help="evaluate at these t values (a,b,c or start:stop:count)")
        p.add_argument("--samples", type=int, default=0, help="interior samples per dense interval")

    p = add("exp", "tabulate an exponential E(t, t0)")
    p.add_argument("--scheme", type=SchemeArg, default=ExpScheme("cayley"), help="delta, nabla, cayley, exact or pade:j:k")
    p.add_argument("--alpha", type=CoeffArg, required=True, help="coefficient: re[+imi] literal or expression in t")
    scale_opts(p)
    sample_opts(p)

    p = add("trig", "tabulate a trigonometric or hyperbolic pair")
    p.add_argument("--family", choices=[f.value for f in trigfun.TrigFamily], default="cayley")
    p.add_argument("--omega", type=CoeffArg, required=True, help="frequency (or alpha with --hyperbolic)")
    p.add_argument("--hyperbolic", action="store_true")
    scale_opts(p)
    sample_opts(p)

    p = add("compare", "run several dynamic-equation schemes on one field")
    p.add_argument("--schemes", type=lambda s: s.split(","), default=[k.value for k in dynamics.SchemeKind if k.value != "discrete_gradient"],
                   help="comma-separated: " + ",".join(k.value for k in dynamics.SchemeKind))
    p.add_argument("--field", default="oscillator:1", help="oscillator:w, pendulum:g or linear:alpha")
    p.add_argument("--x0", type=_typed(lambda s: [parse_complex(v) for v in s.split(",")], "state"), default=None)
    p.add_argument("--t1", type=float, default=None)
    scale_opts(p)

    p = add("oscillator", "harmonic oscillator analogue")
    p.add_argument("--omega0", type=float, default=1.0)
    p.add_argument("--scheme", default="cayley", choices=["cayley"] + [k.value for k in dynamics.SchemeKind])
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--mu", type=float, default=0.1, help="uniform step when --scale is not given")
    p.add_argument("--scale", type=ScaleArg, default=None)

    p = add("qexp", "tabulate the q-exponential and q-trigonometric functions")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--x-grid", dest="x_grid", type=FloatsArg, required=True, help="a,b,c or start:stop:count")

    p = add("lieflow", "Cayley flow on a quadratic matrix group")
    p.add_argument("--group", type=GroupArg, required=True, help="so:n, su:n, sp:m or lorentz:n")
    p.add_argument("--A", dest="A", type=MatrixArg, required=True, help="algebra element as JSON (inline or file)")
    p.add_argument("--A1", dest="A1", type=MatrixArg, default=None, help="optional: A(t) = A + sin(t) A1")
    p.add_argument("--t1", type=float, default=None)
    scale_opts(p)

    p = add("verify", "run a named invariant suite")
    p.add_argument("suite", choices=list(verify.SUITES) + ["all"])
    p.add_argument("--family", choices=("cayley", "bp", "hilger"), default=None, help="pythagorean suite family")
    return parser


COMMANDS = {
    "exp": cmd_exp,
    "trig": cmd_trig,
    "compare": cmd_compare,
    "oscillator": cmd_oscillator,
    "qexp": cmd_qexp,
    "lieflow": cmd_lieflow,
}


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            table, ok = cmd_verify(args)
            text = table.to_json() if args.format == "json" else _format_report(table)
            _emit(text, args.out)
            return 0 if ok else 1
        table = COMMANDS[args.command](args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"tscale: error: {exc}", file=sys.stderr)
        return 2
    except (TimeScaleError, ValueError, ArithmeticError) as exc:
        print(f"tscale: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _emit(table.to_json() if args.format == "json" else table.to_csv(), args.out)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
