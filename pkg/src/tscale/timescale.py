"""Time scales as finite unions of closed intervals and scattered points.

A :class:`TimeScale` is an immutable, normalized collection of *pieces*.
Each piece is a pair ``(lo, hi)``; ``lo == hi`` marks an isolated point and
``lo < hi`` a closed interval.  Pieces are sorted and separated by strictly
positive gaps, so every gap between consecutive pieces is a right-scattered
step of length ``mu``.
"""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

from scipy import integrate

from .errors import (
    DegenerateAtMax,
    DegenerateAtMin,
    EmptyScale,
    NotInScale,
    QuadratureFailure,
)

TAU_FD = 1e-8
TAU_QUAD = 1e-12


def mem_tol(t: float) -> float:
    """Absolute membership tolerance at ``t``."""
    return 1e-12 * max(1.0, abs(t))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Point:
    t: float


class Segment(NamedTuple):
    """One piece of a path through a scale.

    ``kind`` is ``"dense"`` for a sub-interval ``[start, end]`` or ``"step"``
    for a jump from a right-scattered ``start`` to ``end = sigma(start)``.
    """

    kind: str
    start: float
    end: float

    @property
    def mu(self) -> float:
        return self.end - self.start if self.kind == "step" else 0.0


@dataclass(frozen=True)
class PointClass:
    right_gap: float
    left_gap: float
    at_max: bool
    at_min: bool

    @property
    def right_scattered(self) -> bool:
        return self.right_gap > 0

    @property
    def left_scattered(self) -> bool:
        return self.left_gap > 0

    @property
    def right_dense(self) -> bool:
        return not self.right_scattered

    @property
    def left_dense(self) -> bool:
        return not self.left_scattered


@dataclass(frozen=True)
class TimeScale:
    """Normalized time scale.  Build it with :func:`normalize` or the helpers."""

    pieces: tuple[tuple[float, float], ...]
    _los: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.pieces:
            raise EmptyScale("a time scale needs at least one point")
        object.__setattr__(self, "_los", tuple(p[0] for p in self.pieces))

    @property
    def window(self) -> tuple[float, float]:
        return (self.pieces[0][0], self.pieces[-1][1])

    @property
    def min(self) -> float:
        return self.pieces[0][0]

    @property
    def max(self) -> float:
        return self.pieces[-1][1]

    @property
    def intervals(self) -> list[Interval]:
        return [Interval(lo, hi) for lo, hi in self.pieces if lo < hi]

    @property
    def points(self) -> list[float]:
        return [lo for lo, hi in self.pieces if lo == hi]

    @property
    def is_discrete(self) -> bool:
        return all(lo == hi for lo, hi in self.pieces)

    def nodes(self) -> list[float]:
        """Every piece endpoint in increasing order (isolated points once)."""
        out = []
        for lo, hi in self.pieces:
            out.append(lo)
            if hi > lo:
                out.append(hi)
        return out

    # -- location -------------------------------------------------------

    def _locate(self, t: float) -> tuple[int, float]:
        """Return (piece index, t snapped onto that piece)."""
        t = float(t)
        tol = mem_tol(t)
        i = bisect.bisect_right(self._los, t + tol) - 1
        if i >= 0:
            lo, hi = self.pieces[i]
            if lo - tol <= t <= hi + tol:
                return i, min(max(t, lo), hi)
        raise NotInScale(t)

    def __contains__(self, t) -> bool:
        try:
            self._locate(t)
        except NotInScale:
            return False
        return True

    def snap(self, t: float) -> float:
        """Snap ``t`` onto the nearest piece endpoint when within tolerance."""
        i, s = self._locate(t)
        lo, hi = self.pieces[i]
        tol = mem_tol(t)
        if abs(s - lo) <= tol:
            return lo
        if abs(s - hi) <= tol:
            return hi
        return s

    def _at_right_edge(self, i: int, t: float) -> bool:
        return t >= self.pieces[i][1] - mem_tol(t)

    def _at_left_edge(self, i: int, t: float) -> bool:
        return t <= self.pieces[i][0] + mem_tol(t)

    # -- jump operators ------------------------------------------------

    def sigma(self, t: float) -> float:
        i, t = self._locate(t)
        if not self._at_right_edge(i, t):
            return t
        if i + 1 == len(self.pieces):
            return self.pieces[i][1]
        return self.pieces[i + 1][0]

    def rho(self, t: float) -> float:
        i, t = self._locate(t)
        if not self._at_left_edge(i, t):
            return t
        if i == 0:
            return self.pieces[0][0]
        return self.pieces[i - 1][1]

    def graininess(self, t: float) -> float:
        i, s = self._locate(t)
        if self._at_right_edge(i, s) and i + 1 < len(self.pieces):
            return self.pieces[i + 1][0] - self.pieces[i][1]
        return 0.0

    def left_graininess(self, t: float) -> float:
        i, s = self._locate(t)
        if self._at_left_edge(i, s) and i > 0:
            return self.pieces[i][0] - self.pieces[i - 1][1]
        return 0.0

    def classify(self, t: float) -> PointClass:
        i, s = self._locate(t)
        return PointClass(
            right_gap=self.graininess(s),
            left_gap=self.left_graininess(s),
            at_max=i + 1 == len(self.pieces) and self._at_right_edge(i, s),
            at_min=i == 0 and self._at_left_edge(i, s),
        )

    # -- paths -----------------------------------------------------------

    def segments(self, a: float, b: float) -> list[Segment]:
        """Decompose ``[a, b]`` into dense sub-intervals and scattered steps.

        Both endpoints must lie in the scale and ``a <= b``.  Steps start at
        right-scattered points in ``[a, b)``.
        """
        i, a = self._locate(a)
        j, b = self._locate(b)
        a, b = self.snap(a), self.snap(b)
        if (i, a) > (j, b):
            raise ValueError(f"segments needs a <= b, got a={a}, b={b}")
        out: list[Segment] = []
        cur = a
        while True:
            lo, hi = self.pieces[i]
            end = b if i == j else hi
            if cur < end:
                out.append(Segment("dense", cur, end))
            if i == j:
                return out
            out.append(Segment("step", hi, self.pieces[i + 1][0]))
            i += 1
            cur = self.pieces[i][0]

    def scattered_points(self, a: float | None = None, b: float | None = None) -> list[float]:
        """Right-scattered points in ``[a, b)``."""
        a = self.min if a is None else a
        b = self.max if b is None else b
        return [s.start for s in self.segments(a, b) if s.kind == "step"]


def normalize(pieces: Iterable, window: Sequence[float] | None = None) -> TimeScale:
    """Sort, clip to ``window``, and merge overlapping or touching pieces.

    ``pieces`` may contain :class:`Interval`, :class:`Point`, ``(lo, hi)``
    pairs, or an existing :class:`TimeScale`.
    """
    raw: list[tuple[float, float]] = []
    for p in pieces:
        if isinstance(p, Interval):
            raw.append((float(p.lo), float(p.hi)))
        elif isinstance(p, Point):
            raw.append((float(p.t), float(p.t)))
        elif isinstance(p, TimeScale):
            raw.extend(p.pieces)
        else:
            lo, hi = p
            if lo > hi:
                raise ValueError(f"bad piece ({lo}, {hi})")
            raw.append((float(lo), float(hi)))

    if window is not None:
        wa, wb = map(float, window)
        if wa > wb:
            raise ValueError(f"bad window [{wa}, {wb}]")
        clipped = []
        for lo, hi in raw:
            if hi < wa - mem_tol(wa) or lo > wb + mem_tol(wb):
                continue
            clipped.append((max(lo, wa), min(hi, wb)))
        raw = clipped
    raw = [(lo, hi) for lo, hi in raw if math.isfinite(lo) and math.isfinite(hi)]
    if not raw:
        raise EmptyScale("no piece intersects the window")

    raw.sort()
    merged = [raw[0]]
    for lo, hi in raw[1:]:
        plo, phi = merged[-1]
        if lo <= phi + mem_tol(phi):
            merged[-1] = (plo, max(phi, hi))
        else:
            merged.append((lo, hi))
    return TimeScale(tuple(merged))


# -- constructors ---------------------------------------------------------

def interval(a: float, b: float) -> TimeScale:
    return normalize([Interval(a, b)])


def points(values: Iterable[float]) -> TimeScale:
    return normalize(Point(v) for v in values)


def uniform(start: float, step: float, count: int) -> TimeScale:
    """``{start + k*step : k = 0..count}``."""
    if step <= 0 or count < 0:
        raise ValueError("uniform grid needs step > 0 and count >= 0")
    return points(start + k * step for k in range(count + 1))


def qgrid_pieces(q: float, scale: float = 1.0, count: int = 10, include_zero: bool = False) -> list[Point]:
    """Pieces of the geometric grid ``{scale * q**k : k = 0..count}`` (optionally with 0)."""
    if not (q > 0 and q != 1):
        raise ValueError("q-grid needs q > 0, q != 1")
    pts = [Point(scale * q**k) for k in range(count + 1)]
    if include_zero:
        pts.append(Point(0.0))
    return pts


def qgrid(q: float, scale: float = 1.0, count: int = 10, include_zero: bool = False) -> TimeScale:
    return normalize(qgrid_pieces(q, scale, count, include_zero))


def from_spec(spec: dict) -> TimeScale:
    """Build a scale from the JSON document form (``window`` + ``pieces``)."""
    pieces = []
    for item in spec.get("pieces", []):
        kind = item.get("type")
        if kind == "interval":
            pieces.append(Interval(float(item["a"]), float(item["b"])))
        elif kind == "points":
            pieces.extend(Point(float(v)) for v in item["values"])
        elif kind == "uniform":
            start, step, count = float(item["start"]), float(item["step"]), int(item["count"])
            pieces.extend(Point(start + k * step) for k in range(count + 1))
        elif kind == "qgrid":
            pieces.extend(
                qgrid_pieces(
                    float(item["q"]),
                    float(item.get("scale", 1.0)),
                    int(item["count"]),
                    bool(item.get("include_zero", False)),
                )
            )
        else:
            raise ValueError(f"unknown piece type {kind!r}")
    return normalize(pieces, spec.get("window"))


def to_spec(ts: TimeScale) -> dict:
    pieces = []
    for lo, hi in ts.pieces:
        if lo == hi:
            pieces.append({"type": "points", "values": [lo]})
        else:
            pieces.append({"type": "interval", "a": lo, "b": hi})
    return {"window": list(ts.window), "pieces": pieces}


def load_scale(path) -> TimeScale:
    with open(path) as fh:
        return from_spec(json.load(fh))


def parse_scale(text: str) -> TimeScale:
    """Parse an inline shorthand or a path to a JSON spec file.

    Shorthands, joined with ``+``::

        uniform:start:step:count   qgrid:q:scale:count[:zero]
        points:a,b,c               interval:a:b
    """
    if Path(text).is_file():
        return load_scale(text)
    pieces: list = []
    for part in text.split("+"):
        kind, _, rest = part.strip().partition(":")
        args = rest.split(":") if rest else []
        try:
            if kind == "uniform":
                start, step, count = float(args[0]), float(args[1]), int(args[2])
                pieces.extend(Point(start + k * step) for k in range(count + 1))
            elif kind == "qgrid":
                zero = len(args) > 3 and args[3].lower() in ("zero", "1", "true")
                pieces.extend(qgrid_pieces(float(args[0]), float(args[1]), int(args[2]), zero))
            elif kind == "points":
                pieces.extend(Point(float(v)) for v in rest.split(","))
            elif kind == "interval":
                pieces.append(Interval(float(args[0]), float(args[1])))
            else:
                raise ValueError(f"unknown scale kind {kind!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"cannot parse scale shorthand {part!r}: {exc}") from None
    return normalize(pieces)


# -- functions on a scale ----------------------------------------------------

@dataclass(frozen=True)
class GridFunction:
    """A callable ``t -> complex`` attached to a time scale."""

    scale: TimeScale
    func: Callable[[float], complex]

    def __call__(self, t: float) -> complex:
        return complex(self.func(t))


def sigma(ts: TimeScale, t: float) -> float:
    return ts.sigma(t)


def rho(ts: TimeScale, t: float) -> float:
    return ts.rho(t)


def graininess(ts: TimeScale, t: float) -> float:
    return ts.graininess(t)


def classify(ts: TimeScale, t: float) -> PointClass:
    return ts.classify(t)


def _richardson(diff, h0: float, power: int, tol: float = TAU_FD, max_levels: int = 12) -> complex:
    """Extrapolate ``diff(h)`` to h -> 0, halving h at each level.

    ``power`` is 2 for central differences (even error expansion), 1 for
    one-sided ones.
    """
    prev = [diff(h0)]
    best, best_err = prev[0], math.inf
    for i in range(1, max_levels):
        row = [diff(h0 / 2**i)]
        for k in range(1, i + 1):
            fac = 2.0 ** (power * k)
            row.append(row[k - 1] + (row[k - 1] - prev[k - 1]) / (fac - 1))
        err = max(abs(row[i] - row[i - 1]), abs(row[i] - prev[i - 1]))
        if err < best_err:
            best, best_err = row[i], err
        if err <= tol * max(1.0, abs(row[i])):
            return row[i]
        if err > 2 * best_err:
            break
        prev = row
    return best


def _dense_derivative(f, t: float, left: float, right: float, forward: bool) -> complex:
    scale = max(1.0, abs(t))
    cap = 0.1 * scale
    if min(left, right) >= 1e-3 * scale:
        h0 = min(left, right, cap)
        return _richardson(lambda h: (f(t + h) - f(t - h)) / (2 * h), h0, 2)
    if forward:
        h0 = min(right, cap)
        return _richardson(lambda h: (f(t + h) - f(t)) / h, h0, 1)
    h0 = min(left, cap)
    return _richardson(lambda h: (f(t) - f(t - h)) / h, h0, 1)


def _dense_room(ts: TimeScale, t: float) -> tuple[float, float, float]:
    i, s = ts._locate(t)
    lo, hi = ts.pieces[i]
    return s, s - lo, hi - s


def delta_derivative(f: GridFunction, t: float) -> complex:
    """Delta derivative: exact quotient at right-scattered t, extrapolated limit otherwise."""
    ts = f.scale
    t = ts.snap(t)
    mu = ts.graininess(t)
    if mu > 0:
        return (f(ts.sigma(t)) - f(t)) / mu
    t, left, right = _dense_room(ts, t)
    if right <= mem_tol(t):
        raise DegenerateAtMax(f"delta derivative undefined at right-dense maximum t={t}")
    return _dense_derivative(f, t, left, right, forward=True)


def nabla_derivative(f: GridFunction, t: float) -> complex:
    """Nabla derivative, the mirror image of :func:`delta_derivative`."""
    ts = f.scale
    t = ts.snap(t)
    nu = ts.left_graininess(t)
    if nu > 0:
        return (f(t) - f(ts.rho(t))) / nu
    t, left, right = _dense_room(ts, t)
    if left <= mem_tol(t):
        raise DegenerateAtMin(f"nabla derivative undefined at left-dense minimum t={t}")
    return _dense_derivative(f, t, left, right, forward=False)


def quad_complex(func, a: float, b: float, tol: float = TAU_QUAD) -> complex:
    """Adaptive Gauss-Kronrod quadrature of a complex integrand over [a, b]."""
    if a == b:
        return 0j
    total = 0j
    for part, unit in ((lambda s: complex(func(s)).real, 1.0), (lambda s: complex(func(s)).imag, 1j)):
        out = integrate.quad(part, a, b, epsabs=tol, epsrel=1e-13, limit=500, full_output=1)
        value, err = out[0], out[1]
        if len(out) > 3 and err > max(tol, 1e-13 * abs(value)) * 10:
            raise QuadratureFailure(f"quadrature on [{a}, {b}] stalled at error {err:.3g}: {out[3]}")
        total += unit * value
    return total


def delta_integral(f: GridFunction, a: float, b: float, tol: float = TAU_QUAD) -> complex:
    """Delta integral of ``f`` over ``[a, b)``: mu-weighted sum plus dense quadrature."""
    total = 0j
    for seg in f.scale.segments(a, b):
        if seg.kind == "step":
            total += seg.mu * f(seg.start)
        else:
            total += quad_complex(f, seg.start, seg.end, tol)
    return total
