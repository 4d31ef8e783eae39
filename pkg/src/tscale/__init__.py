"""Exponential, trigonometric and flow functions on time scales."""
from . import dynamics, expfun, liegroup, qcalc, timescale, trigfun
from .errors import TimeScaleError
from .expfun import CAYLEY, DELTA, EXACT, NABLA, ExpScheme, eval_exp, pade, step_factor
from .timescale import TimeScale, interval, normalize, parse_scale, points, qgrid, uniform

__version__ = "0.1.0"

__all__ = [
    "CAYLEY", "DELTA", "EXACT", "NABLA", "ExpScheme", "TimeScale", "TimeScaleError",
    "dynamics", "eval_exp", "expfun", "interval", "liegroup", "normalize", "pade",
    "parse_scale", "points", "qcalc", "qgrid", "step_factor", "timescale", "trigfun", "uniform",
]
