"""Exception hierarchy shared by all tscale modules."""


class TimeScaleError(Exception):
    """Base class for every error raised by this package."""


class EmptyScale(TimeScaleError, ValueError):
    pass


class NotInScale(TimeScaleError, ValueError):
    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"t={t!r} is not a point of the time scale")


class DegenerateEndpoint(TimeScaleError, ValueError):
    pass


class DegenerateAtMax(DegenerateEndpoint):
    pass


class DegenerateAtMin(DegenerateEndpoint):
    pass


class QuadratureFailure(TimeScaleError, ArithmeticError):
    pass


class NotRegressive(TimeScaleError, ArithmeticError):
    """A coefficient hit a singular value of a scheme's step map."""

    def __init__(self, message, scheme=None, t=None, value=None):
        self.scheme = scheme
        self.t = t
        self.value = value
        ctx = []
        if scheme is not None:
            ctx.append(f"scheme={scheme}")
        if t is not None:
            ctx.append(f"t={t!r}")
        if value is not None:
            ctx.append(f"mu*alpha={value!r}")
        if ctx:
            message = f"{message} ({', '.join(ctx)})"
        super().__init__(message)


class SingularOplus(TimeScaleError, ArithmeticError):
    pass


class OrderTooLarge(TimeScaleError, ValueError):
    pass


class NonConstantCoefficient(TimeScaleError, ValueError):
    pass


class SolverDiverged(TimeScaleError, ArithmeticError):
    def __init__(self, message, residuals=()):
        self.residuals = list(residuals)
        super().__init__(message)


class NoConvergence(TimeScaleError, ArithmeticError):
    pass


class PoleInProduct(TimeScaleError, ArithmeticError):
    pass


class SingularCayley(TimeScaleError, ArithmeticError):
    pass


class AlgebraViolation(TimeScaleError, ValueError):
    pass


class GroupViolation(TimeScaleError, ValueError):
    pass
