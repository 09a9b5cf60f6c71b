"""Scalar functions on (0, inf) used as f-divergence generators."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInput

NEG_LOG = "neg-log"
NEG_POWER = "neg-power"
POWER = "power"
CUSTOM = "custom"

RELATIVE_ENTROPY = "relative-entropy"
SANDWICHED_LOW = "sandwiched-low"
SANDWICHED_HIGH = "sandwiched-high"


@dataclass(frozen=True)
class ClosedForm:
    """Which closed-form supremum applies; ``alpha`` for the sandwiched family."""

    kind: str
    alpha: Optional[float] = None


@dataclass(frozen=True)
class AntiMonotoneFunction:
    tag: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    is_operator_anti_monotone: bool
    beta: Optional[float] = None
    closed_form: Optional[ClosedForm] = None
    name: str = ""

    def __call__(self, x):
        return self.evaluator(x)

    def __str__(self):
        return self.name or self.tag


def sandwiched_alpha(beta: float) -> float:
    """Invert ``beta = (1 - alpha)/alpha``."""
    return 1.0 / (1.0 + beta)


def power_beta(alpha: float) -> float:
    if alpha == np.inf:
        return -1.0
    return (1.0 - alpha) / alpha


def neg_log() -> AntiMonotoneFunction:
    return AntiMonotoneFunction(NEG_LOG, lambda x: -np.log(x), True,
                                closed_form=ClosedForm(RELATIVE_ENTROPY), name="-log(x)")


def neg_power(beta: float) -> AntiMonotoneFunction:
    """``-x**beta`` for ``beta`` in (0, 1]."""
    beta = float(beta)
    if not 0.0 < beta <= 1.0:
        raise InvalidInput(f"neg-power needs beta in (0, 1], got {beta}")
    cf = ClosedForm(SANDWICHED_LOW, sandwiched_alpha(beta))
    return AntiMonotoneFunction(NEG_POWER, lambda x: -np.power(x, beta), True,
                                beta=beta, closed_form=cf, name=f"-x^{beta:g}")


def power(beta: float) -> AntiMonotoneFunction:
    """``x**beta`` for ``beta`` in [-1, 0).

    ``beta = -1`` corresponds to alpha = infinity, which has no closed form
    here and goes through the generic optimizer.
    """
    beta = float(beta)
    if not -1.0 <= beta < 0.0:
        raise InvalidInput(f"power needs beta in [-1, 0), got {beta}")
    cf = None if beta == -1.0 else ClosedForm(SANDWICHED_HIGH, sandwiched_alpha(beta))
    return AntiMonotoneFunction(POWER, lambda x: np.power(x, beta), True,
                                beta=beta, closed_form=cf, name=f"x^{beta:g}")


def custom(evaluator: Callable, anti_monotone: bool = False,
           name: str = "custom") -> AntiMonotoneFunction:
    """Caller-supplied f; the anti-monotone flag is trusted, never verified."""
    return AntiMonotoneFunction(CUSTOM, evaluator, bool(anti_monotone), name=name)


def from_alpha(alpha: float) -> AntiMonotoneFunction:
    """The generator whose optimized divergence is the sandwiched quasi-entropy."""
    alpha = float(alpha)
    if 0.5 <= alpha < 1.0:
        return neg_power(power_beta(alpha))
    if alpha > 1.0:
        return power(power_beta(alpha))
    raise InvalidInput(f"alpha must lie in [1/2, 1) or (1, inf), got {alpha}")


def builtin(name: str, beta: Optional[float] = None,
            alpha: Optional[float] = None) -> AntiMonotoneFunction:
    """Look up a builtin by CLI name; ``alpha`` is an alternative to ``beta``."""
    if name == NEG_LOG:
        return neg_log()
    if name not in (NEG_POWER, POWER):
        raise InvalidInput(f"unknown function {name!r}")
    if beta is None:
        if alpha is None:
            raise InvalidInput(f"{name} needs beta or alpha")
        beta = power_beta(alpha)
    return neg_power(beta) if name == NEG_POWER else power(beta)


_EXPR_NAMES = {
    "np": np, "log": np.log, "exp": np.exp, "sqrt": np.sqrt, "power": np.power,
    "abs": np.abs, "pi": np.pi, "e": np.e,
}


def from_expression(expr: str, anti_monotone: bool = False) -> AntiMonotoneFunction:
    """Custom f from an expression in ``x`` such as ``"-x**0.25"``.

    Only ``x``, ``np`` and a few numpy functions are in scope. The expression
    is probed on a small grid and must return finite reals there.
    """
    try:
        code = compile(expr, "<expr>", "eval")
    except SyntaxError as exc:
        raise InvalidInput(f"cannot parse expression {expr!r}: {exc.msg}") from exc
    bad = [n for n in code.co_names if n != "x" and n not in _EXPR_NAMES and n not in dir(np)]
    if bad or "__" in expr:
        raise InvalidInput(f"expression {expr!r} uses unknown names {bad}")

    def evaluator(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = eval(code, {"__builtins__": {}}, dict(_EXPR_NAMES, x=x))
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape)

    try:
        probe = evaluator(np.array([1e-3, 0.5, 1.0, 2.0, 1e3]))
    except Exception as exc:
        raise InvalidInput(f"cannot evaluate expression {expr!r}: {exc}") from exc
    if not np.all(np.isfinite(probe)):
        raise InvalidInput(f"expression {expr!r} is not finite on (0, inf)")
    return custom(evaluator, anti_monotone, name=expr)
