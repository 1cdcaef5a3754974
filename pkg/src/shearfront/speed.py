"""Minimal front speed from the eigenvalue quotient.

Every decay rate lam > 0 yields a candidate speed magnitude
mu(lam)/lam; the minimal speed is c* = -min over lam of that quotient.
The quotient is smooth, blows up at 0 and infinity, and has a single
interior minimum, so a safeguarded 1-D Newton iteration with a
golden-section fallback finds the minimizer reliably.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .eigen import assemble, principal_eigenpair
from .errors import ComplexEigenvalueError, ConvergenceError, PositivityError
from .grid import GridSpec
from .shear import ShearField, ShearSpec, mean_over_cell

__all__ = [
    "SolverOptions",
    "SpeedResult",
    "candidate_speed",
    "minimize_speed",
    "enhancement",
    "scan_candidate_speeds",
    "slope_sign_changes",
]

MEAN_WARN_TOL = 1e-10

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and limits for the 1-D minimization.

    The derivative of the quotient is estimated by central differences
    with step fd_scale * max(1, lam); iteration stops when the gradient
    estimate or the accepted step falls below its tolerance.
    """

    grad_tol: float = 1e-8
    step_tol: float = 1e-8
    max_iterations: int = 100
    fd_scale: float = 1e-5
    max_backtracks: int = 30
    bracket: tuple[float, float] = (1e-3, 50.0)
    lambda0: Optional[float] = None


@dataclass(frozen=True)
class SpeedResult:
    """Minimizer of the candidate-speed curve with solver diagnostics."""

    c_star: float
    lambda_star: float
    h_star: float
    mu_at_star: float
    iterations: int
    converged: bool
    residual: float
    grid: GridSpec
    shear: ShearSpec


def candidate_speed(field: ShearField, grid: GridSpec, lam: float, fprime0: float) -> float:
    """Speed magnitude mu(lam)/lam of the exponential-profile candidate."""
    if lam <= 0:
        raise ValueError(f"decay rate must be positive, got {lam}")
    pair = principal_eigenpair(assemble(grid, field, lam, fprime0))
    return pair.mu / lam


def scan_candidate_speeds(
    field: ShearField, grid: GridSpec, fprime0: float, lambdas: np.ndarray
) -> np.ndarray:
    """Evaluate the candidate-speed curve on a fixed set of decay rates."""
    return np.array([candidate_speed(field, grid, lam, fprime0) for lam in lambdas])


def slope_sign_changes(values: np.ndarray, tol: float = 1e-9) -> int:
    """Count sign changes of the discrete slope of a sampled curve.

    Slopes within `tol` of zero inherit the previous sign, so a flat
    stretch at the bottom of a valley is not counted twice.  A unimodal
    sample has exactly one change.
    """
    diffs = np.diff(np.asarray(values, dtype=float))
    changes = 0
    prev = 0
    for d in diffs:
        sign = prev if abs(d) <= tol else (1 if d > 0 else -1)
        if prev != 0 and sign != prev:
            changes += 1
        prev = sign
    return changes


def minimize_speed(
    field: ShearField,
    grid: GridSpec,
    fprime0: float,
    opts: SolverOptions | None = None,
) -> SpeedResult:
    """Minimize the candidate-speed curve over decay rates.

    Newton iteration on finite-difference derivatives, with backtracking
    so the quotient decreases at every accepted step; when a Newton step
    is unusable the minimizer falls back to a golden-section search on
    the full bracket, which unimodality makes safe.  Raises
    ConvergenceError (carrying the best iterate) only if the iteration
    budget is exhausted.
    """
    if fprime0 <= 0:
        raise ValueError(f"fprime0 must be positive, got {fprime0}")
    mean = mean_over_cell(field)
    if abs(mean) > MEAN_WARN_TOL:
        warnings.warn(
            f"shear mean over the cell is {mean:.3e}, not zero; "
            "the computed speed includes a trivial drift component",
            stacklevel=2,
        )
    opts = opts or SolverOptions()
    lo, hi = opts.bracket

    cache: dict[float, tuple[float, float]] = {}

    def mu_res(lam: float) -> tuple[float, float]:
        if lam not in cache:
            pair = principal_eigenpair(assemble(grid, field, lam, fprime0))
            cache[lam] = (pair.mu, pair.residual)
        return cache[lam]

    def h(lam: float) -> float:
        mu, _ = mu_res(lam)
        return mu / lam

    def h_or_inf(lam: float) -> float:
        # Eigensolver failures happen when the potential amplitude
        # lam*|b| outgrows the grid, i.e. at decay rates well above the
        # minimizer; treating such probes as above-minimum steers the
        # search back into the resolvable basin.
        try:
            return h(lam)
        except (ComplexEigenvalueError, PositivityError):
            return math.inf

    lam = opts.lambda0 if opts.lambda0 is not None else math.sqrt(fprime0)
    lam = min(max(lam, lo), hi)
    h_lam = h_or_inf(lam)
    iterations = 0
    converged = False
    grad = math.nan

    while iterations < opts.max_iterations and not converged:
        iterations += 1
        step_fd = opts.fd_scale * max(1.0, lam)
        if lam - step_fd <= lo:
            step_fd = 0.5 * (lam - lo)
        hp = h_or_inf(lam + step_fd)
        hm = h_or_inf(lam - step_fd)
        fd_ok = math.isfinite(h_lam) and math.isfinite(hp) and math.isfinite(hm)
        if fd_ok:
            grad = (hp - hm) / (2.0 * step_fd)
            curv = (hp - 2.0 * h_lam + hm) / step_fd**2

            if abs(grad) < opts.grad_tol:
                converged = True
                break

        accepted = False
        if fd_ok and curv > 0:
            newton = -grad / curv
            # At the finite-difference noise floor no step can decrease
            # the quotient measurably; the current point is the minimizer
            # to within the eigensolve accuracy.
            if grad**2 / (2.0 * curv) < 1e-11 * (1.0 + abs(h_lam)):
                converged = True
                break
            t = 1.0
            for _ in range(opts.max_backtracks):
                trial = lam + t * newton
                if lo < trial < hi:
                    h_trial = h_or_inf(trial)
                    if h_trial <= h_lam - 1e-4 * t * grad**2 / curv:
                        step_size = abs(trial - lam)
                        lam, h_lam = trial, h_trial
                        accepted = True
                        if step_size < opts.step_tol:
                            converged = True
                        break
                t *= 0.5

        if not accepted:
            lam, h_lam, golden_iters = _golden_section(h_or_inf, lo, hi, opts.step_tol)
            iterations += golden_iters
            converged = True

    mu_star, residual = mu_res(lam)
    h_star = mu_star / lam
    result = SpeedResult(
        c_star=-h_star,
        lambda_star=lam,
        h_star=h_star,
        mu_at_star=mu_star,
        iterations=iterations,
        converged=converged,
        residual=residual,
        grid=grid,
        shear=field.source,
    )
    if not converged:
        raise ConvergenceError(
            f"no convergence after {iterations} iterations "
            f"(last gradient {grad:.3e})",
            best=result,
        )
    return result


def _golden_section(h, lo: float, hi: float, tol: float) -> tuple[float, float, int]:
    """Golden-section search for the minimum of a unimodal function.

    Probes may equal +inf (unevaluable decay rates); those only occur at
    the large end of the bracket, so a doubly-infinite comparison shrinks
    from the right.  Returns (argmin, min value, number of shrink steps).
    """
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = h(x1), h(x2)
    iters = 0
    while b - a > tol:
        iters += 1
        if f1 < f2 or (math.isinf(f1) and math.isinf(f2)):
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = h(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = h(x2)
    return (x1, f1, iters) if f1 < f2 else (x2, f2, iters)


def enhancement(result: SpeedResult, fprime0: float) -> float:
    """Speed gain over the zero-shear baseline.

    The baseline -2*sqrt(fprime0) is analytic, so the subtraction does
    not inherit grid error from a second numerical run.
    """
    return -2.0 * math.sqrt(fprime0) - result.c_star


def zero_shear_speed(fprime0: float) -> float:
    """Closed-form minimal speed without advection."""
    return -2.0 * math.sqrt(fprime0)


def warm_started(opts: SolverOptions | None, lambda0: float) -> SolverOptions:
    """Options with the initial decay rate replaced."""
    return replace(opts or SolverOptions(), lambda0=lambda0)
