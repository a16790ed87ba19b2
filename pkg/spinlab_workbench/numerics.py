# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Special functions and fitting: Bessel J0, nonlinear least squares, dense linear solve.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla
from scipy import special
from scipy.optimize import least_squares

from spinlab_workbench.helper import ValidationError, NumericError

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

CONDITION_LIMIT = 1e12


def bessel_j0(x):
    """
    Zeroth order Bessel function of the first kind.

    Accepts a scalar or an array; scalars come back as float.

    :param x: finite real argument(s)
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError('bessel_j0 requires finite input, got {}'.format(x))
    value = special.j0(arr)
    return float(value) if value.ndim == 0 else value


def bessel_j0_series(x, eps=1e-16, max_terms=200):
    """Power series oracle sum (-1)^k (x/2)^(2k) / (k!)^2, for |x| <= 12"""
    half_sq = (x / 2.0) ** 2
    term, total = 1.0, 1.0
    for k in range(1, max_terms):
        term *= -half_sq / (k * k)
        total += term
        if abs(term) < eps:
            break
    return total


@dataclass(frozen=True)
class FitProblem:
    """Model y ~ model(params, t) with optional (lower, upper) bounds"""
    model: Callable[[np.ndarray, np.ndarray], np.ndarray]
    t: np.ndarray
    y: np.ndarray
    init: np.ndarray
    bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        y = np.asarray(self.y, dtype=float)
        init = np.asarray(self.init, dtype=float)
        object.__setattr__(self, 't', t)
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'init', init)
        if t.shape != y.shape or t.ndim != 1:
            raise ValidationError('FitProblem needs matching 1-d t and y, got {} and {}'.format(t.shape, y.shape))
        if t.size < init.size:
            raise ValidationError('FitProblem has {} samples for {} parameters'.format(t.size, init.size))
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(init))):
            raise ValidationError('FitProblem data and init must be finite')


@dataclass(frozen=True)
class FitResult:
    params: np.ndarray
    residual_rms: float
    converged: bool
    nfev: int
    jacobian: np.ndarray = field(repr=False)
    message: str = ''


def nls_fit(problem, max_iter=200, tol=1e-10):
    """
    Levenberg-Marquardt least squares with a central-difference Jacobian.

    Bounded problems switch to the trust-region reflective method.
    Never raises on non-convergence: the flag is false and the best params come back.
    """
    def residuals(params):
        return problem.model(params, problem.t) - problem.y

    n_params = problem.init.size
    kwargs = dict(jac='3-point', ftol=tol, xtol=tol, gtol=tol, x_scale='jac',
                  max_nfev=max_iter * (2 * n_params + 1))
    if problem.bounds is None:
        result = least_squares(residuals, problem.init, method='lm', **kwargs)
    else:
        result = least_squares(residuals, problem.init, method='trf', bounds=problem.bounds, **kwargs)

    rms = float(np.sqrt(np.mean(result.fun ** 2)))
    converged = bool(result.status > 0)
    if not converged:
        my_logger.verbose1('nls_fit stopped without convergence: {}'.format(result.message))
    return FitResult(params=np.asarray(result.x), residual_rms=rms, converged=converged,
                     nfev=int(result.nfev), jacobian=np.asarray(result.jac), message=str(result.message))


def condition_1norm(a):
    try:
        return float(np.linalg.cond(a, 1))
    except np.linalg.LinAlgError:
        return math.inf


def linsolve(a, b):
    """
    Partial-pivot LU solve of a square complex system.

    :param a: square matrix, 1-norm condition below 1e12
    :param b: right-hand side vector
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError('linsolve needs a square matrix, got shape {}'.format(a.shape))
    if b.shape[0] != a.shape[0]:
        raise ValidationError('linsolve right-hand side has length {} for a {} system'.format(b.shape[0], a.shape))

    cond = condition_1norm(a)
    if not np.isfinite(cond) or cond >= CONDITION_LIMIT:
        raise NumericError('linsolve: matrix is singular or ill-conditioned (1-norm condition {:.3g})'.format(cond))

    lu, piv = sla.lu_factor(a)
    x = sla.lu_solve((lu, piv), b)

    b_norm = np.linalg.norm(b)
    if b_norm > 0 and np.linalg.norm(a @ x - b) / b_norm > 1e-10:
        raise NumericError('linsolve residual above 1e-10 (condition {:.3g})'.format(cond))
    return x
