# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Dynamical many-body freezing of a driven transverse-field Ising chain.

H(t) = -1/2 [Jc sum Z_i Z_i+1 + h0 cos(wt) sum X_i], all quantities in rad/s.
One drive period tau = 2pi/w is split into equal slices, each evolved under
H sampled at the slice midpoint. An NMR coupling of J_Hz enters as
Jc = pi * J_Hz, since 2pi J_Hz Iz Sz = (pi J_Hz / 2) Z Z.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from spinlab_workbench.helper import ValidationError, ConvergenceError, check_qubit_limit
from spinlab_workbench.numerics import FitProblem, bessel_j0, nls_fit
from spinlab_workbench.operators import X, Z, embed, embed_pair, collective, matexp_hermitian, dagger
from spinlab_workbench.states import DeviationDensity, state_matrix

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

DEFAULT_SLICES = 11
DEFAULT_CYCLES = 30
OVERFLOW_LIMIT = 1e6
DEGENERATE_RATIO = 1e-6

Q_VARIANTS = ('infinite', 'three', 'three-ring', 'three-open')


@dataclass(frozen=True)
class DriveParams:
    h0: float
    j_coupling: float
    omega: float
    n: int = 3
    boundary: str = 'open'

    def __post_init__(self):
        if not self.omega > 0:
            raise ValidationError('Drive frequency must be positive, got {}'.format(self.omega))
        check_qubit_limit(self.n)
        if self.boundary not in ('open', 'periodic'):
            raise ValidationError('Boundary must be open or periodic, got {}'.format(self.boundary))

    @property
    def tau(self):
        return 2 * math.pi / self.omega

    @property
    def fast_strong(self):
        """True when the drive is fast and strong compared with the coupling"""
        return self.omega > 2 * abs(self.j_coupling) and abs(self.h0) > abs(self.j_coupling)

    def bonds(self):
        pairs = [(i, i + 1) for i in range(self.n - 1)]
        if self.boundary == 'periodic' and self.n > 2:
            pairs.append((self.n - 1, 0))
        return pairs


@dataclass
class MagnetizationSeries:
    t: np.ndarray
    mx: np.ndarray
    tau_s: float
    flagged: List[int] = field(default_factory=list)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.mx = np.asarray(self.mx, dtype=float)
        if self.t.shape != self.mx.shape:
            raise ValidationError('MagnetizationSeries t and mx lengths differ')

    @property
    def cycles(self):
        return len(self.t) - 1

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.mx.tolist()))

    def with_mx(self, mx, flagged=None):
        return MagnetizationSeries(self.t.copy(), mx, self.tau_s, list(flagged or []))


@dataclass(frozen=True)
class DecayFit:
    alpha: float
    beta: float
    gamma: float
    c: float
    t_d: float
    residual: float = float('nan')
    converged: bool = True
    degenerate: bool = False

    def __post_init__(self):
        if not self.t_d > 0:
            raise ValidationError('Decay time must be positive, got {}'.format(self.t_d))

    @property
    def params(self):
        return np.array([self.alpha, self.beta, self.gamma, self.c, self.t_d])

    def model(self, t):
        return decay_model(self.params, np.asarray(t, dtype=float))


def decay_model(params, t):
    alpha, beta, gamma, c, t_d = params
    return alpha + (beta + gamma * np.cos(c * t)) * np.exp(-t / t_d)


def ising_terms(p):
    zz = sum(embed_pair(Z, i, Z, j, p.n) for i, j in p.bonds()) if p.bonds() else np.zeros((2 ** p.n,) * 2, complex)
    return zz, collective(X, p.n)


def dmf_hamiltonian(p, t, terms=None, scale=1.0):
    zz, xs = ising_terms(p) if terms is None else terms
    return -0.5 * (p.j_coupling * zz + scale * p.h0 * math.cos(p.omega * t) * xs)


def dmf_cycle_propagator(p, slices=DEFAULT_SLICES, scale=1.0):
    """U(tau) = U_slices ... U_1, slice Hamiltonians sampled at midpoints"""
    if slices < 1:
        raise ValidationError('slices must be >= 1, got {}'.format(slices))
    terms = ising_terms(p)
    dt = p.tau / slices
    u = np.eye(2 ** p.n, dtype=complex)
    for m in range(slices):
        u = matexp_hermitian(dmf_hamiltonian(p, (m + 0.5) * dt, terms, scale), dt) @ u
    return u


def dmf_initial_state(n, theta):
    """sum_i [sin(theta) X_i + cos(theta) Z_i] / 2, giving mx(0) = sin(theta)"""
    check_qubit_limit(n)
    op = sum(math.sin(theta) * embed(X, i, n) + math.cos(theta) * embed(Z, i, n) for i in range(n)) / 2
    return DeviationDensity(op)


def mx_normalization(rho, n):
    """Divisor giving mx = 1 for all spins along +x: n/2 for densities, n 2^n / 4 for deviations"""
    if abs(np.trace(rho)) > 1e-9:
        return n / 2
    return n * 2 ** n / 4


def simulate_dmf(p, rho0, cycles=DEFAULT_CYCLES, slices=DEFAULT_SLICES, scale=1.0):
    rho = state_matrix(rho0)
    if rho.shape != (2 ** p.n, 2 ** p.n):
        raise ValidationError('Initial state dim {} does not match {} spins'.format(rho.shape, p.n))
    if not p.fast_strong:
        my_logger.warning('Drive h0={:.4g}, omega={:.4g} is not in the fast-strong regime for Jc={:.4g}'
                          .format(p.h0, p.omega, p.j_coupling))
    u = dmf_cycle_propagator(p, slices, scale)
    observable = collective(X, p.n) / 2
    norm = mx_normalization(rho, p.n)
    mx = np.empty(cycles + 1)
    for j in range(cycles + 1):
        mx[j] = np.real(np.trace(rho @ observable)) / norm
        rho = u @ rho @ dagger(u)
    return MagnetizationSeries(np.arange(cycles + 1) * p.tau, mx, p.tau)


def q_from_series(s):
    """Stroboscopic mean of mx; NaN samples (flagged corrections) are skipped"""
    if len(s.mx) == 0:
        raise ValidationError('Cannot compute Q of an empty series')
    values = s.mx[np.isfinite(s.mx)]
    if values.size == 0:
        raise ValidationError('Series has no finite samples')
    return float(np.mean(values))


def q_closed_form(variant, h0, omega, slices=None):
    """
    Long-time order parameter from J0(2 h0 / omega).

    ``three-ring`` and ``three-open`` are the first-order effective-Hamiltonian
    averages of three spins on a ring and on an open chain. With ``slices`` the
    argument is scaled by sinc(pi/slices), the fundamental of the sampled drive.
    """
    if not omega > 0:
        raise ValidationError('q_closed_form needs omega > 0, got {}'.format(omega))
    argument = 2 * h0 / omega
    if slices:
        argument *= float(np.sinc(1.0 / slices))
    j0 = bessel_j0(argument)
    if variant == 'infinite':
        return 1 / (1 + abs(j0))
    if variant == 'three':
        return (1 + abs(j0)) / (1 + 3 * abs(j0))
    if variant == 'three-ring':
        return (1 + j0 ** 2) / (1 + 3 * j0 ** 2)
    if variant == 'three-open':
        w = 1 / (1 + j0 ** 2)
        mean_p = w ** 2 + (1 - w) ** 2 / 2
        return (4 * mean_p - 1) / 3
    raise ValidationError('Unknown Q variant {}; expected one of {}'.format(variant, Q_VARIANTS))


def guess_decay(s):
    """Starting point for decay_fit: tail mean, FFT peak frequency and series span"""
    mx, t = s.mx, s.t
    tail = mx[-max(1, len(mx) // 4):]
    alpha = float(np.mean(tail))
    swing = float(mx[0] - alpha)
    spectrum = np.abs(np.fft.rfft(mx - np.mean(mx)))
    spacing = t[1] - t[0] if len(t) > 1 else s.tau_s
    freqs = np.fft.rfftfreq(len(mx), d=spacing)
    c = 2 * math.pi * freqs[1 + int(np.argmax(spectrum[1:]))] if len(spectrum) > 1 else 0.0
    span = float(t[-1] - t[0]) if len(t) > 1 else 1.0
    return DecayFit(alpha, swing / 2, swing / 2, c, max(span, 1e-12))


def decay_fit(s, init=None, max_iter=200):
    """
    Least-squares fit of alpha + [beta + gamma cos(ct)] exp(-t/T_d).

    Raises ConvergenceError carrying the best fit when the fit does not converge
    or ends with a non-positive decay time.
    """
    if len(s.mx) < 6:
        raise ValidationError('decay_fit needs at least 6 samples, got {}'.format(len(s.mx)))
    init = guess_decay(s) if init is None else init
    mask = np.isfinite(s.mx)
    result = nls_fit(FitProblem(decay_model, s.t[mask], s.mx[mask], init.params), max_iter=max_iter)
    alpha, beta, gamma, c, t_d = (float(v) for v in result.params)

    singular = np.linalg.svd(result.jacobian, compute_uv=False)
    ratio = singular[-1] / singular[0] if singular.size and singular[0] > 0 else 0.0
    degenerate = bool(ratio < DEGENERATE_RATIO or abs(gamma) < 1e-6)

    t_d_valid = math.isfinite(t_d) and t_d > 0
    best = DecayFit(alpha, beta, gamma, c, t_d if t_d_valid else math.inf, result.residual_rms,
                    result.converged and t_d_valid, degenerate)
    if degenerate:
        my_logger.verbose1('Decay fit is degenerate (singular value ratio {:.3g}, gamma {:.3g})'.format(ratio, gamma))
    if not best.converged:
        raise ConvergenceError('Decay fit did not converge: {}'.format(result.message), best=best,
                               iterations=result.nfev)
    return best


def inverse_decay_correct(s, f, overflow_limit=OVERFLOW_LIMIT):
    """
    corrected = alpha + (raw - alpha) exp(t / T_d).

    Samples whose correction factor exceeds ``overflow_limit`` become NaN and are flagged.
    """
    with np.errstate(over='ignore'):
        factor = np.exp(s.t / f.t_d)
    flagged = [int(j) for j in np.nonzero(~(factor <= overflow_limit))[0]]
    corrected = f.alpha + (s.mx - f.alpha) * factor
    corrected[flagged] = np.nan
    if flagged:
        my_logger.warning('Inverse decay correction overflowed at {} samples (T_d = {:.4g} s)'
                          .format(len(flagged), f.t_d))
    return s.with_mx(corrected, flagged)


def noisy_simulate(p, rho0, cycles=DEFAULT_CYCLES, slices=DEFAULT_SLICES, t2_s=math.inf,
                   rf_ensemble=((1.0, 1.0),)):
    """Ensemble average over drive scales h0*scale, damped by exp(-t/T2)"""
    if not t2_s > 0:
        raise ValidationError('T2 must be positive, got {}'.format(t2_s))
    total = sum(w for _, w in rf_ensemble)
    mx = None
    series = None
    for scale, weight in rf_ensemble:
        series = simulate_dmf(p, rho0, cycles, slices, scale)
        contribution = (weight / total) * series.mx
        mx = contribution if mx is None else mx + contribution
    return series.with_mx(mx * np.exp(-series.t / t2_s))


def corrected_series(noisy):
    """Decay-fits a noisy series and divides the fitted decay out"""
    if len(noisy.mx) < 6:
        return noisy.with_mx(noisy.mx.copy()), None
    try:
        fit = decay_fit(noisy)
    except ConvergenceError as e:
        fit = e.best
        my_logger.verbose1('Using best-so-far decay fit for correction')
    if not math.isfinite(fit.t_d):
        return noisy.with_mx(noisy.mx.copy()), fit
    return inverse_decay_correct(noisy, fit), fit


@dataclass(frozen=True)
class SweepSettings:
    h0: float
    j_coupling: float
    n: int = 3
    boundary: str = 'open'
    cycles: int = DEFAULT_CYCLES
    slices: int = DEFAULT_SLICES
    theta: float = math.pi / 2
    t2_s: float = math.inf
    rf_ensemble: Tuple[Tuple[float, float], ...] = ((1.0, 1.0),)

    @property
    def effective_variant(self):
        return 'three-ring' if self.boundary == 'periodic' else 'three-open'


def series_point(settings, omega):
    """Raw, noisy and corrected series at one drive frequency"""
    p = DriveParams(settings.h0, settings.j_coupling, omega, settings.n, settings.boundary)
    rho0 = dmf_initial_state(settings.n, settings.theta)
    raw = simulate_dmf(p, rho0, settings.cycles, settings.slices)
    noisy = noisy_simulate(p, rho0, settings.cycles, settings.slices, settings.t2_s, settings.rf_ensemble)
    corrected, fit = corrected_series(noisy)
    return raw, noisy, corrected, fit


def sweep_point(settings, omega):
    raw, noisy, corrected, _ = series_point(settings, omega)
    row = {
        'omega_rad_s': omega,
        'Q_sim': q_from_series(raw),
        'Q3_closed': closed_form_at('three', settings, omega),
        'Qinf_closed': closed_form_at('infinite', settings, omega),
        'Q_noisy': q_from_series(noisy),
        'Q_corrected': q_from_series(corrected),
        'Q3_effective': closed_form_at(settings.effective_variant, settings, omega),
    }
    my_logger.verbose1('omega = {:.4f} rad/s: Q_sim = {:.4f}'.format(omega, row['Q_sim']))
    return row


SWEEP_COLUMNS = ['omega_rad_s', 'Q_sim', 'Q3_closed', 'Qinf_closed', 'Q_noisy', 'Q_corrected', 'Q3_effective']
SERIES_COLUMNS = ['j', 't_s', 'mx_raw', 'mx_noisy', 'mx_corrected']


def dmf_sweep(settings, omegas: Sequence[float], threads=1):
    """One row per omega, assembled in omega order regardless of worker count"""
    omegas = sorted(float(w) for w in omegas)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda w: sweep_point(settings, w), omegas))
    else:
        rows = [sweep_point(settings, w) for w in omegas]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def series_frame(raw, noisy, corrected):
    return pd.DataFrame({
        'j': np.arange(len(raw.t)),
        't_s': raw.t,
        'mx_raw': raw.mx,
        'mx_noisy': noisy.mx,
        'mx_corrected': corrected.mx,
    }, columns=SERIES_COLUMNS)


def freezing_peaks(frame, windows=((4.8, 8.0), (10.0, 16.0))):
    """omega of the largest Q_sim inside each window"""
    peaks = []
    for low, high in windows:
        part = frame[(frame['omega_rad_s'] >= low) & (frame['omega_rad_s'] <= high)]
        if part.empty:
            peaks.append(math.nan)
        else:
            peaks.append(float(part.loc[part['Q_sim'].idxmax(), 'omega_rad_s']))
    return peaks


def bessel_zero_frequencies(h0, zeros=(5.520078110286311, 2.404825557695773)):
    """Drive frequencies putting 2 h0 / omega on the J0 zeros"""
    return [2 * h0 / z for z in zeros]


def omega_grid(low, high, step):
    """low, low + step, ... up to high inclusive, rounded against accumulation"""
    if high < low:
        raise ValidationError('omega_max_rad_s must not be below omega_min_rad_s')
    if not step > 0:
        raise ValidationError('omega step must be positive, got {}'.format(step))
    count = int(math.floor((high - low) / step + 1e-9)) + 1
    return [round(low + i * step, 12) for i in range(count)]


def closed_form_at(variant, settings, omega):
    """Effective forms see the sliced drive; the printed forms take 2 h0 / omega as is"""
    slices = settings.slices if variant in ('three-ring', 'three-open') else None
    return q_closed_form(variant, settings.h0, omega, slices)


def closed_form_deviation(settings, omegas, variant, threads=1):
    """
    Largest |Q_sim - Q_variant| over ``omegas`` for the ideal series.

    Returns (deviation, omega where it occurs).
    """
    rho0 = dmf_initial_state(settings.n, settings.theta)

    def gap(omega):
        p = DriveParams(settings.h0, settings.j_coupling, omega, settings.n, settings.boundary)
        q_sim = q_from_series(simulate_dmf(p, rho0, settings.cycles, settings.slices))
        return abs(q_sim - closed_form_at(variant, settings, omega))

    omegas = [float(w) for w in omegas]
    if not omegas:
        raise ValidationError('closed_form_deviation needs at least one omega')
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            gaps = list(pool.map(gap, omegas))
    else:
        gaps = [gap(w) for w in omegas]
    worst = int(np.argmax(gaps))
    return float(gaps[worst]), omegas[worst]
