# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Engineered dephasing of a system qubit coupled to a kicked environment qubit.

Register order is (system, environment); the system is the most significant
qubit, so index 2*s + e addresses |s e>. The Hamiltonian
pi (nu_S Z_S + nu_E Z_E + (J/2) Z_S Z_E) is diagonal, and kicks
exp(-i eps Y_E) (or a random-phase transverse axis) follow each free step of
length delta = t_c / k.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from spinlab_workbench.helper import (ValidationError, kicks_per_ms_to_per_s, stream, finite_or_raise)
from spinlab_workbench.numerics import FitProblem, nls_fit
from spinlab_workbench.operators import I2, X, Y, dagger, kron, partial_trace
from spinlab_workbench.states import named_state, require_density, bloch_from_density

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

# two-spin molecule constants: proton (system) and carbon (environment)
MOLECULE_J_HZ = 209.4
MOLECULE_NU_H_HZ = 104.7
MOLECULE_T1_S = {'1H': 4.1, '13C': 5.5}
MOLECULE_T2_S = {'1H': 2.9, '13C': 0.8}

ANGLE_MODES = ('symmetric', 'positive')
PHASE_MODES = ('fixed-y', 'uniform-phase')
DD_KINDS = ('hahn', 'cpmg', 'udd')

BATCH_SIZE = 250
KICK, PULSE = 0, 1


@dataclass(frozen=True)
class KickSchedule:
    """
    Random kicks on the environment qubit.

    ``k`` is the integer kick count per cycle nearest to gamma * t_c; delta is
    recomputed from it.
    """
    gamma_per_ms: float
    alpha_rad: float
    t_c_s: float
    angle_mode: str = 'symmetric'
    phase_mode: str = 'fixed-y'
    seed: int = 0
    k: int = field(init=False)

    def __post_init__(self):
        if not self.gamma_per_ms > 0:
            raise ValidationError('Kick rate must be positive, got {}'.format(self.gamma_per_ms))
        if self.alpha_rad < 0:
            raise ValidationError('Kick angle bound must be >= 0, got {}'.format(self.alpha_rad))
        if not self.t_c_s > 0:
            raise ValidationError('Cycle time must be positive, got {}'.format(self.t_c_s))
        if self.angle_mode not in ANGLE_MODES:
            raise ValidationError('Unknown angle mode {}'.format(self.angle_mode))
        if self.phase_mode not in PHASE_MODES:
            raise ValidationError('Unknown phase mode {}'.format(self.phase_mode))
        exact = kicks_per_ms_to_per_s(self.gamma_per_ms) * self.t_c_s
        k = max(1, int(round(exact)))
        if abs(exact - k) > 1e-9:
            my_logger.warning('Kicks per cycle {:.6g} rounded to {}; delta recomputed as {:.6g} s'
                              .format(exact, k, self.t_c_s / k))
        object.__setattr__(self, 'k', k)

    @property
    def delta_s(self):
        return self.t_c_s / self.k


@dataclass(frozen=True)
class SystemEnvModel:
    j_hz: float = MOLECULE_J_HZ
    nu_s_hz: float = 0.0
    nu_e_hz: float = 0.0
    rho_s0: np.ndarray = field(default_factory=lambda: named_state('+'))
    rho_e0: np.ndarray = field(default_factory=lambda: named_state('mixed'))
    t1_s: float = math.inf
    t2_s: float = math.inf

    def __post_init__(self):
        for name in ('rho_s0', 'rho_e0'):
            value = np.asarray(getattr(self, name), dtype=complex)
            if value.shape != (2, 2):
                raise ValidationError('{} must be a single-qubit state'.format(name))
            object.__setattr__(self, name, require_density(value, name))
        if not (self.t1_s > 0 and self.t2_s > 0):
            raise ValidationError('Intrinsic T1 and T2 must be positive')

    def energies(self):
        """Diagonal of H in rad/s for |00>, |01>, |10>, |11>"""
        values = []
        for s in (1, -1):
            for e in (1, -1):
                values.append(math.pi * (self.nu_s_hz * s + self.nu_e_hz * e + self.j_hz / 2 * s * e))
        return np.array(values)

    def free_phase(self, dt):
        return np.exp(-1j * self.energies() * dt)

    @property
    def rho0(self):
        return kron(self.rho_s0, self.rho_e0)


@dataclass(frozen=True)
class DDSchedule:
    kind: str
    n_pulses: int
    t_c_s: float
    times_s: Tuple[float, ...]

    def to_dict(self):
        return {'kind': self.kind, 'N': self.n_pulses, 't_c_s': self.t_c_s, 'times_s': list(self.times_s)}


def dd_schedule(kind, n_pulses, t_c_s):
    """
    pi-pulse times inside one cycle.

    cpmg places pulses at (2j-1) t_c / 2N so every segment is an echo;
    udd uses t_c sin^2(pi j / 2(N+1)); hahn is a single pulse at t_c / 2.
    """
    if kind not in DD_KINDS:
        raise ValidationError('Unknown DD kind {}; expected one of {}'.format(kind, DD_KINDS))
    if int(n_pulses) != n_pulses or n_pulses < 1:
        raise ValidationError('DD pulse count must be a positive integer, got {}'.format(n_pulses))
    if not t_c_s > 0:
        raise ValidationError('DD cycle time must be positive')
    n_pulses = 1 if kind == 'hahn' else int(n_pulses)
    if kind == 'udd':
        times = [t_c_s * math.sin(math.pi * j / (2 * (n_pulses + 1))) ** 2 for j in range(1, n_pulses + 1)]
    else:
        times = [(2 * j - 1) * t_c_s / (2 * n_pulses) for j in range(1, n_pulses + 1)]
    return DDSchedule(kind, n_pulses, t_c_s, tuple(times))


def kick_gamma(alpha):
    """sin(2 alpha) / (2 alpha), the mean of cos(2 eps) for eps uniform in [-alpha, alpha]"""
    return 1.0 if alpha == 0 else math.sin(2 * alpha) / (2 * alpha)


def zurek_factor(env, couplings, t):
    """
    z(t) = prod_j (|a_j|^2 exp(-2i J_j t) + |b_j|^2 exp(2i J_j t)).

    :param env: (a_j, b_j) amplitude pairs of the environment spins
    :param couplings: J_1j in rad/s
    """
    if len(env) != len(couplings):
        raise ValidationError('zurek_factor: {} environment spins but {} couplings'.format(len(env), len(couplings)))
    z = 1.0 + 0j
    for (a, b), coupling in zip(env, couplings):
        pa, pb = abs(a) ** 2, abs(b) ** 2
        if abs(pa + pb - 1) > 1e-10:
            raise ValidationError('Environment amplitudes ({}, {}) are not normalized'.format(a, b))
        z *= pa * np.exp(-2j * coupling * t) + pb * np.exp(2j * coupling * t)
    return complex(z)


def kick_angles(sched, realization, count):
    """All kick angles of one realization, then all phases (zeros for fixed-y)"""
    rng = stream(sched.seed, realization)
    low = -sched.alpha_rad if sched.angle_mode == 'symmetric' else 0.0
    eps = rng.uniform(low, sched.alpha_rad, size=count)
    if sched.phase_mode == 'uniform-phase':
        phi = rng.uniform(0.0, 2 * math.pi, size=count)
    else:
        phi = None
    return eps, phi


def kick_matrices(sched, eps, phi):
    """Batch of 2x2 environment kicks for one kick slot"""
    c, s = np.cos(eps), np.sin(eps)
    k = np.empty(eps.shape + (2, 2), dtype=complex)
    if phi is None:
        # exp(-i eps Y)
        k[..., 0, 0], k[..., 0, 1] = c, -s
        k[..., 1, 0], k[..., 1, 1] = s, c
    else:
        # exp(-i eps (cos(phi) X + sin(phi) Y))
        k[..., 0, 0], k[..., 0, 1] = c, -1j * s * np.exp(-1j * phi)
        k[..., 1, 0], k[..., 1, 1] = -1j * s * np.exp(1j * phi), c
    return k


def dd_pulse(model):
    """pi pulse about the transverse axis of the prepared system state"""
    r = bloch_from_density(model.rho_s0)
    transverse = math.hypot(r[0], r[1])
    if transverse < 1e-12:
        axis = X
    else:
        axis = (r[0] * X + r[1] * Y) / transverse
    return kron(axis, I2)


def cycle_events(sched, dd):
    """(time, kind) for one cycle; a kick precedes a pulse at the same time"""
    events = [(m * sched.delta_s, KICK) for m in range(1, sched.k + 1)]
    if dd is not None:
        if abs(dd.t_c_s - sched.t_c_s) > 1e-12 * sched.t_c_s:
            raise ValidationError('DD cycle {} s differs from the kick cycle {} s'.format(dd.t_c_s, sched.t_c_s))
        if any(not 0 < t < dd.t_c_s for t in dd.times_s):
            raise ValidationError('DD pulse times must lie inside the cycle')
        events += [(t, PULSE) for t in dd.times_s]
    return sorted(events)


class Accumulator:
    """Running sums of a complex per-realization quantity"""

    def __init__(self, shape):
        self.total = np.zeros(shape, dtype=complex)
        self.square_re = np.zeros(shape)
        self.square_im = np.zeros(shape)

    def add(self, index, values):
        self.total[index] += values.sum(axis=0)
        self.square_re[index] += (values.real ** 2).sum(axis=0)
        self.square_im[index] += (values.imag ** 2).sum(axis=0)

    def merge(self, other):
        self.total += other.total
        self.square_re += other.square_re
        self.square_im += other.square_im

    def mean(self, count):
        return self.total / count

    def stderr(self, count):
        """sqrt((var_re + var_im) / M) with ddof = 1"""
        if count < 2:
            return np.full(self.total.shape, np.nan)
        mean = self.total / count
        var_re = (self.square_re - count * mean.real ** 2) / (count - 1)
        var_im = (self.square_im - count * mean.imag ** 2) / (count - 1)
        return np.sqrt(np.maximum(var_re + var_im, 0) / count)


@dataclass
class BatchResult:
    coherence: Accumulator
    lines: Accumulator
    rho_s: np.ndarray
    final: Optional[np.ndarray] = None


def propagate_batch(model, sched, realizations, cycles, dd=None, keep_final=False):
    """
    Evolves a batch of realizations and accumulates readouts at every cycle boundary.

    Propagators are carried as (B, 4, 4) arrays; the free step is a diagonal
    phase and a kick acts on the environment index only.
    """
    count = len(realizations)
    total_kicks = cycles * sched.k
    draws = [kick_angles(sched, r, total_kicks) for r in realizations]
    eps = np.array([d[0] for d in draws]).reshape(count, total_kicks)
    phi = None if sched.phase_mode == 'fixed-y' else np.array([d[1] for d in draws]).reshape(count, total_kicks)

    events = cycle_events(sched, dd)
    pulse = dd_pulse(model) if dd is not None else None
    phases = {}

    def phase(dt):
        key = round(dt, 15)
        if key not in phases:
            phases[key] = model.free_phase(dt)
        return phases[key]

    rho0 = model.rho0
    coherence = Accumulator(cycles + 1)
    lines = Accumulator((cycles + 1, 2))
    rho_s = np.zeros((cycles + 1, 2, 2), dtype=complex)

    def record(index, u):
        rho = u @ rho0 @ dagger(u)
        blocks = np.stack([rho[:, 0, 2], rho[:, 1, 3]], axis=-1)
        coherence.add(index, blocks.sum(axis=-1))
        lines.add(index, blocks)
        rho_s[index] += rho.reshape(count, 2, 2, 2, 2).trace(axis1=2, axis2=4).sum(axis=0)

    u = np.broadcast_to(np.eye(4, dtype=complex), (count, 4, 4)).copy()
    record(0, u)
    for cycle in range(cycles):
        t_prev = 0.0
        slot = cycle * sched.k
        for time, kind in events:
            dt = time - t_prev
            if dt > 0:
                u = phase(dt)[None, :, None] * u
            if kind == KICK:
                k = kick_matrices(sched, eps[:, slot], None if phi is None else phi[:, slot])
                u = np.einsum('bef,bsfc->bsec', k, u.reshape(count, 2, 2, 4)).reshape(count, 4, 4)
                slot += 1
            else:
                u = pulse @ u
            t_prev = max(t_prev, time)
        if sched.t_c_s - t_prev > 0:
            u = phase(sched.t_c_s - t_prev)[None, :, None] * u
        record(cycle + 1, u)
    return BatchResult(coherence, lines, rho_s, u if keep_final else None)


def run_batches(model, sched, realizations, cycles, dd=None, threads=1, keep_final=False, batch_size=BATCH_SIZE):
    """Fixed-size batches reduced in realization order"""
    if realizations < 1:
        raise ValidationError('Need at least one realization, got {}'.format(realizations))
    bounds = [(b, min(b + batch_size, realizations)) for b in range(0, realizations, batch_size)]

    def work(bound):
        result = propagate_batch(model, sched, range(*bound), cycles, dd, keep_final)
        my_logger.verbose2('Realizations {}..{} done'.format(bound[0], bound[1] - 1))
        return result

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, bounds))
    else:
        results = [work(b) for b in bounds]

    merged = results[0]
    for result in results[1:]:
        merged.coherence.merge(result.coherence)
        merged.lines.merge(result.lines)
        merged.rho_s = merged.rho_s + result.rho_s
    if keep_final:
        merged.final = np.concatenate([r.final for r in results])
    return merged


def kicked_propagator(model, sched, realization):
    """U_k(t_c) = K_k U(delta) ... K_1 U(delta) for one seeded realization"""
    return propagate_batch(model, sched, [realization], 1, keep_final=True).final[0]


@dataclass
class CoherenceSeries:
    """
    Ensemble readouts at t = m t_c.

    ``coherence`` is the system coherence normalized to its prepared value,
    ``line`` the summed magnitude of the two J-split system lines normalized
    to 1 at t = 0, and ``mx`` the system <X>.
    """
    t_s: np.ndarray
    coherence: np.ndarray
    coherence_stderr: np.ndarray
    line: np.ndarray
    line_stderr: np.ndarray
    mx: np.ndarray
    mx_stderr: np.ndarray
    rho_s: np.ndarray
    realizations: int

    def frame(self):
        return pd.DataFrame({'t_s': self.t_s, 'Mx_mean': self.line, 'Mx_stderr': self.line_stderr},
                            columns=['t_s', 'Mx_mean', 'Mx_stderr'])


def relaxation_envelope(model, t, rho_s):
    """Phenomenological T2 on coherences and T1 towards equal populations"""
    t2 = np.exp(-t / model.t2_s)
    t1 = np.exp(-t / model.t1_s)
    out = rho_s.copy()
    out[:, 0, 1] *= t2
    out[:, 1, 0] *= t2
    mean_population = (rho_s[:, 0, 0] + rho_s[:, 1, 1]) / 2
    out[:, 0, 0] = mean_population + (rho_s[:, 0, 0] - mean_population) * t1
    out[:, 1, 1] = mean_population + (rho_s[:, 1, 1] - mean_population) * t1
    return out, t2


def ensemble_coherence(model, sched, realizations, cycles, dd=None, threads=1):
    """Monte Carlo average over seeded realizations, sampled at cycle boundaries"""
    if cycles < 1:
        raise ValidationError('cycles must be >= 1, got {}'.format(cycles))
    merged = run_batches(model, sched, realizations, cycles, dd, threads)
    m = realizations
    t = np.arange(cycles + 1) * sched.t_c_s

    rho0 = model.rho0
    initial = model.rho_s0[0, 1]
    line0 = abs(rho0[0, 2]) + abs(rho0[1, 3])
    if line0 < 1e-12:
        raise ValidationError('Prepared system state has no transverse coherence to follow')
    norm = initial if abs(initial) > 1e-12 else 1.0

    rho_s, t2 = relaxation_envelope(model, t, merged.rho_s / m)
    coherence = merged.coherence.mean(m) / norm * t2
    coherence_stderr = merged.coherence.stderr(m) / abs(norm) * t2
    line = np.abs(merged.lines.mean(m)).sum(axis=1) / line0 * t2
    line_stderr = merged.lines.stderr(m).sum(axis=1) / line0 * t2
    mx = 2 * np.real(merged.coherence.mean(m)) * t2
    mx_stderr = 2 * merged.coherence.stderr(m) * t2
    finite_or_raise(line, 'ensemble line intensity')
    my_logger.verbose1('Ensemble of {} realizations over {} cycles: final line intensity {:.4f} +- {:.4f}'
                       .format(m, cycles, line[-1], line_stderr[-1]))
    return CoherenceSeries(t, coherence, coherence_stderr, line, line_stderr, mx, mx_stderr, rho_s, m)


def run_dd_under_kicks(model, sched, dd, cycles, realizations, threads=1):
    """Kicked evolution with the DD pi-pulse train repeated every cycle"""
    if dd is None:
        raise ValidationError('run_dd_under_kicks needs a DD schedule')
    return ensemble_coherence(model, sched, realizations, cycles, dd, threads)


def averaged_kick(sched, rho):
    """Kick average of k rho k† for the schedule's angle and phase modes"""
    a = sched.alpha_rad
    if a == 0:
        return rho
    if sched.angle_mode == 'symmetric':
        mean_cos2 = math.sin(2 * a) / (2 * a)
        mean_sin2 = 0.0
    else:
        mean_cos2 = math.sin(2 * a) / (2 * a)
        mean_sin2 = (1 - math.cos(2 * a)) / (2 * a)
    c, d = (1 + mean_cos2) / 2, (1 - mean_cos2) / 2
    if sched.phase_mode == 'uniform-phase':
        return c * rho + d / 2 * (X @ rho @ X + Y @ rho @ Y)
    # E[cos(eps) sin(eps)] = E[sin(2 eps)] / 2
    cross = mean_sin2 / 2
    return c * rho + d * (Y @ rho @ Y) - 1j * cross * (Y @ rho - rho @ Y)


def coupling_phases(sched, j_hz):
    """V B V as an elementwise product, V = exp(-i pi J delta Z_E / 2)"""
    v = np.exp(-1j * math.pi * j_hz * sched.delta_s * np.array([1, -1]) / 2)
    return np.outer(v, v)


def superop_factor(sched, rho_e0, k_total, j_hz):
    """
    D(k) = Tr_E[O^k(rho_E0)] with O(rho) = c V rho V + d Y V rho V Y.

    V appears un-daggered on both sides: the coherence block of the pair
    evolves as V B V. ``j_hz`` is the model's coupling.
    """
    if k_total < 0:
        raise ValidationError('k_total must be >= 0')
    w = coupling_phases(sched, j_hz)
    rho = np.asarray(rho_e0, dtype=complex)
    for _ in range(int(k_total)):
        rho = averaged_kick(sched, w * rho)
    return complex(np.trace(rho))


def superop_series(model, sched, cycles):
    """D at every cycle boundary, normalized like ensemble_coherence"""
    w = coupling_phases(sched, model.j_hz)
    rho = model.rho_e0.copy()
    values = [complex(np.trace(rho))]
    for _ in range(cycles):
        for _ in range(sched.k):
            rho = averaged_kick(sched, w * rho)
        values.append(complex(np.trace(rho)))
    return np.array(values)


def kick_channel(model, sched, cycles, realizations, dd=None, threads=1):
    """
    Ensemble-averaged system channel rho_S -> mean Tr_E[U (rho_S x rho_E0) U†].

    The realization propagators are computed once; the returned callable is linear.
    """
    merged = run_batches(model, sched, realizations, cycles, dd, threads, keep_final=True)
    props = merged.final
    rho_e0 = model.rho_e0

    def channel(rho_s):
        rho = kron(np.asarray(rho_s, dtype=complex), rho_e0)
        evolved = (props @ rho @ dagger(props)).mean(axis=0)
        return partial_trace(evolved, [0], [2, 2])

    return channel


def fit_t2(t, values):
    """
    T2 of an exponential decay M(0) exp(-t/T2).

    Log-linear fit on the positive samples, refined by nls_fit; a
    non-decaying series gives math.inf.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.shape != values.shape or t.size < 3:
        raise ValidationError('fit_t2 needs at least 3 matching samples')
    positive = values > 1e-12 * max(1e-300, float(np.max(np.abs(values))))
    if positive.sum() < 3:
        raise ValidationError('fit_t2 needs at least 3 positive samples')
    slope, intercept = np.polyfit(t[positive], np.log(values[positive]), 1)
    span = float(t.max() - t.min())
    if span <= 0:
        raise ValidationError('fit_t2 needs samples at distinct times')
    if slope >= -1e-9 / span:
        my_logger.verbose1('Series does not decay; T2 reported as infinite')
        return math.inf

    def model(params, x):
        return params[0] * np.exp(-x * params[1])

    result = nls_fit(FitProblem(model, t, values, np.array([math.exp(intercept), -slope])))
    amplitude, rate = result.params
    if not (result.converged and math.isfinite(rate)) or rate <= 0:
        my_logger.verbose1('T2 refinement failed; keeping log-linear estimate')
        return float(-1 / slope)
    if rate * span < 1e-9:
        return math.inf
    return float(1 / rate)
