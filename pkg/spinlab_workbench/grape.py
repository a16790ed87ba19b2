# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Gradient ascent pulse engineering for state transfer.

Controls are piecewise constant: H(t_j) = H0 + scale * sum_k u_k(j) H_k on step j.
The performance function is the normalized overlap Re Tr[C† rho_N] / (|C| |rho_N|),
averaged over an RF-inhomogeneity ensemble of control scale factors.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from spinlab_workbench.helper import ValidationError, NumericError, stream
from spinlab_workbench.operators import dagger, is_hermitian, matexp_hermitian, commutator
from spinlab_workbench.states import state_matrix

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

# percentage of the sample seeing each RF scale; sums to 92.71 and is renormalized
RF_INHOMOGENEITY_ENSEMBLE = ((0.8, 4.31), (0.9, 0.81), (1.0, 75.32), (1.1, 8.01), (1.2, 4.26))

ACCEPT_SLACK = 1e-12
CSV_FLOAT_FORMAT = '%.12e'


@dataclass
class ControlPulse:
    """amplitudes[k, j] in rad/s for channel k and step j"""
    amplitudes: np.ndarray
    dt_s: float

    def __post_init__(self):
        self.amplitudes = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        if self.amplitudes.shape[1] < 1:
            raise ValidationError('ControlPulse needs at least one step')
        if not self.dt_s > 0:
            raise ValidationError('ControlPulse step duration must be positive, got {}'.format(self.dt_s))

    @property
    def channels(self):
        return self.amplitudes.shape[0]

    @property
    def steps(self):
        return self.amplitudes.shape[1]

    @property
    def duration_s(self):
        return self.steps * self.dt_s

    def with_amplitudes(self, amplitudes):
        return ControlPulse(np.array(amplitudes, dtype=float), self.dt_s)

    @classmethod
    def zeros(cls, channels, steps, dt_s):
        return cls(np.zeros((channels, steps)), dt_s)

    @classmethod
    def random(cls, channels, steps, dt_s, u_max, seed):
        """Uniform amplitudes in [-u_max, u_max] from the seeded stream"""
        rng = stream(seed, 0)
        return cls(rng.uniform(-u_max, u_max, size=(channels, steps)), dt_s)


def normalize_ensemble(ensemble):
    pairs = [(float(s), float(w)) for s, w in ensemble]
    if not pairs:
        raise ValidationError('RF ensemble is empty')
    total = sum(w for _, w in pairs)
    if total <= 0 or any(w < 0 for _, w in pairs):
        raise ValidationError('RF ensemble weights must be non-negative with a positive sum')
    if abs(total - 1) > 1e-12:
        my_logger.verbose1('RF ensemble weights sum to {:.6g}; renormalized'.format(total))
    return tuple((s, w / total) for s, w in pairs)


@dataclass
class GrapeProblem:
    drift: np.ndarray
    controls: List[np.ndarray]
    rho0: np.ndarray
    target: np.ndarray
    ensemble: Sequence[Tuple[float, float]] = ((1.0, 1.0),)

    def __post_init__(self):
        self.drift = np.asarray(self.drift, dtype=complex)
        self.controls = [np.asarray(h, dtype=complex) for h in self.controls]
        self.rho0 = state_matrix(self.rho0)
        self.target = np.asarray(self.target, dtype=complex)
        shape = self.drift.shape
        if not self.controls:
            raise ValidationError('GrapeProblem needs at least one control Hamiltonian')
        for name, op in [('drift', self.drift), ('rho0', self.rho0), ('target', self.target)] + \
                [('control {}'.format(k + 1), h) for k, h in enumerate(self.controls)]:
            if op.shape != shape:
                raise ValidationError('GrapeProblem {} has shape {}, expected {}'.format(name, op.shape, shape))
        for k, h in enumerate([self.drift, self.target] + self.controls):
            if not is_hermitian(h, 1e-10):
                raise ValidationError('GrapeProblem operator {} is not Hermitian'.format(k))
        if np.linalg.norm(self.target) == 0 or np.linalg.norm(self.rho0) == 0:
            raise ValidationError('GrapeProblem target and initial state must be non-zero')
        self.ensemble = normalize_ensemble(self.ensemble)

    def check_pulse(self, pulse):
        if pulse.channels != len(self.controls):
            raise ValidationError('Pulse has {} channels for {} controls'.format(pulse.channels, len(self.controls)))


def slice_propagators(problem, pulse, scale=1.0):
    problem.check_pulse(pulse)
    props = []
    for j in range(pulse.steps):
        h = problem.drift + scale * sum(u * hk for u, hk in zip(pulse.amplitudes[:, j], problem.controls))
        props.append(matexp_hermitian(h, pulse.dt_s, tol=1e-10))
    return props


def forward_propagate(problem, pulse, scale=1.0, props=None):
    """[rho_0, rho_1, ..., rho_N] with controls multiplied by ``scale``"""
    props = slice_propagators(problem, pulse, scale) if props is None else props
    rhos = [problem.rho0]
    for u in props:
        rhos.append(u @ rhos[-1] @ dagger(u))
    return rhos


def performance(problem, rho_final):
    value = np.real(np.trace(dagger(problem.target) @ rho_final))
    return float(value / (np.linalg.norm(problem.target) * np.linalg.norm(rho_final)))


def grape_gradient(problem, pulse, scale=1.0):
    """
    g[k, j] = -Re Tr[lambda_j† i dt [scale H_k, rho_j]], normalized like the performance.

    lambda_j is the target propagated backwards to step j.
    """
    props = slice_propagators(problem, pulse, scale)
    rhos = forward_propagate(problem, pulse, scale, props)
    norm = np.linalg.norm(problem.target) * np.linalg.norm(rhos[-1])
    grad = np.zeros(pulse.amplitudes.shape)
    lam = problem.target
    for j in range(pulse.steps, 0, -1):
        for k, hk in enumerate(problem.controls):
            term = np.trace(dagger(lam) @ (1j * pulse.dt_s * scale * commutator(hk, rhos[j])))
            grad[k, j - 1] = -np.real(term) / norm
        u = props[j - 1]
        lam = dagger(u) @ lam @ u
    return grad


def evaluate(problem, pulse, with_gradient=True, threads=1):
    """Ensemble-averaged performance (and gradient), reduced in ensemble order"""
    def member(entry):
        scale, _ = entry
        phi = performance(problem, forward_propagate(problem, pulse, scale)[-1])
        grad = grape_gradient(problem, pulse, scale) if with_gradient else None
        return phi, grad

    if threads > 1 and len(problem.ensemble) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(member, problem.ensemble))
    else:
        results = [member(entry) for entry in problem.ensemble]

    phi = 0.0
    grad = np.zeros(pulse.amplitudes.shape) if with_gradient else None
    for (_, weight), (member_phi, member_grad) in zip(problem.ensemble, results):
        phi += weight * member_phi
        if with_gradient:
            grad += weight * member_grad
    if not math.isfinite(phi) or (with_gradient and not np.all(np.isfinite(grad))):
        raise NumericError('GRAPE performance or gradient is not finite')
    return phi, grad


@dataclass
class GrapeOutcome:
    pulse: ControlPulse
    history: List[float] = field(default_factory=list)
    reached: bool = False
    iterations: int = 0

    def __iter__(self):
        # unpacks as (pulse, history)
        return iter((self.pulse, self.history))


def grape_optimize(problem, init, step, max_iter, target_phi, backtracking=True, max_halvings=30, threads=1):
    """
    Gradient ascent u <- u + eps * grad on the ensemble-averaged performance.

    With backtracking, eps starts from ``step`` every iteration and is halved
    until the performance does not decrease; after ``max_halvings`` failures the
    run stops at the current pulse.
    """
    if not step > 0:
        raise ValidationError('GRAPE step must be positive, got {}'.format(step))
    problem.check_pulse(init)
    pulse = init
    phi, grad = evaluate(problem, pulse, threads=threads)
    history = [phi]
    iteration = 0
    while phi < target_phi and iteration < max_iter:
        iteration += 1
        eps = step
        for _ in range(max_halvings + 1):
            trial = pulse.with_amplitudes(pulse.amplitudes + eps * grad)
            trial_phi, _ = evaluate(problem, trial, with_gradient=False, threads=threads)
            if not backtracking or trial_phi >= phi - ACCEPT_SLACK:
                break
            eps /= 2
        else:
            my_logger.warning('GRAPE line search failed after {} halvings at iteration {}; stopping'
                              .format(max_halvings, iteration))
            break
        pulse = trial
        phi, grad = evaluate(problem, pulse, threads=threads)
        history.append(phi)
        my_logger.verbose2('GRAPE iteration {}: phi = {:.8f}, eps = {:.4g}'.format(iteration, phi, eps))

    reached = phi >= target_phi
    if reached:
        my_logger.verbose1('GRAPE reached phi = {:.6f} after {} iterations'.format(phi, iteration))
    else:
        my_logger.warning('GRAPE stopped at phi = {:.6f} below target {} after {} iterations'
                          .format(phi, target_phi, iteration))
    return GrapeOutcome(pulse, history, reached, iteration)


def pulse_frame(pulse):
    frame = pd.DataFrame({'step': np.arange(1, pulse.steps + 1), 'dt_s': pulse.dt_s})
    for k in range(pulse.channels):
        frame['u{}'.format(k + 1)] = pulse.amplitudes[k]
    return frame


def write_pulse(path, pulse, metadata):
    """Writes ``step,dt_s,u1,...`` CSV and a ``.json`` sidecar next to it"""
    pulse_frame(pulse).to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    sidecar = str(path).rsplit('.', 1)[0] + '.json'
    with open(sidecar, 'w') as f:
        json.dump(metadata, f, indent=2, sort_keys=True)
    return sidecar


def read_pulse(path):
    frame = pd.read_csv(path)
    channels = [c for c in frame.columns if c.startswith('u')]
    if 'dt_s' not in frame or not channels:
        raise ValidationError('Pulse file {} lacks dt_s or u columns'.format(path))
    return ControlPulse(frame[channels].to_numpy().T, float(frame['dt_s'].iloc[0]))
