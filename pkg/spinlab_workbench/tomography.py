# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Single-qubit state and process tomography, and CPMG noise spectroscopy.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from spinlab_workbench.helper import ValidationError, SpinLabError, stream
from spinlab_workbench.numerics import linsolve
from spinlab_workbench.operators import I2, X, Y, Z, dagger
from spinlab_workbench.states import density_from_bloch, named_state
from spinlab_workbench.decoherence import (KickSchedule, dd_schedule, run_dd_under_kicks, fit_t2, MOLECULE_T2_S)

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

CHI_LABELS = ('E', 'X', '-iY', 'Z')
CHI_BASIS = (I2, X, -1j * Y, Z)
# multiplying chi_mn by c_m conj(c_n) moves it to the plain Pauli basis
PAULI_FACTORS = np.array([1, 1, -1j, 1])
INPUT_LABELS = ('0', '1', '+', '-i')


def qst_single(expect_x, expect_y, expect_z):
    """rho = (1 + <X>X + <Y>Y + <Z>Z) / 2, projected into the Bloch ball when needed"""
    r = np.array([expect_x, expect_y, expect_z], dtype=float)
    norm = float(np.linalg.norm(r))
    if norm > 1:
        if norm > 1 + 1e-6:
            my_logger.warning('Measured Bloch vector norm {:.6g} exceeds 1; projected to the unit sphere'.format(norm))
        r = r / norm
    return density_from_bloch(r)


@dataclass
class ChiMatrix:
    matrix: np.ndarray
    labels: Tuple[str, ...] = CHI_LABELS

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (4, 4):
            raise ValidationError('ChiMatrix must be 4x4, got {}'.format(self.matrix.shape))

    def __getitem__(self, key):
        row, col = key
        return self.matrix[self.labels.index(row), self.labels.index(col)]

    def hermitian_error(self):
        return float(np.max(np.abs(self.matrix - dagger(self.matrix))))

    def completeness_error(self):
        """max-abs of sum_mn chi_mn E_n† E_m - I"""
        total = sum(self.matrix[m, n] * dagger(CHI_BASIS[n]) @ CHI_BASIS[m] for m in range(4) for n in range(4))
        return float(np.max(np.abs(total - I2)))

    def psd_distance(self):
        """How far the smallest eigenvalue sits below zero"""
        eigenvalues = np.linalg.eigvalsh((self.matrix + dagger(self.matrix)) / 2)
        return float(max(0.0, -eigenvalues.min()))

    def apply(self, rho):
        return sum(self.matrix[m, n] * CHI_BASIS[m] @ rho @ dagger(CHI_BASIS[n]) for m in range(4) for n in range(4))

    def to_dict(self):
        return {
            'basis': list(self.labels),
            'chi': [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix],
            'psd_distance': self.psd_distance(),
        }

    @classmethod
    def from_dict(cls, data):
        values = np.array([[complex(re, im) for re, im in row] for row in data['chi']])
        return cls(values, tuple(data.get('basis', CHI_LABELS)))


def chi_to_pauli(chi):
    """Same channel expressed in {I, X, Y, Z}"""
    factors = np.outer(PAULI_FACTORS, np.conj(PAULI_FACTORS))
    return ChiMatrix(chi.matrix * factors, ('I', 'X', 'Y', 'Z'))


def input_states():
    return [named_state(label) for label in INPUT_LABELS]


def qpt_single(channel: Callable[[np.ndarray], np.ndarray]):
    """
    chi matrix of a single-qubit channel from four input states.

    Solves sum_mn beta[pq, mn] chi_mn = lambda_pq with
    lambda_pq = Tr[channel(rho_p) rho_q] and
    beta[pq, mn] = Tr[E_m rho_p E_n† rho_q], taking rho_q as the inputs.
    """
    inputs = input_states()
    outputs = [np.asarray(channel(rho), dtype=complex) for rho in inputs]
    for label, out in zip(INPUT_LABELS, outputs):
        if out.shape != (2, 2):
            raise ValidationError('Channel returned shape {} for input state {}'.format(out.shape, label))
    lam = np.array([np.trace(outputs[p] @ inputs[q]) for p in range(4) for q in range(4)])
    beta = np.array([[np.trace(CHI_BASIS[m] @ inputs[p] @ dagger(CHI_BASIS[n]) @ inputs[q])
                      for m in range(4) for n in range(4)]
                     for p in range(4) for q in range(4)])
    chi = ChiMatrix(linsolve(beta, lam).reshape(4, 4))
    if chi.psd_distance() > 1e-8:
        my_logger.warning('Reconstructed chi has a negative eigenvalue {:.3g} below zero'.format(chi.psd_distance()))
    return chi


def unitary_channel(u):
    u = np.asarray(u, dtype=complex)
    return lambda rho: u @ rho @ dagger(u)


def dephasing_channel(p=1.0):
    """rho -> (1 - p/2) rho + (p/2) Z rho Z; p = 1 removes all coherence"""
    return lambda rho: (1 - p / 2) * rho + (p / 2) * (Z @ rho @ Z)


NAMED_CHANNELS = {
    'identity': lambda: unitary_channel(I2),
    'x-gate': lambda: unitary_channel(X),
    'y-gate': lambda: unitary_channel(Y),
    'z-gate': lambda: unitary_channel(Z),
    'hadamard': lambda: unitary_channel(np.array([[1, 1], [1, -1]]) / math.sqrt(2)),
    'dephasing': lambda: dephasing_channel(1.0),
}


def named_channel(name):
    if name not in NAMED_CHANNELS:
        raise ValidationError('Unknown channel {}; expected one of {}'.format(name, sorted(NAMED_CHANNELS)))
    return NAMED_CHANNELS[name]()


@dataclass
class NoiseSpectrum:
    points: List[Tuple[float, float, float]] = field(default_factory=list)
    tau_grid: Sequence[float] = ()

    def frame(self):
        return pd.DataFrame(self.points, columns=['omega_rad_s', 'S_per_s', 'T2_s'])

    def below(self, baseline):
        """Frequencies present in both spectra where this one does not exceed the baseline"""
        reference = {round(omega, 9): s for omega, s, _ in baseline.points}
        return [omega for omega, s, _ in self.points
                if round(omega, 9) in reference and not s > reference[round(omega, 9)]]


def spectral_density(t2_s):
    """S ~ pi^2 / (4 T2)"""
    return math.pi ** 2 / (4 * t2_s)


class ConstantT2Bath:
    """Exact exponential decays with the same T2 at every tau"""

    def __init__(self, t2_s, samples=16):
        if not t2_s > 0:
            raise ValidationError('Bath T2 must be positive')
        self.t2_s = t2_s
        self.samples = samples

    def t2_at(self, tau_s):
        return self.t2_s

    def decay(self, tau_s, cpmg_n, realizations, index=0):
        t2 = self.t2_at(tau_s)
        t = np.linspace(0, 3 * t2, self.samples)
        return t, np.exp(-t / t2)


class SyntheticBath(ConstantT2Bath):
    """
    Decays generated from a target spectrum: T2(omega) = pi^2 / (4 S(omega)).

    Optional seeded Gaussian noise is added per tau point.
    """

    def __init__(self, spectrum, noise_sigma=0.0, seed=0, samples=16):
        self.spectrum = spectrum
        self.noise_sigma = noise_sigma
        self.seed = seed
        self.samples = samples

    def t2_at(self, tau_s):
        s = float(self.spectrum(math.pi / tau_s))
        if not s > 0:
            raise ValidationError('Target spectrum must be positive, got {} at tau {}'.format(s, tau_s))
        return math.pi ** 2 / (4 * s)

    def decay(self, tau_s, cpmg_n, realizations, index=0):
        t, values = super().decay(tau_s, cpmg_n, realizations, index)
        if self.noise_sigma > 0:
            values = values + stream(self.seed, index).normal(0.0, self.noise_sigma, size=values.shape)
        return t, values


class KickBath:
    """Kicked environment sampled by a CPMG train of N pulses, t_c = N tau"""

    def __init__(self, model, gamma_per_ms, alpha_rad, cycles=8, angle_mode='symmetric',
                 phase_mode='fixed-y', seed=0, threads=1):
        self.model = model
        self.gamma_per_ms = gamma_per_ms
        self.alpha_rad = alpha_rad
        self.cycles = cycles
        self.angle_mode = angle_mode
        self.phase_mode = phase_mode
        self.seed = seed
        self.threads = threads

    def baseline(self):
        """
        Same bath with the kicks switched off, decaying by the model's intrinsic T2 only.

        A model without intrinsic decay falls back to the proton T2 of the molecule.
        """
        model = self.model
        if not math.isfinite(model.t2_s):
            model = replace(model, t2_s=MOLECULE_T2_S['1H'])
            my_logger.verbose1('Kick bath model has no intrinsic T2; baseline uses {} s'.format(model.t2_s))
        return KickBath(model, self.gamma_per_ms, 0.0, self.cycles, self.angle_mode,
                        self.phase_mode, self.seed, self.threads)

    def decay(self, tau_s, cpmg_n, realizations, index=0):
        t_c = cpmg_n * tau_s
        sched = KickSchedule(self.gamma_per_ms, self.alpha_rad, t_c, self.angle_mode, self.phase_mode, self.seed)
        series = run_dd_under_kicks(self.model, sched, dd_schedule('cpmg', cpmg_n, t_c), self.cycles,
                                    realizations, self.threads)
        return series.t_s, series.line


def noise_spectroscopy(bath, tau_grid, cpmg_n=7, realizations=300, threads=1):
    """
    (pi/tau, pi^2/(4 T2), T2) for every tau whose decay can be fitted.

    Points with a non-decaying or unfittable series are omitted with a warning.
    """
    taus = [float(tau) for tau in tau_grid]
    if any(not tau > 0 for tau in taus):
        raise ValidationError('tau values must be positive, got {}'.format(taus))

    def point(entry):
        index, tau = entry
        t, values = bath.decay(tau, cpmg_n, realizations, index)
        try:
            t2 = fit_t2(t, values)
        except SpinLabError as e:
            my_logger.warning('Omitting tau = {:.4g} s: {}'.format(tau, e))
            return None
        if not math.isfinite(t2):
            my_logger.warning('Omitting tau = {:.4g} s: decay not resolved'.format(tau))
            return None
        my_logger.verbose1('tau = {:.4g} s: T2 = {:.4g} s'.format(tau, t2))
        return (math.pi / tau, spectral_density(t2), t2)

    entries = list(enumerate(taus))
    if threads > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(point, entries))
    else:
        results = [point(e) for e in entries]
    return NoiseSpectrum([r for r in results if r is not None], tuple(taus))
