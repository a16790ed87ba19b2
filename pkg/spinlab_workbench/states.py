# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
State construction, validation and ensemble-average measurement.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy import constants

from spinlab_workbench.helper import (ValidationError, HERMITIAN_TOL, TRACE_TOL, PSD_FLOOR,
                                      check_qubit_limit, max_abs)
from spinlab_workbench.operators import I2, X, Y, Z, IZ, embed, dagger, is_hermitian

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

PURITY_TOL = 1e-8
ROOM_TEMPERATURE_K = 300.0


class StateKind(Enum):
    PURE = 'valid-pure'
    MIXED = 'valid-mixed'
    INVALID = 'invalid'


@dataclass(frozen=True)
class DensityCheck:
    kind: StateKind
    purity: Optional[float] = None
    reason: str = ''

    @property
    def valid(self):
        return self.kind is not StateKind.INVALID


@dataclass(frozen=True)
class DeviationDensity:
    """Traceless deviation part of a high-temperature state, in units of the polarization"""
    entries: np.ndarray
    polarization: float = 1.0

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if abs(np.trace(entries)) > HERMITIAN_TOL * max(1, entries.shape[0]):
            raise ValidationError('DeviationDensity must be traceless, trace = {}'.format(np.trace(entries)))
        if not is_hermitian(entries):
            raise ValidationError('DeviationDensity must be Hermitian')
        object.__setattr__(self, 'entries', entries)

    @property
    def dim(self):
        return self.entries.shape[0]


def bloch_vector(r):
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValidationError('Bloch vector must have three components, got {}'.format(r.shape))
    if np.linalg.norm(r) > 1 + 1e-10:
        raise ValidationError('Bloch vector norm {:.6g} exceeds 1'.format(np.linalg.norm(r)))
    return r


def density_from_bloch(r):
    """rho = (1 + r·sigma)/2"""
    r = bloch_vector(r)
    return (I2 + r[0] * X + r[1] * Y + r[2] * Z) / 2


def bloch_from_density(rho):
    rho = np.asarray(rho, dtype=complex)
    return np.real([np.trace(rho @ X), np.trace(rho @ Y), np.trace(rho @ Z)])


def pure_density(psi):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValidationError('Cannot build a density matrix from the zero vector')
    psi = psi / norm
    return np.outer(psi, np.conj(psi))


def purity(rho):
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ rho)))


def validate_density(rho):
    """
    Classifies a matrix as valid-pure, valid-mixed or invalid(reason).

    Never raises for a square input; problems are reported in the reason.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return DensityCheck(StateKind.INVALID, reason='not a square matrix')
    trace = np.trace(rho)
    if abs(trace - 1) > TRACE_TOL:
        return DensityCheck(StateKind.INVALID, reason='trace {:.6g} is not 1'.format(np.real(trace)))
    if not is_hermitian(rho, HERMITIAN_TOL):
        return DensityCheck(StateKind.INVALID, reason='not Hermitian')
    eigenvalues = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
    if eigenvalues.min() < PSD_FLOOR:
        return DensityCheck(StateKind.INVALID, reason='negative eigenvalue {:.6g}'.format(eigenvalues.min()))
    p = purity(rho)
    kind = StateKind.PURE if abs(p - 1) <= PURITY_TOL else StateKind.MIXED
    return DensityCheck(kind, purity=p)


def require_density(rho, name='rho'):
    check = validate_density(rho)
    if not check.valid:
        raise ValidationError('{} is not a valid density matrix: {}'.format(name, check.reason))
    return np.asarray(rho, dtype=complex)


def spin_polarization(omegas, n, temperature_k=ROOM_TEMPERATURE_K):
    """epsilon = hbar·omega / (2^n k_B T), with omega the mean absolute Larmor frequency"""
    omega = float(np.mean(np.abs(omegas)))
    return constants.hbar * omega / (2 ** n * constants.k * temperature_k)


def thermal_deviation_state(omegas: Sequence[float], n: int, temperature_k=ROOM_TEMPERATURE_K):
    """
    High-temperature deviation state -sum_i (omega_i / omega_ref) Iz_i.

    Coefficients are reported in units of the polarization: every spin gets
    coefficient -1 when all Larmor frequencies are equal.
    """
    check_qubit_limit(n)
    omegas = np.broadcast_to(np.asarray(omegas, dtype=float), (n,))
    reference = float(np.mean(np.abs(omegas)))
    if reference == 0:
        raise ValidationError('thermal_deviation_state needs a non-zero Larmor frequency')
    entries = -sum((omegas[i] / reference) * embed(IZ, i, n) for i in range(n))
    return DeviationDensity(entries, polarization=spin_polarization(omegas, n, temperature_k))


def pseudo_pure_threshold(n):
    """Polarization above which an n-qubit pseudo-pure state can be non-separable"""
    if n < 1:
        raise ValidationError('pseudo_pure_threshold needs n >= 1')
    return 1.0 / (1.0 + 2 ** (n / 2))


def expectation(a, rho):
    """
    <A> = Tr[A rho]; on a DeviationDensity this is the deviation signal.
    """
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, 1e-10):
        raise ValidationError('expectation needs a Hermitian observable')
    matrix = rho.entries if isinstance(rho, DeviationDensity) else np.asarray(rho, dtype=complex)
    if matrix.shape != a.shape:
        raise ValidationError('expectation: observable {} and state {} dims differ'.format(a.shape, matrix.shape))
    value = np.trace(a @ matrix)
    scale = max(1.0, abs(value))
    if abs(np.imag(value)) > 1e-10 * scale:
        raise ValidationError('expectation has imaginary residue {:.3g}'.format(np.imag(value)))
    return float(np.real(value))


def state_matrix(rho):
    """Plain matrix behind a density or deviation state"""
    return rho.entries if isinstance(rho, DeviationDensity) else np.asarray(rho, dtype=complex)


KET = {
    '0': np.array([1, 0], dtype=complex),
    '1': np.array([0, 1], dtype=complex),
    '+': np.array([1, 1], dtype=complex) / math.sqrt(2),
    '-': np.array([1, -1], dtype=complex) / math.sqrt(2),
    '+i': np.array([1, 1j], dtype=complex) / math.sqrt(2),
    '-i': np.array([1, -1j], dtype=complex) / math.sqrt(2),
}


def named_state(label):
    """Single-qubit density matrix for one of 0, 1, +, -, +i, -i, mixed"""
    if label == 'mixed':
        return I2 / 2
    if label not in KET:
        raise ValidationError('Unknown state label {}'.format(label))
    return pure_density(KET[label])
