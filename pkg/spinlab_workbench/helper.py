# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

import math
import logging

import numpy as np

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

"""
 Shared exceptions, unit conversions, seed splitting and tolerance helpers
"""

# default elementwise tolerances
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_FLOOR = -1e-10

MAX_QUBITS = 4


class SpinLabError(Exception):
    """Root of every error raised by the workbench"""


class ValidationError(SpinLabError, ValueError):
    """Invalid input: bad dims, non-Hermitian operators, schema violations"""


class NumericError(SpinLabError, ArithmeticError):
    """Numeric failure: non-finite values, singular systems"""


class ConvergenceError(NumericError):
    """Iterative method stopped without converging; carries the best-so-far result"""

    def __init__(self, message, best=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.iterations = iterations


def max_abs(a):
    """Elementwise max-abs norm used for every complex comparison"""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def close(a, b, tol):
    return max_abs(np.asarray(a) - np.asarray(b)) <= tol


def is_power_of_two(dim):
    return isinstance(dim, (int, np.integer)) and dim >= 2 and (dim & (dim - 1)) == 0


def qubit_count(dim):
    if not is_power_of_two(dim):
        raise ValidationError('Dimension {} is not a power of two >= 2'.format(dim))
    return int(dim).bit_length() - 1


def check_qubit_limit(n, max_qubits=None):
    limit = MAX_QUBITS if max_qubits is None else max_qubits
    if n < 1 or n > limit:
        raise ValidationError('Qubit count {} outside supported range 1..{}'.format(n, limit))
    return n


# unit conversions; internal time is SI seconds, angles radians
def ms_to_s(value):
    return value * 1e-3


def deg_to_rad(value):
    return math.radians(value)


def hz_to_rad_s(value):
    return 2.0 * math.pi * value


def kicks_per_ms_to_per_s(value):
    return value * 1e3


def seed_sequence(master_seed, *keys):
    """
    Hash-split seeding: every stream is addressed by (master_seed, key...)

    :param master_seed: 64-bit run seed
    :param keys: integer path, e.g. realization index
    """
    return np.random.SeedSequence(entropy=int(master_seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(k) for k in keys))


def stream(master_seed, *keys):
    """Counter-based generator for one addressed stream"""
    return np.random.Generator(np.random.Philox(seed_sequence(master_seed, *keys)))


def finite_or_raise(value, what):
    if not np.all(np.isfinite(value)):
        raise NumericError('Non-finite value encountered in {}'.format(what))
    return value
