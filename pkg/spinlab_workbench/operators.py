# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Dense complex linear algebra for 2^n-dimensional spin operators.

Operators are plain complex ``numpy`` arrays; the helpers here check the
shape and tagging invariants (Hermitian, unitary) where an operation needs them.
"""

import logging
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from spinlab_workbench.helper import (ValidationError, HERMITIAN_TOL, UNITARY_TOL,
                                      is_power_of_two, qubit_count, check_qubit_limit, max_abs)

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

OperatorMatrix = np.ndarray

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

# spin-1/2 operators I = sigma/2
IX = X / 2
IY = Y / 2
IZ = Z / 2

PAULI = {'I': I2, 'X': X, 'Y': Y, 'Z': Z}


def as_operator(a, name='operator'):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError('{} must be a square matrix, got shape {}'.format(name, a.shape))
    if not is_power_of_two(a.shape[0]):
        raise ValidationError('{} dimension {} is not a power of two'.format(name, a.shape[0]))
    return a


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, tol=HERMITIAN_TOL):
    return max_abs(a - dagger(a)) <= tol


def is_unitary(u, tol=UNITARY_TOL):
    u = np.asarray(u)
    return max_abs(u @ dagger(u) - np.eye(u.shape[0])) <= tol


def commutator(a, b):
    return a @ b - b @ a


def kron(*ops):
    """Tensor product a ⊗ b ⊗ ..., left factor is the most significant qubit"""
    if not ops:
        raise ValidationError('kron needs at least one operator')
    return reduce(np.kron, [as_operator(op) for op in ops])


def embed(op, site, n, max_qubits=None):
    """
    Places a single-qubit operator at ``site`` of an ``n``-qubit register.

    :param op: 2x2 operator
    :param site: 0-based qubit index, 0 is the leftmost tensor factor
    :param n: qubit count
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValidationError('embed expects a 2x2 operator, got {}'.format(op.shape))
    check_qubit_limit(n, max_qubits)
    if not 0 <= site < n:
        raise ValidationError('site {} out of range for {} qubits'.format(site, n))
    return reduce(np.kron, [op if k == site else I2 for k in range(n)])


def embed_pair(op_a, site_a, op_b, site_b, n, max_qubits=None):
    """Two single-qubit factors at distinct sites, identity elsewhere"""
    if site_a == site_b:
        raise ValidationError('embed_pair needs distinct sites, got {} twice'.format(site_a))
    return embed(op_a, site_a, n, max_qubits) @ embed(op_b, site_b, n, max_qubits)


def collective(op, n, max_qubits=None):
    """Sum over sites of the embedded single-qubit operator"""
    return sum(embed(op, k, n, max_qubits) for k in range(n))


def matexp_hermitian(h, t=1.0, tol=HERMITIAN_TOL):
    """
    exp(-i h t) for Hermitian h via eigendecomposition.

    :param h: Hermitian generator
    :param t: time (or angle) multiplying the generator
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError('matexp_hermitian expects a square matrix, got {}'.format(h.shape))
    if not is_hermitian(h, tol):
        raise ValidationError('matexp_hermitian: generator is not Hermitian (deviation {:.3g})'.format(max_abs(h - dagger(h))))
    if t == 0:
        return np.eye(h.shape[0], dtype=complex)
    # symmetrize to strip roundoff before eigh
    w, v = np.linalg.eigh((h + dagger(h)) / 2)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def conjugate(u, rho):
    """U rho U†"""
    return u @ rho @ dagger(u)


def partial_trace(rho, keep: Iterable[int], dims: Sequence[int]):
    """
    Reduced operator on the subsystems listed in ``keep``.

    :param rho: operator on the product space
    :param keep: indices of the factors to keep, any order (result follows ascending order)
    :param dims: dimension of every factor
    """
    rho = np.asarray(rho, dtype=complex)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValidationError('partial_trace: dims {} do not match operator shape {}'.format(dims, rho.shape))
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValidationError('partial_trace: keep indices {} out of range for {} factors'.format(keep, len(dims)))

    n = len(dims)
    tensor = rho.reshape(dims + dims)
    # trace the highest traced axis first so remaining axis numbers stay valid
    for axis in sorted(set(range(n)) - set(keep), reverse=True):
        current = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=axis, axis2=axis + current)
    kept_dim = int(np.prod([dims[k] for k in keep])) if keep else 1
    return tensor.reshape(kept_dim, kept_dim)


def operator_qubits(a):
    return qubit_count(np.asarray(a).shape[0])
