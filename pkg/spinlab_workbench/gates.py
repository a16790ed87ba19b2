# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Rotations, named gates, NMR pulse sequences and product-operator bookkeeping.

Sequences are lists of elements in time order; compiling one multiplies the
element propagators right to left, so the first element acts first.
"""

import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from spinlab_workbench.helper import ValidationError, check_qubit_limit
from spinlab_workbench.operators import (I2, X, Y, Z, IZ, PAULI, embed, embed_pair, dagger,
                                         matexp_hermitian, kron, operator_qubits)

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

SPIN_LETTERS = 'ISKL'
AXIS_LETTERS = {'x': X, 'y': Y, 'z': Z}


@dataclass(frozen=True)
class RotationSpec:
    axis: Tuple[float, float, float]
    angle: float
    target: int = 0

    def __post_init__(self):
        axis = tuple(float(a) for a in self.axis)
        if len(axis) != 3:
            raise ValidationError('Rotation axis needs three components, got {}'.format(self.axis))
        if abs(math.sqrt(sum(a * a for a in axis)) - 1) > 1e-10:
            raise ValidationError('Rotation axis {} is not a unit vector'.format(axis))
        object.__setattr__(self, 'axis', axis)

    @classmethod
    def about(cls, axis_name, angle, target=0):
        axes = {'x': (1.0, 0.0, 0.0), 'y': (0.0, 1.0, 0.0), 'z': (0.0, 0.0, 1.0),
                '-x': (-1.0, 0.0, 0.0), '-y': (0.0, -1.0, 0.0), '-z': (0.0, 0.0, -1.0)}
        if axis_name not in axes:
            raise ValidationError('Unknown rotation axis {}'.format(axis_name))
        return cls(axes[axis_name], angle, target)


def rotation_2x2(axis, angle):
    """cos(θ/2)𝟙 - i sin(θ/2) n·σ"""
    nx, ny, nz = axis
    return math.cos(angle / 2) * I2 - 1j * math.sin(angle / 2) * (nx * X + ny * Y + nz * Z)


def rotation(spec, n=1):
    """Rotation of one qubit of an n-qubit register"""
    check_qubit_limit(n)
    return embed(rotation_2x2(spec.axis, spec.angle), spec.target, n)


def standard_gate(name):
    gates = {
        'H': np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
        'S': np.array([[1, 0], [0, 1j]], dtype=complex),
        'X': X.copy(),
        'Y': Y.copy(),
        'Z': Z.copy(),
        # control is the first (most significant) qubit
        'CNOT': np.array([[1, 0, 0, 0],
                          [0, 1, 0, 0],
                          [0, 0, 0, 1],
                          [0, 0, 1, 0]], dtype=complex),
    }
    if name not in gates:
        raise ValidationError('Unknown gate {}; expected one of {}'.format(name, sorted(gates)))
    return gates[name]


def coupling_propagator(j_hz, t):
    """U(t) = exp(-i 2πJ Iz Sz t) on two qubits"""
    if t < 0:
        raise ValidationError('coupling_propagator needs t >= 0, got {}'.format(t))
    phase = 2 * math.pi * j_hz * t
    # diagonal of Iz⊗Sz is (1, -1, -1, 1)/4
    return np.diag(np.exp(-1j * phase * np.array([1, -1, -1, 1]) / 4))


# Free-evolution Hamiltonians by tag; each builder takes (n, **params) and returns rad/s
HAMILTONIANS = {}


def register_hamiltonian(tag):
    def wrap(builder):
        HAMILTONIANS[tag] = builder
        return builder
    return wrap


@register_hamiltonian('zero')
def zero_hamiltonian(n):
    return np.zeros((2 ** n, 2 ** n), dtype=complex)


@register_hamiltonian('chemical-shift')
def shift_hamiltonian(n, offsets_rad_s=()):
    """sum_i Ω_i Iz_i"""
    offsets = np.broadcast_to(np.asarray(offsets_rad_s, dtype=float), (n,))
    return sum(offsets[i] * embed(IZ, i, n) for i in range(n))


@register_hamiltonian('weak-coupling')
def weak_coupling_hamiltonian(n, offsets_hz=(), couplings_hz=()):
    """2π sum_i ν_i Iz_i + 2π sum_{i<j} J_ij Iz_i Iz_j"""
    h = zero_hamiltonian(n)
    if len(offsets_hz):
        h = h + shift_hamiltonian(n, 2 * math.pi * np.asarray(offsets_hz, dtype=float))
    for i, j, coupling in coupling_pairs(couplings_hz, n):
        h = h + 2 * math.pi * coupling * embed_pair(IZ, i, IZ, j, n)
    return h


def coupling_pairs(couplings, n):
    """(i, j, J) for i < j from an n x n matrix or a list of [i, j, J] triples"""
    couplings = np.asarray(couplings, dtype=float)
    if couplings.size == 0:
        return []
    if couplings.shape == (n, n):
        return [(i, j, couplings[i, j]) for i in range(n) for j in range(i + 1, n) if couplings[i, j] != 0]
    if couplings.ndim == 2 and couplings.shape[1] == 3:
        pairs = []
        for i, j, coupling in couplings:
            i, j = int(i), int(j)
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValidationError('Coupling pair ({}, {}) invalid for {} spins'.format(i, j, n))
            pairs.append((min(i, j), max(i, j), coupling))
        return pairs
    raise ValidationError('Couplings must be an {0}x{0} matrix or [i, j, J] triples'.format(n))


@dataclass(frozen=True)
class Rotation:
    spec: RotationSpec

    def unitary(self, n):
        return rotation(self.spec, n)

    def inverse(self):
        return Rotation(RotationSpec(self.spec.axis, -self.spec.angle, self.spec.target))


@dataclass(frozen=True)
class CouplingDelay:
    duration_s: float
    j_hz: float
    pair: Tuple[int, int] = (0, 1)

    def unitary(self, n):
        if self.duration_s < 0:
            raise ValidationError('CouplingDelay duration must be >= 0')
        i, j = self.pair
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ValidationError('CouplingDelay pair {} invalid for {} qubits'.format(self.pair, n))
        return matexp_hermitian(2 * math.pi * self.j_hz * embed_pair(IZ, i, IZ, j, n), self.duration_s)

    def inverse(self):
        return Inverse(self)


@dataclass(frozen=True)
class FreeEvolution:
    duration_s: float
    tag: str = 'zero'
    params: Dict = field(default_factory=dict)

    def hamiltonian(self, n):
        if self.tag not in HAMILTONIANS:
            raise ValidationError('Unknown Hamiltonian tag {}; known: {}'.format(self.tag, sorted(HAMILTONIANS)))
        return HAMILTONIANS[self.tag](n, **self.params)

    def unitary(self, n):
        if self.duration_s < 0:
            raise ValidationError('FreeEvolution duration must be >= 0')
        return matexp_hermitian(self.hamiltonian(n), self.duration_s)

    def inverse(self):
        return Inverse(self)


@dataclass(frozen=True)
class Inverse:
    element: object

    def unitary(self, n):
        return dagger(self.element.unitary(n))

    def inverse(self):
        return self.element


@dataclass
class PulseSequence:
    elements: List = field(default_factory=list)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def then(self, *elements):
        return PulseSequence(self.elements + list(elements))

    def inverse(self):
        return PulseSequence([e.inverse() for e in reversed(self.elements)])


def compile_sequence(seq, n):
    """U = U_last ⋯ U_first for a time-ordered sequence"""
    check_qubit_limit(n)
    u = np.eye(2 ** n, dtype=complex)
    for element in seq:
        u = element.unitary(n) @ u
    return u


def gate_fidelity(u1, u2):
    """F = |Tr[U1 U2†]| / 2^n; insensitive to global phase"""
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    if u1.shape != u2.shape:
        raise ValidationError('gate_fidelity: dims {} and {} differ'.format(u1.shape, u2.shape))
    value = abs(np.trace(u1 @ dagger(u2))) / u1.shape[0]
    return float(min(1.0, value))


def transition_lines(offsets_hz, couplings_hz=()):
    """
    First-order line positions: for every spin, one line per state of its partners.

    :param offsets_hz: per-spin offsets
    :param couplings_hz: n x n matrix or [i, j, J] triples
    :return: list of (spin, frequency) with n·2^(n-1) entries
    """
    offsets = [float(v) for v in offsets_hz]
    n = len(offsets)
    check_qubit_limit(n)
    matrix = np.zeros((n, n))
    for i, j, coupling in coupling_pairs(couplings_hz, n):
        matrix[i, j] = matrix[j, i] = coupling
    lines = []
    for i in range(n):
        partners = [j for j in range(n) if j != i]
        for spins in itertools.product((0.5, -0.5), repeat=len(partners)):
            lines.append((i, offsets[i] + sum(matrix[i, j] * m for j, m in zip(partners, spins))))
    return lines


def hadamard_sequence(target=0):
    return PulseSequence([Rotation(RotationSpec.about('y', math.pi / 2, target)),
                          Rotation(RotationSpec.about('x', math.pi, target))])


def cnot_sequence(j_hz, control=0, target=1):
    """
    CNOT from a coupling delay of 1/(2J) dressed with single-spin rotations.

    Returned in time order; equal to CNOT up to a global phase.
    """
    if j_hz <= 0:
        raise ValidationError('cnot_sequence needs J > 0, got {}'.format(j_hz))
    return PulseSequence([
        Rotation(RotationSpec.about('y', math.pi / 2, target)),
        CouplingDelay(1 / (2 * j_hz), j_hz, (control, target)),
        Rotation(RotationSpec.about('x', math.pi / 2, target)),
        Rotation(RotationSpec.about('z', -math.pi / 2, target)),
        Rotation(RotationSpec.about('z', math.pi / 2, control)),
    ])


def hahn_sequence(tau_s, target=0, tag='chemical-shift', params=None):
    """tau/2 - pi_x - tau/2 refocusing block"""
    params = {} if params is None else dict(params)
    half = FreeEvolution(tau_s / 2, tag, params)
    return PulseSequence([half, Rotation(RotationSpec.about('x', math.pi, target)), half])


LABEL_TERM = re.compile(r'([{}])([xyz])'.format(SPIN_LETTERS))


def product_operator(label, n):
    """
    Product operator from NMR notation, e.g. ``Ix``, ``2IySz``, ``4IzSzKx``.

    Spins are lettered I, S, K, L for qubits 0..3; ``E`` is the identity.
    """
    check_qubit_limit(n)
    if label == 'E':
        return np.eye(2 ** n, dtype=complex)
    match = re.fullmatch(r'(\d*)((?:[{}][xyz])+)'.format(SPIN_LETTERS), label)
    if match is None:
        raise ValidationError('Cannot parse product operator {}'.format(label))
    coefficient = int(match.group(1)) if match.group(1) else 1
    factors = [I2] * n
    for letter, axis in LABEL_TERM.findall(match.group(2)):
        site = SPIN_LETTERS.index(letter)
        if site >= n:
            raise ValidationError('Spin {} not present in a {}-qubit register'.format(letter, n))
        if factors[site] is not I2:
            raise ValidationError('Spin {} appears twice in {}'.format(letter, label))
        factors[site] = AXIS_LETTERS[axis] / 2
    return coefficient * kron(*factors)


def product_operator_basis(n):
    """Every product operator label of an n-spin register, E first"""
    labels = []
    for axes in itertools.product('Exyz', repeat=n):
        terms = ['{}{}'.format(SPIN_LETTERS[i], a) for i, a in enumerate(axes) if a != 'E']
        if not terms:
            labels.append('E')
        else:
            prefix = '' if len(terms) == 1 else str(2 ** (len(terms) - 1))
            labels.append(prefix + ''.join(terms))
    return {label: product_operator(label, n) for label in labels}


def decompose(op, basis=None, tol=1e-12):
    """
    Coefficients of ``op`` in an orthogonal operator basis.

    :param basis: label -> matrix; defaults to the product-operator basis
    :return: label -> coefficient, zero coefficients dropped
    """
    op = np.asarray(op, dtype=complex)
    if basis is None:
        basis = product_operator_basis(operator_qubits(op))
    coefficients = {}
    for label, b in basis.items():
        value = np.trace(dagger(b) @ op) / np.trace(dagger(b) @ b)
        if abs(value) > tol:
            coefficients[label] = float(np.real(value)) if abs(np.imag(value)) <= tol else complex(value)
    return coefficients


def element_to_dict(element):
    if isinstance(element, Rotation):
        return {'rotation': {'axis': list(element.spec.axis), 'angle_rad': element.spec.angle,
                             'target': element.spec.target}}
    if isinstance(element, CouplingDelay):
        return {'coupling_delay': {'duration_s': element.duration_s, 'j_hz': element.j_hz,
                                   'pair': list(element.pair)}}
    if isinstance(element, FreeEvolution):
        return {'free_evolution': {'duration_s': element.duration_s, 'tag': element.tag,
                                   'params': dict(element.params)}}
    raise ValidationError('Element {} has no serialized form'.format(element))


def element_from_dict(entry):
    if len(entry) != 1:
        raise ValidationError('Sequence element must have exactly one kind, got {}'.format(sorted(entry)))
    kind, body = next(iter(entry.items()))
    if kind == 'rotation':
        return Rotation(RotationSpec(tuple(body['axis']), body['angle_rad'], body.get('target', 0)))
    if kind == 'coupling_delay':
        return CouplingDelay(body['duration_s'], body['j_hz'], tuple(body.get('pair', (0, 1))))
    if kind == 'free_evolution':
        return FreeEvolution(body['duration_s'], body.get('tag', 'zero'), dict(body.get('params', {})))
    raise ValidationError('Unknown sequence element kind {}'.format(kind))


def sequence_from_list(entries: Sequence[dict]):
    return PulseSequence([element_from_dict(e) for e in entries])


def sequence_to_list(seq):
    return [element_to_dict(e) for e in seq]
