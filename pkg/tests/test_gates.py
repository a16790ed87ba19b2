# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for gates.py
#

import logging
import math
from unittest import TestCase

import numpy as np

import spinlab_workbench.gates as gt
from spinlab_workbench.helper import ValidationError
from spinlab_workbench.operators import X, Z, IX, IY, IZ, conjugate, is_unitary, matexp_hermitian

logging.Logger.verbose1 = logging.Logger.debug
logging.Logger.verbose2 = logging.Logger.debug

J_HZ = 209.4


class RotationTest(TestCase):

    def test_rotation_examples(self):
        rz = gt.rotation(gt.RotationSpec.about('z', 2 * math.pi))
        self.assertTrue(np.allclose(rz, -np.eye(2)))
        self.assertAlmostEqual(gt.gate_fidelity(rz, np.eye(2)), 1.0, places=12)
        rx = gt.rotation(gt.RotationSpec.about('x', math.pi))
        self.assertAlmostEqual(gt.gate_fidelity(rx, X), 1.0, places=12)

    def test_rotation_embedding(self):
        r = gt.rotation(gt.RotationSpec.about('x', math.pi, target=1), 2)
        self.assertTrue(np.allclose(r, np.kron(np.eye(2), -1j * X)))

    def test_rotation_spec_validation(self):
        with self.assertRaises(ValidationError):
            gt.RotationSpec((1.0, 1.0, 0.0), 1.0)
        with self.assertRaises(ValidationError):
            gt.RotationSpec.about('w', 1.0)

    def test_standard_gates(self):
        s = gt.standard_gate('S')
        self.assertAlmostEqual(gt.gate_fidelity(s @ s, gt.standard_gate('Z')), 1.0, places=12)
        for name in ('H', 'S', 'X', 'Y', 'Z', 'CNOT'):
            self.assertTrue(is_unitary(gt.standard_gate(name)))
        with self.assertRaises(ValidationError):
            gt.standard_gate('T')

    def test_gate_fidelity_phase_insensitive(self):
        h = gt.standard_gate('H')
        self.assertAlmostEqual(gt.gate_fidelity(np.exp(0.7j) * h, h), 1.0, places=12)
        self.assertAlmostEqual(gt.gate_fidelity(X, Z), 0.0, places=12)
        with self.assertRaises(ValidationError):
            gt.gate_fidelity(X, np.eye(4))


class SequenceTest(TestCase):

    def test_hadamard_sequence(self):
        u = gt.compile_sequence(gt.hadamard_sequence(), 1)
        self.assertAlmostEqual(gt.gate_fidelity(u, gt.standard_gate('H')), 1.0, places=12)

    def test_cnot_sequence(self):
        u = gt.compile_sequence(gt.cnot_sequence(J_HZ), 2)
        self.assertGreaterEqual(gt.gate_fidelity(u, gt.standard_gate('CNOT')), 1 - 1e-9)
        ket = np.zeros(4, dtype=complex)
        ket[2] = 1
        out = u @ ket
        self.assertAlmostEqual(abs(out[3]), 1.0, places=9)

    def test_cnot_sequence_rejects_bad_j(self):
        with self.assertRaises(ValidationError):
            gt.cnot_sequence(0.0)

    def test_compile_time_order(self):
        a = gt.Rotation(gt.RotationSpec.about('x', math.pi / 2))
        b = gt.Rotation(gt.RotationSpec.about('z', math.pi / 2))
        u = gt.compile_sequence(gt.PulseSequence([a, b]), 1)
        self.assertTrue(np.allclose(u, b.unitary(1) @ a.unitary(1)))

    def test_sequence_inverse(self):
        seq = gt.cnot_sequence(J_HZ).then(gt.FreeEvolution(1e-3, 'chemical-shift', {'offsets_rad_s': [100.0, -40.0]}))
        u = gt.compile_sequence(seq, 2)
        v = gt.compile_sequence(seq.inverse(), 2)
        self.assertTrue(np.allclose(v @ u, np.eye(4)))

    def test_hahn_echo_refocuses_shift(self):
        seq = gt.hahn_sequence(0.01, params={'offsets_rad_s': [2 * math.pi * 37.0]})
        u = gt.compile_sequence(seq, 1)
        pulse = gt.rotation(gt.RotationSpec.about('x', math.pi))
        self.assertAlmostEqual(gt.gate_fidelity(u, pulse), 1.0, places=10)

    def test_free_evolution_unknown_tag(self):
        with self.assertRaises(ValidationError):
            gt.compile_sequence(gt.PulseSequence([gt.FreeEvolution(1.0, 'dipolar')]), 1)

    def test_negative_duration(self):
        with self.assertRaises(ValidationError):
            gt.compile_sequence(gt.PulseSequence([gt.CouplingDelay(-1.0, J_HZ)]), 2)

    def test_coupling_delay_matches_propagator(self):
        t = 1.3e-3
        u = gt.CouplingDelay(t, J_HZ).unitary(2)
        self.assertTrue(np.allclose(u, gt.coupling_propagator(J_HZ, t)))

    def test_weak_coupling_hamiltonian(self):
        h = gt.weak_coupling_hamiltonian(2, offsets_hz=[10.0, 0.0], couplings_hz=[[0, 1, J_HZ]])
        diag = np.real(np.diag(h))
        expected = 2 * math.pi * (10.0 * np.array([0.5, 0.5, -0.5, -0.5]) + J_HZ * np.array([1, -1, -1, 1]) / 4)
        self.assertTrue(np.allclose(diag, expected))

    def test_serialized_sequence(self):
        entries = gt.sequence_to_list(gt.cnot_sequence(J_HZ))
        self.assertEqual(list(entries[1]), ['coupling_delay'])
        u = gt.compile_sequence(gt.sequence_from_list(entries), 2)
        self.assertGreaterEqual(gt.gate_fidelity(u, gt.standard_gate('CNOT')), 1 - 1e-9)
        with self.assertRaises(ValidationError):
            gt.element_from_dict({'wait': {}})


class ProductOperatorTest(TestCase):

    def test_parse(self):
        self.assertTrue(np.allclose(gt.product_operator('Ix', 1), IX))
        self.assertTrue(np.allclose(gt.product_operator('2IySz', 2), 2 * np.kron(IY, IZ)))
        self.assertTrue(np.allclose(gt.product_operator('E', 2), np.eye(4)))
        for label in ('Ia', 'IxIx', 'Sx'):
            with self.assertRaises(ValidationError):
                gt.product_operator(label, 1)

    def test_basis_size(self):
        self.assertEqual(len(gt.product_operator_basis(2)), 16)
        self.assertIn('4IxSyKz', gt.product_operator_basis(3))

    def test_coupling_evolution_table(self):
        angle = math.pi * J_HZ * 1e-3
        u = gt.coupling_propagator(J_HZ, 1e-3)
        out = gt.decompose(conjugate(u, gt.product_operator('Ix', 2)))
        self.assertAlmostEqual(out['Ix'], math.cos(angle), places=10)
        self.assertAlmostEqual(out['2IySz'], math.sin(angle), places=10)
        out = gt.decompose(conjugate(u, gt.product_operator('2IySz', 2)))
        self.assertAlmostEqual(out['2IySz'], math.cos(angle), places=10)
        self.assertAlmostEqual(out['Ix'], -math.sin(angle), places=10)

    def test_shift_evolution(self):
        theta = 0.4
        out = gt.decompose(conjugate(matexp_hermitian(IZ, theta), IX))
        self.assertAlmostEqual(out['Ix'], math.cos(theta), places=12)
        self.assertAlmostEqual(out['Iy'], math.sin(theta), places=12)


class SpectrumTest(TestCase):

    def test_two_spin_lines(self):
        lines = gt.transition_lines([100.0, -50.0], [[0, J_HZ], [J_HZ, 0]])
        self.assertEqual(len(lines), 4)
        spin0 = sorted(f for spin, f in lines if spin == 0)
        self.assertAlmostEqual(spin0[1] - spin0[0], J_HZ)
        self.assertAlmostEqual(sum(spin0) / 2, 100.0)

    def test_three_spin_line_count(self):
        lines = gt.transition_lines([0.0, 10.0, 20.0], np.full((3, 3), 5.0))
        self.assertEqual(len(lines), 12)

    def test_single_spin(self):
        self.assertEqual(gt.transition_lines([42.0]), [(0, 42.0)])
