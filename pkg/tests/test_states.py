# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for states.py
#

import logging
import math
from unittest import TestCase

import numpy as np

import spinlab_workbench.states as st
from spinlab_workbench.helper import ValidationError
from spinlab_workbench.operators import X, Y, Z, IX, IZ, I2, embed

logging.Logger.verbose1 = logging.Logger.debug
logging.Logger.verbose2 = logging.Logger.debug


class StateTest(TestCase):

    def test_validate_density(self):
        self.assertEqual(st.validate_density(st.named_state('0')).kind, st.StateKind.PURE)
        check = st.validate_density(I2 / 2)
        self.assertEqual(check.kind, st.StateKind.MIXED)
        self.assertAlmostEqual(check.purity, 0.5)
        bad = [np.eye(2), np.array([[0.5, 1], [0, 0.5]]), np.diag([1.5, -0.5])]
        for rho in bad:
            check = st.validate_density(rho)
            self.assertFalse(check.valid, str(rho))
            self.assertTrue(check.reason)

    def test_require_density(self):
        with self.assertRaises(ValidationError):
            st.require_density(np.diag([1.5, -0.5]))

    def test_bloch_round_trip_examples(self):
        rho = st.density_from_bloch([0, 0, 1])
        self.assertTrue(np.allclose(rho, st.named_state('0')))
        self.assertTrue(np.allclose(st.bloch_from_density(st.named_state('+i')), [0, 1, 0]))
        with self.assertRaises(ValidationError):
            st.density_from_bloch([1, 1, 0])

    def test_named_states(self):
        for label in ('0', '1', '+', '-', '+i', '-i'):
            self.assertEqual(st.validate_density(st.named_state(label)).kind, st.StateKind.PURE)
        self.assertTrue(np.allclose(st.named_state('mixed'), I2 / 2))
        with self.assertRaises(ValidationError):
            st.named_state('2')

    def test_expectation(self):
        self.assertAlmostEqual(st.expectation(X, st.named_state('+')), 1.0)
        self.assertAlmostEqual(st.expectation(Y, st.named_state('-i')), -1.0)
        self.assertAlmostEqual(st.expectation(Z, I2 / 2), 0.0)
        with self.assertRaises(ValidationError):
            st.expectation(np.array([[0, 1], [0, 0]]), st.named_state('0'))
        with self.assertRaises(ValidationError):
            st.expectation(np.kron(X, X), st.named_state('0'))

    def test_thermal_deviation_state(self):
        dev = st.thermal_deviation_state([2 * math.pi * 400e6] * 2, 2)
        expected = -(embed(IZ, 0, 2) + embed(IZ, 1, 2))
        self.assertTrue(np.allclose(dev.entries, expected))
        self.assertGreater(dev.polarization, 0)
        self.assertLess(dev.polarization, 1e-4)
        self.assertAlmostEqual(st.expectation(embed(Z, 0, 2), dev), -2.0)

    def test_deviation_density_rejects_trace(self):
        with self.assertRaises(ValidationError):
            st.DeviationDensity(np.eye(2))
        with self.assertRaises(ValidationError):
            st.DeviationDensity(np.array([[0, 1], [0, 0]]))

    def test_pseudo_pure_threshold(self):
        self.assertAlmostEqual(st.pseudo_pure_threshold(2), 1 / 3)
        self.assertAlmostEqual(st.pseudo_pure_threshold(4), 0.2)
        with self.assertRaises(ValidationError):
            st.pseudo_pure_threshold(0)

    def test_state_matrix(self):
        dev = st.DeviationDensity(IX)
        self.assertIs(st.state_matrix(dev), dev.entries)
        self.assertTrue(np.allclose(st.state_matrix(I2 / 2), I2 / 2))
