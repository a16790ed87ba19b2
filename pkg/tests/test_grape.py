# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for grape.py
#

import logging
import os
import tempfile
from unittest import TestCase

import numpy as np

import spinlab_workbench.grape as gr
from spinlab_workbench.helper import ValidationError
from spinlab_workbench.operators import X, Y, Z
from spinlab_workbench.oracles import finite_difference_gradient

logging.Logger.verbose1 = logging.Logger.debug
logging.Logger.verbose2 = logging.Logger.debug


def x90_problem(ensemble=((1.0, 1.0),)):
    # Z/2 -> -Y/2 is a 90 degree rotation about +x
    return gr.GrapeProblem(np.zeros((2, 2)), [X / 2, Y / 2], Z / 2, -Y / 2, ensemble)


class GrapeTest(TestCase):

    def test_gradient_matches_finite_differences(self):
        problem = x90_problem()
        pulse = gr.ControlPulse.random(2, 20, 1e-3, 1.0, seed=11)
        analytic = gr.grape_gradient(problem, pulse)
        numeric = finite_difference_gradient(problem, pulse, 1e-4)
        self.assertLessEqual(np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric), 1e-3)

    def test_forward_propagate_constant_x_pulse(self):
        problem = x90_problem()
        steps, dt = 10, 1e-3
        amplitudes = np.zeros((2, steps))
        amplitudes[0] = (np.pi / 2) / (steps * dt)
        rhos = gr.forward_propagate(problem, gr.ControlPulse(amplitudes, dt))
        self.assertEqual(len(rhos), steps + 1)
        np.testing.assert_allclose(rhos[0], Z / 2)
        np.testing.assert_allclose(rhos[-1], -Y / 2, atol=1e-9)
        # half the scale is half the angle
        half = gr.forward_propagate(problem, gr.ControlPulse(amplitudes, dt), scale=0.5)[-1]
        np.testing.assert_allclose(half, (Z - Y) / (2 * np.sqrt(2)), atol=1e-9)

    def test_gradient_at_zero_pulse(self):
        problem = x90_problem()
        pulse = gr.ControlPulse.zeros(2, 20, 0.05)
        grad = gr.grape_gradient(problem, pulse)
        self.assertTrue(np.allclose(grad[0], 0.05))
        self.assertTrue(np.allclose(grad[1], 0.0))

    def test_single_member_reaches_target(self):
        problem = x90_problem()
        outcome = gr.grape_optimize(problem, gr.ControlPulse.zeros(2, 20, 0.05), 30.0, 200, 0.999)
        self.assertTrue(outcome.reached)
        self.assertGreaterEqual(outcome.history[-1], 0.999)
        pulse, history = outcome
        self.assertIs(pulse, outcome.pulse)

    def test_ensemble_optimization_is_monotone(self):
        problem = x90_problem(gr.RF_INHOMOGENEITY_ENSEMBLE)
        outcome = gr.grape_optimize(problem, gr.ControlPulse.zeros(2, 20, 0.05), 30.0, 300, 0.99)
        self.assertGreaterEqual(outcome.history[-1], 0.99)
        diffs = np.diff(outcome.history)
        self.assertTrue(np.all(diffs >= -1e-12))

    def test_threads_do_not_change_result(self):
        problem = x90_problem(gr.RF_INHOMOGENEITY_ENSEMBLE)
        pulse = gr.ControlPulse.random(2, 10, 0.05, 1.0, seed=3)
        phi1, g1 = gr.evaluate(problem, pulse, threads=1)
        phi4, g4 = gr.evaluate(problem, pulse, threads=4)
        self.assertEqual(phi1, phi4)
        self.assertTrue(np.array_equal(g1, g4))

    def test_already_at_target(self):
        problem = x90_problem()
        outcome = gr.grape_optimize(problem, gr.ControlPulse.zeros(2, 5, 0.05), 30.0, 10, -1.0)
        self.assertEqual(outcome.iterations, 0)
        self.assertEqual(len(outcome.history), 1)

    def test_validation(self):
        with self.assertRaises(ValidationError):
            gr.GrapeProblem(np.zeros((2, 2)), [], Z / 2, Y / 2)
        with self.assertRaises(ValidationError):
            gr.GrapeProblem(np.zeros((2, 2)), [np.array([[0, 1], [0, 0]])], Z / 2, Y / 2)
        with self.assertRaises(ValidationError):
            gr.GrapeProblem(np.zeros((4, 4)), [X / 2], Z / 2, Y / 2)
        with self.assertRaises(ValidationError):
            gr.normalize_ensemble([(1.0, -1.0)])
        with self.assertRaises(ValidationError):
            gr.ControlPulse(np.zeros((1, 3)), 0.0)
        problem = x90_problem()
        with self.assertRaises(ValidationError):
            gr.grape_gradient(problem, gr.ControlPulse.zeros(3, 4, 0.1))
        with self.assertRaises(ValidationError):
            gr.grape_optimize(problem, gr.ControlPulse.zeros(2, 4, 0.1), 0.0, 5, 0.9)

    def test_normalize_ensemble(self):
        ensemble = gr.normalize_ensemble(gr.RF_INHOMOGENEITY_ENSEMBLE)
        self.assertAlmostEqual(sum(w for _, w in ensemble), 1.0)
        self.assertEqual([s for s, _ in ensemble], [0.8, 0.9, 1.0, 1.1, 1.2])

    def test_random_pulse_is_seeded(self):
        a = gr.ControlPulse.random(2, 6, 0.1, 2.0, seed=5)
        b = gr.ControlPulse.random(2, 6, 0.1, 2.0, seed=5)
        self.assertTrue(np.array_equal(a.amplitudes, b.amplitudes))
        self.assertLessEqual(np.max(np.abs(a.amplitudes)), 2.0)

    def test_pulse_file(self):
        pulse = gr.ControlPulse.random(2, 6, 0.05, 1.0, seed=1)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'pulse.csv')
            sidecar = gr.write_pulse(path, pulse, {'phi': 0.5})
            self.assertTrue(os.path.isfile(sidecar))
            back = gr.read_pulse(path)
        self.assertEqual(back.steps, 6)
        self.assertTrue(np.allclose(back.amplitudes, pulse.amplitudes, rtol=1e-11))
        self.assertEqual(list(gr.pulse_frame(pulse).columns), ['step', 'dt_s', 'u1', 'u2'])
