# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for dmf.py
#

import logging
import math
from unittest import TestCase

import numpy as np

import spinlab_workbench.dmf as dmf
from spinlab_workbench.grape import RF_INHOMOGENEITY_ENSEMBLE
from spinlab_workbench.helper import ValidationError, ConvergenceError, stream
from spinlab_workbench.operators import is_unitary

logging.Logger.verbose1 = logging.Logger.debug
logging.Logger.verbose2 = logging.Logger.debug

H0 = 5 * math.pi
JC = H0 / 20


def ideal(omega, boundary='open', cycles=30):
    p = dmf.DriveParams(H0, JC, omega, 3, boundary)
    return dmf.simulate_dmf(p, dmf.dmf_initial_state(3, math.pi / 2), cycles)


class DriveTest(TestCase):

    def test_initial_state_magnetization(self):
        p = dmf.DriveParams(H0, JC, 8.4)
        s = dmf.simulate_dmf(p, dmf.dmf_initial_state(3, math.pi / 2), 0)
        self.assertAlmostEqual(s.mx[0], 1.0, places=12)
        s = dmf.simulate_dmf(p, dmf.dmf_initial_state(3, math.pi / 6), 0)
        self.assertAlmostEqual(s.mx[0], 0.5, places=12)

    def test_density_normalization(self):
        # all three spins along +x as a trace-one state
        plus = np.full((2, 2), 0.5, dtype=complex)
        rho = np.kron(np.kron(plus, plus), plus)
        s = dmf.simulate_dmf(dmf.DriveParams(H0, JC, 8.4), rho, 0)
        self.assertAlmostEqual(s.mx[0], 1.0, places=12)

    def test_cycle_propagator(self):
        p = dmf.DriveParams(H0, JC, 8.4)
        u11 = dmf.dmf_cycle_propagator(p, 11)
        self.assertTrue(is_unitary(u11))
        u22 = dmf.dmf_cycle_propagator(p, 22)
        u44 = dmf.dmf_cycle_propagator(p, 44)
        self.assertLess(np.linalg.norm(u44 - u22), np.linalg.norm(u22 - u11))
        with self.assertRaises(ValidationError):
            dmf.dmf_cycle_propagator(p, 0)

    def test_bonds(self):
        self.assertEqual(dmf.DriveParams(H0, JC, 1.0, 3).bonds(), [(0, 1), (1, 2)])
        self.assertEqual(dmf.DriveParams(H0, JC, 1.0, 3, 'periodic').bonds(), [(0, 1), (1, 2), (2, 0)])
        self.assertEqual(dmf.DriveParams(H0, JC, 1.0, 2, 'periodic').bonds(), [(0, 1)])

    def test_drive_validation(self):
        with self.assertRaises(ValidationError):
            dmf.DriveParams(H0, JC, 0.0)
        with self.assertRaises(ValidationError):
            dmf.DriveParams(H0, JC, 1.0, 3, 'helical')
        with self.assertRaises(ValidationError):
            dmf.DriveParams(H0, JC, 1.0, 5)
        with self.assertRaises(ValidationError):
            dmf.simulate_dmf(dmf.DriveParams(H0, JC, 1.0, 2), dmf.dmf_initial_state(3, 0.0))

    def test_slow_drive_warns(self):
        p = dmf.DriveParams(0.1, 1.0, 1.0)
        with self.assertLogs('spinlab', level='WARNING'):
            dmf.simulate_dmf(p, dmf.dmf_initial_state(3, math.pi / 2), 2)

    def test_freezing(self):
        s = ideal(5.61)
        self.assertGreaterEqual(s.mx.min(), 0.95)
        self.assertEqual(s.cycles, 30)

    def test_freezing_from_tilted_state(self):
        p = dmf.DriveParams(H0, JC, 5.61)
        s = dmf.simulate_dmf(p, dmf.dmf_initial_state(3, math.pi / 6))
        self.assertAlmostEqual(s.mx[0], 0.5)
        normalized = s.mx / s.mx[0]
        self.assertGreaterEqual(normalized.min(), 0.9)

    def test_no_freezing(self):
        self.assertLess(ideal(24.54).mx.min(), 0.5)

    def test_q_range(self):
        for omega in (4.0, 7.3, 12.0, 30.0):
            q = dmf.q_from_series(ideal(omega))
            self.assertGreaterEqual(q, -1.0)
            self.assertLessEqual(q, 1.0)


class ClosedFormTest(TestCase):

    def test_q_at_bessel_zero(self):
        for variant in dmf.Q_VARIANTS:
            self.assertAlmostEqual(dmf.q_closed_form(variant, 2.404825557695773 / 2, 1.0), 1.0, places=6)

    def test_q_at_j0_one(self):
        # omega large: J0 -> 1 and every three-spin form gives 1/2
        self.assertAlmostEqual(dmf.q_closed_form('three', 1e-9, 1.0), 0.5, places=6)
        self.assertAlmostEqual(dmf.q_closed_form('three-ring', 1e-9, 1.0), 0.5, places=6)
        self.assertAlmostEqual(dmf.q_closed_form('infinite', 1e-9, 1.0), 0.5, places=6)

    def test_slices_shift_the_zero(self):
        omega = 2 * H0 * float(np.sinc(1 / 11)) / 5.520078110286311
        self.assertAlmostEqual(omega, 5.61, delta=0.01)
        self.assertGreater(dmf.q_closed_form('three-ring', H0, omega, 11), 0.9999)

    def test_q_errors(self):
        with self.assertRaises(ValidationError):
            dmf.q_closed_form('five', H0, 1.0)
        with self.assertRaises(ValidationError):
            dmf.q_closed_form('three', H0, 0.0)

    def test_ring_agrees_with_effective_form(self):
        ring = dmf.SweepSettings(H0, JC, 3, 'periodic')
        omegas = dmf.omega_grid(4.0, 30.0, 0.2)
        self.assertEqual(len(omegas), 131)
        deviation, omega = dmf.closed_form_deviation(ring, omegas, 'three-ring', threads=4)
        self.assertLessEqual(deviation, 0.08, msg='omega = {}'.format(omega))

    def test_open_chain_against_printed_form(self):
        chain = dmf.SweepSettings(H0, JC, 3, 'open')
        deviation, omega = dmf.closed_form_deviation(chain, dmf.omega_grid(4.0, 30.0, 0.2), 'three', threads=4)
        # the exact chain leaves the printed three-spin form well outside 0.08
        self.assertGreater(deviation, 0.08)
        self.assertAlmostEqual(deviation, abs(dmf.q_from_series(ideal(omega)) - dmf.q_closed_form('three', H0, omega)))

    def test_omega_grid(self):
        self.assertEqual(dmf.omega_grid(8.4, 9.0, 0.2), [8.4, 8.6, 8.8, 9.0])
        self.assertEqual(dmf.omega_grid(5.0, 5.0, 0.2), [5.0])
        with self.assertRaises(ValidationError):
            dmf.omega_grid(9.0, 8.4, 0.2)
        with self.assertRaises(ValidationError):
            dmf.omega_grid(4.0, 30.0, 0.0)
        with self.assertRaises(ValidationError):
            dmf.closed_form_deviation(dmf.SweepSettings(H0, JC), [], 'three')

    def test_bessel_zero_frequencies(self):
        low, high = dmf.bessel_zero_frequencies(H0)
        self.assertAlmostEqual(low, 5.69, delta=0.01)
        self.assertAlmostEqual(high, 13.06, delta=0.01)


class SweepTest(TestCase):

    def settings(self):
        return dmf.SweepSettings(H0, JC, 3, 'periodic')

    def test_sweep_columns_and_peaks(self):
        omegas = [round(4.8 + 0.2 * i, 10) for i in range(57)]
        frame = dmf.dmf_sweep(self.settings(), omegas)
        self.assertEqual(list(frame.columns), dmf.SWEEP_COLUMNS)
        self.assertEqual(len(frame), 57)
        self.assertTrue(frame['omega_rad_s'].is_monotonic_increasing)
        low, high = dmf.freezing_peaks(frame)
        self.assertAlmostEqual(low, 5.69, delta=0.4)
        self.assertAlmostEqual(high, 13.06, delta=0.4)

    def test_open_chain_peaks(self):
        omegas = dmf.omega_grid(4.0, 30.0, 0.2)
        frame = dmf.dmf_sweep(dmf.SweepSettings(H0, JC, 3, 'open'), omegas, threads=4)
        low, high = dmf.freezing_peaks(frame)
        self.assertAlmostEqual(low, 5.69, delta=0.4)
        self.assertAlmostEqual(high, 13.06, delta=0.4)

    def test_sweep_threads_identical(self):
        omegas = [9.0, 6.0, 12.5, 7.2]
        one = dmf.dmf_sweep(self.settings(), omegas, threads=1)
        four = dmf.dmf_sweep(self.settings(), omegas, threads=4)
        self.assertTrue(one.equals(four))
        self.assertEqual(list(one['omega_rad_s']), [6.0, 7.2, 9.0, 12.5])

    def test_noisy_lowers_q(self):
        p = dmf.DriveParams(H0, JC, 8.4)
        rho0 = dmf.dmf_initial_state(3, math.pi / 2)
        q_ideal = dmf.q_from_series(dmf.simulate_dmf(p, rho0))
        noisy = dmf.noisy_simulate(p, rho0, t2_s=2.0, rf_ensemble=RF_INHOMOGENEITY_ENSEMBLE)
        self.assertLess(dmf.q_from_series(noisy), q_ideal)
        self.assertAlmostEqual(noisy.mx[0], 1.0, places=12)
        with self.assertRaises(ValidationError):
            dmf.noisy_simulate(p, rho0, t2_s=0.0)

    def test_noisy_without_noise_is_ideal(self):
        p = dmf.DriveParams(H0, JC, 8.4)
        rho0 = dmf.dmf_initial_state(3, math.pi / 2)
        self.assertTrue(np.allclose(dmf.noisy_simulate(p, rho0).mx, dmf.simulate_dmf(p, rho0).mx))

    def test_series_frame(self):
        raw, noisy, corrected, _ = dmf.series_point(dmf.SweepSettings(H0, JC, t2_s=3.0), 8.4)
        frame = dmf.series_frame(raw, noisy, corrected)
        self.assertEqual(list(frame.columns), dmf.SERIES_COLUMNS)
        self.assertEqual(len(frame), 31)
        self.assertAlmostEqual(frame['t_s'].iloc[1], 2 * math.pi / 8.4)


class DecayFitTest(TestCase):
    TRUE = (0.3, 0.4, 0.3, 2.0, 5.0)

    def series(self, t, noise=0.0, seed=0):
        mx = dmf.decay_model(self.TRUE, t)
        if noise:
            mx = mx + stream(seed, 0).normal(0.0, noise, size=t.shape)
        return dmf.MagnetizationSeries(t, mx, t[1] - t[0])

    def test_noiseless_fit(self):
        s = self.series(np.linspace(0, 15, 61))
        init = dmf.DecayFit(0.25, 0.35, 0.25, 1.9, 4.0)
        fit = dmf.decay_fit(s, init)
        self.assertTrue(np.allclose(fit.params, self.TRUE, atol=1e-6))
        self.assertTrue(fit.converged)
        self.assertFalse(fit.degenerate)
        self.assertLess(fit.residual, 1e-8)

    def test_noisy_fit(self):
        s = self.series(np.linspace(0, 20, 201), noise=0.01, seed=4)
        fit = dmf.decay_fit(s, dmf.DecayFit(0.25, 0.35, 0.25, 1.9, 4.0))
        self.assertAlmostEqual(fit.alpha, 0.3, delta=0.02)
        self.assertAlmostEqual(fit.c, 2.0, delta=0.05)
        self.assertAlmostEqual(fit.t_d, 5.0, delta=0.5)

    def test_too_few_samples(self):
        with self.assertRaises(ValidationError):
            dmf.decay_fit(self.series(np.linspace(0, 1, 5)))

    def test_pure_exponential_is_degenerate(self):
        t = np.linspace(0, 10, 41)
        s = dmf.MagnetizationSeries(t, 0.2 + 0.8 * np.exp(-t / 3.0), 0.25)
        try:
            fit = dmf.decay_fit(s, dmf.DecayFit(0.2, 0.8, 0.0, 1.0, 3.0))
        except ConvergenceError as e:
            fit = e.best
        self.assertTrue(fit.degenerate)

    def test_guess_decay(self):
        s = self.series(np.linspace(0, 15, 61))
        guess = dmf.guess_decay(s)
        self.assertAlmostEqual(guess.alpha, float(np.mean(s.mx[-15:])))
        self.assertAlmostEqual(guess.t_d, 15.0)

    def test_inverse_decay_correct(self):
        t = np.linspace(0, 4, 17)
        ideal_mx = 0.5 + 0.5 * np.cos(3 * t)
        f = dmf.DecayFit(0.1, 0.0, 0.0, 0.0, 2.0)
        decayed = f.alpha + (ideal_mx - f.alpha) * np.exp(-t / f.t_d)
        corrected = dmf.inverse_decay_correct(dmf.MagnetizationSeries(t, decayed, 0.25), f)
        self.assertTrue(np.allclose(corrected.mx, ideal_mx))
        self.assertEqual(corrected.flagged, [])

    def test_inverse_decay_overflow(self):
        t = np.linspace(0, 10, 11)
        f = dmf.DecayFit(0.0, 1.0, 0.0, 0.0, 0.5)
        with self.assertLogs('spinlab', level='WARNING'):
            corrected = dmf.inverse_decay_correct(dmf.MagnetizationSeries(t, np.ones(11), 1.0), f)
        self.assertEqual(corrected.flagged, [7, 8, 9, 10])
        self.assertTrue(np.all(np.isnan(corrected.mx[7:])))
        self.assertAlmostEqual(dmf.q_from_series(corrected), float(np.mean(np.exp(t[:7] / 0.5))))

    def test_decay_fit_validation(self):
        with self.assertRaises(ValidationError):
            dmf.DecayFit(0, 0, 0, 0, 0.0)
        with self.assertRaises(ValidationError):
            dmf.MagnetizationSeries([0, 1], [1.0], 1.0)
        with self.assertRaises(ValidationError):
            dmf.q_from_series(dmf.MagnetizationSeries([], [], 1.0))

    def test_corrected_series_short(self):
        s = dmf.MagnetizationSeries([0, 1, 2], [1.0, 0.8, 0.7], 1.0)
        corrected, fit = dmf.corrected_series(s)
        self.assertIsNone(fit)
        self.assertTrue(np.array_equal(corrected.mx, s.mx))
