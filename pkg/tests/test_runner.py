# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for runner.py, plotdata.py, tohtml.py and the command line
#

import glob
import json
import logging
import os
import tempfile
from datetime import datetime
from unittest import TestCase

import spinlab_workbench.tohtml as tohtml
from spinlab_workbench import logger
from spinlab_workbench import __version__
from spinlab_workbench.SpinLabWorkbench import main, EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC
from spinlab_workbench.experiment import hash_config, load_config
from spinlab_workbench.helper import ValidationError
from spinlab_workbench.plotdata import emit_plotdata
from spinlab_workbench.runner import run_experiment, load_record

logging.Logger.verbose1 = logging.Logger.debug
logging.Logger.verbose2 = logging.Logger.debug

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'config')
GATE_CHECK = os.path.join(CONFIG_DIR, 'gate-check.json')

SMALL_SWEEP = {
    'kind': 'dmf-sweep',
    'seed': 1,
    'parameters': {
        'h0_rad_s': 15.707963267948966, 'Jc_rad_s': 0.7853981633974483, 'n': 3, 'boundary': 'periodic',
        't2_s': 2.0, 'omega_min_rad_s': 8.4, 'omega_max_rad_s': 9.0, 'omega_step_rad_s': 0.2,
    },
}

SMALL_KICKS = {
    'kind': 'kick-decay',
    'seed': 2,
    'parameters': {'gamma_kicks_per_ms': 25, 'alpha_deg': 2.0, 'tc_ms': 22.4, 'M': 20, 'cycles': 3},
}


class RunExperimentTest(TestCase):

    def test_gate_check(self):
        with tempfile.TemporaryDirectory() as tmp:
            record = run_experiment(load_config(GATE_CHECK), tmp)
            self.assertEqual(record.summary['failed'], 0)
            self.assertGreater(record.summary['checks'], 10)
            self.assertTrue(os.path.isfile(os.path.join(tmp, 'checks.csv')))
            data, tables, _ = load_record(record.path)
            self.assertEqual(data['version'], __version__)
            self.assertEqual(data['config_hash'], hash_config(data['config']))
            self.assertEqual(data['tables']['checks']['file'], 'checks.csv')
            self.assertEqual(len(tables['checks']), record.summary['checks'])
            self.assertEqual(set(tables['checks']['result']), {'PASS'})
            self.assertIn('CNOT from a 209.4 Hz coupling delay', list(tables['checks']['name']))

    def test_gate_check_uses_coupling(self):
        config = {'kind': 'gate-check', 'parameters': {'j_hz': 140.0}}
        with tempfile.TemporaryDirectory() as tmp:
            record = run_experiment(config, tmp)
        names = [c.name for c in record.checks]
        self.assertEqual(names[-1], 'CNOT from a 140 Hz coupling delay')
        self.assertEqual(record.summary['failed'], 0)
        with tempfile.TemporaryDirectory() as tmp:
            without = run_experiment({'kind': 'gate-check', 'parameters': {}}, tmp)
        self.assertEqual(len(without.checks), len(record.checks) - 1)

    def test_seed_override_and_qpt(self):
        config = {'kind': 'qpt-run', 'seed': 1, 'parameters': {'channel': 'hadamard'}}
        with tempfile.TemporaryDirectory() as tmp:
            record = run_experiment(config, tmp, seed=9)
            self.assertEqual(record.config['seed'], 9)
            self.assertEqual(config['seed'], 1)
            self.assertAlmostEqual(record.summary['chi_EE'], 0.0)
            _, _, documents = load_record(record.path)
            self.assertEqual(documents['chi']['basis'], ['E', 'X', '-iY', 'Z'])
            self.assertEqual(documents['chi_pauli']['basis'], ['I', 'X', 'Y', 'Z'])
            self.assertAlmostEqual(documents['chi']['chi'][3][3][0], 0.5)

    def test_invalid_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ValidationError):
                run_experiment({'kind': 'qpt-run', 'parameters': {}}, tmp)
            self.assertFalse(os.path.exists(os.path.join(tmp, 'record.json')))

    def test_kick_decay_and_plotdata(self):
        with tempfile.TemporaryDirectory() as tmp:
            record = run_experiment(SMALL_KICKS, tmp)
            self.assertEqual(set(record.tables), {'decay', 'decay_nokick', 'coherence'})
            self.assertEqual(record.summary['kicks_per_cycle'], 560)
            self.assertEqual(len(record.tables['decay']), 4)
            self.assertAlmostEqual(record.tables['decay']['Mx_mean'][0], 1.0)
            data_path, scene_path = emit_plotdata([record], 'dec_mx', tmp)
            with open(scene_path) as f:
                scene = json.load(f)
            self.assertEqual([s['name'] for s in scene['series']], ['no kicks', 'kicks'])
            self.assertEqual(scene['data_file'], 'dec_mx.dat')

    def test_sweep_and_plotdata(self):
        with tempfile.TemporaryDirectory() as tmp:
            record = run_experiment(SMALL_SWEEP, tmp)
            frame = record.tables['sweep']
            self.assertEqual(list(frame['omega_rad_s']), [8.4, 8.6, 8.8, 9.0])
            self.assertEqual(len(record.summary['bessel_zero_omegas_rad_s']), 2)
            self.assertLess(record.summary['max_deviation_effective'], 0.08)
            self.assertGreater(record.summary['max_deviation_printed_three'], 0.08)
            self.assertTrue(any('printed three-spin form' in w.msg for w in record.warnings))
            data_path, _ = emit_plotdata(record.path, 'fr_Q', os.path.join(tmp, 'plots'))
            with open(data_path) as f:
                text = f.read()
            blocks = text.strip('\n').split('\n\n\n')
            self.assertEqual(len(blocks), 2)
            self.assertTrue(blocks[0].startswith('# 0: simulated'))
            self.assertEqual(len(blocks[1].splitlines()), 2 + 4)
            with self.assertRaises(ValidationError):
                emit_plotdata(record.path, 'fr_Z', tmp)
            with self.assertRaises(ValidationError):
                emit_plotdata(record.path, 'sd_new', tmp)
            with self.assertRaises(ValidationError):
                emit_plotdata(os.path.join(tmp, 'missing.json'), 'fr_Q', tmp)


class RunLogTest(TestCase):

    def test_warnings_recorded(self):
        config = {'kind': 'kick-decay',
                  'parameters': {'gamma_kicks_per_ms': 25, 'alpha_deg': 1.0, 'tc_ms': 22.41, 'M': 5, 'cycles': 2}}
        with tempfile.TemporaryDirectory() as tmp:
            record = run_experiment(config, tmp)
            rounded = [w for w in record.warnings if 'rounded' in w.msg]
            self.assertTrue(rounded)
            self.assertEqual(rounded[0].level, 'WARNING')
            self.assertEqual(rounded[0].context, 'kick-decay')
            with open(record.path) as f:
                data = json.load(f)
            self.assertTrue(any('rounded' in w['msg'] for w in data['warnings']))

    def test_run_log_file(self):
        my_logger = logging.getLogger('spinlab')
        with tempfile.TemporaryDirectory() as tmp:
            handler, path = logger.open_run_log(os.path.join(tmp, 'logs'), datetime(2025, 3, 4, 5, 6, 7))
            try:
                my_logger.push_context('dd-compare')
                my_logger.warning('endpoint below noise')
                my_logger.pop_context()
                my_logger.info('plain line', extra={'result': 'PASS'})
            finally:
                logger.close_run_log(handler)
            self.assertEqual(os.path.basename(path), 'SpinLabLog_03_04_2025_050607.txt')
            with open(path) as f:
                lines = f.read().splitlines()
            self.assertIn('WARNING - endpoint below noise ...  at dd-compare', lines)
            self.assertIn('INFO - plain line ... PASS ', lines)
        logger.warning_capture.drain()


class HtmlReportTest(TestCase):

    def test_success_color(self):
        self.assertIn('class="fail center"', tohtml.applySuccessColor(3, 'fail'))
        self.assertIn('class="pass center"', tohtml.applySuccessColor(3, 'PASS'))
        self.assertEqual(tohtml.applySuccessColor(0, '<x>'), '<td>&lt;x&gt;</td>')

    def test_render_record(self):
        with tempfile.TemporaryDirectory() as tmp:
            record = run_experiment(load_config(GATE_CHECK), tmp)
            now = datetime.now()
            page = tohtml.renderHtml(record, __version__, now, now, {'threads': '1'})
            self.assertTrue(page.startswith('<html>'))
            self.assertIn('gate-check', page)
            self.assertIn('Pass: {}'.format(record.summary['checks']), page)
            self.assertIn('No errors', page)


class CommandLineTest(TestCase):

    def test_run_with_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, 'out')
            status, path, message = main(['--logdir', os.path.join(tmp, 'logs'), '--output_dir', out,
                                          '--html_report', 'run', GATE_CHECK])
            self.assertEqual(status, EXIT_OK, message)
            self.assertEqual(path, os.path.join(out, 'record.json'))
            self.assertEqual(len(glob.glob(os.path.join(out, 'SpinLabReport_*.html'))), 1)
            self.assertEqual(len(glob.glob(os.path.join(tmp, 'logs', 'SpinLabLog_*.txt'))), 1)
            self.assertEqual(len(glob.glob(os.path.join(tmp, 'logs', 'ConfigFile_*.ini'))), 1)

    def test_validate_only(self):
        with tempfile.TemporaryDirectory() as tmp:
            status, path, _ = main(['--logdir', tmp, 'run', GATE_CHECK, '--validate-only'])
            self.assertEqual(status, EXIT_OK)
            self.assertIsNone(path)
            bad = os.path.join(tmp, 'bad.json')
            with open(bad, 'w') as f:
                json.dump({'kind': 'gate-check'}, f)
            status, _, message = main(['--logdir', tmp, 'run', bad, '--validate-only'])
            self.assertEqual(status, EXIT_VALIDATION)
            self.assertEqual(message, 'Validation Error')

    def test_no_command(self):
        with tempfile.TemporaryDirectory() as tmp:
            status, _, _ = main(['--logdir', tmp])
            self.assertEqual(status, EXIT_VALIDATION)

    def test_selftest(self):
        with tempfile.TemporaryDirectory() as tmp:
            status, path, _ = main(['--logdir', tmp, '--output_dir', tmp, 'selftest', '--suite', 'tomography'])
            self.assertEqual(status, EXIT_OK)
            self.assertEqual(os.path.basename(path), 'selftest.csv')
            status, _, _ = main(['--logdir', tmp, 'selftest', '--suite', 'everything'])
            self.assertEqual(status, EXIT_VALIDATION)
            status, _, exit_string = main(['--logdir', tmp, '--threads', '4', 'selftest', '--suite', 'dmf'])
            self.assertEqual(status, EXIT_NUMERIC)
            self.assertEqual(exit_string, 'Checks failed')

    def test_plotdata_command(self):
        with tempfile.TemporaryDirectory() as tmp:
            record = run_experiment({'kind': 'qpt-run', 'parameters': {'channel': 'dephasing'}}, tmp)
            status, path, _ = main(['--logdir', tmp, 'plotdata', record.path, '--figure', 'dec_tomo'])
            self.assertEqual(status, EXIT_OK)
            self.assertEqual(path, os.path.join(tmp, 'dec_tomo.dat'))
            status, _, _ = main(['--logdir', tmp, 'plotdata', record.path, '--figure', 'fr_Q'])
            self.assertEqual(status, EXIT_VALIDATION)
