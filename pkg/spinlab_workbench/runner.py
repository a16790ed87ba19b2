# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Experiment dispatch and ExperimentRecord assembly.

Each runner takes (parameters, seed, threads) and returns a RunOutput of
named result tables plus summary values and side files; run_experiment
writes the tables as CSV and the record as record.json.
"""

import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict

import numpy as np
import pandas as pd

from spinlab_workbench import __version__
from spinlab_workbench import dmf, gates, grape, decoherence, tomography, oracles
from spinlab_workbench.experiment import validate_config, hash_config
from spinlab_workbench.helper import deg_to_rad, ms_to_s
from spinlab_workbench.logger import warning_capture
from spinlab_workbench.operators import X, Y, Z
from spinlab_workbench.states import named_state

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

CSV_FLOAT_FORMAT = '%.12e'
RECORD_NAME = 'record.json'


@dataclass
class RunOutput:
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    summary: Dict = field(default_factory=dict)
    documents: Dict[str, object] = field(default_factory=dict)
    checks: list = field(default_factory=list)


@dataclass
class ExperimentRecord:
    config: Dict
    version: str
    config_hash: str
    started: str
    wall_time_s: float
    tables: Dict[str, pd.DataFrame]
    summary: Dict
    files: Dict[str, str]
    warnings: list
    checks: list = field(default_factory=list)
    path: str = None

    def to_dict(self):
        return {
            'config': self.config,
            'version': self.version,
            'config_hash': self.config_hash,
            'started': self.started,
            'wall_time_s': self.wall_time_s,
            'tables': {name: {'file': self.files[name], 'columns': list(frame.columns), 'rows': len(frame)}
                       for name, frame in self.tables.items()},
            'files': self.files,
            'summary': self.summary,
            'warnings': [vars(w) for w in self.warnings],
            'checks': [c.as_row() for c in self.checks],
        }


def load_record(path):
    """Reads record.json and the CSV tables it lists"""
    with open(path) as f:
        data = json.load(f)
    base = os.path.dirname(os.path.abspath(path))
    tables = {name: pd.read_csv(os.path.join(base, entry['file'])) for name, entry in data.get('tables', {}).items()}
    documents = {}
    for name, file_name in data.get('files', {}).items():
        if file_name.endswith('.json') and name not in tables:
            with open(os.path.join(base, file_name)) as f:
                documents[name] = json.load(f)
    return data, tables, documents


def finite_or_none(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def rf_ensemble(spec):
    if spec is None or spec == 'none':
        return ((1.0, 1.0),)
    if spec == 'measured':
        return grape.RF_INHOMOGENEITY_ENSEMBLE
    return tuple((entry['scale'], entry['weight']) for entry in spec)


def sweep_settings(params):
    return dmf.SweepSettings(
        h0=params['h0_rad_s'],
        j_coupling=params['Jc_rad_s'],
        n=params.get('n', 3),
        boundary=params.get('boundary', 'open'),
        cycles=params.get('cycles', dmf.DEFAULT_CYCLES),
        slices=params.get('slices', dmf.DEFAULT_SLICES),
        theta=deg_to_rad(params.get('theta_deg', 90.0)),
        t2_s=params.get('t2_s', math.inf),
        rf_ensemble=rf_ensemble(params.get('rf_ensemble')),
    )


def run_dmf_sweep(params, seed, threads):
    settings = sweep_settings(params)
    omegas = dmf.omega_grid(params['omega_min_rad_s'], params['omega_max_rad_s'], params['omega_step_rad_s'])
    frame = dmf.dmf_sweep(settings, omegas, threads)
    peaks = dmf.freezing_peaks(frame)
    predicted = dmf.bessel_zero_frequencies(settings.h0)
    deviation = float(np.max(np.abs(frame['Q_sim'] - frame['Q3_effective'])))
    my_logger.info('Freezing peaks at {} rad/s (J0 zeros predict {})'.format(
        ', '.join('{:.2f}'.format(p) for p in peaks), ', '.join('{:.2f}'.format(p) for p in predicted)))
    my_logger.info('Largest |Q_sim - Q3_effective| on the grid: {:.4f}'.format(deviation))
    printed = np.abs(frame['Q_sim'] - frame['Q3_closed'])
    if printed.max() > oracles.Q3_TOLERANCE:
        my_logger.warning('Q_sim departs from the printed three-spin form by {:.4f} at omega = {:.2f} rad/s'
                          .format(printed.max(), frame['omega_rad_s'][printed.idxmax()]))
    return RunOutput({'sweep': frame}, {
        'freezing_peaks_rad_s': [finite_or_none(p) for p in peaks],
        'bessel_zero_omegas_rad_s': predicted,
        'max_deviation_effective': deviation,
        'max_deviation_printed_three': float(printed.max()),
    })


def run_dmf_series(params, seed, threads):
    settings = sweep_settings(params)
    raw, noisy, corrected, fit = dmf.series_point(settings, params['omega_rad_s'])
    summary = {'Q_raw': dmf.q_from_series(raw), 'Q_noisy': dmf.q_from_series(noisy),
               'Q_corrected': dmf.q_from_series(corrected), 'flagged_samples': [int(i) for i in corrected.flagged]}
    if fit is not None:
        summary['decay_fit'] = {'alpha': fit.alpha, 'beta': fit.beta, 'gamma': fit.gamma, 'c_rad_s': fit.c,
                                't_d_s': finite_or_none(fit.t_d), 'residual': fit.residual,
                                'converged': fit.converged, 'degenerate': fit.degenerate}
    return RunOutput({'series': dmf.series_frame(raw, noisy, corrected)}, summary)


def run_grape_opt(params, seed, threads):
    axis = params.get('target_axis', 'x')
    angle = deg_to_rad(params.get('target_angle_deg', 90.0))
    rho0 = Z / 2
    rotation = gates.rotation(gates.RotationSpec.about(axis, angle))
    target = rotation @ rho0 @ rotation.conj().T
    drift = params.get('drift_offset_rad_s', 0.0) * Z / 2
    problem = grape.GrapeProblem(drift, [X / 2, Y / 2], rho0, target, rf_ensemble(params.get('rf_ensemble', 'measured')))
    steps, dt = params['steps'], params['dt_s']
    if params.get('init', 'zero') == 'random':
        init = grape.ControlPulse.random(2, steps, dt, params.get('u_max_rad_s', 1.0), seed)
    else:
        init = grape.ControlPulse.zeros(2, steps, dt)
    outcome = grape.grape_optimize(problem, init, params.get('step_size', 30.0), params.get('max_iter', 500),
                                   params.get('target_phi', 0.99), params.get('backtracking', True), threads=threads)
    history = pd.DataFrame({'iteration': np.arange(len(outcome.history)), 'phi': outcome.history})
    metadata = {'phi': outcome.history[-1], 'reached': outcome.reached, 'iterations': outcome.iterations,
                'ensemble': [list(e) for e in problem.ensemble], 'problem_hash': hash_config(params)}
    return RunOutput({'pulse': grape.pulse_frame(outcome.pulse), 'history': history}, metadata,
                     {'pulse_meta': metadata})


def kick_model(params):
    return decoherence.SystemEnvModel(
        j_hz=params.get('j_hz', decoherence.MOLECULE_J_HZ),
        nu_s_hz=params.get('nu_s_hz', 0.0),
        nu_e_hz=params.get('nu_e_hz', 0.0),
        rho_s0=named_state(params.get('initial_state', '+')),
        t1_s=params.get('t1_s', decoherence.MOLECULE_T1_S['1H']),
        t2_s=params.get('t2_s', decoherence.MOLECULE_T2_S['1H']),
    )


def kick_schedule(params, seed, alpha_deg=None):
    return decoherence.KickSchedule(
        params['gamma_kicks_per_ms'],
        deg_to_rad(params['alpha_deg'] if alpha_deg is None else alpha_deg),
        ms_to_s(params['tc_ms']),
        params.get('angle_mode', 'symmetric'),
        params.get('phase_mode', 'fixed-y'),
        seed,
    )


def run_kick_decay(params, seed, threads):
    model = kick_model(params)
    sched = kick_schedule(params, seed)
    baseline = kick_schedule(params, seed, alpha_deg=0.0)
    m, cycles = params.get('M', 2000), params.get('cycles', 20)
    kicked = decoherence.ensemble_coherence(model, sched, m, cycles, threads=threads)
    quiet = decoherence.ensemble_coherence(model, baseline, m, cycles, threads=threads)
    t2_kick = decoherence.fit_t2(kicked.t_s, kicked.line)
    t2_quiet = decoherence.fit_t2(quiet.t_s, quiet.line)
    coherence = pd.DataFrame({
        't_s': kicked.t_s,
        'coherence_abs': np.abs(kicked.coherence),
        'coherence_stderr': kicked.coherence_stderr,
        'Mx_raw': kicked.mx,
        'D_abs': np.abs(decoherence.superop_series(model, sched, cycles)) * np.exp(-kicked.t_s / model.t2_s),
    })
    my_logger.info('T2 with kicks {:.4g} s, without {:.4g} s'.format(t2_kick, t2_quiet))
    return RunOutput({'decay': kicked.frame(), 'decay_nokick': quiet.frame(), 'coherence': coherence},
                     {'T2_s': finite_or_none(t2_kick), 'T2_nokick_s': finite_or_none(t2_quiet),
                      'kicks_per_cycle': sched.k, 'delta_s': sched.delta_s})


def run_dd_compare(params, seed, threads):
    model = kick_model(params)
    sched = kick_schedule(params, seed)
    m, cycles = params.get('M', 2000), params.get('cycles', 20)
    n_pulses = params.get('dd_pulses', 7)
    tables, documents, summary = {}, {}, {}
    for kind in params.get('dd_kinds', ['none', 'cpmg', 'udd']):
        dd = None if kind == 'none' else decoherence.dd_schedule(kind, n_pulses, sched.t_c_s)
        series = decoherence.ensemble_coherence(model, sched, m, cycles, dd, threads)
        tables['decay_{}'.format(kind)] = series.frame()
        if dd is not None:
            documents['schedule_{}'.format(kind)] = dd.to_dict()
        summary[kind] = {'endpoint': float(series.line[-1]), 'endpoint_stderr': float(series.line_stderr[-1]),
                         'T2_s': finite_or_none(decoherence.fit_t2(series.t_s, series.line))}
        my_logger.info('{}: endpoint line intensity {:.4f} +- {:.4f}'.format(
            kind, series.line[-1], series.line_stderr[-1]))
    return RunOutput(tables, summary, documents)


def spectroscopy_bath(params, seed, threads):
    bath = params['bath']
    if bath == 'constant':
        return tomography.ConstantT2Bath(params.get('t2_s', decoherence.MOLECULE_T2_S['1H']))
    if bath == 'synthetic':
        s0, omega_c = params.get('s0_per_s', 1.0), params.get('omega_c_rad_s', 1000.0)
        return tomography.SyntheticBath(lambda w: s0 / (1 + (w / omega_c) ** 2), params.get('noise_sigma', 0.0), seed)
    model = kick_model(params)
    return tomography.KickBath(model, params.get('gamma_kicks_per_ms', 25.0), deg_to_rad(params.get('alpha_deg', 2.0)),
                               params.get('cycles', 8), params.get('angle_mode', 'symmetric'),
                               params.get('phase_mode', 'fixed-y'), seed, threads)


def run_ns_scan(params, seed, threads):
    bath = spectroscopy_bath(params, seed, threads)
    taus = [ms_to_s(tau) for tau in params['tau_ms']]
    cpmg_n, m = params.get('cpmg_n', 7), params.get('M', 300)
    spectrum = tomography.noise_spectroscopy(bath, taus, cpmg_n, m, threads)
    tables = {'spectrum': spectrum.frame()}
    summary = {'points': len(spectrum.points), 'omitted': len(taus) - len(spectrum.points)}
    if isinstance(bath, tomography.KickBath):
        baseline = tomography.noise_spectroscopy(bath.baseline(), taus, cpmg_n, m, threads)
        tables['spectrum_baseline'] = baseline.frame()
        summary['baseline_points'] = len(baseline.points)
        below = spectrum.below(baseline)
        summary['below_baseline'] = len(below)
        if below:
            my_logger.warning('Kick spectrum does not exceed the intrinsic baseline at omega = {}'
                              .format(', '.join('{:.4g}'.format(w) for w in below)))
    return RunOutput(tables, summary)


def run_qpt(params, seed, threads):
    name = params['channel']
    if name == 'kick':
        model = kick_model(params)
        sched = kick_schedule(dict({'gamma_kicks_per_ms': 25.0, 'alpha_deg': 1.0, 'tc_ms': 22.4}, **params), seed)
        kind = params.get('dd_kind', 'none')
        dd = None if kind == 'none' else decoherence.dd_schedule(kind, params.get('dd_pulses', 7), sched.t_c_s)
        channel = decoherence.kick_channel(model, sched, params.get('cycles', 10), params.get('M', 1000), dd, threads)
    else:
        channel = tomography.named_channel(name)
    chi = tomography.qpt_single(channel)
    summary = {'chi_EE': float(chi['E', 'E'].real), 'chi_ZZ': float(chi['Z', 'Z'].real),
               'psd_distance': chi.psd_distance(), 'completeness_error': chi.completeness_error()}
    return RunOutput({}, summary, {'chi': chi.to_dict(), 'chi_pauli': tomography.chi_to_pauli(chi).to_dict()})


def run_gate_check(params, seed, threads):
    checks = [oracles.log_check(c) for c in oracles.exact_identity_checks()]
    if 'sequence' in params:
        n = params.get('n_qubits', 2)
        seq = gates.sequence_from_list(params['sequence'])
        target = gates.standard_gate(params.get('target_gate', 'CNOT'))
        fidelity = gates.gate_fidelity(gates.compile_sequence(seq, n), target)
        checks.append(oracles.log_check(oracles.at_least('configured sequence fidelity', 1 - 1e-9, fidelity)))
    if 'j_hz' in params:
        j_hz = params['j_hz']
        fidelity = gates.gate_fidelity(gates.compile_sequence(gates.cnot_sequence(j_hz), 2), gates.standard_gate('CNOT'))
        name = 'CNOT from a {:g} Hz coupling delay'.format(j_hz)
        checks.append(oracles.log_check(oracles.at_least(name, 1 - 1e-9, fidelity)))
    frame = pd.DataFrame([c.as_row() for c in checks], columns=['name', 'expected', 'actual', 'result'])
    failed = int((frame['result'] == 'FAIL').sum())
    return RunOutput({'checks': frame}, {'checks': len(checks), 'failed': failed}, checks=checks)


RUNNERS = {
    'dmf-sweep': run_dmf_sweep,
    'dmf-series': run_dmf_series,
    'grape-opt': run_grape_opt,
    'kick-decay': run_kick_decay,
    'dd-compare': run_dd_compare,
    'ns-scan': run_ns_scan,
    'qpt-run': run_qpt,
    'gate-check': run_gate_check,
}

TABLE_FILES = {'pulse': 'pulse.csv', 'pulse_meta': 'pulse.json'}


def write_outputs(output, output_dir):
    files = {}
    for name, frame in output.tables.items():
        file_name = TABLE_FILES.get(name, '{}.csv'.format(name))
        frame.to_csv(os.path.join(output_dir, file_name), index=False, float_format=CSV_FLOAT_FORMAT)
        files[name] = file_name
    for name, document in output.documents.items():
        file_name = TABLE_FILES.get(name, '{}.json'.format(name))
        with open(os.path.join(output_dir, file_name), 'w') as f:
            json.dump(document, f, indent=2, sort_keys=True)
        files[name] = file_name
    return files


def run_experiment(config, output_dir=None, threads=1, seed=None):
    """
    Validates, runs and records one experiment.

    :param config: experiment config dict
    :param output_dir: overrides config output_dir
    :param seed: overrides config seed
    """
    config = validate_config(config)
    if seed is not None:
        config['seed'] = int(seed)
    config.setdefault('seed', 0)
    output_dir = output_dir or config.get('output_dir') or os.path.join('results', config['kind'])
    os.makedirs(output_dir, exist_ok=True)

    start = datetime.now()
    tick = time.perf_counter()
    warning_capture.drain()
    my_logger.info('Running {} (config md5 {}, seed {})'.format(config['kind'], hash_config(config), config['seed']))
    my_logger.push_context(config['kind'])
    try:
        output = RUNNERS[config['kind']](config['parameters'], config['seed'], threads)
    finally:
        my_logger.pop_context()
    files = write_outputs(output, output_dir)

    record = ExperimentRecord(config, __version__, hash_config(config), start.isoformat(timespec='seconds'),
                              time.perf_counter() - tick, output.tables, output.summary, files,
                              warning_capture.collect(), output.checks)
    record.path = os.path.join(output_dir, RECORD_NAME)
    with open(record.path, 'w') as f:
        json.dump(record.to_dict(), f, indent=2, sort_keys=True, default=str)
    my_logger.info('Wrote {} with {} table(s) in {:.1f} s'.format(record.path, len(output.tables), record.wall_time_s))
    return record
