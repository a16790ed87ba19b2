# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Experiment configuration: JSON schema, loading, validation and hashing.

Every physical key carries its unit as a suffix (_rad_s, _hz, _s, _ms, _deg).
"""

import copy
import json
import logging
from hashlib import md5

import jsonschema

from spinlab_workbench.helper import ValidationError

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

KINDS = ('dmf-sweep', 'dmf-series', 'grape-opt', 'kick-decay', 'dd-compare', 'ns-scan', 'qpt-run', 'gate-check')

positive = {'type': 'number', 'exclusiveMinimum': 0}
non_negative = {'type': 'number', 'minimum': 0}
count = {'type': 'integer', 'minimum': 1}
qubits = {'type': 'integer', 'minimum': 1, 'maximum': 4}
ensemble = {
    'oneOf': [
        {'type': 'string', 'enum': ['none', 'measured']},
        {'type': 'array', 'minItems': 1, 'items': {
            'type': 'object', 'additionalProperties': False, 'required': ['scale', 'weight'],
            'properties': {'scale': positive, 'weight': non_negative}}},
    ]
}

drive = {
    'h0_rad_s': {'type': 'number'},
    'Jc_rad_s': {'type': 'number'},
    'n': qubits,
    'cycles': count,
    'slices': count,
    'boundary': {'type': 'string', 'enum': ['open', 'periodic']},
    'theta_deg': {'type': 'number'},
    't2_s': positive,
    'rf_ensemble': ensemble,
}

kick = {
    'gamma_kicks_per_ms': positive,
    'alpha_deg': non_negative,
    'tc_ms': positive,
    'M': count,
    'cycles': count,
    'angle_mode': {'type': 'string', 'enum': ['symmetric', 'positive']},
    'phase_mode': {'type': 'string', 'enum': ['fixed-y', 'uniform-phase']},
    'j_hz': {'type': 'number'},
    'nu_s_hz': {'type': 'number'},
    'nu_e_hz': {'type': 'number'},
    't1_s': positive,
    't2_s': positive,
    'initial_state': {'type': 'string', 'enum': ['+', '-', '+i', '-i']},
}

sequence_element = {
    'type': 'object', 'minProperties': 1, 'maxProperties': 1, 'additionalProperties': False,
    'properties': {
        'rotation': {'type': 'object', 'additionalProperties': False, 'required': ['axis', 'angle_rad'],
                     'properties': {'axis': {'type': 'array', 'items': {'type': 'number'}, 'minItems': 3, 'maxItems': 3},
                                    'angle_rad': {'type': 'number'},
                                    'target': {'type': 'integer', 'minimum': 0}}},
        'coupling_delay': {'type': 'object', 'additionalProperties': False, 'required': ['duration_s', 'j_hz'],
                           'properties': {'duration_s': non_negative, 'j_hz': {'type': 'number'},
                                          'pair': {'type': 'array', 'items': {'type': 'integer', 'minimum': 0},
                                                   'minItems': 2, 'maxItems': 2}}},
        'free_evolution': {'type': 'object', 'additionalProperties': False, 'required': ['duration_s'],
                           'properties': {'duration_s': non_negative, 'tag': {'type': 'string'},
                                          'params': {'type': 'object'}}},
    }
}


def parameters_schema(properties, required=()):
    return {'type': 'object', 'additionalProperties': False, 'properties': properties, 'required': list(required)}


PARAMETER_SCHEMAS = {
    'dmf-sweep': parameters_schema(dict(drive, omega_min_rad_s=positive, omega_max_rad_s=positive,
                                        omega_step_rad_s=positive),
                                   ['h0_rad_s', 'Jc_rad_s', 'omega_min_rad_s', 'omega_max_rad_s', 'omega_step_rad_s']),
    'dmf-series': parameters_schema(dict(drive, omega_rad_s=positive), ['h0_rad_s', 'Jc_rad_s', 'omega_rad_s']),
    'grape-opt': parameters_schema({
        'target_angle_deg': {'type': 'number'},
        'target_axis': {'type': 'string', 'enum': ['x', 'y']},
        'drift_offset_rad_s': {'type': 'number'},
        'steps': count,
        'dt_s': positive,
        'step_size': positive,
        'max_iter': count,
        'target_phi': {'type': 'number', 'maximum': 1},
        'backtracking': {'type': 'boolean'},
        'init': {'type': 'string', 'enum': ['zero', 'random']},
        'u_max_rad_s': positive,
        'rf_ensemble': ensemble,
    }, ['steps', 'dt_s']),
    'kick-decay': parameters_schema(dict(kick), ['gamma_kicks_per_ms', 'alpha_deg', 'tc_ms']),
    'dd-compare': parameters_schema(dict(kick, dd_pulses=count, dd_kinds={
        'type': 'array', 'minItems': 1, 'uniqueItems': True,
        'items': {'type': 'string', 'enum': ['none', 'hahn', 'cpmg', 'udd']}}),
        ['gamma_kicks_per_ms', 'alpha_deg', 'tc_ms']),
    'ns-scan': parameters_schema({
        'bath': {'type': 'string', 'enum': ['kick', 'constant', 'synthetic']},
        'tau_ms': {'type': 'array', 'minItems': 1, 'items': positive},
        'cpmg_n': count,
        'M': count,
        'cycles': count,
        'gamma_kicks_per_ms': positive,
        'alpha_deg': non_negative,
        'angle_mode': {'type': 'string', 'enum': ['symmetric', 'positive']},
        'phase_mode': {'type': 'string', 'enum': ['fixed-y', 'uniform-phase']},
        'j_hz': {'type': 'number'},
        't2_s': positive,
        's0_per_s': positive,
        'omega_c_rad_s': positive,
        'noise_sigma': non_negative,
    }, ['bath', 'tau_ms']),
    'qpt-run': parameters_schema(dict(
        {k: v for k, v in kick.items() if k not in ('initial_state',)},
        channel={'type': 'string', 'enum': ['identity', 'x-gate', 'y-gate', 'z-gate', 'hadamard', 'dephasing', 'kick']},
        dd_kind={'type': 'string', 'enum': ['none', 'hahn', 'cpmg', 'udd']},
        dd_pulses=count), ['channel']),
    'gate-check': parameters_schema({
        'sequence': {'type': 'array', 'items': sequence_element},
        'target_gate': {'type': 'string', 'enum': ['H', 'S', 'CNOT', 'X', 'Y', 'Z']},
        'n_qubits': qubits,
        'j_hz': positive,
    }),
}

CONFIG_SCHEMA = {
    'type': 'object',
    'additionalProperties': False,
    'required': ['kind', 'parameters'],
    'properties': {
        'kind': {'type': 'string', 'enum': list(KINDS)},
        'seed': {'type': 'integer', 'minimum': 0, 'maximum': 2 ** 64 - 1},
        'output_dir': {'type': 'string'},
        'description': {'type': 'string'},
        'parameters': {'type': 'object'},
    },
    'allOf': [
        {'if': {'properties': {'kind': {'const': kind}}},
         'then': {'properties': {'parameters': schema}}}
        for kind, schema in PARAMETER_SCHEMAS.items()
    ],
}


def hash_config(config):
    """md5 of the sorted-key JSON dump"""
    return md5(json.dumps(config, sort_keys=True).encode()).hexdigest()


def check_config_against_schema(config, schema=CONFIG_SCHEMA):
    """
    Checks if an experiment config is conformant; returns (ok, message)
    """
    try:
        jsonschema.validate(config, schema)
    except jsonschema.ValidationError as e:
        where = '/'.join(str(p) for p in e.absolute_path) or '<root>'
        return False, '{} at {}'.format(e.message, where)
    except jsonschema.SchemaError as e:
        my_logger.exception(e)
        return False, 'SchemaError: {}'.format(e.message)
    return True, ''


def validate_config(config):
    ok, message = check_config_against_schema(config)
    if not ok:
        raise ValidationError('Experiment config does not conform: {}'.format(message))
    return copy.deepcopy(config)


def load_config(path):
    try:
        with open(path) as f:
            config = json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError('Experiment config {} is not valid JSON: {}'.format(path, e))
    except OSError as e:
        raise ValidationError('Cannot read experiment config {}: {}'.format(path, e))
    return validate_config(config)
