# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

import configparser
import logging
import os

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

config_struct = {
    'Tool': ['verbose'],
    'Workbench': ['logdir', 'threads', 'seed', 'debugging', 'html_report', 'output_dir']
}

config_options = [x for name in config_struct for x in config_struct[name]]

int_options = ['verbose', 'threads', 'seed']
bool_options = ['debugging', 'html_report']

THREADS_ENV = 'SPINLAB_THREADS'


def convert_args_to_config(args):
    my_config = configparser.ConfigParser()
    for section in config_struct:
        my_config.add_section(section)
        for option in config_struct[section]:
            my_var = vars(args).get(option)
            my_config.set(section, option, '' if my_var is None or my_var is False else str(my_var))
    return my_config


def convert_config_to_args(args, config):
    """
    Fills args from an INI file; options already given on the command line win.
    """
    my_config = configparser.ConfigParser()
    if isinstance(config, configparser.ConfigParser):
        my_config = config
    elif isinstance(config, str):
        with open(config, 'r') as f:
            my_config.read_file(f)
    elif isinstance(config, dict):
        my_config.read_dict(config)
    explicit = getattr(args, 'explicit', set())
    for section in my_config.sections():
        if section not in config_struct:
            my_logger.error('Tool Configuration Error: Section {} not supported!'.format(section), extra={"result": "unsupportedSection"})
            continue
        for option in my_config[section]:
            if option.lower() not in config_options:
                if option.lower() not in ['version', 'copyright']:
                    my_logger.error('Tool Configuration Error: Option {} not supported!'.format(option), extra={"result": "unsupportedOption"})
            elif my_config[section][option] not in ['', None] and option not in explicit:
                if option in int_options:
                    setattr(args, option, my_config[section].getint(option))
                elif option in bool_options:
                    setattr(args, option, my_config[section].getboolean(option))
                else:
                    setattr(args, option, my_config[section][option])
    return config_parse_to_dict(my_config)


def config_parse_to_dict(config):
    my_dict = {}
    for section in config.sections():
        my_dict[section] = {}
        for option in [x for x in config[section] if x not in ['version', 'copyright']]:
            my_dict[section][option] = config[section][option]
    return my_dict


def resolve_threads(args):
    """--threads, then the INI option, then SPINLAB_THREADS, then 1"""
    if getattr(args, 'threads', None):
        return max(1, int(args.threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            my_logger.warning('Ignoring {}={!r}: not an integer'.format(THREADS_ENV, env))
    return 1
