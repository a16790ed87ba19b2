# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

import argparse
import logging
import os
import sys
from collections import Counter
from datetime import datetime
from types import SimpleNamespace

import pandas as pd

from spinlab_workbench import __version__ as tool_version
from spinlab_workbench import logger
from spinlab_workbench.config import config_options, resolve_threads
from spinlab_workbench.helper import ValidationError, NumericError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

CONFIG_DEFAULTS = {'logdir': './logs', 'debugging': False, 'html_report': False}


def build_parser():
    argget = argparse.ArgumentParser(description='Quantum spin-dynamics workbench, version {}'.format(tool_version))

    # base tool
    argget.add_argument('-v', '--verbose', action='count', default=0, help='Verbosity of tool in stdout')
    argget.add_argument('-c', '--config', type=str, help='INI tool configuration for this tool')

    # workbench options
    argget.add_argument('--logdir', type=str, help='directory for log files (default ./logs)')
    argget.add_argument('--threads', type=int, help='worker threads (fallback: SPINLAB_THREADS, then 1)')
    argget.add_argument('--seed', type=int, help='override the experiment seed')
    argget.add_argument('--debugging', action='store_true', default=None, help='Output debug statements to text log, otherwise it only uses INFO')
    argget.add_argument('--html_report', action='store_true', default=None, help='write an HTML run summary next to the results')
    argget.add_argument('--output_dir', type=str, help='override the experiment output directory')

    commands = argget.add_subparsers(dest='command')
    run = commands.add_parser('run', help='run one experiment config')
    run.add_argument('experiment', type=str, help='experiment config JSON')
    run.add_argument('--validate-only', action='store_true', dest='validate_only', help='only validate the config')

    plot = commands.add_parser('plotdata', help='write plot-ready data for a figure')
    plot.add_argument('records', type=str, nargs='+', help='record.json files')
    plot.add_argument('--figure', type=str, required=True, help='fr_Q, fr_fig2, fr_fig3, dec_mx, sd_new or dec_tomo')

    selftest = commands.add_parser('selftest', help='run the oracle suites')
    selftest.add_argument('--suite', type=str, action='append', help='restrict to a suite (repeatable)')
    return argget


def explicit_options(args):
    """Options given on the command line, which win over the INI file"""
    explicit = {k for k in config_options if vars(args).get(k) not in (None, False)}
    if not args.verbose:
        explicit.discard('verbose')
    return explicit


def run_command(args, threads, my_logger):
    from spinlab_workbench.experiment import load_config, hash_config
    from spinlab_workbench.runner import run_experiment

    config = load_config(args.experiment)
    my_logger.info('Experiment config {} ({}), md5 hash: {}'.format(args.experiment, config['kind'], hash_config(config)))
    if args.validate_only:
        my_logger.info('Experiment config is valid.')
        return None, None
    record = run_experiment(config, args.output_dir, threads, args.seed)
    return record, record.path


def selftest_command(args, threads, my_logger):
    from spinlab_workbench.oracles import run_selftest, SUITES

    unknown = [s for s in (args.suite or []) if s not in SUITES]
    if unknown:
        raise ValidationError('Unknown oracle suite(s) {}; expected {}'.format(unknown, sorted(SUITES)))
    logger.warning_capture.drain()
    checks = run_selftest(threads, args.suite)
    frame = pd.DataFrame([c.as_row() for c in checks], columns=['name', 'expected', 'actual', 'result'])
    path = None
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        path = os.path.join(args.output_dir, 'selftest.csv')
        frame.to_csv(path, index=False)
    record = SimpleNamespace(kind='selftest', checks=checks, tables={'checks': frame}, summary={},
                             warnings=logger.warning_capture.collect(), path=path)
    return record, path


def main(argslist=None, configfile=None):
    """Main command

    Args:
        argslist ([type], optional): List of arguments in the form of argv. Defaults to None.
    """
    argget = build_parser()
    args = argget.parse_args(argslist)
    args.explicit = explicit_options(args)

    if configfile is None:
        configfile = args.config

    if configfile:
        from spinlab_workbench.config import convert_config_to_args
        convert_config_to_args(args, configfile)
    for option, default in CONFIG_DEFAULTS.items():
        if getattr(args, option) is None:
            setattr(args, option, default)

    start_tick = datetime.now()

    logger.set_verbosity(args.verbose)
    logpath = args.logdir
    file_handler, _ = logger.open_run_log(logpath, start_tick, args.debugging)

    my_logger = logging.getLogger('spinlab')
    my_logger.setLevel(logging.DEBUG)

    try:
        # Begin of log
        my_logger.info("SpinLab Workbench, version {}".format(tool_version))
        my_logger.info("")

        if args.command is None:
            my_logger.error('Configuration Error: No command given')
            argget.print_help()
            return EXIT_VALIDATION, None, 'Configuration Incomplete'

        if not configfile:
            from spinlab_workbench.config import convert_args_to_config
            my_logger.info('Writing config file to log directory')
            configfilename = datetime.strftime(start_tick, os.path.join(logpath, "ConfigFile_%m_%d_%Y_%H%M%S.ini"))
            my_config = convert_args_to_config(args)
            with open(configfilename, 'w') as f:
                my_config.write(f)

        threads = resolve_threads(args)
        my_logger.info('\n'.join(
            ['{}: {}'.format(x, vars(args)[x]) for x in sorted(list(vars(args).keys() - set(['explicit'])))
             if vars(args)[x] not in ['', None]]))
        my_logger.info('Threads: {}'.format(threads))
        my_logger.info('Start time: ' + start_tick.strftime('%x - %X'))
        my_logger.info("")

        try:
            if args.command == 'run':
                record, last_path = run_command(args, threads, my_logger)
            elif args.command == 'plotdata':
                from spinlab_workbench.plotdata import emit_plotdata
                out_dir = args.output_dir or os.path.dirname(os.path.abspath(args.records[0]))
                last_path, _ = emit_plotdata(args.records, args.figure, out_dir)
                record = None
            else:
                record, last_path = selftest_command(args, threads, my_logger)
        except ValidationError as e:
            my_logger.debug('Exception caught while running', exc_info=1)
            my_logger.error('Validation Error: {}'.format(e))
            return EXIT_VALIDATION, None, 'Validation Error'
        except NumericError as e:
            my_logger.debug('Exception caught while running', exc_info=1)
            my_logger.error('Numeric Error: {}'.format(e))
            return EXIT_NUMERIC, None, 'Numeric Error'

        now_tick = datetime.now()
        my_logger.info('Elapsed time: {}'.format(str(now_tick - start_tick).rsplit('.', 1)[0]))

        if record is None:
            return EXIT_OK, last_path, 'Done'

        final_counts = Counter(c.result.value.lower() for c in record.checks)
        for warning in record.warnings:
            final_counts[str(warning.level).lower()] += 1

        if args.html_report:
            import spinlab_workbench.tohtml as tohtml
            from spinlab_workbench.config import convert_args_to_config, config_parse_to_dict
            html_str = tohtml.renderHtml(record, tool_version, start_tick, now_tick,
                                         config_parse_to_dict(convert_args_to_config(args))['Workbench'])
            report_dir = os.path.dirname(record.path) if record.path else logpath
            report = datetime.strftime(start_tick, os.path.join(report_dir, "SpinLabReport_%m_%d_%Y_%H%M%S.html"))
            tohtml.writeHtml(html_str, report)
            my_logger.info('Wrote HTML report {}'.format(report))

        my_logger.info("\nResults Summary:")
        my_logger.info(", ".join([
            'Pass: {}'.format(final_counts['pass']),
            'Fail: {}'.format(final_counts['fail']),
            'Warning: {}'.format(final_counts['warn'] + final_counts['warning']),
            'Error: {}'.format(final_counts['error']),
        ]))

        if final_counts['fail']:
            my_logger.error("Checks have failed: {} problems found".format(final_counts['fail']))
            return EXIT_NUMERIC, last_path, 'Checks failed'
        return EXIT_OK, last_path, 'Done'
    finally:
        logger.close_run_log(file_handler)


def console():
    status_code, last_path, exit_string = main()
    sys.exit(status_code)


if __name__ == '__main__':
    console()
