# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Workbench logging: verbose levels, the per-run text log, and the capture of
warnings and check results that ends up in record.json.
"""

import logging
import os
import sys
from datetime import datetime
from enum import IntEnum
from types import SimpleNamespace

LOGGER_NAME = 'spinlab'
RUN_LOG_PATTERN = 'SpinLabLog_%m_%d_%Y_%H%M%S.txt'


class Level(IntEnum):
    DEBUG = logging.DEBUG
    VERBOSE2 = logging.INFO-2
    VERBOSE1 = logging.INFO-1
    INFO = logging.INFO
    WARN = logging.WARN
    ERROR = logging.ERROR


logging.addLevelName(Level.VERBOSE1, "VERBOSE1")
logging.addLevelName(Level.VERBOSE2, "VERBOSE2")

# -v count -> stdout level
VERBOSITY = {0: Level.INFO, 1: Level.VERBOSE1, 2: Level.VERBOSE2}

# experiment kind / oracle suite currently running, innermost last
context_stack = []


def current_context():
    return context_stack[-1] if context_stack else None


def run_warning(record):
    """Plain entry for record.json"""
    return SimpleNamespace(level=record.levelname, msg=record.getMessage(),
                           context=getattr(record, 'run_context', None), result=getattr(record, 'result', None))


class WarningCapture(logging.Handler):
    """Holds WARNING and above, and any record tagged with a check result, until drained"""

    def __init__(self):
        super().__init__()
        self.captured = []

    def emit(self, record):
        if record.levelno >= logging.WARNING or getattr(record, 'result', None) is not None:
            record.run_context = current_context()
            self.captured.append(record)

    def drain(self):
        captured, self.captured = self.captured, []
        return captured

    def collect(self):
        """Drains and returns the entries above INFO"""
        return [run_warning(r) for r in self.drain() if r.levelno > logging.INFO]


class RunLogFormatter(logging.Formatter):
    """LEVEL - message ... RESULT at <context>"""

    def format(self, record):
        msg = "{} - {}".format(record.levelname, record.getMessage())
        result = getattr(record, 'result', None)
        context = getattr(record, 'run_context', None) or current_context()
        if result or record.levelno > logging.INFO:
            msg += " ... "
            msg += "{} ".format(result) if result else " "
            msg += "at {}".format(context) if context else ""
        if record.exc_info and record.levelno <= logging.DEBUG:
            msg += "\n" + self.formatException(record.exc_info)
        return msg


def open_run_log(logdir, start_tick, debugging=False):
    """
    Attaches the per-run text log; returns (handler, path).

    :param logdir: created when missing
    :param start_tick: datetime stamped into the file name
    """
    os.makedirs(logdir, exist_ok=True)
    path = datetime.strftime(start_tick, os.path.join(logdir, RUN_LOG_PATTERN))
    handler = logging.FileHandler(path)
    level = Level.DEBUG if debugging else Level.INFO
    handler.setLevel(min(level, standard_out.level))
    handler.setFormatter(RunLogFormatter())
    my_logger.addHandler(handler)
    return handler, path


def close_run_log(handler):
    my_logger.removeHandler(handler)
    handler.close()


def push_context(self, context):
    """Marks log lines with the running experiment or suite, e.g. 'dmf-sweep'"""
    context_stack.append(context)


def pop_context(self):
    if context_stack:
        context_stack.pop()


my_logger = logging.getLogger(LOGGER_NAME)
my_logger.setLevel(logging.DEBUG)

standard_out = logging.StreamHandler(sys.stdout)
standard_out.setLevel(logging.INFO)
my_logger.addHandler(standard_out)

warning_capture = WarningCapture()
my_logger.addHandler(warning_capture)


def set_verbosity(verbose):
    standard_out.setLevel(VERBOSITY.get(verbose, Level.DEBUG))


def print_verbose_1(self, msg, *args, **kwargs):
    if self.isEnabledFor(Level.VERBOSE1):
        self._log(Level.VERBOSE1, msg, args, **kwargs)


def print_verbose_2(self, msg, *args, **kwargs):
    if self.isEnabledFor(Level.VERBOSE2):
        self._log(Level.VERBOSE2, msg, args, **kwargs)


logging.Logger.verbose1 = print_verbose_1
logging.Logger.verbose2 = print_verbose_2
logging.Logger.push_context = push_context
logging.Logger.pop_context = pop_context
