# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

import logging
import sys

from spinlab_workbench.SpinLabWorkbench import main

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)

if __name__ == '__main__':
    try:
        status_code, last_path, exit_string = main()
        sys.exit(status_code)
    except Exception as e:
        my_logger.exception("Program finished prematurely: %s", e)
        raise
