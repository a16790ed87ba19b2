# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

__version__ = '1.0.0'

from spinlab_workbench import logger  # noqa: E402,F401
