# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

from setuptools import setup
from codecs import open

with open("README.md", "r", "utf-8") as f:
    long_description = f.read()

setup(
    name="spinlab_workbench",
    version="1.0.0",
    description="Quantum spin-dynamics workbench for NMR-style qubit experiments",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="SpinLab Workbench contributors",
    license="BSD 3-clause \"New\" or \"Revised License\"",
    classifiers=[
        "Development Status :: 4 - Beta",
        "License :: OSI Approved :: BSD License",
        "Programming Language :: Python",
        "Topic :: Scientific/Engineering :: Physics"
    ],
    keywords="NMR quantum-computing spin-dynamics GRAPE decoherence",
    packages=["spinlab_workbench"],
    entry_points={
        'console_scripts': [
            'spinlab=spinlab_workbench.SpinLabWorkbench:console'
        ]
    },
    python_requires=">=3.8",
    install_requires=[
      "numpy>=1.20",
      "scipy>=1.7",
      "pandas>=1.3",
      "jsonschema"
    ]
)
