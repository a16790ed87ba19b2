# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Plot-ready data from experiment records.

Each figure becomes ``<figure>.dat`` (gnuplot indexed blocks, two blank lines
between series) plus ``<figure>.json`` describing axes and series; nothing is
rendered here.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
import pandas as pd

from spinlab_workbench.helper import ValidationError
from spinlab_workbench.runner import load_record, CSV_FLOAT_FORMAT

my_logger = logging.getLogger('spinlab')
my_logger.setLevel(logging.DEBUG)


@dataclass
class Series:
    name: str
    frame: pd.DataFrame
    source: str


@dataclass
class Scene:
    figure: str
    title: str
    xlabel: str
    ylabel: str
    series: List[Series] = field(default_factory=list)

    def to_dict(self, data_file):
        return {
            'figure': self.figure,
            'title': self.title,
            'xlabel': self.xlabel,
            'ylabel': self.ylabel,
            'data_file': data_file,
            'series': [{'index': i, 'name': s.name, 'columns': list(s.frame.columns), 'source': s.source}
                       for i, s in enumerate(self.series)],
        }


@dataclass
class PlotSource:
    path: str
    kind: str
    tables: dict
    documents: dict
    parameters: dict


def as_source(record):
    """Accepts a record.json path or an ExperimentRecord that was written to disk"""
    path = getattr(record, 'path', record)
    if not isinstance(path, str) or not os.path.isfile(path):
        raise ValidationError('Record {} not found'.format(path))
    data, tables, documents = load_record(path)
    return PlotSource(path, data['config']['kind'], tables, documents, data['config'].get('parameters', {}))


def sources_of(sources, kinds):
    found = [s for s in sources if s.kind in kinds]
    if not found:
        raise ValidationError('Figure needs a {} record'.format(' or '.join(kinds)))
    return found


def table(source, name, columns):
    if name not in source.tables:
        raise ValidationError('Record {} has no {} table'.format(source.path, name))
    frame = source.tables[name]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ValidationError('Table {} in {} lacks columns {}'.format(name, source.path, missing))
    return frame[list(columns)]


def fr_q_scene(sources):
    scene = Scene('fr_Q', 'Q versus drive frequency', 'omega (rad/s)', 'Q')
    for s in sources_of(sources, ['dmf-sweep']):
        scene.series.append(Series('simulated', table(s, 'sweep', ['omega_rad_s', 'Q_sim']), s.path))
        scene.series.append(Series('closed form', table(s, 'sweep', ['omega_rad_s', 'Q3_closed']), s.path))
    return scene


def fr_fig2_scene(sources):
    scene = Scene('fr_fig2', 'Stroboscopic magnetization', 't (s)', 'm_x')
    for s in sources_of(sources, ['dmf-series']):
        label = 'omega = {} rad/s'.format(s.parameters.get('omega_rad_s'))
        scene.series.append(Series(label, table(s, 'series', ['t_s', 'mx_raw']), s.path))
    return scene


def fr_fig3_scene(sources):
    scene = Scene('fr_fig3', 'Q with decoherence and decay correction', 'omega (rad/s)', 'Q')
    for s in sources_of(sources, ['dmf-sweep']):
        for column, label in (('Q_sim', 'ideal'), ('Q_noisy', 'decohered'), ('Q_corrected', 'corrected')):
            scene.series.append(Series(label, table(s, 'sweep', ['omega_rad_s', column]), s.path))
    return scene


def dec_mx_scene(sources):
    scene = Scene('dec_mx', 'Line intensity under random kicks', 't (s)', 'M_x')
    for s in sources_of(sources, ['kick-decay', 'dd-compare']):
        if s.kind == 'kick-decay':
            scene.series.append(Series('no kicks', table(s, 'decay_nokick', ['t_s', 'Mx_mean', 'Mx_stderr']), s.path))
            scene.series.append(Series('kicks', table(s, 'decay', ['t_s', 'Mx_mean', 'Mx_stderr']), s.path))
            continue
        for name in sorted(s.tables):
            kind = name.split('_', 1)[1]
            if kind == 'none':
                continue
            scene.series.append(Series('kicks + {}'.format(kind.upper()),
                                       table(s, name, ['t_s', 'Mx_mean', 'Mx_stderr']), s.path))
    return scene


def sd_new_scene(sources):
    scene = Scene('sd_new', 'Noise spectrum from CPMG decays', 'omega (rad/s)', 'S (1/s)')
    for s in sources_of(sources, ['ns-scan']):
        scene.series.append(Series('kicks', table(s, 'spectrum', ['omega_rad_s', 'S_per_s']), s.path))
        if 'spectrum_baseline' in s.tables:
            scene.series.append(Series('intrinsic', table(s, 'spectrum_baseline', ['omega_rad_s', 'S_per_s']),
                                       s.path))
    return scene


def chi_frame(document):
    labels = document['basis']
    rows = []
    for i, row in enumerate(document['chi']):
        for j, (re, im) in enumerate(row):
            rows.append({'row': i, 'col': j, 're': re, 'im': im, 'abs': float(np.hypot(re, im)),
                         'label': '{}{}'.format(labels[i], labels[j])})
    return pd.DataFrame(rows, columns=['row', 'col', 're', 'im', 'abs', 'label'])


def dec_tomo_scene(sources):
    scene = Scene('dec_tomo', 'Process matrix', 'm', 'n')
    for s in sources_of(sources, ['qpt-run']):
        if 'chi' not in s.documents:
            raise ValidationError('Record {} has no chi document'.format(s.path))
        scene.series.append(Series('chi {}'.format(s.parameters.get('channel')), chi_frame(s.documents['chi']),
                                   s.path))
    return scene


FIGURES = {
    'fr_Q': fr_q_scene,
    'fr_fig2': fr_fig2_scene,
    'fr_fig3': fr_fig3_scene,
    'dec_mx': dec_mx_scene,
    'sd_new': sd_new_scene,
    'dec_tomo': dec_tomo_scene,
}


def write_blocks(scene, path):
    with open(path, 'w') as f:
        for i, series in enumerate(scene.series):
            if i:
                f.write('\n\n')
            f.write('# {}: {}\n'.format(i, series.name))
            f.write('# {}\n'.format(' '.join(series.frame.columns)))
            series.frame.to_csv(f, sep=' ', index=False, header=False, float_format=CSV_FLOAT_FORMAT)


def emit_plotdata(records, figure, out_dir) -> Tuple[str, str]:
    """
    Writes the data and scene files for one figure; returns their paths.

    :param records: record.json paths or written ExperimentRecords
    """
    if figure not in FIGURES:
        raise ValidationError('Unknown figure {}; expected one of {}'.format(figure, sorted(FIGURES)))
    if not isinstance(records, (list, tuple)):
        records = [records]
    scene = FIGURES[figure]([as_source(r) for r in records])
    os.makedirs(out_dir, exist_ok=True)
    data_path = os.path.join(out_dir, '{}.dat'.format(figure))
    scene_path = os.path.join(out_dir, '{}.json'.format(figure))
    write_blocks(scene, data_path)
    with open(scene_path, 'w') as f:
        json.dump(scene.to_dict(os.path.basename(data_path)), f, indent=2)
    my_logger.info('Wrote {} series for {} to {}'.format(len(scene.series), figure, data_path))
    return data_path, scene_path
