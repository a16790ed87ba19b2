# Copyright Notice:
# Copyright 2024-2025 SpinLab Workbench contributors. All rights reserved.
# License: BSD 3-Clause License. For full text see LICENSE.md

import html
import json
from collections import Counter
from types import SimpleNamespace

PREVIEW_ROWS = 10

# hack in tagnames into module namespace
tag = SimpleNamespace(**{tagName: lambda string, attr=None, tag=tagName: wrapTag(string, tag=tag, attr=attr)\
    for tagName in ['tr', 'td', 'th', 'div', 'b', 'table', 'body', 'head', 'summary', 'pre']})


def wrapTag(string, tag='div', attr=None):
    string = str(string)
    ltag, rtag = '<{}>'.format(tag), '</{}>'.format(tag)
    if attr is not None:
        ltag = '<{} {}>'.format(tag, attr)
    return ltag + string + rtag


def infoBlock(strings, split='<br/>', ffunc=None, sort=True):
    if isinstance(strings, dict):
        infos = [tag.b('{}: '.format(y)) + html.escape(str(x)) for y, x in (sorted(strings.items()) if sort else strings.items())]
    else:
        infos = strings
    return split.join([ffunc(*x) for x in enumerate(infos)] if ffunc is not None else infos)


def tableBlock(lines, titles, widths=None, ffunc=None):
    widths = widths if widths is not None else [100 for x in range(len(titles))]
    attrlist = ['style="width:{}%"'.format(str(x)) for x in widths]
    tableHeader = tag.tr(''.join([tag.th(x, y) for x, y in zip(titles, attrlist)]))
    for line in lines:
        tableHeader += tag.tr(''.join([ffunc(cnt, x) if ffunc is not None else tag.td(x) for cnt, x in enumerate(line)]))
    return tag.table(tableHeader)


def applySuccessColor(num, entry):
    # result is the last column of a check row
    if num < 3:
        return wrapTag(html.escape(str(entry)), 'td')
    success_col = str(entry).upper()
    if 'FAIL' in success_col:
        return '<td class="fail center">' + success_col + '</td>'
    if success_col == 'WARN':
        return '<td class="warn center">' + success_col + '</td>'
    if 'PASS' in success_col:
        return '<td class="pass center">' + success_col + '</td>'
    return '<td class="center">' + success_col + '</td>'


def count_results(checks, warnings):
    summary = Counter()
    for check in checks:
        summary[check.result.value.lower()] += 1
    for warning in warnings:
        if warning.result is None:
            summary[str(warning.level).lower()] += 1
    return summary


def frameBlock(name, frame):
    preview = frame.head(PREVIEW_ROWS)
    rows = [[html.escape('{:.6g}'.format(v) if isinstance(v, float) else str(v)) for v in row]
            for row in preview.itertuples(index=False)]
    title = tag.div(tag.b(name) + ' ({} rows, first {} shown)'.format(len(frame), len(preview)))
    return title + tableBlock(rows, list(frame.columns))


def renderHtml(record, tool_version, start_tick, now_tick, tool_config):
    """
    Renders one run: an ExperimentRecord, or a selftest namespace with
    ``kind``, ``checks``, ``warnings``, ``tables`` and ``summary``.
    """
    config = record.config if hasattr(record, 'config') else {'kind': record.kind}
    htmlStrTop = '<head><title>SpinLab Run Summary</title>\
            <style>\
            .pass {background-color:#99EE99}\
            .column {\
                float: left;\
                width: 40%;\
            }\
            .fail {background-color:#EE9999}\
            .warn {background-color:#EEEE99}\
            .bluebg {background-color:#BDD6EE}\
            .center {text-align:center;}\
            .log {text-align:left; white-space:pre-wrap; word-wrap:break-word; font-size:smaller; padding: 6px}\
            .titlerow {border: 2pt solid}\
            body {background-color:lightgrey; border: 1pt solid; text-align:center; margin-left:auto; margin-right:auto}\
            th {text-align:center; background-color:beige; border: 1pt solid}\
            td {text-align:left; background-color:white; border: 1pt solid; word-wrap:break-word; overflow:hidden;}\
            table {width:90%; margin: 0px auto; table-layout:fixed;}\
            </style>\
            </head>'

    infos = [wrapTag('##### SpinLab Workbench Run Report #####', 'h2')]
    infos.append('Tool Version: {}'.format(tool_version))
    infos.append(start_tick.strftime('%c'))
    infos.append('(Run time: {})'.format(str(now_tick - start_tick).rsplit('.', 1)[0]))
    htmlStrBodyHeader = tag.tr(tag.th(infoBlock(infos)))

    htmlStrBodyHeader += tag.tr(tag.th('Run Summary', 'class="bluebg titlerow"'))
    infos = {'Kind': config.get('kind'), 'Seed': config.get('seed', '-'),
             'Description': config.get('description', '-')}
    htmlStrBodyHeader += tag.tr(tag.th(infoBlock(infos)))

    summary = count_results(record.checks, record.warnings)
    important_block = tag.div('<b>Results Summary</b>')
    important_block += tag.div(', '.join([
        'Pass: {}'.format(summary['pass']),
        'Fail: {}'.format(summary['fail']),
        'Warning: {}'.format(summary['warn'] + summary['warning']),
        'Error: {}'.format(summary['error']),
    ]))
    htmlStrBodyHeader += tag.tr(tag.td(important_block, 'class="center"'))

    # configuration, split in two columns
    infos = dict(tool_config)
    infos.update({'parameters': json.dumps(config.get('parameters', {}), sort_keys=True)})
    infos_left, infos_right = dict(), dict()
    for key in sorted(infos.keys()):
        if len(infos_left) <= len(infos_right):
            infos_left[key] = infos[key]
        else:
            infos_right[key] = infos[key]
    htmlStrBodyHeader += tag.tr(tag.th('Configuration', 'class="titlerow bluebg"'))
    htmlStrBodyHeader += tag.tr(tag.td(tag.div(infoBlock(infos_left), 'class=\'column log\'')
                                       + tag.div(infoBlock(infos_right), 'class=\'column log\'')))

    htmlPage = ''
    if record.summary:
        htmlPage += tag.tr(tag.th('Summary Values', 'class="titlerow bluebg"'))
        flat = {k: json.dumps(v, default=str) if isinstance(v, (dict, list)) else v for k, v in record.summary.items()}
        htmlPage += tag.tr(tag.td(infoBlock(flat), 'class="log"'))

    for name, frame in record.tables.items():
        htmlPage += tag.tr(tag.th('Table {}'.format(name), 'class="titlerow bluebg"'))
        htmlPage += tag.tr(tag.td(frameBlock(name, frame)))

    if record.checks:
        rows = [(c.name, c.expected, c.actual, c.result.value) for c in record.checks]
        htmlPage += tag.tr(tag.th('Checks', 'class="titlerow bluebg"'))
        htmlPage += tag.tr(tag.td(tableBlock(rows, ['Name', 'Expected', 'Actual', 'Result'],
                                             ['40', '25', '20', '15'], ffunc=applySuccessColor)))

    errors = [w.msg for w in record.warnings if str(w.level).upper() == 'ERROR']
    warns = [w.msg for w in record.warnings if str(w.level).upper() == 'WARNING']
    errors = ['No errors'] if len(errors) == 0 else [html.escape(x) for x in errors]
    warns = ['No warns'] if len(warns) == 0 else [html.escape(x) for x in warns]
    htmlPage += tag.tr(tag.td(infoBlock(errors), 'class="fail log"'))
    htmlPage += tag.tr(tag.td(infoBlock(warns), 'class="warn log"'))

    return wrapTag(wrapTag(htmlStrTop + wrapTag(htmlStrBodyHeader + htmlPage, 'table'), 'body'), 'html')


def writeHtml(string, path):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(string)
