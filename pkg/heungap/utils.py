import csv
import io
import json
import logging
from multiprocessing import Pool


logger = logging.getLogger(__name__)


def save_to_name_list(dest, name_parts, value):
    """
    Util to save some name sequence to a dict. For instance, `("spectrum","lame")`
    would save to dest["spectrum"]["lame"].
    """
    if len(name_parts) > 1:
        for part in name_parts[:-1]:
            if part not in dest:
                dest[part] = {}
            dest = dest[part]
    dest[name_parts[-1]] = value


def grid_map(func, items, jobs=1):
    """
    `[func(x) for x in items]`, fanned out over `jobs` processes when
    jobs > 1. Results keep the order of `items`.
    """
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [func(x) for x in items]
    logger.info('grid of %d points over %d processes', len(items), jobs)
    with Pool(processes=jobs) as pool:
        return pool.map(func, items)


def jsonable(value):
    """Complex numbers become [re, im]; tuples become lists."""
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return dict((k, jsonable(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, 'to_json'):
        return jsonable(value.to_json())
    return value


def dump_json(value):
    return json.dumps(jsonable(value), indent=2, sort_keys=True)


def dump_csv(header, rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow(['%.17g' % x if isinstance(x, float) else x for x in row])
    return out.getvalue()
