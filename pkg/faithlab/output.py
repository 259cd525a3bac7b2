"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Report Output Module
"""

import io
import csv
import json
import re
import logging

try:
    from .errors import InputError
except ImportError:
    from errors import InputError

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv")


def json_output(data):
    """
    Indented JSON with every innermost array of scalars kept on one line.
    """
    json_output = json.dumps(data, indent=4)
    json_output = re.sub(
        r"(\[)\n\s*([^\[\]{}]+?)\n\s*(\])",
        lambda match: match.group(1)
        + re.sub(r",\n\s*", ", ", match.group(2))
        + match.group(3),
        json_output,
    )
    return json_output


def _scalar(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _is_pair_list(value):
    return bool(value) and all(
        isinstance(item, list) and len(item) == 2 and not isinstance(item[0], (list, dict))
        for item in value
    )


def _flatten(prefix, value):
    if isinstance(value, dict):
        for key, item in value.items():
            yield from _flatten(f"{prefix}.{key}" if prefix else str(key), item)
    elif isinstance(value, list):
        if _is_pair_list(value):
            for key, item in value:
                yield from _flatten(f"{prefix}.{_scalar(key)}" if prefix else _scalar(key), item)
        else:
            for i, item in enumerate(value):
                yield from _flatten(f"{prefix}.{i}" if prefix else str(i), item)
    else:
        yield prefix, _scalar(value)


def csv_output(data):
    """
    Flattens a report into section,key,value rows. Pair lists such as
    [[epsilon, count], ...] become one row per pair keyed by the first item.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["section", "key", "value"])
    for section, value in data.items():
        for key, item in _flatten("", value):
            writer.writerow([section, key, item])
    return buffer.getvalue().rstrip("\n")


def format_report(data, fmt="json"):
    if fmt == "json":
        return json_output(data)
    if fmt == "csv":
        return csv_output(data)
    raise InputError(f"Unknown output format {fmt!r}, expected one of {list(FORMATS)}")


def write_output(text, out=None):
    """
    Prints `text`, or writes it to `out` when a path is given.
    """
    if not out:
        print(text)
        return
    try:
        with open(out, "wt") as file:
            file.write(text + "\n")
    except OSError as e:
        raise InputError(f"{out}: {e.strerror}") from e
    logger.info(f"Report written to {out}")
