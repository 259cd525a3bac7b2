"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Graph Catalog Module
"""

import os
import json
import copy
from pathlib import Path

try:
    from .config import get_local_graphs
except ImportError:
    from config import get_local_graphs

SECTIONS = ("graphs", "models")

catalog = None


def read_data(filename):
    path = Path(os.path.dirname(__file__))
    filepath = path / Path("data") / filename

    with filepath.open("rt") as file:
        data = json.load(file)
    return data


def init_catalog():
    global catalog
    catalog = read_data("graphs.json")
    local_catalog = get_local_graphs()
    if local_catalog:
        catalog = merge_catalogs(catalog, local_catalog)


def merge_catalogs(catalog, local_catalog):
    """
    Merges local entries into the catalog; an entry with a known name
    replaces the packaged one, anything else is appended.
    """
    for key, local_items in local_catalog.items():
        if key in catalog:
            existing_names = {item["name"].lower(): i for i, item in enumerate(catalog[key])}
            for local_item in local_items:
                index = existing_names.get(local_item["name"].lower())
                if index is None:
                    catalog[key].append(local_item)
                else:
                    catalog[key][index] = local_item
        else:
            catalog[key] = local_items
    return catalog


def _entries(section):
    if catalog is None:
        init_catalog()
    return catalog.get(section, [])


def _lookup(section, name):
    for entry in _entries(section):
        if entry["name"].lower() == name.lower():
            return copy.deepcopy(entry)
    return None


def get_graph_entry(name):
    return _lookup("graphs", name)


def get_model_entry(name):
    return _lookup("models", name)


def list_graphs():
    return [entry["name"] for entry in _entries("graphs")]


def list_models():
    return [entry["name"] for entry in _entries("models")]


def list_catalog():
    """
    Prints the named graphs and models.
    """
    for section in SECTIONS:
        print(f"{section.capitalize()}:")
        for entry in _entries(section):
            description = entry.get("description", "")
            print(f"  {entry['name']:<24}{description}")
    return 0
