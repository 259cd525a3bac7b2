"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Settings Module
"""

import os
import json
import logging

try:
    from .errors import InputError
    from .utils import parse_rational
except ImportError:
    from errors import InputError
    from utils import parse_rational

logger = logging.getLogger(__name__)

HOME_PATH = os.environ.get(
    "FAITHLAB_HOME", os.path.join(os.path.expanduser("~"), ".faithlab")
)
CONFIG_FILE = os.path.join(HOME_PATH, "config.json")
GRAPHS_FILE = os.path.join(HOME_PATH, "graphs.json")

MAX_VERTICES_ENV = "FAITHLAB_MAX_VERTICES"

DEFAULTS = {
    "max-vertices": 12,
    "resolution": 2**20,
    "retry-budget": 1000,
    "root-precision": "1/1073741824",
}

# Smallest accepted value per key; root-precision must be strictly positive
MINIMUMS = {
    "max-vertices": 1,
    "resolution": 2,
    "retry-budget": 1,
}

# Values stored in CONFIG_FILE, defaults are never written
config = {}


def _read_json(path, what):
    if not os.path.exists(path):
        return None
    try:
        with open(path, "rt") as file:
            return json.load(file)
    except json.JSONDecodeError:
        logger.warning(f"{what} {path} is not valid JSON, ignoring it.")
    return None


def open_config():
    """
    Reads CONFIG_FILE into the module settings; a missing or broken file
    leaves only the built-in defaults.
    """
    global config
    config = _read_json(CONFIG_FILE, "Settings file") or {}


def save_config():
    try:
        os.makedirs(HOME_PATH, exist_ok=True)
        with open(CONFIG_FILE, "w") as file:
            json.dump(config, file, indent=4)
    except OSError as e:
        logger.error(f"Unable to save settings to {CONFIG_FILE}: {e}")


def get_local_graphs():
    return _read_json(GRAPHS_FILE, "Graph catalog file")


def get_config_value(key, default=None):
    return config.get(key, DEFAULTS.get(key, default))


def check_value(key, value):
    """
    Converts a setting to its type and checks its range.

    Raises:
        InputError: The value is malformed or out of range.
    """
    if key == "root-precision":
        precision = parse_rational(value, key)
        if precision <= 0:
            raise InputError(f"{key} must be positive, got {value}")
        return precision
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{key}: expected an integer, got {value!r}")
    if value < MINIMUMS[key]:
        raise InputError(f"{key} must be at least {MINIMUMS[key]}, got {value}")
    return value


def _setting(key):
    try:
        return check_value(key, get_config_value(key))
    except InputError as e:
        logger.warning(f"Ignoring stored {e}, using {DEFAULTS[key]}")
        return check_value(key, DEFAULTS[key])


def set_config_value(key, value):
    """
    Stores a setting and writes CONFIG_FILE. None drops the key instead.
    """
    if value is None:
        remove_config_key(key)
    else:
        config[key] = value
        save_config()


def remove_config_key(key):
    if config.pop(key, None) is not None:
        save_config()


def list_config():
    print("Current Configuration:")
    for key in DEFAULTS:
        marker = "" if key in config else " (default)"
        print(f"{key}: {get_config_value(key)}{marker}")
    env_value = os.environ.get(MAX_VERTICES_ENV)
    if env_value is not None:
        print(f"{MAX_VERTICES_ENV}: {env_value} (environment)")


def max_vertices():
    """
    Enumeration size limit.

    Returns:
        int: FAITHLAB_MAX_VERTICES when it holds a positive integer, otherwise
        the stored "max-vertices", otherwise 12.
    """
    env_value = os.environ.get(MAX_VERTICES_ENV)
    if env_value is not None:
        try:
            limit = int(env_value)
            if limit >= 1:
                return limit
        except ValueError:
            pass
        logger.warning(
            f"Ignoring {MAX_VERTICES_ENV}={env_value!r}, expected a positive integer."
        )
    return _setting("max-vertices")


def resolution():
    return _setting("resolution")


def retry_budget():
    return _setting("retry-budget")


def root_precision():
    return _setting("root-precision")
