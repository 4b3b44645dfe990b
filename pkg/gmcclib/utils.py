""" Misc utility functions used by gmcclib."""

import logging
import math
import os
from importlib import metadata
from typing import Any, Mapping, Optional

import numpy as np

logger = logging.getLogger(__name__)

THREADS_ENV = "GMCC_THREADS"


def package_version() -> str:
    """Installed version of gmcclib (set by setuptools_scm)"""
    try:
        return metadata.version("gmcclib")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def worker_count(environ: Optional[Mapping[str, str]] = None) -> int:
    """
    Number of harness worker processes from GMCC_THREADS; 0, unset or empty means
    one per CPU
    :param environ: environment mapping (os.environ by default)
    :return: worker count >= 1
    """
    environ = os.environ if environ is None else environ
    raw = environ.get(THREADS_ENV, "").strip()
    try:
        requested = int(raw) if raw else 0
    except ValueError:
        logger.warning("Ignoring %s=%r, expecting an integer", THREADS_ENV, raw)
        requested = 0
    if requested <= 0:
        return os.cpu_count() or 1
    return requested


def json_serial(obj: Any) -> Any:
    """
    JSON serializer for objects not serializable by default json code
    Any additional object types we need to support - add them here
    """
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"Type {type(obj).__name__} not serializable")


def jsonable(value: Any) -> Any:
    """
    Replace non-finite floats (not valid JSON) by the strings "Infinity", "-Infinity" and "NaN"
    :param value: nested dicts, lists and scalars
    :return: same structure
    """
    if isinstance(value, Mapping):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return "NaN"
        return "Infinity" if value > 0 else "-Infinity"
    return value
