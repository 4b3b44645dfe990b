""" Result writer: atomic CSV and JSON output with provenance."""

import json
import logging
import os
import tempfile
from typing import Any, Callable, Dict, Optional, TextIO

import pandas as pd

from gmcclib.config_root import ConfigRoot
from gmcclib.utils import json_serial, jsonable, package_version

logger = logging.getLogger(__name__)

META_SUFFIX = ".meta.json"


class ResultWriter:
    """
    Writes the result of one invocation. Every file is first written to a temporary
    file in the destination directory and then renamed over the target, so readers
    never see a partial file and a failed run leaves nothing behind.
    """

    def __init__(
        self, path: str, config: ConfigRoot, subcommand: str, base_seed: Optional[int] = None
    ) -> None:
        """
        :param path: output file
        :param config: validated configuration (hashed into every output)
        :param subcommand: name recorded in the metadata
        :param base_seed: seed recorded in the metadata, when the subcommand is seeded
        """
        self.path = path
        self.config = config
        self.subcommand = subcommand
        self.base_seed = base_seed
        self.version = package_version()
        self.config_hash = config.config_hash()

    def provenance(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "version": self.version,
            "subcommand": self.subcommand,
            "config_hash": self.config_hash,
            "config": self.config.get(),
        }
        if self.base_seed is not None:
            result["base_seed"] = self.base_seed
        return result

    def header(self) -> str:
        line = f"# gmcclib {self.version} config_hash={self.config_hash}"
        if self.base_seed is not None:
            line += f" base_seed={self.base_seed}"
        return line + "\n"

    def csv(self, frame: pd.DataFrame, summary: Optional[Dict[str, Any]] = None) -> None:
        """
        CSV with a provenance comment line, plus the <out>.meta.json sidecar
        :param frame: result table, written without index
        :param summary: extra sidecar content
        """

        def body(f: TextIO) -> None:
            f.write(self.header())
            frame.to_csv(f, index=False, lineterminator="\n")

        meta = self.provenance()
        meta["columns"] = list(frame.columns)
        if summary:
            meta["summary"] = summary
        _atomic_write(self.path, body)
        _atomic_write(self.path + META_SUFFIX, lambda f: f.write(_dumps(meta)))
        logger.info("Wrote %d rows to %s", len(frame), self.path)

    def json(self, payload: Dict[str, Any]) -> None:
        """
        JSON result with the provenance fields merged in
        :param payload: result content
        """
        document = dict(payload)
        document.update(self.provenance())
        _atomic_write(self.path, lambda f: f.write(_dumps(document)))
        logger.info("Wrote %s", self.path)


def _dumps(document: Dict[str, Any]) -> str:
    return json.dumps(jsonable(document), sort_keys=True, indent=2, default=json_serial) + "\n"


def _atomic_write(path: str, write: Callable[[TextIO], Any]) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".gmcc-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            write(f)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
