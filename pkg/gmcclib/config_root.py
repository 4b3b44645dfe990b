""" Root configuration node."""

import hashlib
import json
import logging
import os
import re
from collections import OrderedDict
from typing import Any, Callable, Iterable, Optional, Tuple

from gmcclib.config_node import ConfigNode
from gmcclib.exceptions import ConfigError
from gmcclib.template_node_fixed import TemplateNodeFixed

logger = logging.getLogger(__name__)

TemplateGen = Callable[[ConfigNode], TemplateNodeFixed]


class ConfigRoot(ConfigNode):
    """Root configuration node.
    Differs from ConfigNode in that it is loaded from a JSON file (or text), takes
    command-line overrides and validates itself against a template."""

    def __init__(
        self,
        filename: Optional[str] = None,
        template_gen: Optional[TemplateGen] = None,
        overrides: Optional[Iterable[Tuple[str, Any]]] = None,
        text: Optional[str] = None,
    ) -> None:
        """
        Overrides are applied to the loaded tree before validation, so defaults and
        validators see the final values.

        :param filename: JSON configuration file
        :param template_gen: Function that takes the loaded configuration and generates the validation template
        :param overrides: (path, value) pairs
        :param text: JSON document, used instead of filename
        """
        super().__init__("root")
        self.source: str = filename or "<text>"
        if text is None:
            if filename is None:
                logger.error("No configuration source given")
                raise ConfigError("No configuration source given")
            text = read_text(filename)
        self.text: str = text
        self.add(parse_json(text))

        for path, value in overrides or ():
            logger.info("Override %s = %r", path, value)
            self.set(path, value)

        if template_gen:
            template = template_gen(self)
            if not isinstance(template, TemplateNodeFixed) or template.name != "root":
                logger.error("Invalid configuration template")
                raise ValueError("Invalid configuration template")
            logger.debug("Validating configuration")
            try:
                validated = template.validate(self)
            except ConfigError as e:
                if e.line is None and e.field:
                    e.line = self._locate(e.field)
                raise
            self._copy(validated)
            logger.debug("Completed configuration validation")

        if len(self.attributes) == 0:
            logger.critical("Could not initialize configuration")
            raise ConfigError("Could not initialize configuration")

    def _locate(self, field: str) -> Optional[int]:
        """
        Line of the deepest key of field that appears in the source text, searching each
        path component after the previous one
        """
        position, line = 0, None
        for key in [x for x in field.split("/") if x]:
            match = re.compile(r'"' + re.escape(key) + r'"\s*:').search(self.text, position)
            if match is None:
                break
            position = match.end()
            line = self.text.count("\n", 0, match.start()) + 1
        return line

    def canonical(self) -> str:
        """Canonical JSON form: sorted keys, no whitespace"""
        return json.dumps(self.get(), sort_keys=True, separators=(",", ":"), allow_nan=False)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form"""
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def read_text(filename: str) -> str:
    """
    Read a configuration file
    :param filename: path
    :return: file content
    """
    if not (os.path.isfile(filename) and os.access(filename, os.R_OK)):
        logger.error("File %s does not exist or is not readable", filename)
        raise ConfigError(f"File {filename} does not exist or is not readable")
    with open(filename, "r", encoding="utf-8") as f:
        return f.read()


def parse_json(text: str) -> "OrderedDict[str, Any]":
    """
    Parse a JSON configuration document, keeping key order
    :param text: document
    :return: OrderedDict; raises ConfigError with the line of a syntax error
    """
    try:
        payload = json.loads(text, object_pairs_hook=OrderedDict, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        logger.error("Malformed JSON at line %d: %s", e.lineno, e.msg)
        raise ConfigError(f"malformed JSON: {e.msg}", line=e.lineno) from e
    if not isinstance(payload, dict):
        raise ConfigError("Configuration must be a JSON object", line=1)
    return payload


def _reject_constant(name: str) -> Any:
    raise ConfigError(f"{name} is not a valid configuration value")
