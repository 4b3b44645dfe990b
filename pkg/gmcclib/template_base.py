"""TemplateBase class - common elements for all template objects
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Callable, Optional

from gmcclib.exceptions import ConfigError

logger = logging.getLogger(__name__)


class TemplateBase(ABC):
    """
    Common elements for all template objects
    """

    def __init__(
        self,
        name: str,
        optional: bool = True,
        validator: Optional[Callable[[Any], bool]] = None,
        description: Optional[str] = None,
    ) -> None:
        self.name = name
        self.optional = optional
        self.validator = validator
        self.description = description

    @abstractmethod
    def validate(self, value: Any) -> Any:
        """
        Validate an attribute or a node
        :param value: Value to be validated
        :return: validated value (possibly changed from original)
        """

    def _run_validator(self, value: Any, path: str, what: str) -> None:
        """
        Apply the validator callable. It may return False or raise ValueError with a reason.
        :param value: plain value handed to the validator
        :param path: config path for the diagnostic
        :param what: "Parameter" or "Node"
        """
        if self.validator is None:
            return
        try:
            valid = self.validator(value)
            problem = ""
        except (ValueError, ArithmeticError) as e:
            valid = False
            problem = str(e)
        if valid is False:
            message = f"{what} {path} failed validation"
            if what == "Parameter":
                message += f" for value {value}"
            if problem != "":
                message += f": {problem}"
            logger.error(message)
            raise ConfigError(message, field=path)
