""" Fixed Attribute Template."""
import logging
import math
import numbers
from typing import Any, Callable, Optional

from gmcclib.config_attribute import ConfigAttribute
from gmcclib.exceptions import ConfigError
from gmcclib.template_base import TemplateBase

logger = logging.getLogger(__name__)


class TemplateAttributeFixed(TemplateBase):
    """
    Configuration attribute template class
    For an attribute with a fixed name
    """

    def __init__(
        self,
        name: str,
        optional: bool = True,
        value_type: type = str,
        validator: Optional[Callable[[Any], bool]] = None,
        default_value: Any = None,
        description: Optional[str] = None,
    ) -> None:
        """
        :param name: Attribute name
        :param optional: Is this attribute optional (True) or mandatory (False)
        :param value_type: Value type (int, float, str, list, bool)
        :param validator: Validator function. Takes the coerced value, returns True or False
                            or raises ValueError with the reason
        :param default_value: Value to assign if missing from configuration object
        :param description: Attribute description
        """
        self.value_type = value_type
        self.default_value = default_value
        super().__init__(name, optional, validator, description)

    def _coerce(self, value: Any, path: str) -> Any:
        if value is None or isinstance(value, self.value_type) and not isinstance(value, bool):
            return value
        if self.value_type is bool and isinstance(value, bool):
            return value
        ok = True
        if self.value_type in (int, float):
            # JSON numbers only; integers must be integral
            ok = isinstance(value, numbers.Real) and not isinstance(value, bool)
            if ok and self.value_type is int:
                ok = math.isfinite(value) and float(value).is_integer()
        elif self.value_type in (list, bool, dict):
            ok = False
        if ok:
            try:
                return self.value_type(value)
            except (TypeError, ValueError):
                pass
        message = f"Expecting {path} to be of type {self.value_type.__name__}"
        logger.error(message)
        raise ConfigError(message, field=path)

    def validate(self, value: Optional[ConfigAttribute]) -> Optional[ConfigAttribute]:
        """
        Validate an attribute
        :param value: Attribute to be validated; None when it is missing from the configuration
        :return: validated attribute (possibly changed from original), or None when it
            is missing and has no default
        """
        logger.debug("Validating %s", self.name)
        if value is None:
            value = ConfigAttribute(self.name, self.default_value)
            logger.debug("Set %s to default value %s", self.name, self.default_value)
        elif not isinstance(value, ConfigAttribute):
            message = f"Expecting {value.get_path()} to be a value, not a node"
            logger.error(message)
            raise ConfigError(message, field=value.get_path())

        path = value.get_path()
        value.value = self._coerce(value.value, path)
        if value.value is None:
            if not self.optional:
                message = f"Mandatory parameter {path} has not been set, and has no default value"
                logger.error(message)
                raise ConfigError(message, field=path)
            return None
        self._run_validator(value.value, path, "Parameter")
        return value
