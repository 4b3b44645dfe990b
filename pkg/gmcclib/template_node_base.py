""" Base Node Template."""
import logging
from collections import OrderedDict
from typing import Any, Callable, Optional

from gmcclib.config_node import ConfigNode
from gmcclib.exceptions import ConfigError
from gmcclib.template_base import TemplateBase

logger = logging.getLogger(__name__)


class TemplateNodeBase(TemplateBase):
    """
    Node template base class
    """

    def __init__(
        self,
        name: str,
        optional: bool = True,
        validator: Optional[Callable[["OrderedDict[str, Any]"], bool]] = None,
        description: Optional[str] = None,
    ) -> None:
        """
        :param name: Node name
        :param optional: Is this node optional (True) or mandatory (False)
        :param validator: Validator function for the whole node content, run after the
                            children have been validated. Returns True or False, or raises
                            ValueError with the reason
        :param description: Node description
        """
        self.attributes: "OrderedDict[str, TemplateBase]" = OrderedDict()
        super().__init__(name, optional, validator, description)

    def validate(self, node: Optional[ConfigNode]) -> Optional[ConfigNode]:
        """
        Structural checks shared by node templates
        :param node: Node to be validated
        :return: the node, a new empty node for a missing mandatory node, or None for a
            missing optional one
        """
        if node is None:
            if self.optional:
                logger.debug("Node %s is missing, but it's optional", self.name)
                return None
            logger.debug("Mandatory node %s is missing, creating one from default values", self.name)
            return ConfigNode(self.name)
        if not isinstance(node, ConfigNode):
            message = f"Expecting {node.get_path()} to be a node"
            logger.error(message)
            raise ConfigError(message, field=node.get_path())
        if len(self.attributes) == 0:
            logger.error("Template for node %s has no attributes", self.name)
            raise ValueError(f"Template for node {self.name} has no attributes")
        return node
