""" Fixed Node Template."""
import logging
from typing import Any, Callable, Optional

from gmcclib.config_attribute import ConfigAttribute
from gmcclib.config_node import ConfigNode
from gmcclib.exceptions import ConfigError
from gmcclib.template_attr_fixed import TemplateAttributeFixed
from gmcclib.template_base import TemplateBase
from gmcclib.template_node_base import TemplateNodeBase
from gmcclib.template_node_set import TemplateNodeSet

logger = logging.getLogger(__name__)


class TemplateNodeFixed(TemplateNodeBase):
    """
    Configuration Node template class
    For a node with a fixed name
    """

    def __init__(
        self,
        name: str,
        optional: bool = True,
        validator: Optional[Callable[[Any], bool]] = None,
        description: Optional[str] = None,
        strict: bool = False,
    ) -> None:
        """
        :param strict: reject children the template does not know (set members excepted)
        """
        super().__init__(name, optional, validator, description)
        self.strict = strict

    def add(self, attr: TemplateBase) -> None:
        """
        Add child nodes/attribute templates
        :param attr: Any TemplateBase descendant object
        """
        if not isinstance(attr, TemplateBase):
            raise ValueError(f"Attempt to add invalid attribute type to {self.name} template")
        if attr.name in self.attributes:
            raise ValueError(f"Attribute or node {attr.name} can only be added to node {self.name} once")
        self.attributes[attr.name] = attr

    def _known_names(self) -> set:
        names = set()
        for attr_t in self.attributes.values():
            if isinstance(attr_t, TemplateNodeSet):
                names.update(attr_t.names_lst)
            else:
                names.add(attr_t.name)
        return names

    def validate(self, node: Optional[ConfigNode]) -> Optional[ConfigNode]:
        """
        Validate a node
        :param node: Node to be validated
        :return: validated node (defaults filled in), or None for a missing optional node;
            raises ConfigError on failure to validate
        """
        logger.debug("Validating node %s", self.name)
        node = super().validate(node)
        if node is None:
            return None
        if self.strict:
            for child_name in node.attributes:
                if child_name not in self._known_names():
                    path = f"{node.get_path()}/{child_name}"
                    logger.error("Unknown parameter %s", path)
                    raise ConfigError(f"Unknown parameter {path}", field=path)

        for attr_t_name, attr_t in self.attributes.items():
            if isinstance(attr_t, TemplateNodeSet):
                # a node set validates members of this node
                node = attr_t.validate(node)
                continue
            current = node._get_obj(attr_t_name)
            if current is None and isinstance(attr_t, TemplateAttributeFixed):
                current = ConfigAttribute(attr_t_name, attr_t.default_value, parent=node)
            elif current is None and not attr_t.optional:
                current = ConfigNode(attr_t_name, parent=node)
            new_value = attr_t.validate(current)
            if isinstance(new_value, ConfigAttribute) and new_value.value is not None:
                node.add(new_value)
            elif isinstance(new_value, ConfigNode) and len(new_value.attributes) > 0:
                node.add(new_value)

        if not self.optional and len(node.attributes) == 0:
            logger.error("Mandatory node %s is missing, with no defaults set", node.get_path())
            raise ConfigError(
                f"Mandatory node {node.get_path()} is missing, with no defaults set",
                field=node.get_path(),
            )
        if len(node.attributes) == 0:
            return None
        self._run_validator(node.get(), node.get_path(), "Node")
        return node
