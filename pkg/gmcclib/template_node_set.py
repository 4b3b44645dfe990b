""" Node Set Template."""
import logging
from typing import List, Optional

from gmcclib.config_node import ConfigNode
from gmcclib.template_node_base import TemplateNodeBase

logger = logging.getLogger(__name__)


class TemplateNodeSet(TemplateNodeBase):
    """
    Template class for a set of nodes sharing one node template, whose names are
    only known once the configuration is loaded (e.g. labelled algorithm entries)
    """

    def __init__(self, name: str, node: TemplateNodeBase, names_lst: List[str]) -> None:
        """
        :param name: Nodeset name
        :param node: Node template. All nodes in NodeSet node must be of the same type
        :param names_lst: List of names of nodes that should be in the node set
        """
        if not isinstance(node, TemplateNodeBase):
            raise ValueError("Node Set template can only be initialized with a valid node template object")
        if not isinstance(names_lst, list):
            raise ValueError("Node Set template can only be initialized with a list of node names")
        super().__init__(name)
        self.attributes["node"] = node
        self.names_lst = names_lst

    def validate(self, node: Optional[ConfigNode]) -> Optional[ConfigNode]:
        """
        Validate the named children of the node passed in (the parent of the set)
        :param node: Parent node holding the set members
        :return: the parent node with validated members
        """
        logger.debug("Validating nodeset %s", self.name)
        if node is None:
            return None
        template = self.attributes["node"]
        for name in self.names_lst:
            member = node._get_obj(name)
            if member is None and template.optional:
                logger.debug("Optional node %s is missing in %s", name, node.get_path())
                continue
            if member is None:
                member = ConfigNode(name, parent=node)
            new_value = template.validate(member)
            if isinstance(new_value, ConfigNode) and len(new_value.attributes) > 0:
                new_value.name = name
                node.add(new_value)
        return node
