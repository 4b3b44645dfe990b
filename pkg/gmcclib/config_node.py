""" Configuration Node class."""

import json
import logging
from collections import OrderedDict
from typing import Any, List, Optional, Tuple

from gmcclib.config_attribute import ConfigAttribute
from gmcclib.exceptions import ConfigError

logger = logging.getLogger(__name__)


class ConfigNode:
    """
    Configuration node class. JSON objects become nodes, every other value an attribute.
    """

    def __init__(
        self,
        name: str,
        parent: Optional["ConfigNode"] = None,
        attributes: Optional[Any] = None,
    ) -> None:
        """
        :param name: Node name
        :param parent: Node's parent
        :param attributes: Node content: ConfigNode, ConfigAttribute, a dictionary, or a list
            of ConfigNode/ConfigAttribute objects or (name, value) tuples
        """
        self.name: str = name
        self.parent: Optional["ConfigNode"] = parent
        self.depth: int = parent.depth + 1 if parent else 1
        self.attributes: "OrderedDict[str, ConfigNode | ConfigAttribute]" = OrderedDict()
        logger.debug("Created node: %s", self.name)
        if attributes:
            self.add(attributes)

    def add(self, attributes: Any) -> None:
        """
        Add content to a node
        :param attributes: Can be ConfigNode, ConfigAttribute, a dictionary, or a list of any of the above
        """
        if isinstance(attributes, (ConfigNode, ConfigAttribute)):
            self.attributes[attributes.name] = attributes
            attributes._set_parent(self)
        elif isinstance(attributes, list):
            for attribute in attributes:
                if isinstance(attribute, (ConfigNode, ConfigAttribute)):
                    self.add(attribute)
                elif isinstance(attribute, tuple) and len(attribute) == 2:
                    self.add(OrderedDict([attribute]))
                else:
                    logger.error("ConfigNode.add only accepts config objects or (name, value) tuples")
                    raise ValueError("ConfigNode.add only accepts config objects or (name, value) tuples")
        elif isinstance(attributes, dict):
            for a_key, a_value in attributes.items():
                if isinstance(a_value, dict):
                    logger.debug("Adding node %s to node %s", a_key, self.name)
                    self.attributes[a_key] = ConfigNode(a_key, parent=self, attributes=a_value)
                else:
                    logger.debug("Adding attribute %s to node %s", a_key, self.name)
                    self.attributes[a_key] = ConfigAttribute(a_key, a_value, parent=self)
        else:
            logger.error("ConfigNode.add only accepts config objects, dictionaries or lists")
            raise ValueError("ConfigNode.add only accepts config objects, dictionaries or lists")

    def delete(self, path: str) -> None:
        """
        Delete content
        :param path: Path - everything at and below this path will be deleted
        """
        nodes = _split(path)
        if len(nodes) == 0:
            logger.error("No path to delete specified")
            raise ValueError("No path to delete specified")
        if len(nodes) == 1:
            self.attributes.pop(nodes[0], None)
        elif isinstance(self.attributes.get(nodes[0]), ConfigNode):
            self.attributes[nodes[0]].delete("/".join(nodes[1:]))

    def _set_parent(self, parent_node: "ConfigNode") -> None:
        self.parent = parent_node
        self.depth = parent_node.depth + 1
        for child in self.attributes.values():
            if isinstance(child, ConfigNode):
                child._set_parent(self)

    def _to_dict(self) -> "OrderedDict[str, Any]":
        result: "OrderedDict[str, Any]" = OrderedDict()
        for attribute_name, attribute_value in self.attributes.items():
            result[attribute_name] = attribute_value._to_dict()
        return result

    def _get_obj(self, path: Optional[str] = None) -> Optional["ConfigNode | ConfigAttribute"]:
        """
        Internal method. Retrieve object at path
        :param path: Path
        :return: ConfigNode or ConfigAttribute at specified path or None
        """
        nodes = _split(path)
        if len(nodes) == 0:
            return self
        if nodes[0] not in self.attributes:
            return None
        child = self.attributes[nodes[0]]
        if len(nodes) > 1 and not isinstance(child, ConfigNode):
            return None
        return child._get_obj("/".join(nodes[1:]) or None)

    def get(self, path: Optional[str] = None, default: Any = None) -> Any:
        """
        Retrieve object at path as OrderedDict
        :param path: Path
        :param default: value returned when nothing exists at path
        :return: OrderedDict, attribute value or default
        """
        obj = self._get_obj(path)
        if obj is None:
            return default
        return obj._to_dict()

    def set(self, path: str, value: Any) -> None:
        """
        Add or update content, creating intermediate nodes as needed
        :param path: Path to node or attribute to update
        :param value: Value to assign
        """
        nodes = _split(path)
        if len(nodes) == 0:
            self.add(value)
        elif len(nodes) == 1:
            if isinstance(value, ConfigNode):
                value.name = nodes[0]
                self.add(value)
            else:
                self.add(OrderedDict([(nodes[0], value)]))
        else:
            child = self.attributes.get(nodes[0])
            if child is None:
                child = ConfigNode(nodes[0], parent=self)
                self.attributes[nodes[0]] = child
            elif not isinstance(child, ConfigNode):
                message = f"Cannot set {path}: {child.get_path()} is not a node"
                logger.error(message)
                raise ConfigError(message, field=child.get_path())
            child.set("/".join(nodes[1:]), value)

    def get_path(self) -> str:
        """
        Get this node's path from the root
        :return: string with full path to this node
        """
        if self.parent is None:
            return f"/{self.name}" if self.name != "root" else ""
        return f"{self.parent.get_path()}/{self.name}"

    def list_nodes(self, path: str = "/") -> List[str]:
        """
        List child nodes
        :param path: path to a node. defaults to this node
        :return: list of child node names
        """
        return [x.name for x in self._get_obj(path).attributes.values() if isinstance(x, ConfigNode)]

    def list_attributes(self, path: str = "/") -> List[str]:
        """
        List node's attributes
        :param path: path to a node. defaults to this node
        :return: list of attribute names
        """
        return [
            x.name
            for x in self._get_obj(path).attributes.values()
            if isinstance(x, ConfigAttribute)
        ]

    def __str__(self) -> str:
        result = "\n" + "\t" * (self.depth - 1) + f"[{self.name}]"
        for attribute in self.attributes.values():
            result += str(attribute)
        return result

    def __repr__(self) -> str:
        return self._to_dict().__repr__()

    def _copy(self, node: "ConfigNode") -> None:
        """
        Copy all attributes from another ConfigNode
        :param node: Node to copy from
        """
        self.attributes = node.attributes
        for child in self.attributes.values():
            child._set_parent(self)


def _split(path: Optional[str]) -> List[str]:
    return [x for x in (path or "").split("/") if x != ""]


def parse_override(text: str) -> Tuple[str, Any]:
    """
    Parse a command-line override "path=value". The path may use "/" or "." as
    separator; the value is read as JSON and kept as a plain string when it is not JSON.
    :param text: override text
    :return: (path with "/" separators, value)
    """
    if "=" not in text:
        logger.error("Override '%s' is not of the form path=value", text)
        raise ConfigError(f"Override '{text}' is not of the form path=value", field=text)
    path, raw = text.split("=", maxsplit=1)
    path = path.strip()
    if "/" not in path:
        path = path.replace(".", "/")
    if not _split(path):
        raise ConfigError(f"Override '{text}' has an empty path", field=text)
    try:
        value: Any = json.loads(raw, object_pairs_hook=OrderedDict)
    except ValueError:
        value = raw
    return path, value


def as_plain(value: Any) -> Any:
    """OrderedDict trees as plain dicts (for library constructors)"""
    if isinstance(value, dict):
        return {k: as_plain(v) for k, v in value.items()}
    if isinstance(value, list):
        return [as_plain(v) for v in value]
    return value

