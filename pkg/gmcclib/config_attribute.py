""" Configuration attribute class."""
import logging
from typing import TYPE_CHECKING, Any, Optional

if TYPE_CHECKING:
    from gmcclib.config_node import ConfigNode

logger = logging.getLogger(__name__)


class ConfigAttribute:
    """
    Leaf of the configuration tree: any JSON value that is not an object
    (numbers, strings, booleans, lists)
    """

    def __init__(self, name: str, value: Any, parent: Optional["ConfigNode"] = None) -> None:
        self.name: str = name
        self.value: Any = value
        self.parent: Optional["ConfigNode"] = parent
        logger.debug("Created attribute %s: %s", self.name, self.value)

    def _set_parent(self, parent_node: "ConfigNode") -> None:
        self.parent = parent_node

    def _to_dict(self) -> Any:
        return self.value

    def _get_obj(self, path: Optional[str] = None) -> "ConfigAttribute":
        return self

    def get_path(self) -> str:
        """
        Get this attribute's path from the root
        :return: string with full path to this attribute
        """
        if self.parent is None:
            return self.name
        return self.parent.get_path() + "/" + self.name

    def __str__(self) -> str:
        depth = self.parent.depth if self.parent else 0
        return "\n" + "\t" * depth + f"{self.name} = {self.value!r}"

    def __repr__(self) -> str:
        return self.value.__repr__()
