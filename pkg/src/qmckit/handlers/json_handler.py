"""
JSON handler, also used for integration and benchmark reports.
"""

# Standard library imports
import json
from typing import Any, Dict

# Third-party imports
import numpy as np

# Local imports
from qmckit.errors import ConfigurationError
from qmckit.handlers.config_handler import ConfigHandler


def _plain(value: Any) -> Any:
    """json.dump fallback for numpy scalars and arrays found in reports."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


class JSONHandler(ConfigHandler):
    """Reads and writes JSON, indented by four spaces."""

    def load(self) -> Dict:
        """
        Returns:
            Dict: The parsed document, empty if the file does not exist.

        Raises:
            ConfigurationError: On invalid JSON.
        """
        try:
            with open(self.file_path, "r") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Failed to parse {self.file_path}: {e}") from e
        except FileNotFoundError:
            return {}

    def save(self, data: Dict) -> None:
        with open(self.file_path, "w") as f:
            json.dump(data, f, indent=4, default=_plain)

    @staticmethod
    def dumps(data: Dict) -> str:
        """Serialise data the way save writes it."""
        return json.dumps(data, indent=4, default=_plain)
