"""
YAML handler.
"""

# Standard library imports
from typing import Dict

# Third-party imports
import yaml

# Local imports
from qmckit.errors import ConfigurationError
from qmckit.handlers.config_handler import ConfigHandler


class YAMLHandler(ConfigHandler):
    """Reads and writes YAML through yaml.safe_load and yaml.safe_dump."""

    def load(self) -> Dict:
        """
        Returns:
            Dict: The parsed mapping, empty for a missing or blank file.

        Raises:
            ConfigurationError: On invalid YAML or a document that is not a mapping.
        """
        try:
            with open(self.file_path, "r") as f:
                content = f.read()
        except FileNotFoundError:
            return {}
        try:
            data = yaml.safe_load(content)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Failed to parse {self.file_path}: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"{self.file_path} must hold a mapping, got {type(data).__name__}")
        return data

    def save(self, data: Dict) -> None:
        with open(self.file_path, "w") as f:
            yaml.safe_dump(data, f, sort_keys=False)
