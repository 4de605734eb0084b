"""
TOML handler.

TOML has no null, so None is written as an empty string and read back as None.
"""

# Standard library imports
from typing import Any, Dict

# Third-party imports
from tomli import TOMLDecodeError, load as toml_load
from tomli_w import dump as toml_dump

# Local imports
from qmckit.errors import ConfigurationError
from qmckit.handlers.config_handler import ConfigHandler


def _from_toml(data: Any) -> Any:
    if isinstance(data, dict):
        return {k: _from_toml(v) for k, v in data.items()}
    if isinstance(data, list):
        return [_from_toml(v) for v in data]
    return None if data == "" else data


def _to_toml(data: Any) -> Any:
    if isinstance(data, dict):
        return {k: _to_toml(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_to_toml(v) for v in data]
    return "" if data is None else data


class TOMLHandler(ConfigHandler):
    """Reads and writes TOML with tomli and tomli-w."""

    def load(self) -> Dict:
        """
        Returns:
            Dict: The parsed document with empty strings restored to None.

        Raises:
            ConfigurationError: On invalid TOML.
        """
        try:
            with open(self.file_path, "rb") as f:
                return _from_toml(toml_load(f))
        except FileNotFoundError:
            return {}
        except TOMLDecodeError as e:
            raise ConfigurationError(f"Failed to parse {self.file_path}: {e}") from e

    def save(self, data: Dict) -> None:
        with open(self.file_path, "wb") as f:
            toml_dump(_to_toml(data), f)
