"""
File handlers for run profiles and reports.

Every handler implements ConfigHandler and reads or writes plain dictionaries in
one format: JSON, TOML or YAML. handler_for_path picks the handler from a file
suffix.
"""

# Standard library imports
from pathlib import Path
from typing import Dict, Type, Union

# Local imports
from qmckit.errors import ConfigurationError
from qmckit.handlers.config_handler import ConfigHandler
from qmckit.handlers.json_handler import JSONHandler
from qmckit.handlers.toml_handler import TOMLHandler
from qmckit.handlers.yaml_handler import YAMLHandler

HANDLERS_BY_SUFFIX: Dict[str, Type[ConfigHandler]] = {
    ".json": JSONHandler,
    ".toml": TOMLHandler,
    ".yaml": YAMLHandler,
    ".yml": YAMLHandler,
}


def handler_for_path(file_path: Union[str, Path]) -> ConfigHandler:
    """
    Create the handler matching the suffix of file_path.

    Raises:
        ConfigurationError: If the suffix is not .json, .toml, .yaml or .yml.
    """
    path = Path(file_path)
    try:
        return HANDLERS_BY_SUFFIX[path.suffix.lower()](path)
    except KeyError as e:
        raise ConfigurationError(
            f"cannot tell the format of {path}; use one of {sorted(HANDLERS_BY_SUFFIX)}") from e


__all__ = [
    'ConfigHandler',
    'JSONHandler',
    'TOMLHandler',
    'YAMLHandler',
    'handler_for_path',
]
