"""
Common interface of the profile and report handlers.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Union


class ConfigHandler(ABC):
    """
    Reads and writes one file as a nested dictionary.

    A missing file loads as an empty dictionary, so callers can fall back to
    defaults. Unparsable content raises ConfigurationError.

    Attributes:
        file_path (Path): The file handled.
    """

    def __init__(self, file_path: Union[str, Path]):
        """
        Args:
            file_path (Union[str, Path]): The file to read and write.
        """
        self.file_path = Path(file_path)

    @abstractmethod
    def load(self) -> Dict:
        """
        Read the file.

        Returns:
            Dict: The contents, empty if the file does not exist.

        Raises:
            ConfigurationError: If the file is not valid in the handler's format.
        """
        pass

    @abstractmethod
    def save(self, data: Dict) -> None:
        """
        Write data to the file, replacing its contents.

        Args:
            data (Dict): Values to write.

        Raises:
            OSError: If the file cannot be written.
        """
        pass
