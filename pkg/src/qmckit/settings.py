"""
Run profiles.

A profile collects everything a command needs: the sampler, the image and the run
parameters. Profiles are validated pydantic dataclasses, stored in JSON, TOML or
YAML through the handlers, merged over defaults when a file sets only some values,
and addressed with dot notation such as "image.spp".
"""

# Standard imports
import logging
from dataclasses import asdict, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Type, Union

# Third-party imports
from pydantic import ConfigDict, Field, ValidationError, field_validator
from pydantic.dataclasses import dataclass

# Local imports
from qmckit.errors import ConfigurationError
from qmckit.handlers import ConfigHandler, handler_for_path
from qmckit.streams import SamplerKind

_VALIDATED = ConfigDict(validate_assignment=True)


@dataclass(config=_VALIDATED)
class SamplerSettings:
    """
    Sampler selection and its parameters.

    Paths are kept as strings; None means the built-in default.
    """
    kind: str = "sobol"
    dims: int = Field(default=2, ge=1)
    seed: Optional[int] = None
    mode: Literal["plain", "faure", "linear"] = "plain"
    gv: Optional[str] = None
    dirnums: Optional[str] = None
    factors: Optional[str] = None
    tables: Optional[str] = None
    instances: int = Field(default=1, ge=1)

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, value: str) -> str:
        return SamplerKind(value).value


@dataclass(config=_VALIDATED)
class ImageSettings:
    width: int = Field(default=64, ge=1)
    height: int = Field(default=64, ge=1)
    spp: int = Field(default=16, ge=1)


@dataclass(config=_VALIDATED)
class RunSettings:
    """Parameters of the point, integration, check and benchmark commands."""
    n: int = Field(default=1024, ge=1)
    workers: int = Field(default=1, ge=1)
    accum: Literal["kahan", "int"] = "kahan"
    integrand: str = "product-sine"
    schedule: List[int] = Field(default_factory=lambda: [256, 1024, 4096])
    m_max: int = Field(default=12, ge=0, le=32)
    count: int = Field(default=1 << 16, ge=1)


@dataclass(config=_VALIDATED)
class Profile:
    sampler: SamplerSettings = Field(default_factory=SamplerSettings)
    image: ImageSettings = Field(default_factory=ImageSettings)
    run: RunSettings = Field(default_factory=RunSettings)


class Settings:
    """
    Holds one Profile and keeps it in sync with a profile file.

    Attributes:
        profile (Profile): The current values.
        handler (Optional[ConfigHandler]): Handler of the profile file, if any.
        logger (logging.Logger): Logger of this module.
    """

    def __init__(self, handler: Optional[ConfigHandler] = None, config_model: Type[Profile] = Profile):
        """
        Create settings from defaults, then load the handler's file if one is given.

        Args:
            handler: Handler of the profile file.
            config_model: The profile dataclass.
        """
        self.logger = logging.getLogger(__name__)
        self.config_model = config_model
        self.handler = handler
        self.profile = config_model()
        if handler is not None:
            self.load()

    @classmethod
    def from_file(cls, file_path: Union[str, Path]) -> "Settings":
        """Settings backed by file_path, the format taken from its suffix."""
        return cls(handler_for_path(file_path))

    @property
    def file_path(self) -> Optional[Path]:
        return self.handler.file_path if self.handler is not None else None

    def load(self) -> None:
        """
        Load the profile file, merging its values over the defaults.

        A missing or empty file yields the defaults, which are written back.

        Raises:
            ConfigurationError: If the file holds invalid values.
        """
        data = self.handler.load()
        if not data:
            self.logger.warning(f"Profile {self.file_path} is empty. Using defaults.")
            self.profile = self.config_model()
            self.save_config()
            return
        self.profile = self._from_dict(data)
        self.logger.info(f"Profile loaded from {self.file_path}.")

    def _from_dict(self, data: Dict[str, Any]) -> Profile:
        """
        Merge a nested dictionary into a fresh profile.

        Raises:
            ConfigurationError: On values of the wrong shape or out of range.
        """
        def merge_instance(cls, values, instance):
            if not isinstance(values, dict):
                raise TypeError(f"expected a table for {cls.__name__}, got {type(values).__name__}")
            known = {f.name: f.type for f in fields(cls)}
            for key in values.keys() - known.keys():
                self.logger.warning(f"Ignoring unknown profile key '{key}' in {cls.__name__}")
            for key, field_type in known.items():
                if key not in values:
                    continue
                value = values[key]
                if is_dataclass(field_type):
                    merge_instance(field_type, value, getattr(instance, key))
                else:
                    setattr(instance, key, value)
            return instance

        try:
            return merge_instance(self.config_model, data, self.config_model())
        except (ValidationError, TypeError, ValueError) as e:
            self.logger.error(f"Failed to merge profile: {e}")
            raise ConfigurationError(f"invalid profile {self.file_path or ''}: {e}") from e

    def save_config(self, file_path: Optional[Union[str, Path]] = None) -> None:
        """
        Write the profile to its file, or to file_path in the format of its suffix.

        Raises:
            ConfigurationError: If there is neither a handler nor a file_path.
            OSError: If the file cannot be written.
        """
        handler = handler_for_path(file_path) if file_path is not None else self.handler
        if handler is None:
            raise ConfigurationError("settings have no profile file to save to")
        try:
            handler.file_path.parent.mkdir(parents=True, exist_ok=True)
            handler.save(self.to_dict())
        except OSError as e:
            self.logger.error(f"Failed to save profile to {handler.file_path}: {e}")
            raise
        self.logger.info(f"Profile saved to {handler.file_path}.")

    def to_dict(self) -> Dict[str, Any]:
        """The profile as a nested dictionary."""
        return asdict(self.profile)

    def get(self, key: str, default: Any = None) -> Any:
        """
        Value at a dot-notation key such as "sampler.dims", or default.
        """
        value = self.profile
        for k in key.split("."):
            if not is_dataclass(value) or not hasattr(value, k):
                return default
            value = getattr(value, k)
        return value

    def set(self, key: str, value: Any, save: bool = True) -> None:
        """
        Update the value at a dot-notation key, validating it.

        Args:
            key: Dot-notation key.
            value: New value.
            save: Write the profile file afterwards when there is one.

        Raises:
            KeyError: If the key does not name a setting.
            ConfigurationError: If the value is rejected by validation.
        """
        *path, last = key.split(".")
        target = self.profile
        for k in path:
            target = getattr(target, k, None)
            if not is_dataclass(target):
                raise KeyError(f"Invalid profile key: {key}")
        if last not in {f.name for f in fields(target)}:
            raise KeyError(f"Invalid profile key: {key}")
        try:
            setattr(target, last, value)
        except ValidationError as e:
            raise ConfigurationError(f"invalid value {value!r} for '{key}': {e}") from e

        if save and self.handler is not None:
            self.save_config()
        self.logger.debug(f"Updated profile key '{key}' to {value!r}.")

    def update(self, values: Dict[str, Any]) -> None:
        """Apply dot-notation overrides, skipping None values, without saving."""
        for key, value in values.items():
            if value is not None:
                self.set(key, value, save=False)
