"""
Sample streams for every sampler kind.

Each stream implements the SampleStream interface. make_stream builds one from a
kind name and keyword parameters, which is how the CLI, the renderer and the
quality harness obtain samplers.
"""

# Standard library imports
import inspect
import logging
from enum import Enum
from typing import Dict, Type, Union

# Local imports
from qmckit.errors import ConfigurationError
from qmckit.streams.pixel_streams import (
    HaltonHilbertStream, ImagePlaneHaltonStream, PixelRandomLatticeStream, PixelShiftedLatticeStream, PixelStream,
    XorTableStream,
)
from qmckit.streams.sample_stream import SampleStream
from qmckit.streams.sequence_streams import HaltonStream, LatticeStream, RandomStream, SobolStream

logger = logging.getLogger(__name__)


class SamplerKind(str, Enum):
    SOBOL = "sobol"
    HALTON = "halton"
    LATTICE = "lattice"
    RANDOM = "random"
    HALTON_HILBERT = "halton_hilbert"
    PIXEL_SHIFTED_LATTICE = "pixel_shifted_lattice"
    PIXEL_RANDOM_LATTICE = "pixel_random_lattice"
    IMAGE_PLANE_HALTON = "image_plane_halton"
    SOBOL_XOR_TABLE = "sobol_xor_table"

    @property
    def per_pixel(self) -> bool:
        """True for kinds whose streams are bound to a pixel."""
        return issubclass(STREAM_CLASSES[self], PixelStream)


STREAM_CLASSES: Dict[SamplerKind, Type[SampleStream]] = {
    SamplerKind.SOBOL: SobolStream,
    SamplerKind.HALTON: HaltonStream,
    SamplerKind.LATTICE: LatticeStream,
    SamplerKind.RANDOM: RandomStream,
    SamplerKind.HALTON_HILBERT: HaltonHilbertStream,
    SamplerKind.PIXEL_SHIFTED_LATTICE: PixelShiftedLatticeStream,
    SamplerKind.PIXEL_RANDOM_LATTICE: PixelRandomLatticeStream,
    SamplerKind.IMAGE_PLANE_HALTON: ImagePlaneHaltonStream,
    SamplerKind.SOBOL_XOR_TABLE: XorTableStream,
}


def make_stream(kind: Union[str, SamplerKind], **params) -> SampleStream:
    """
    Build the stream of the given kind.

    Args:
        kind: A SamplerKind or its value, e.g. 'pixel_shifted_lattice'.
        **params: Constructor parameters of the kind; `dims` is always required,
            pixel kinds also need `pixel` and, for a bare (x, y) pair, the image size.

    Returns:
        SampleStream: The configured stream.

    Raises:
        ConfigurationError: For an unknown kind, missing or unexpected parameters.
    """
    try:
        kind = SamplerKind(kind)
    except ValueError as e:
        raise ConfigurationError(
            f"unknown sampler kind '{kind}', expected one of {[k.value for k in SamplerKind]}") from e

    cls = STREAM_CLASSES[kind]
    try:
        inspect.signature(cls.__init__).bind(None, **params)
    except TypeError as e:
        logger.error(f"Invalid parameters for {kind.value}: {e}")
        raise ConfigurationError(f"invalid parameters for sampler '{kind.value}': {e}") from e
    return cls(**params)


__all__ = [
    'SampleStream',
    'PixelStream',
    'SamplerKind',
    'STREAM_CLASSES',
    'make_stream',
    'SobolStream',
    'HaltonStream',
    'LatticeStream',
    'RandomStream',
    'HaltonHilbertStream',
    'PixelShiftedLatticeStream',
    'PixelRandomLatticeStream',
    'ImagePlaneHaltonStream',
    'XorTableStream',
]
