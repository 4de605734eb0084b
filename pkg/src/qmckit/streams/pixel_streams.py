"""
Streams bound to one pixel of the image.

Every stream here is created per pixel and evaluates independently of all others,
so pixels can be rendered in any order and in parallel.
"""

# Standard library imports
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

# Third-party imports
import numpy as np

# Local imports
from qmckit.errors import ConfigurationError
from qmckit.imageplane import (
    ImagePlaneHalton, PixelCoord, XorTables, halton_along_hilbert_index, load_xor_tables,
    pixel_shifted_lattice_bits, xor_table_sample_bits,
)
from qmckit.lattice import GeneratorVector, random_lattice_bits
from qmckit.radical import ScrambleFactor, halton_component_bits
from qmckit.streams.sample_stream import SampleStream
from qmckit.streams.sequence_streams import check_halton, resolve_generator_vector, resolve_scramble_factors
from qmckit.unitfloat import as_u32

PixelLike = Union[PixelCoord, Tuple[int, int]]


class PixelStream(SampleStream):
    """
    Base class of per-pixel streams.

    Attributes:
        pixel (PixelCoord): The pixel; a bare (x, y) pair is placed on the Hilbert
            curve of a width x height image.
    """

    def __init__(self, dims: int, pixel: PixelLike, width: Optional[int] = None, height: Optional[int] = None):
        super().__init__(dims)
        if isinstance(pixel, PixelCoord):
            self.pixel = pixel
        else:
            if width is None or height is None:
                raise ConfigurationError(f"{self.kind} stream needs width and height for pixel {tuple(pixel)}")
            x, y = pixel
            self.pixel = PixelCoord.in_image(int(x), int(y), width, height)

    def params(self) -> Dict[str, object]:
        return {**super().params(), "pixel": (self.pixel.x, self.pixel.y)}


class HaltonHilbertStream(PixelStream):
    """One Halton sequence enumerated along the Hilbert curve, spp samples per pixel."""

    kind = "halton_hilbert"

    def __init__(
            self,
            dims: int,
            pixel: PixelLike,
            spp: int,
            mode: str = "plain",
            factors: Union[None, Mapping[int, ScrambleFactor], str, Path] = None,
            width: Optional[int] = None,
            height: Optional[int] = None):
        super().__init__(dims, pixel, width, height)
        check_halton(mode, dims)
        if spp < 1:
            raise ConfigurationError(f"samples per pixel must be positive, got {spp}")
        self.spp = spp
        self.mode = mode
        self.factors = resolve_scramble_factors(factors)

    def _bits(self, index: np.ndarray, j: int) -> np.ndarray:
        global_index, _ = as_u32(halton_along_hilbert_index(index.astype(np.int64), self.pixel, self.spp))
        return halton_component_bits(global_index, j, self.mode, self.factors)

    def params(self) -> Dict[str, object]:
        return {**super().params(), "spp": self.spp, "mode": self.mode}


class PixelShiftedLatticeStream(PixelStream):
    """The shared rank-1 lattice shifted by phi_3 of the pixel's Hilbert index."""

    kind = "pixel_shifted_lattice"

    def __init__(
            self,
            dims: int,
            pixel: PixelLike,
            gv: Union[None, GeneratorVector, Sequence[int], str, Path] = None,
            width: Optional[int] = None,
            height: Optional[int] = None):
        super().__init__(dims, pixel, width, height)
        self.gv = resolve_generator_vector(gv, dims)

    def _bits(self, index: np.ndarray, j: int) -> np.ndarray:
        return pixel_shifted_lattice_bits(index, j, self.pixel, self.gv)


class PixelRandomLatticeStream(PixelStream):
    """
    Rank-1 lattices whose generator components are hashed from (j, x, y).

    With instances = K > 1, sample i comes from lattice i mod K at local index
    i // K, each lattice using its own hash family, so K independently drawn
    lattices are superimposed. K = 1 is the single hashed lattice.
    """

    kind = "pixel_random_lattice"

    def __init__(
            self,
            dims: int,
            pixel: PixelLike,
            instances: int = 1,
            width: Optional[int] = None,
            height: Optional[int] = None):
        super().__init__(dims, pixel, width, height)
        if instances < 1:
            raise ConfigurationError(f"instances must be positive, got {instances}")
        self.instances = instances

    def _bits(self, index: np.ndarray, j: int) -> np.ndarray:
        x, y = self.pixel.x, self.pixel.y
        if self.instances == 1:
            return random_lattice_bits(index, j, x, y)[0]
        result = np.empty(index.shape, dtype=np.uint32)
        instance = index % np.uint32(self.instances)
        for k in range(self.instances):
            selected = instance == k
            local = index[selected] // np.uint32(self.instances)
            result[selected] = random_lattice_bits(local, j, x, y, salt=k)[0]
        return result

    def params(self) -> Dict[str, object]:
        return {**super().params(), "instances": self.instances}


class ImagePlaneHaltonStream(PixelStream):
    """
    The subsequence of a Halton sequence scaled onto the image that falls into one pixel.

    Sample i is the i-th point of the pixel; components 0 and 1 are its position
    inside the pixel.
    """

    kind = "image_plane_halton"

    def __init__(self, dims: int, pixel: PixelLike, width: int, height: int):
        super().__init__(dims, pixel, width, height)
        check_halton("plain", dims)
        self.halton = ImagePlaneHalton(width, height)
        self.halton.offset(self.pixel.x, self.pixel.y)

    def _bits(self, index: np.ndarray, j: int) -> np.ndarray:
        return self.halton.sample_bits(index, self.pixel.x, self.pixel.y, j)

    def params(self) -> Dict[str, object]:
        return {**super().params(), "width": self.halton.width, "height": self.halton.height}


class XorTableStream(PixelStream):
    """Sobol' points reordered and scrambled by the pixel's entries in a pair of XOR tables."""

    kind = "sobol_xor_table"

    def __init__(
            self,
            dims: int,
            pixel: PixelLike,
            tables: Union[XorTables, str, Path],
            width: Optional[int] = None,
            height: Optional[int] = None):
        super().__init__(dims, pixel, width, height)
        self.tables = tables if isinstance(tables, XorTables) else load_xor_tables(tables)
        if dims > self.tables.dims:
            raise ConfigurationError(f"XOR tables cover {self.tables.dims} dimensions, {dims} requested")

    def _bits(self, index: np.ndarray, j: int) -> np.ndarray:
        return xor_table_sample_bits(index, self.pixel, self.tables, j)

    def params(self) -> Dict[str, object]:
        return {**super().params(), "points": self.tables.n_points}
