"""
Sample stream interface.

A stream is a stateless evaluator of sample(i, j): component j of the i-th sample.
Concrete streams implement only the integer stage; conversion to binary32 and the
assembly of points are shared here.
"""

from abc import ABC, abstractmethod
from typing import ClassVar, Dict

import numpy as np

from qmckit.errors import ConfigurationError, IndexRangeError
from qmckit.unitfloat import UnsignedLike, as_unsigned, unifloat_from_u32, unwrap_float


class SampleStream(ABC):
    """
    Abstract base class of all samplers exposed through make_stream.

    Attributes:
        kind (str): Registry name of the sampler.
        index_bits (int): Indices must lie in [0, 2**index_bits).
        dims (int): Number of components per sample.
    """

    kind: ClassVar[str] = ""
    index_bits: ClassVar[int] = 32

    def __init__(self, dims: int):
        """
        Initialize the stream.

        Args:
            dims (int): Number of components per sample, at least 1.
        """
        if dims < 1:
            raise ConfigurationError(f"{self.kind} stream needs at least one dimension, got {dims}")
        self.dims = dims

    @abstractmethod
    def _bits(self, index: np.ndarray, j: int) -> np.ndarray:
        """
        Integer stage of component j.

        Args:
            index (np.ndarray): One-dimensional unsigned indices, already range checked.
            j (int): Component, already range checked.

        Returns:
            np.ndarray: uint32 fixed-point values, one per index.
        """
        pass

    def params(self) -> Dict[str, object]:
        """Parameters that identify the stream, for reports."""
        return {"kind": self.kind, "dims": self.dims}

    def _check(self, indices: UnsignedLike, j: int):
        if not 0 <= j < self.dims:
            raise IndexRangeError(f"component {j} outside [0, {self.dims}) of the {self.kind} stream")
        return as_unsigned(indices, self.index_bits)

    def bits(self, indices: UnsignedLike, j: int) -> np.ndarray:
        """Component j of the given samples in 32-bit fixed point."""
        index, _ = self._check(indices, j)
        return self._bits(index, j).astype(np.uint32)

    def samples(self, indices: UnsignedLike, j: int) -> np.ndarray:
        """Component j of the given samples as a float32 array."""
        return unifloat_from_u32(self.bits(indices, j))

    def sample(self, i: int, j: int) -> np.float32:
        """Component j of sample i."""
        index, scalar = self._check(i, j)
        return unwrap_float(unifloat_from_u32(self._bits(index, j).astype(np.uint32)), scalar)

    def points(self, indices: UnsignedLike) -> np.ndarray:
        """All components of the given samples, float32 of shape (n, dims)."""
        index, _ = as_unsigned(indices, self.index_bits)
        return np.stack([self.samples(index, j) for j in range(self.dims)], axis=-1)

    def point(self, i: int) -> np.ndarray:
        """All components of sample i, float32 of shape (dims,)."""
        return self.points([i])[0]
