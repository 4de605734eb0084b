"""
Streams over one global sequence, shared by all pixels.
"""

# Standard library imports
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Union

# Third-party imports
import numpy as np

# Local imports
from qmckit.digitalnet import (
    SOBOL_INDEX_BITS, GeneratorMatrixSet, build_matrices, default_matrices, load_direction_numbers,
    random_scrambles, sobol_bits,
)
from qmckit.errors import ConfigurationError
from qmckit.lattice import DEFAULT_LFSR_SEED, GeneratorVector, lattice_bits, lfsr_generator_vector, pixel_hash
from qmckit.radical import HALTON_MODES, PRIMES, ScrambleFactor, halton_component_bits, load_scramble_factors
from qmckit.streams.sample_stream import SampleStream
from qmckit.unitfloat import U32_MAX

PathLike = Union[str, Path]


def resolve_generator_vector(gv: Union[None, GeneratorVector, Sequence[int], PathLike], dims: int) -> GeneratorVector:
    """
    A generator vector with at least `dims` components.

    None selects lfsr_generator_vector(0xACE1, dims); a path is read with
    GeneratorVector.from_file.
    """
    if gv is None:
        vector = lfsr_generator_vector(DEFAULT_LFSR_SEED, dims)
    elif isinstance(gv, GeneratorVector):
        vector = gv
    elif isinstance(gv, (str, Path)):
        vector = GeneratorVector.from_file(gv)
    else:
        vector = GeneratorVector(tuple(gv))
    if len(vector) < dims:
        raise ConfigurationError(f"generator vector has {len(vector)} components, {dims} needed")
    return vector


def resolve_scramble_factors(
        factors: Union[None, Mapping[int, ScrambleFactor], PathLike]) -> Optional[Mapping[int, ScrambleFactor]]:
    """Scramble factors from a mapping or a factor file."""
    if isinstance(factors, (str, Path)):
        return load_scramble_factors(factors)
    return factors


def check_halton(mode: str, dims: int) -> None:
    """Reject unknown Halton modes and more dimensions than tabulated primes."""
    if mode not in HALTON_MODES:
        raise ConfigurationError(f"unknown Halton mode '{mode}', expected one of {HALTON_MODES}")
    if dims > len(PRIMES):
        raise ConfigurationError(f"Halton streams support at most {len(PRIMES)} dimensions, got {dims}")


class SobolStream(SampleStream):
    """
    The Sobol' sequence with optional per-dimension XOR scrambles.

    Scramble words come from `scrambles` if given, else from `seed` via
    random_scrambles, else are zero.
    """

    kind = "sobol"
    index_bits = SOBOL_INDEX_BITS

    def __init__(
            self,
            dims: int,
            seed: Optional[int] = None,
            scrambles: Optional[Sequence[int]] = None,
            dirnums: Optional[PathLike] = None,
            matrices: Optional[GeneratorMatrixSet] = None):
        super().__init__(dims)
        if matrices is None and dirnums is None:
            matrices = default_matrices()
        elif matrices is None:
            dns = load_direction_numbers(dirnums)
            if dims > len(dns):
                raise ConfigurationError(f"{dirnums} covers {len(dns)} dimensions, {dims} requested")
            matrices = build_matrices(dns, dims)
        if dims > matrices.dims:
            raise ConfigurationError(f"Sobol' matrices cover {matrices.dims} dimensions, {dims} requested")
        self.matrices = matrices
        self.seed = seed

        if scrambles is not None:
            words = np.array([int(s) for s in scrambles], dtype=np.uint64)
            if words.size != dims or (words.size and int(words.max()) > U32_MAX):
                raise ConfigurationError(f"expected {dims} 32-bit scramble words, got {list(scrambles)}")
            self.scrambles = words.astype(np.uint32)
        elif seed is not None:
            self.scrambles = random_scrambles(dims, seed)
        else:
            self.scrambles = np.zeros(dims, dtype=np.uint32)

    def _bits(self, index: np.ndarray, j: int) -> np.ndarray:
        start = np.full(index.shape, self.scrambles[j], dtype=np.uint32)
        return sobol_bits(index.astype(np.uint64), j, start, self.matrices)

    def params(self) -> Dict[str, object]:
        return {**super().params(), "seed": self.seed}


class HaltonStream(SampleStream):
    """The Halton sequence, plain or with Faure or linear digit scrambling."""

    kind = "halton"

    def __init__(
            self,
            dims: int,
            mode: str = "plain",
            factors: Union[None, Mapping[int, ScrambleFactor], PathLike] = None):
        super().__init__(dims)
        check_halton(mode, dims)
        self.mode = mode
        self.factors = resolve_scramble_factors(factors)

    def _bits(self, index: np.ndarray, j: int) -> np.ndarray:
        return halton_component_bits(index, j, self.mode, self.factors)

    def params(self) -> Dict[str, object]:
        return {**super().params(), "mode": self.mode}


class LatticeStream(SampleStream):
    """A rank-1 lattice sequence with one generator vector for the whole image."""

    kind = "lattice"

    def __init__(self, dims: int, gv: Union[None, GeneratorVector, Sequence[int], PathLike] = None):
        super().__init__(dims)
        self.gv = resolve_generator_vector(gv, dims)

    def _bits(self, index: np.ndarray, j: int) -> np.ndarray:
        return lattice_bits(index, self.gv.array[j])

    def params(self) -> Dict[str, object]:
        return {**super().params(), "gv": list(self.gv.components[:self.dims])}


class RandomStream(SampleStream):
    """
    Independent uniform samples from a counter-based hash of (j, i, seed).

    Stateless like the deterministic samplers, so it partitions and parallelises
    the same way.
    """

    kind = "random"

    def __init__(self, dims: int, seed: int = 0):
        super().__init__(dims)
        self.seed = seed

    def _bits(self, index: np.ndarray, j: int) -> np.ndarray:
        return np.atleast_1d(pixel_hash(j, index, self.seed & U32_MAX))

    def params(self) -> Dict[str, object]:
        return {**super().params(), "seed": self.seed}
