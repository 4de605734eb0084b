"""
Digital sequences in base 2, concretely the Sobol' sequence.

Component j of the i-th point is the F_2 matrix-vector product of the generator
matrix C_j with the binary digits of i. Each of the 52 columns of C_j is stored as
one 32-bit word aligned to the most significant bit of the output, so the product
is the XOR of the columns selected by the set bits of i. Starting that XOR from a
non-zero word instead of zero realises digit scrambling for free.

Generator matrices come from direction numbers in the Joe-Kuo file layout. A file
covering the first 64 dimensions ships with the package.
"""

# Standard library imports
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from importlib.resources import files
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

# Third-party imports
import numpy as np

# Local imports
from qmckit.errors import DirectionNumberError, IndexRangeError
from qmckit.unitfloat import UnsignedLike, as_u32, as_unsigned, unifloat_from_u32, unwrap_float, unwrap_int

logger = logging.getLogger(__name__)

SOBOL_COLUMNS = 52
SOBOL_INDEX_BITS = 52
BUNDLED_DIRECTION_NUMBERS = "new-joe-kuo-64.txt"


@dataclass(frozen=True)
class DirectionNumbers:
    """
    Sobol' parameters of one dimension.

    Attributes:
        degree (int): Degree s of the primitive polynomial; 0 marks the van der Corput dimension.
        coefficients (int): The inner coefficients a of the polynomial packed into an integer.
        initial (Tuple[int, ...]): Odd initial direction numbers m_1, ..., m_s with m_k < 2**k.
    """
    degree: int
    coefficients: int
    initial: Tuple[int, ...]


VAN_DER_CORPUT = DirectionNumbers(0, 0, ())


@dataclass(frozen=True)
class DirectionNumberSet:
    """
    Direction numbers for consecutive dimensions, dimension 0 being van der Corput.

    Attributes:
        dimensions (Tuple[DirectionNumbers, ...]): Parameters indexed by dimension.
    """
    dimensions: Tuple[DirectionNumbers, ...] = (VAN_DER_CORPUT,)

    def __len__(self) -> int:
        return len(self.dimensions)


@dataclass(frozen=True, eq=False)
class GeneratorMatrixSet:
    """
    Column words of the generator matrices C_j.

    Attributes:
        columns (np.ndarray): uint32 array of shape (dims, 52); columns[j, k] holds
            column k of C_j with row 0 in the most significant bit.
    """
    columns: np.ndarray

    @property
    def dims(self) -> int:
        return self.columns.shape[0]

    @cached_property
    def packed(self) -> np.ndarray:
        """Columns grouped four at a time, shape (dims, 13, 4), as fetched by 128-bit loads."""
        return self.columns.reshape(self.dims, SOBOL_COLUMNS // 4, 4)

    def rank(self, j: int) -> int:
        """Rank over F_2 of the leading 32 x 32 block of C_j."""
        basis = []
        for word in (int(c) for c in self.columns[j, :32]):
            for b in basis:
                word = min(word, word ^ b)
            if word:
                # reduction needs the basis ordered by leading bit
                basis.append(word)
                basis.sort(reverse=True)
        return len(basis)


def parse_direction_numbers(text: str) -> DirectionNumberSet:
    """
    Parse direction numbers in the Joe-Kuo layout.

    A header line is skipped if present; every other non-blank line reads
    "d s a m_1 ... m_s". Dimension 0 is not listed in the file and is synthesised
    as van der Corput.

    Args:
        text (str): File contents.

    Returns:
        DirectionNumberSet: Validated parameters, dimension 0 first.

    Raises:
        DirectionNumberError: On malformed lines, even direction numbers or m_k >= 2**k,
            naming the offending line.
    """
    dimensions = [VAN_DER_CORPUT]
    for line_number, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        try:
            values = [int(t) for t in tokens]
        except ValueError as e:
            if line_number == 1:
                continue  # header
            raise DirectionNumberError(f"non-integer token in {line.strip()!r}", line_number) from e

        if len(values) < 4:
            raise DirectionNumberError(f"expected 'd s a m_1 ... m_s', got {line.strip()!r}", line_number)
        _, degree, coefficients, *initial = values
        if degree < 1 or len(initial) != degree:
            raise DirectionNumberError(f"degree {degree} does not match {len(initial)} direction numbers", line_number)
        if not 0 <= coefficients < 1 << (degree - 1):
            raise DirectionNumberError(f"coefficients {coefficients} do not fit degree {degree}", line_number)
        for k, m in enumerate(initial, start=1):
            if m % 2 == 0:
                raise DirectionNumberError(f"direction number m_{k} = {m} is even", line_number)
            if not 0 < m < 1 << k:
                raise DirectionNumberError(f"direction number m_{k} = {m} is not below 2**{k}", line_number)
        dimensions.append(DirectionNumbers(degree, coefficients, tuple(initial)))

    logger.debug(f"Parsed direction numbers for {len(dimensions)} dimensions")
    return DirectionNumberSet(tuple(dimensions))


def load_direction_numbers(path: Optional[Union[str, Path]] = None) -> DirectionNumberSet:
    """
    Load direction numbers from `path`, or the bundled 64-dimension file.

    Args:
        path: Optional direction-number file.

    Returns:
        DirectionNumberSet: The parsed parameters.
    """
    if path is None:
        text = files("qmckit").joinpath("data", BUNDLED_DIRECTION_NUMBERS).read_text()
        source = BUNDLED_DIRECTION_NUMBERS
    else:
        with open(path, "r") as f:
            text = f.read()
        source = str(path)
    dns = parse_direction_numbers(text)
    logger.info(f"Loaded {len(dns)} Sobol' dimensions from {source}")
    return dns


def _columns(params: DirectionNumbers) -> list:
    v = [0] * SOBOL_COLUMNS
    if params.degree == 0:
        for k in range(32):
            v[k] = 1 << (31 - k)
        return v

    s = params.degree
    for k in range(s):
        v[k] = params.initial[k] << (31 - k)
    for k in range(s, SOBOL_COLUMNS):
        value = v[k - s] ^ (v[k - s] >> s)
        for l in range(1, s):
            if (params.coefficients >> (s - 1 - l)) & 1:
                value ^= v[k - l]
        v[k] = value
    return v


def build_matrices(dns: DirectionNumberSet, dims: int) -> GeneratorMatrixSet:
    """
    Expand direction numbers into 52 column words per dimension.

    Columns k < s are m_{k+1} * 2**(31-k); later columns follow the primitive
    polynomial recurrence v_k = v_{k-s} ^ (v_{k-s} >> s) ^ sum of a_l * v_{k-l}.
    Working on 32-bit words truncates every column consistently, since XOR and
    right shifts never move low bits upwards.

    Args:
        dns (DirectionNumberSet): Parsed direction numbers.
        dims (int): Number of dimensions to build.

    Returns:
        GeneratorMatrixSet: The column words.

    Raises:
        IndexRangeError: If more dimensions are requested than available.
    """
    if not 0 <= dims <= len(dns):
        raise IndexRangeError(f"requested {dims} Sobol' dimensions, {len(dns)} available")
    columns = np.zeros((dims, SOBOL_COLUMNS), dtype=np.uint32)
    for j in range(dims):
        columns[j] = _columns(dns.dimensions[j])
    logger.debug(f"Built Sobol' generator matrices for {dims} dimensions")
    return GeneratorMatrixSet(columns)


@lru_cache(maxsize=1)
def default_matrices() -> GeneratorMatrixSet:
    """Generator matrices for all dimensions of the bundled direction-number file."""
    dns = load_direction_numbers()
    return build_matrices(dns, len(dns))


def _prepare(i: UnsignedLike, j: int, scramble: int, matrices: Optional[GeneratorMatrixSet]):
    matrices = matrices if matrices is not None else default_matrices()
    if not 0 <= j < matrices.dims:
        raise IndexRangeError(f"Sobol' dimension {j} outside [0, {matrices.dims})")
    index, scalar = as_unsigned(i, SOBOL_INDEX_BITS)
    scramble_word, _ = as_u32(scramble)
    return index, scalar, np.full(index.shape, scramble_word[0], dtype=np.uint32), matrices


def sobol_bits(index: np.ndarray, j: int, scramble: np.ndarray, matrices: GeneratorMatrixSet) -> np.ndarray:
    """
    XOR of the columns of C_j selected by the set bits of each uint64 index.

    Args:
        index (np.ndarray): uint64 indices below 2**52.
        j (int): Dimension.
        scramble (np.ndarray): uint32 starting words, one per index.
        matrices (GeneratorMatrixSet): Generator matrices.

    Returns:
        np.ndarray: uint32 results.
    """
    result = scramble.copy()
    columns = matrices.columns[j]
    for k in range(SOBOL_COLUMNS):
        selected = index >> k
        if not selected.any():
            break
        mask = (selected & 1).astype(bool)
        result[mask] ^= columns[k]
    return result


def sobol_component_bits(
        i: UnsignedLike,
        j: int,
        scramble: int = 0,
        matrices: Optional[GeneratorMatrixSet] = None):
    """
    Integer stage of sobol_component: scramble XOR the selected column words.

    Args:
        i: Index or array of indices below 2**52.
        j (int): Dimension.
        scramble (int): XOR scramble word.
        matrices: Generator matrices; the bundled set when omitted.

    Returns:
        int or uint32 array.

    Raises:
        IndexRangeError: If an index reaches 2**52 or j is out of range.
    """
    index, scalar, start, matrices = _prepare(i, j, scramble, matrices)
    return unwrap_int(sobol_bits(index, j, start, matrices), scalar)


def sobol_component_bits_packed(
        i: UnsignedLike,
        j: int,
        scramble: int = 0,
        matrices: Optional[GeneratorMatrixSet] = None):
    """
    sobol_component_bits evaluated four columns per fetch.

    The low 32 index bits consume packed groups 0-7, the upper 20 bits groups 8-12.
    """
    index, scalar, result, matrices = _prepare(i, j, scramble, matrices)
    packed = matrices.packed[j]
    halves = ((index & 0xFFFFFFFF, 0), ((index >> 32) & 0xFFFFF, 8))
    for half, first_group in halves:
        group = first_group
        while half.any():
            for lane in range(4):
                mask = ((half >> lane) & 1).astype(bool)
                result[mask] ^= packed[group, lane]
            half = half >> 4
            group += 1
    return unwrap_int(result, scalar)


def sobol_component(
        i: UnsignedLike,
        j: int,
        scramble: int = 0,
        matrices: Optional[GeneratorMatrixSet] = None):
    """
    Component j of the i-th Sobol' point, optionally XOR-scrambled.

    Args:
        i: Index or array of indices below 2**52.
        j (int): Dimension.
        scramble (int): XOR scramble word; 0 gives the plain sequence.
        matrices: Generator matrices; the bundled set when omitted.

    Returns:
        np.float32 or float32 array in [0, 1).
    """
    index, scalar, start, matrices = _prepare(i, j, scramble, matrices)
    return unwrap_float(unifloat_from_u32(sobol_bits(index, j, start, matrices)), scalar)


def sobol_point(
        i: UnsignedLike,
        dims: int,
        scrambles: Optional[Sequence[int]] = None,
        matrices: Optional[GeneratorMatrixSet] = None):
    """
    The first `dims` components of the i-th Sobol' point.

    Args:
        i: Index or array of indices below 2**52.
        dims (int): Number of components.
        scrambles: One XOR word per dimension; zeros when omitted.
        matrices: Generator matrices; the bundled set when omitted.

    Returns:
        float32 array of shape (dims,) for a scalar index, (n, dims) otherwise.
    """
    matrices = matrices if matrices is not None else default_matrices()
    if not 0 <= dims <= matrices.dims:
        raise IndexRangeError(f"requested {dims} Sobol' dimensions, {matrices.dims} available")
    words = [0] * dims if scrambles is None else [int(s) for s in scrambles]
    if len(words) != dims:
        raise IndexRangeError(f"expected {dims} scramble words, got {len(words)}")
    index, scalar = as_unsigned(i, SOBOL_INDEX_BITS)
    columns = [sobol_component(index, j, words[j], matrices) for j in range(dims)]
    points = np.stack(columns, axis=-1) if columns else np.zeros((index.size, 0), dtype=np.float32)
    return points[0] if scalar else points


def random_scrambles(dims: int, seed: int) -> np.ndarray:
    """Deterministic per-dimension XOR scramble words drawn from a seeded generator."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, 1 << 32, size=dims, dtype=np.uint64).astype(np.uint32)
