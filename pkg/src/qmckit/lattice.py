"""
Rank-1 lattice sequences in base 2.

The i-th point is (phi_2(i) * g) mod 1 for a generator vector g of odd 32-bit
components. In 32-bit fixed point phi_2(i) is bit_reverse32(i), and wrapping
multiplication drops exactly the integer part, so the whole sampler is one bit
reversal and one multiplication per component.

Besides the shared-vector sequence this module offers per-pixel generator vectors
drawn from a hash of (dimension, pixel), an LFSR-driven vector, an admissibility
analysis of generator vectors and the block shifts that relate the lattice to its
own shifted copies.
"""

# Standard library imports
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

# Third-party imports
import numpy as np

# Local imports
from qmckit.errors import GeneratorVectorError, IndexRangeError
from qmckit.unitfloat import U32_MAX, UnsignedLike, as_u32, bit_reverse_u32, unifloat_from_u32, unwrap_float, unwrap_int

logger = logging.getLogger(__name__)

# Galois register for x^31 + x^28 + 1, a primitive trinomial; period 2**31 - 1.
LFSR_TAPS = 0x48000000
LFSR_BITS = 31
DEFAULT_LFSR_SEED = 0xACE1

# Seed word of the pixel hash and the multiplier that spreads salts.
HASH_SEED = 0x5BD1E995
HASH_SALT_STEP = 0x9E3779B9

# g mod 2**m below 2**m / SMALL_COMPONENT_RATIO is reported as small.
SMALL_COMPONENT_RATIO = 64


@dataclass(frozen=True)
class GeneratorVector:
    """
    Odd 32-bit components g_0, ..., g_{s-1} of a rank-1 lattice.

    Attributes:
        components (Tuple[int, ...]): The generator components.
    """
    components: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(int(g) for g in self.components))
        for j, g in enumerate(self.components):
            if not 0 <= g <= U32_MAX:
                raise GeneratorVectorError(f"component {j} = {g} does not fit 32 bits")
            if g % 2 == 0:
                raise GeneratorVectorError(f"component {j} = {g} is even")

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, j: int) -> int:
        return self.components[j]

    @cached_property
    def array(self) -> np.ndarray:
        """Components as a uint32 array."""
        return np.array(self.components, dtype=np.uint32)

    @classmethod
    def from_file(cls, path: Union[str, Path], m_max: Optional[int] = 16) -> "GeneratorVector":
        """
        Read one decimal component per line; blank lines and '#' comments are skipped.

        Args:
            path: Generator-vector file.
            m_max: Run check_admissible up to this m and log its findings; None skips the check.

        Raises:
            GeneratorVectorError: On unparsable, even or oversized components.
        """
        components = []
        with open(path, "r") as f:
            for line_number, line in enumerate(f, start=1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                try:
                    components.append(int(text))
                except ValueError as e:
                    raise GeneratorVectorError(f"{path}, line {line_number}: not an integer: {text!r}") from e
        try:
            vector = cls(tuple(components))
        except GeneratorVectorError as e:
            logger.error(f"Invalid generator vector in {path}: {e}")
            raise
        logger.info(f"Loaded {len(vector)} generator components from {path}")

        if m_max is not None:
            report = check_admissible(vector, min(m_max, 32))
            for level in report.levels:
                if not level.unique_mod_ok or level.symmetry_collisions:
                    logger.warning(
                        f"Generator vector from {path} at m={level.m}: "
                        f"{level.duplicates} duplicate(s), {len(level.symmetry_collisions)} symmetry collision(s)")
        return vector

    def to_file(self, path: Union[str, Path]) -> None:
        """Write the components one per line."""
        with open(path, "w") as f:
            f.writelines(f"{g}\n" for g in self.components)
        logger.info(f"Saved {len(self)} generator components to {path}")


VectorLike = Union[GeneratorVector, Sequence[int]]


def _vector(g: VectorLike) -> GeneratorVector:
    return g if isinstance(g, GeneratorVector) else GeneratorVector(tuple(g))


def lattice_bits(index: np.ndarray, g: np.ndarray) -> np.ndarray:
    """bit_reverse32(index) times g with 32-bit wrap-around; arguments broadcast."""
    return bit_reverse_u32(index) * g.astype(np.uint32)


def lattice_component_bits(i: UnsignedLike, g_j: UnsignedLike):
    """Integer stage of lattice_component."""
    index, scalar = as_u32(i)
    g, g_scalar = as_u32(g_j)
    return unwrap_int(lattice_bits(index, g), scalar and g_scalar)


def lattice_component(i: UnsignedLike, g_j: UnsignedLike):
    """
    One lattice coordinate, map_u32_to_unifloat(bit_reverse32(i) * g_j mod 2**32).

    Args:
        i: Index or array of indices.
        g_j: Generator component(s); broadcast against i.

    Returns:
        np.float32 or float32 array.
    """
    index, scalar = as_u32(i)
    g, g_scalar = as_u32(g_j)
    return unwrap_float(unifloat_from_u32(lattice_bits(index, g)), scalar and g_scalar)


def lattice_point(i: UnsignedLike, g: VectorLike):
    """
    The i-th point of the rank-1 lattice sequence with generator vector g.

    Returns:
        float32 array of shape (s,) for a scalar index, (n, s) otherwise.
    """
    vector = _vector(g)
    index, scalar = as_u32(i)
    bits = lattice_bits(index[:, None], vector.array[None, :])
    points = unifloat_from_u32(bits.ravel()).reshape(bits.shape)
    return points[0] if scalar else points


def _mix32(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> 16)
    x = x * np.uint32(0x7FEB352D)
    x = x ^ (x >> 15)
    x = x * np.uint32(0x846CA68B)
    return x ^ (x >> 16)


def pixel_hash(j: UnsignedLike, px: UnsignedLike, py: UnsignedLike, salt: int = 0):
    """
    32-bit hash of (dimension, pixel x, pixel y).

    Each input is folded into the state with xor and then passed through the
    lowbias32 finalizer (xorshift 16, multiply 0x7feb352d, xorshift 15, multiply
    0x846ca68b, xorshift 16). The state starts at HASH_SEED ^ (salt * 0x9e3779b9),
    so different salts give independent hash families.

    Args:
        j: Dimension(s).
        px: Pixel x coordinate(s).
        py: Pixel y coordinate(s).
        salt (int): Selects the hash family; 0 is the default one.

    Returns:
        int if every input is a scalar, otherwise a broadcast uint32 array.
    """
    jj, j_scalar = as_u32(j)
    xx, x_scalar = as_u32(px)
    yy, y_scalar = as_u32(py)
    jj, xx, yy = np.broadcast_arrays(jj, xx, yy)
    start = np.uint32((HASH_SEED ^ (salt * HASH_SALT_STEP)) & U32_MAX)
    h = _mix32(jj ^ start)
    h = _mix32(h ^ xx)
    h = _mix32(h ^ yy)
    return unwrap_int(h, j_scalar and x_scalar and y_scalar)


HashFunction = Callable[[UnsignedLike, UnsignedLike, UnsignedLike], UnsignedLike]


def random_lattice_bits(
        i: UnsignedLike,
        j: UnsignedLike,
        px: UnsignedLike,
        py: UnsignedLike,
        salt: int = 0,
        hash_fn: Optional[HashFunction] = None):
    """Integer stage of random_lattice_component."""
    index, scalar = as_u32(i)
    g = hash_fn(j, px, py) if hash_fn is not None else pixel_hash(j, px, py, salt)
    g_arr, g_scalar = as_u32(g)
    bits = lattice_bits(np.uint32(U32_MAX) - index, g_arr | np.uint32(1))
    return bits, scalar and g_scalar


def random_lattice_component(
        i: UnsignedLike,
        j: UnsignedLike,
        px: UnsignedLike,
        py: UnsignedLike,
        salt: int = 0,
        hash_fn: Optional[HashFunction] = None):
    """
    Rank-1 lattice with a generator component hashed from (j, px, py).

    Indices run backwards, bit_reverse32(0xFFFFFFFF - i), so the origin shared by
    every pixel's lattice is reached only at i = 0xFFFFFFFF.

    Args:
        i: Index or array of indices.
        j: Dimension.
        px: Pixel x coordinate.
        py: Pixel y coordinate.
        salt (int): Hash family, used to superimpose independent lattices.
        hash_fn: Replacement for pixel_hash(j, px, py); its value is forced odd.

    Returns:
        np.float32 or float32 array.
    """
    bits, scalar = random_lattice_bits(i, j, px, py, salt, hash_fn)
    return unwrap_float(unifloat_from_u32(bits), scalar)


def _lfsr_advance(state: int) -> int:
    for _ in range(LFSR_BITS):
        lsb = state & 1
        state >>= 1
        if lsb:
            state ^= LFSR_TAPS
    return state


def lfsr_generator_vector(seed: int = DEFAULT_LFSR_SEED, dims: int = 1) -> GeneratorVector:
    """
    Generator vector g_0 = 1, g_j = 2 * xi_j + 1 from successive LFSR states.

    The register is a 31-bit Galois LFSR with taps 0x48000000 (x^31 + x^28 + 1),
    advanced 31 steps per output. Since 31 is coprime to the period 2**31 - 1, the
    outputs run through all non-zero states before repeating and the components
    are pairwise distinct.

    Args:
        seed (int): Initial register state in [1, 2**31).
        dims (int): Number of components, at least 1.

    Returns:
        GeneratorVector: The vector.

    Raises:
        GeneratorVectorError: On a zero or oversized seed or dims < 1.
    """
    if not 0 < seed < 1 << LFSR_BITS:
        raise GeneratorVectorError(f"LFSR seed must be in [1, 2**{LFSR_BITS}), got {seed}")
    if dims < 1:
        raise GeneratorVectorError(f"a generator vector needs at least one component, got {dims}")
    components = [1]
    state = seed
    for _ in range(dims - 1):
        state = _lfsr_advance(state)
        components.append(2 * state + 1)
    return GeneratorVector(tuple(components))


@dataclass(frozen=True)
class AdmissibilityLevel:
    """
    Findings for one m.

    Attributes:
        m (int): The block size exponent.
        unique_mod_ok (bool): duplicates == 0 and repeated_components == 0.
        duplicates (int): Colliding components mod 2**m among the first 2**(m-1).
        duplicates_full (int): Colliding components mod 2**m among the first 2**m.
        repeated_components (int): Components equal to an earlier one anywhere in the
            vector. Such pairs give identical dimensions at every m, so they fail
            every level even where the first 2**(m-1) components are distinct.
        symmetry_collisions (Tuple[Tuple[int, int], ...]): Pairs j < k among the first
            2**(m-1) with g_j = -g_k mod 2**m.
        small_component_warnings (Tuple[int, ...]): Indices j with g_j mod 2**m below
            2**m / 64.
    """
    m: int
    unique_mod_ok: bool
    duplicates: int
    duplicates_full: int
    repeated_components: int = 0
    symmetry_collisions: Tuple[Tuple[int, int], ...] = ()
    small_component_warnings: Tuple[int, ...] = ()


@dataclass(frozen=True)
class AdmissibilityReport:
    """
    Admissibility of a generator vector for m = 1, ..., m_max.

    Attributes:
        m_max (int): Largest m covered.
        levels (Tuple[AdmissibilityLevel, ...]): One entry per m, in order.
    """
    m_max: int
    levels: Tuple[AdmissibilityLevel, ...] = field(default_factory=tuple)

    def level(self, m: int) -> AdmissibilityLevel:
        if not 1 <= m <= self.m_max:
            raise IndexRangeError(f"m={m} outside the report range [1, {self.m_max}]")
        return self.levels[m - 1]

    @property
    def admissible(self) -> bool:
        """True when every level passes the uniqueness test."""
        return all(level.unique_mod_ok for level in self.levels)

    def to_rows(self) -> List[Dict[str, object]]:
        """One flat dictionary per m, for CSV or JSON reports."""
        return [
            {
                "m": level.m,
                "unique_mod_ok": level.unique_mod_ok,
                "duplicates": level.duplicates,
                "duplicates_full": level.duplicates_full,
                "repeated_components": level.repeated_components,
                "symmetry_collisions": len(level.symmetry_collisions),
                "small_components": len(level.small_component_warnings),
            }
            for level in self.levels
        ]


def _count_duplicates(residues: Sequence[int]) -> int:
    return len(residues) - len(set(residues))


def check_admissible(g: VectorLike, m_max: int) -> AdmissibilityReport:
    """
    Analyse a generator vector for m = 1, ..., m_max.

    Two components equal mod 2**m sample their dimensions identically for the first
    2**m points; g_j = -g_k mod 2**m yields mirrored coordinates; components that are
    small compared to 2**m give visible structure for that block size.

    Args:
        g: Generator vector.
        m_max (int): Largest m, at most 32.

    Returns:
        AdmissibilityReport: Findings per m.

    Raises:
        IndexRangeError: If m_max is outside [0, 32].
    """
    if not 0 <= m_max <= 32:
        raise IndexRangeError(f"m_max must be in [0, 32], got {m_max}")
    components = _vector(g).components
    repeated = _count_duplicates(components)

    levels = []
    for m in range(1, m_max + 1):
        modulus = 1 << m
        residues = [c % modulus for c in components]
        head = residues[:min(1 << (m - 1), len(residues))]
        duplicates = _count_duplicates(head)

        collisions = []
        seen: Dict[int, int] = {}
        for k, r in enumerate(head):
            partner = seen.get((modulus - r) % modulus)
            if partner is not None:
                collisions.append((partner, k))
            seen.setdefault(r, k)

        levels.append(AdmissibilityLevel(
            m=m,
            unique_mod_ok=duplicates == 0 and repeated == 0,
            duplicates=duplicates,
            duplicates_full=_count_duplicates(residues[:modulus]),
            repeated_components=repeated,
            symmetry_collisions=tuple(collisions),
            small_component_warnings=tuple(
                j for j, r in enumerate(residues) if r * SMALL_COMPONENT_RATIO < modulus),
        ))

    report = AdmissibilityReport(m_max, tuple(levels))
    logger.debug(f"Checked {len(components)} generator components up to m={m_max}")
    return report


@dataclass(frozen=True, eq=False)
class LatticeShift:
    """
    The shift between block k of size 2**m and block 0 of a rank-1 lattice.

    Attributes:
        k (int): Block index.
        m (int): Block size exponent.
        bits (np.ndarray): uint32 fixed-point shift per dimension.
    """
    k: int
    m: int
    bits: np.ndarray

    @property
    def values(self) -> np.ndarray:
        """The shift as float32 values in [0, 1)."""
        return unifloat_from_u32(self.bits)

    def apply(self, bits: np.ndarray) -> np.ndarray:
        """Add the shift to integer-stage lattice points with 32-bit wrap-around."""
        return bits.astype(np.uint32) + self.bits


def lattice_shift(k: int, m: int, g: VectorLike) -> LatticeShift:
    """
    Shift Delta_k with point(i + k * 2**m) = point(i) + Delta_k mod 1 for i < 2**m.

    Computed as bit_reverse32(k * 2**m) * g with 32-bit wrap-around.

    Raises:
        IndexRangeError: If m is outside [0, 32] or k * 2**m does not fit 32 bits.
    """
    if not 0 <= m <= 32:
        raise IndexRangeError(f"m must be in [0, 32], got {m}")
    if k < 0 or k << m > U32_MAX:
        raise IndexRangeError(f"block start k * 2**m = {k} * 2**{m} does not fit 32 bits")
    vector = _vector(g)
    start = np.array([k << m], dtype=np.uint32)
    return LatticeShift(k, m, lattice_bits(start, vector.array))
