"""
Radical inversion in prime bases.

The radical inverse mirrors the base-b digits of an index at the radix point.
Everything here is computed in integers: digits are accumulated into a numerator
and a power of the base, and the quotient is taken once in 32-bit fixed point
before map_u32_to_unifloat turns it into binary32. Digit scrambling is supported
both computationally (linear scrambling, a -> factor * a mod b) and through
permutation tables, including tensor tables that invert several digits per loop
iteration.
"""

# Standard library imports
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

# Third-party imports
import numpy as np

# Local imports
from qmckit.errors import IndexRangeError, TableFormatError
from qmckit.unitfloat import U32_MAX, UnsignedLike, as_u32, unifloat_from_u32, unwrap_float, unwrap_int

logger = logging.getLogger(__name__)

# Tables larger than this stop fitting the caches they are meant to exploit.
MAX_TABLE_ENTRIES = 1 << 16

HALTON_MODES = ("plain", "faure", "linear")


@dataclass(frozen=True)
class PrimeTable:
    """
    The first primes together with their largest powers that fit into 32 bits.

    Attributes:
        primes (Tuple[int, ...]): Strictly increasing primes starting at 2.
        max_powers (Tuple[int, ...]): max_powers[j] is the largest power of primes[j]
            not exceeding 2**32 - 1.
    """
    primes: Tuple[int, ...]
    max_powers: Tuple[int, ...]

    @classmethod
    def build(cls, count: int = 1000) -> "PrimeTable":
        """
        Generate the first `count` primes by trial division.

        Args:
            count (int): Number of primes to generate.

        Returns:
            PrimeTable: The populated table.
        """
        primes = []
        candidate = 2
        while len(primes) < count:
            if all(candidate % p for p in primes if p * p <= candidate):
                primes.append(candidate)
            candidate += 1
        return cls(tuple(primes), tuple(max_power(p) for p in primes))

    def __len__(self) -> int:
        return len(self.primes)

    def index_of(self, base: int) -> int:
        """Return the position of `base` in the table."""
        try:
            return self.primes.index(base)
        except ValueError as e:
            raise IndexRangeError(f"{base} is not one of the first {len(self)} primes") from e


@lru_cache(maxsize=None)
def max_power(base: int) -> int:
    """Largest power of `base` that still fits into an unsigned 32-bit integer."""
    power = 1
    while power * base <= U32_MAX:
        power *= base
    return power


PRIMES = PrimeTable.build()


@dataclass(frozen=True)
class DigitPermutation:
    """
    A permutation sigma_b of the digits {0, ..., b - 1}.

    Attributes:
        base (int): The base b.
        values (Tuple[int, ...]): values[a] is the image of digit a.
    """
    base: int
    values: Tuple[int, ...]

    def __post_init__(self):
        if self.base < 2:
            raise IndexRangeError(f"base must be at least 2, got {self.base}")
        if sorted(self.values) != list(range(self.base)):
            raise IndexRangeError(f"{self.values} is not a permutation of range({self.base})")

    @cached_property
    def array(self) -> np.ndarray:
        """The permutation as a uint64 lookup array."""
        return np.asarray(self.values, dtype=np.uint64)


@dataclass(frozen=True)
class MultiDigitTable:
    """
    Tabulated inversion of d digits at once, built from a single-digit permutation.

    Attributes:
        base (int): The base b of the underlying digits.
        digits_per_step (int): Number of digits d handled by one lookup.
        table (Tuple[int, ...]): b**d entries, a bijection on [0, b**d).
        permutation (DigitPermutation): The single-digit permutation the table was built from;
            leftover digits are inverted with it one at a time.
    """
    base: int
    digits_per_step: int
    table: Tuple[int, ...]
    permutation: DigitPermutation

    def __post_init__(self):
        if len(self.table) != self.base ** self.digits_per_step:
            raise IndexRangeError(f"table has {len(self.table)} entries, expected {self.base ** self.digits_per_step}")
        if sorted(self.table) != list(range(len(self.table))):
            raise IndexRangeError("multi-digit table is not a bijection")

    @cached_property
    def array(self) -> np.ndarray:
        """The table as a uint64 lookup array."""
        return np.asarray(self.table, dtype=np.uint64)


@dataclass(frozen=True)
class ScrambleFactor:
    """
    Multiplier of a linear digit scramble a -> factor * a mod base.

    Attributes:
        base (int): The prime base.
        factor (int): Multiplier in [1, base).
    """
    base: int
    factor: int

    def __post_init__(self):
        if not 1 <= self.factor < self.base:
            raise IndexRangeError(f"scramble factor {self.factor} is outside [1, {self.base})")

    @cached_property
    def array(self) -> np.ndarray:
        """Digit map of the scramble as a uint64 lookup array."""
        return (np.arange(self.base, dtype=np.uint64) * self.factor) % self.base


def _prime(prime_index: int) -> int:
    if not 0 <= prime_index < len(PRIMES):
        raise IndexRangeError(f"prime index {prime_index} outside [0, {len(PRIMES)})")
    return PRIMES.primes[prime_index]


def _inverse_bits(
        index: np.ndarray,
        base: int,
        digit_map: Optional[np.ndarray] = None,
        table: Optional[MultiDigitTable] = None) -> np.ndarray:
    """
    Integer stage shared by all radical inverses.

    Returns floor(numerator * 2**32 / base**digits) as uint32, where the numerator
    holds the (optionally permuted) digits of `index mod max_power(base)` in mirrored
    order. Full groups of table.digits_per_step digits go through the table, the
    remaining leading digits through digit_map one at a time.
    """
    work = index.astype(np.uint64) % np.uint64(max_power(base))
    result = np.zeros_like(work)
    scale = np.ones_like(work)

    if table is not None:
        step = base ** table.digits_per_step
        threshold = base ** (table.digits_per_step - 1)
        lookup = table.array
        while True:
            active = work >= threshold
            if not active.any():
                break
            group = lookup[(work % step).astype(np.intp)]
            result = np.where(active, result * step + group, result)
            scale = np.where(active, scale * step, scale)
            work = np.where(active, work // step, work)

    while True:
        active = work > 0
        if not active.any():
            break
        digit = work % base
        if digit_map is not None:
            digit = digit_map[digit.astype(np.intp)]
        result = np.where(active, result * base + digit, result)
        scale = np.where(active, scale * base, scale)
        work = np.where(active, work // base, work)

    return ((result << 32) // scale).astype(np.uint32)


def radical_inverse_bits(i: UnsignedLike, prime_index: int):
    """
    32-bit fixed-point radical inverse phi_b(i) for b = PRIMES.primes[prime_index].

    Args:
        i: Index or array of indices; reduced modulo the base's max power.
        prime_index (int): Position of the base in PRIMES.

    Returns:
        int or uint32 array: floor(phi_b(i) * 2**32).
    """
    arr, scalar = as_u32(i)
    return unwrap_int(_inverse_bits(arr, _prime(prime_index)), scalar)


def radical_inverse(i: UnsignedLike, prime_index: int):
    """
    Radical inverse phi_b(i) as a binary32 value in [0, 1).

    Args:
        i: Index or array of indices in [0, 2**32).
        prime_index (int): Position of the base in PRIMES.

    Returns:
        np.float32 or float32 array.
    """
    arr, scalar = as_u32(i)
    return unwrap_float(unifloat_from_u32(_inverse_bits(arr, _prime(prime_index))), scalar)


def _scramble(factor: Union[int, ScrambleFactor], base: int) -> ScrambleFactor:
    if isinstance(factor, ScrambleFactor):
        if factor.base != base:
            raise IndexRangeError(f"scramble factor for base {factor.base} used with base {base}")
        return factor
    return ScrambleFactor(base, int(factor))


def radical_inverse_linscramble_bits(i: UnsignedLike, prime_index: int, factor: Union[int, ScrambleFactor]):
    """Integer stage of radical_inverse_linscramble."""
    arr, scalar = as_u32(i)
    base = _prime(prime_index)
    scramble = _scramble(factor, base)
    return unwrap_int(_inverse_bits(arr, base, digit_map=scramble.array), scalar)


def radical_inverse_linscramble(i: UnsignedLike, prime_index: int, factor: Union[int, ScrambleFactor]):
    """
    Radical inverse with every digit a replaced by (factor * a) mod b.

    Since factor < b and a < b, the digit products stay far below 32 bits.

    Args:
        i: Index or array of indices.
        prime_index (int): Position of the base in PRIMES.
        factor: Multiplier in [1, b) or a ScrambleFactor for that base.

    Returns:
        np.float32 or float32 array.
    """
    arr, scalar = as_u32(i)
    base = _prime(prime_index)
    scramble = _scramble(factor, base)
    return unwrap_float(unifloat_from_u32(_inverse_bits(arr, base, digit_map=scramble.array)), scalar)


def _check_permutation(perm: DigitPermutation, base: int) -> None:
    if perm.base != base:
        raise IndexRangeError(f"permutation for base {perm.base} used with base {base}")
    if perm.values[0] != 0:
        raise IndexRangeError("digit permutations used for radical inversion must map 0 to 0")


def _check_table(table: MultiDigitTable, base: int) -> None:
    if table.base != base:
        raise IndexRangeError(f"table for base {table.base} used with base {base}")
    _check_permutation(table.permutation, base)


def radical_inverse_permuted_bits(i: UnsignedLike, prime_index: int, perm: DigitPermutation):
    """Integer stage of radical_inverse_permuted."""
    arr, scalar = as_u32(i)
    base = _prime(prime_index)
    _check_permutation(perm, base)
    return unwrap_int(_inverse_bits(arr, base, digit_map=perm.array), scalar)


def radical_inverse_permuted(i: UnsignedLike, prime_index: int, perm: DigitPermutation):
    """
    Scrambled radical inverse phi_{b,sigma}(i), one digit per iteration.

    The permutation must fix zero, otherwise the infinitely many leading zero digits
    of i would contribute.

    Args:
        i: Index or array of indices.
        prime_index (int): Position of the base in PRIMES.
        perm (DigitPermutation): sigma_b for that base.

    Returns:
        np.float32 or float32 array.
    """
    arr, scalar = as_u32(i)
    base = _prime(prime_index)
    _check_permutation(perm, base)
    return unwrap_float(unifloat_from_u32(_inverse_bits(arr, base, digit_map=perm.array)), scalar)


def radical_inverse_tabled_bits(i: UnsignedLike, base: int, table: MultiDigitTable):
    """Integer stage of radical_inverse_tabled."""
    arr, scalar = as_u32(i)
    _check_table(table, base)
    return unwrap_int(_inverse_bits(arr, base, digit_map=table.permutation.array, table=table), scalar)


def radical_inverse_tabled(i: UnsignedLike, base: int, table: MultiDigitTable):
    """
    Radical inverse processing table.digits_per_step digits per iteration.

    Leading digits that do not fill a whole group are inverted individually with
    the table's single-digit permutation, so the result equals the single-digit
    inversion bit for bit.

    Args:
        i: Index or array of indices.
        base (int): Base of the table's digits.
        table (MultiDigitTable): Table built by tensor_digit_table.

    Returns:
        np.float32 or float32 array.
    """
    arr, scalar = as_u32(i)
    _check_table(table, base)
    bits = _inverse_bits(arr, base, digit_map=table.permutation.array, table=table)
    return unwrap_float(unifloat_from_u32(bits), scalar)


@lru_cache(maxsize=None)
def _faure_values(b: int) -> Tuple[int, ...]:
    if b == 2:
        return (0, 1)
    if b % 2 == 0:
        half = _faure_values(b // 2)
        return tuple(2 * v for v in half) + tuple(2 * v + 1 for v in half)
    middle = (b - 1) // 2
    shifted = [v + 1 if v >= middle else v for v in _faure_values(b - 1)]
    return tuple(shifted[:middle]) + (middle,) + tuple(shifted[middle:])


def faure_permutation(b: int) -> DigitPermutation:
    """
    Faure's recursive digit permutation sigma_b.

    sigma_2 = (0, 1). For even b, sigma_b is 2 * sigma_{b/2} followed by
    2 * sigma_{b/2} + 1. For odd b, every value of sigma_{b-1} that is at least
    (b - 1) / 2 is incremented and (b - 1) / 2 is inserted in the middle.

    Args:
        b (int): The base, at least 2.

    Returns:
        DigitPermutation: sigma_b.

    Raises:
        IndexRangeError: If b < 2.
    """
    if b < 2:
        raise IndexRangeError(f"Faure permutations need a base of at least 2, got {b}")
    return DigitPermutation(b, _faure_values(b))


def identity_permutation(b: int) -> DigitPermutation:
    """The identity permutation on the digits of base b."""
    return DigitPermutation(b, tuple(range(b)))


def tensor_digit_table(perm: DigitPermutation, d: int) -> MultiDigitTable:
    """
    Tabulate sigma x ... x sigma for d digits.

    The entry for v with base-b digits (d_{d-1}, ..., d_0) has digits
    (sigma(d_0), ..., sigma(d_{d-1})): each digit permuted and the group mirrored,
    so that looping over d-digit groups reproduces phi_{b,sigma}.

    Args:
        perm (DigitPermutation): The single-digit permutation.
        d (int): Digits per lookup, at least 1.

    Returns:
        MultiDigitTable: The tabulated permutation.

    Raises:
        IndexRangeError: If d < 1 or the table would exceed MAX_TABLE_ENTRIES.
    """
    if d < 1:
        raise IndexRangeError(f"digits per step must be at least 1, got {d}")
    size = perm.base ** d
    if size > MAX_TABLE_ENTRIES:
        raise IndexRangeError(f"base {perm.base} with {d} digits needs {size} entries, cap is {MAX_TABLE_ENTRIES}")

    v = np.arange(size, dtype=np.uint64)
    entry = np.zeros(size, dtype=np.uint64)
    for _ in range(d):
        entry = entry * perm.base + perm.array[(v % perm.base).astype(np.intp)]
        v //= perm.base
    logger.debug(f"Tabulated {d}-digit inversion for base {perm.base} ({size} entries)")
    return MultiDigitTable(perm.base, d, tuple(int(e) for e in entry), perm)


@lru_cache(maxsize=None)
def digit_table(base: int, d: int, faure: bool = False) -> MultiDigitTable:
    """Cached tensor table for `base` with either the identity or the Faure permutation."""
    perm = faure_permutation(base) if faure else identity_permutation(base)
    return tensor_digit_table(perm, d)


# Two base-3 digits per step (base 9) and four per step (base 81).
RADINV3_TABLE = digit_table(3, 2)
RADINV3_TABLE4 = digit_table(3, 4)
FAURE5_TABLE = digit_table(5, 2, faure=True)


def default_scramble_factor(base: int) -> ScrambleFactor:
    """
    Linear scramble used when no factor file is supplied: a -> (b - 1) * a mod b.

    For base 2 this is the identity.
    """
    return ScrambleFactor(base, max(1, base - 1))


def load_scramble_factors(path: Union[str, Path]) -> Dict[int, ScrambleFactor]:
    """
    Read per-prime linear scramble factors, one "base factor" pair per line.

    Blank lines and lines starting with '#' are skipped.

    Args:
        path: Text file to read.

    Returns:
        Dict[int, ScrambleFactor]: Factors keyed by base.

    Raises:
        TableFormatError: If a line is malformed, the base is not prime or the
            factor is outside [1, base).
    """
    factors: Dict[int, ScrambleFactor] = {}
    with open(path, "r") as f:
        for line_number, line in enumerate(f, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            try:
                base, factor = (int(p) for p in parts)
                PRIMES.index_of(base)
                factors[base] = ScrambleFactor(base, factor)
            except ValueError as e:
                raise TableFormatError(f"{path}, line {line_number}: {e}") from e
    logger.info(f"Loaded {len(factors)} scramble factors from {path}")
    return factors


def radical_inverse_exact(i: int, base: int, perm: Optional[DigitPermutation] = None) -> Fraction:
    """
    Exact rational phi_{b,sigma}(i), without the max-power index reduction.

    Used as an oracle for the integer implementations.
    """
    value = Fraction(0)
    scale = Fraction(1, base)
    while i:
        digit = i % base
        value += (perm.values[digit] if perm else digit) * scale
        scale /= base
        i //= base
    return value


def halton_component_bits(
        i: np.ndarray,
        dimension: int,
        mode: str = "plain",
        factors: Optional[Mapping[int, ScrambleFactor]] = None) -> np.ndarray:
    """
    Integer stage of one Halton component for a uint32 index array.

    Args:
        i (np.ndarray): uint32 indices.
        dimension (int): Component j, using the j-th prime as base.
        mode (str): 'plain', 'faure' or 'linear'.
        factors: Linear scramble factors by base; default_scramble_factor fills gaps.

    Returns:
        np.ndarray: uint32 fixed-point values.
    """
    base = _prime(dimension)
    if mode == "plain":
        return _inverse_bits(i, base)
    if mode == "faure":
        if base == 3:
            return _inverse_bits(i, base, digit_map=RADINV3_TABLE.permutation.array, table=RADINV3_TABLE)
        if base == 5:
            return _inverse_bits(i, base, digit_map=FAURE5_TABLE.permutation.array, table=FAURE5_TABLE)
        return _inverse_bits(i, base, digit_map=faure_permutation(base).array)
    if mode == "linear":
        scramble = (factors or {}).get(base) or default_scramble_factor(base)
        return _inverse_bits(i, base, digit_map=scramble.array)
    raise IndexRangeError(f"unknown Halton mode '{mode}', expected one of {HALTON_MODES}")


def halton_point(
        i: UnsignedLike,
        dims: int,
        mode: str = "plain",
        factors: Optional[Mapping[int, ScrambleFactor]] = None):
    """
    The i-th Halton point: component j is the radical inverse of i in the j-th prime.

    Args:
        i: Index or array of indices.
        dims (int): Number of components.
        mode (str): 'plain', 'faure' (Faure permutations) or 'linear' (linear scrambling).
        factors: Linear scramble factors by base for mode 'linear'.

    Returns:
        float32 array of shape (dims,) for a scalar index, (n, dims) otherwise.

    Raises:
        IndexRangeError: If dims exceeds the prime table or the mode is unknown.
    """
    if not 0 <= dims <= len(PRIMES):
        raise IndexRangeError(f"Halton points support at most {len(PRIMES)} dimensions, got {dims}")
    arr, scalar = as_u32(i)
    columns = [unifloat_from_u32(halton_component_bits(arr, j, mode, factors)) for j in range(dims)]
    points = np.stack(columns, axis=-1) if columns else np.zeros((arr.size, 0), dtype=np.float32)
    return points[0] if scalar else points
