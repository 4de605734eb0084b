"""
Integer building blocks shared by every sampler.

Samplers in qmckit stay in unsigned integer arithmetic for as long as possible and
convert to binary32 only as the last step. This module provides that last step,
map_u32_to_unifloat, which assembles the IEEE 754 bit pattern directly instead of
dividing, together with bit reversal and leading-zero counting.

All operations accept a Python int or an integer numpy array. Scalars come back
as scalars (np.float32 for unit values, int for integer results), arrays come
back as arrays of the same shape.
"""

# Standard library imports
from typing import Tuple, Union

# Third-party imports
import numpy as np
import numpy.typing as npt

# Local imports
from qmckit.errors import IndexRangeError

U32_MAX = 0xFFFFFFFF

# Biased exponent of 2**-32, the image of u = 1.
_ONE_BITS = (126 - 31) << 23

UnsignedLike = Union[int, npt.ArrayLike]


def as_unsigned(values: UnsignedLike, bits: int = 32) -> Tuple[np.ndarray, bool]:
    """
    Coerce integers to a one-dimensional unsigned numpy array.

    Args:
        values: A Python int, a sequence of ints or an integer numpy array.
        bits: Width of the admissible range [0, 2**bits). 32 yields uint32,
            anything wider yields uint64.

    Returns:
        Tuple[np.ndarray, bool]: The coerced array and whether the input was a scalar.

    Raises:
        IndexRangeError: If a value is negative, too wide or not an integer.
    """
    try:
        arr = np.asarray(values)
    except OverflowError as e:
        raise IndexRangeError(f"value does not fit {bits} bits: {e}") from e
    if arr.dtype.kind not in "ui":
        raise IndexRangeError(f"expected unsigned integers, got dtype {arr.dtype}")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if arr.size:
        if arr.dtype.kind == "i" and arr.min() < 0:
            raise IndexRangeError(f"negative value {int(arr.min())} is not a valid {bits}-bit unsigned integer")
        if int(arr.max()) >= 1 << bits:
            raise IndexRangeError(f"value {int(arr.max())} does not fit {bits} bits")
    return arr.astype(np.uint32 if bits <= 32 else np.uint64), scalar


def as_u32(values: UnsignedLike) -> Tuple[np.ndarray, bool]:
    """Shorthand for as_unsigned(values, 32)."""
    return as_unsigned(values, 32)


def unwrap_int(arr: np.ndarray, scalar: bool):
    """Return arr, or its single element as a Python int when the caller passed a scalar."""
    return int(arr[0]) if scalar else arr


def unwrap_float(arr: np.ndarray, scalar: bool):
    """Return arr, or its single element as np.float32 when the caller passed a scalar."""
    return arr[0] if scalar else arr


def _clz(arr: np.ndarray) -> np.ndarray:
    # frexp is exact on integers below 2**53: u = f * 2**e with f in [0.5, 1)
    _, exponent = np.frexp(arr.astype(np.float64))
    return 32 - exponent.astype(np.int64)


def _unifloat_bits(arr: np.ndarray) -> np.ndarray:
    u = arr.astype(np.uint64)
    z = _clz(arr)
    e = (126 - z).astype(np.uint64)
    # discard the leading zeros and the implicit leading one, then make room for the exponent
    m = ((u << (z + 1).astype(np.uint64)) & U32_MAX) >> 9
    bits = (e << 23) | m
    bits[arr == 1] = _ONE_BITS
    bits[arr == 0] = 0
    return bits.astype(np.uint32)


def unifloat_from_u32(arr: np.ndarray) -> np.ndarray:
    """
    Array-only fast path of map_u32_to_unifloat for callers that already hold uint32 data.

    Args:
        arr (np.ndarray): One-dimensional uint32 array.

    Returns:
        np.ndarray: float32 array of the same length.
    """
    return _unifloat_bits(arr).view(np.float32)


def map_u32_to_unifloat(u: UnsignedLike):
    """
    Map u in [0, 2**32) to the binary32 value u * 2**-32, truncated into [0, 1).

    Zero maps to zero and one maps to 2**-32 explicitly. Otherwise the number of
    leading zeros z fixes the biased exponent 126 - z, and the bits below the
    leading one, shifted right by 9, become the mantissa. The result is the
    largest binary32 not exceeding u * 2**-32, so it is exact below 2**24 and
    never reaches 1.0.

    Args:
        u: Unsigned 32-bit integer(s).

    Returns:
        np.float32 for a scalar input, otherwise a float32 array.
    """
    arr, scalar = as_u32(u)
    return unwrap_float(unifloat_from_u32(arr), scalar)


def count_leading_zeros32(v: UnsignedLike):
    """
    Count leading zero bits of a 32-bit word; zero has 32.

    Args:
        v: Unsigned 32-bit integer(s).

    Returns:
        int in [0, 32] for a scalar input, otherwise an int64 array.
    """
    arr, scalar = as_u32(v)
    return unwrap_int(_clz(arr), scalar)


def bit_reverse_u32(arr: np.ndarray) -> np.ndarray:
    """Reverse the bits of every word of a uint32 array."""
    v = arr.astype(np.uint32, copy=True)
    v = ((v >> 1) & 0x55555555) | ((v & 0x55555555) << 1)
    v = ((v >> 2) & 0x33333333) | ((v & 0x33333333) << 2)
    v = ((v >> 4) & 0x0F0F0F0F) | ((v & 0x0F0F0F0F) << 4)
    v = ((v >> 8) & 0x00FF00FF) | ((v & 0x00FF00FF) << 8)
    return (v >> 16) | (v << 16)


def bit_reverse32(v: UnsignedLike):
    """
    Mirror the 32 bits of v: bit k of the result is bit 31 - k of the input.

    This is the base-2 radical inverse at the integer stage.

    Args:
        v: Unsigned 32-bit integer(s).

    Returns:
        int for a scalar input, otherwise a uint32 array.
    """
    arr, scalar = as_u32(v)
    return unwrap_int(bit_reverse_u32(arr), scalar)
