"""
Samplers that tie the sample index to the image plane.

Four constructions live here:

- Hilbert-curve indexing of pixels, used to enumerate one sequence along the curve
  and to derive a one-dimensional per-pixel shift.
- The pixel-shifted rank-1 lattice: every pixel shares the generator vector and
  only adds phi_3(hilbert_index(x, y)) to phi_2(i) before multiplying.
- Image-plane Halton: the first two Halton components are scaled onto the image
  so that the subsequence of one pixel is a residue class of indices.
- XOR tables: per-pixel reorder and scramble words applied to a stored point set.

Partitioning a sequence by an extra dimension into residue classes, the same idea
as image-plane Halton in one dimension, is offered for parallel work splitting.
"""

# Standard library imports
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Tuple, Union

# Third-party imports
import numpy as np

# Local imports
from qmckit.digitalnet import GeneratorMatrixSet, default_matrices, sobol_bits
from qmckit.errors import IndexRangeError, TableFormatError
from qmckit.lattice import GeneratorVector
from qmckit.radical import RADINV3_TABLE4, ScrambleFactor, halton_component_bits, halton_point, radical_inverse_tabled_bits
from qmckit.unitfloat import UnsignedLike, as_u32, bit_reverse_u32, unifloat_from_u32, unwrap_float, unwrap_int

logger = logging.getLogger(__name__)

# Hilbert indices are fed to 32-bit radical inverses.
MAX_HILBERT_ORDER = 16

XOR_TABLE_SIZE = 128
XOR_TABLE_MAGIC = b"XQT1"


@dataclass(frozen=True)
class PixelCoord:
    """
    A pixel on a 2**order x 2**order Hilbert curve.

    Attributes:
        x (int): Column.
        y (int): Row.
        order (int): Hilbert order o; the curve covers [0, 2**o)^2.
    """
    x: int
    y: int
    order: int = 0

    def __post_init__(self):
        if not 0 <= self.order <= MAX_HILBERT_ORDER:
            raise IndexRangeError(f"Hilbert order {self.order} outside [0, {MAX_HILBERT_ORDER}]")
        side = 1 << self.order
        if not (0 <= self.x < side and 0 <= self.y < side):
            raise IndexRangeError(f"pixel ({self.x}, {self.y}) outside the {side}x{side} Hilbert grid")

    @classmethod
    def in_image(cls, x: int, y: int, width: int, height: int) -> "PixelCoord":
        """Pixel (x, y) of a width x height image, on the smallest curve covering it."""
        if not (0 <= x < width and 0 <= y < height):
            raise IndexRangeError(f"pixel ({x}, {y}) outside the {width}x{height} image")
        return cls(x, y, hilbert_order(width, height))


def hilbert_order(width: int, height: int) -> int:
    """Smallest o with 2**o >= max(width, height)."""
    return max(int(width) - 1, int(height) - 1, 0).bit_length()


def _rotate(n: int, x: int, y: int, rx: int, ry: int) -> Tuple[int, int]:
    if ry == 0:
        if rx == 1:
            x, y = n - 1 - x, n - 1 - y
        x, y = y, x
    return x, y


def hilbert_index(p: PixelCoord) -> int:
    """
    Position of pixel p along the Hilbert curve of order p.order.

    The curve starts at (0, 0) and the order-1 curve visits (0, 0), (0, 1), (1, 1),
    (1, 0). Consecutive indices are 4-neighbours.
    """
    n = 1 << p.order
    x, y = p.x, p.y
    d = 0
    s = n // 2
    while s > 0:
        rx = int(x & s > 0)
        ry = int(y & s > 0)
        d += s * s * ((3 * rx) ^ ry)
        x, y = _rotate(n, x, y, rx, ry)
        s //= 2
    return d


def hilbert_xy(d: int, order: int) -> PixelCoord:
    """
    Inverse of hilbert_index.

    Raises:
        IndexRangeError: If d is outside [0, 4**order).
    """
    if not 0 <= order <= MAX_HILBERT_ORDER:
        raise IndexRangeError(f"Hilbert order {order} outside [0, {MAX_HILBERT_ORDER}]")
    if not 0 <= d < 1 << (2 * order):
        raise IndexRangeError(f"Hilbert index {d} outside [0, 4**{order})")
    n = 1 << order
    x = y = 0
    t = d
    s = 1
    while s < n:
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        x, y = _rotate(s, x, y, rx, ry)
        x += s * rx
        y += s * ry
        t //= 4
        s *= 2
    return PixelCoord(x, y, order)


def pixel_shift_bits(p: PixelCoord) -> int:
    """phi_3(hilbert_index(p)) in 32-bit fixed point, four base-3 digits per table lookup."""
    return radical_inverse_tabled_bits(hilbert_index(p), 3, RADINV3_TABLE4)


def pixel_shifted_lattice_bits(i: UnsignedLike, j: int, p: PixelCoord, g: GeneratorVector):
    """Integer stage of pixel_shifted_lattice_component."""
    index, scalar = as_u32(i)
    if not 0 <= j < len(g):
        raise IndexRangeError(f"dimension {j} outside the {len(g)}-dimensional generator vector")
    shifted = bit_reverse_u32(index) + np.uint32(pixel_shift_bits(p))
    return unwrap_int(shifted * np.uint32(g[j]), scalar)


def pixel_shifted_lattice_component(i: UnsignedLike, j: int, p: PixelCoord, g: GeneratorVector):
    """
    ((phi_2(i) + phi_3(hilbert_index(p))) * g_j) mod 1.

    The sum and the product wrap in 32 bits, which is the mod 1. Only one shift per
    pixel is used for all dimensions; the pixel at Hilbert index 0 sees the plain
    lattice.

    Args:
        i: Index or array of indices.
        j (int): Dimension.
        p (PixelCoord): The pixel.
        g (GeneratorVector): Generator vector shared by all pixels.

    Returns:
        np.float32 or float32 array.
    """
    index, scalar = as_u32(i)
    bits = pixel_shifted_lattice_bits(index, j, p, g)
    return unwrap_float(unifloat_from_u32(bits), scalar)


def halton_along_hilbert_index(i: UnsignedLike, p: PixelCoord, spp: int):
    """Global Halton index hilbert_index(p) * spp + i of the i-th sample of pixel p."""
    if spp < 1:
        raise IndexRangeError(f"samples per pixel must be positive, got {spp}")
    local = np.atleast_1d(np.asarray(i, dtype=np.int64))
    if local.size and (local.min() < 0 or local.max() >= spp):
        raise IndexRangeError(f"local sample index must be in [0, {spp})")
    return hilbert_index(p) * spp + (int(local[0]) if np.ndim(i) == 0 else local)


def halton_along_hilbert_sample(
        i: UnsignedLike,
        p: PixelCoord,
        spp: int,
        dims: int,
        mode: str = "plain",
        factors: Optional[Mapping[int, ScrambleFactor]] = None):
    """
    The i-th sample of pixel p when one Halton sequence runs along the Hilbert curve.

    Each pixel owns the contiguous block [h * spp, (h + 1) * spp) for h its Hilbert index.

    Returns:
        float32 array of shape (dims,) for a scalar i, (n, dims) otherwise.
    """
    return halton_point(halton_along_hilbert_index(i, p, spp), dims, mode, factors)


def digit_reverse(value: int, base: int, digits: int) -> int:
    """The `digits`-digit base-`base` representation of value, read backwards."""
    result = 0
    for _ in range(digits):
        value, digit = divmod(value, base)
        result = result * base + digit
    return result


def _ceil_log(n: int, base: int) -> int:
    k, power = 0, 1
    while power < n:
        power *= base
        k += 1
    return k


@dataclass(frozen=True)
class ImagePlaneHalton:
    """
    Halton sequence whose first two components are scaled onto a width x height image.

    Component 0 times 2**a picks the column, component 1 times 3**b the row, with
    a = ceil(log2 width) and b = ceil(log3 height). Indices landing outside the image
    are never enumerated.
    """
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise IndexRangeError(f"image size must be positive, got {self.width}x{self.height}")

    @property
    def a(self) -> int:
        return _ceil_log(self.width, 2)

    @property
    def b(self) -> int:
        return _ceil_log(self.height, 3)

    @property
    def stride(self) -> int:
        """Distance between consecutive indices of one pixel, 2**a * 3**b."""
        return (1 << self.a) * 3 ** self.b

    def offset(self, x: int, y: int) -> int:
        """
        Smallest index landing in pixel (x, y).

        Solves i = rev_2(x) mod 2**a and i = rev_3(y) mod 3**b with the Chinese
        remainder theorem.
        """
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexRangeError(f"pixel ({x}, {y}) outside the {self.width}x{self.height} image")
        m2, m3 = 1 << self.a, 3 ** self.b
        r2 = digit_reverse(x, 2, self.a)
        r3 = digit_reverse(y, 3, self.b)
        return r2 + m2 * ((r3 - r2) * pow(m2, -1, m3) % m3)

    def index(self, x: int, y: int, k: UnsignedLike):
        """Index of the k-th sample of pixel (x, y)."""
        base = self.offset(x, y)
        if np.ndim(k) == 0:
            return base + int(k) * self.stride
        return base + np.asarray(k, dtype=np.uint64) * np.uint64(self.stride)

    def sample_bits(self, k: UnsignedLike, x: int, y: int, j: int) -> np.ndarray:
        """
        Integer stage of component j of the k-th sample of pixel (x, y).

        Components 0 and 1 are the sub-pixel offsets frac(2**a phi_2(i)) = phi_2(i >> a)
        and frac(3**b phi_3(i)) = phi_3(i // 3**b); component j >= 2 is the Halton
        component in the j-th prime.
        """
        index, _ = as_u32(self.index(x, y, np.atleast_1d(np.asarray(k, dtype=np.uint64))))
        if j == 0:
            return bit_reverse_u32(index >> np.uint32(self.a))
        if j == 1:
            return halton_component_bits(index // np.uint32(3 ** self.b), 1)
        return halton_component_bits(index, j)


def halton_pixel_enumeration(p: PixelCoord, width: int, height: int, k: UnsignedLike):
    """
    Global index of the k-th Halton point falling into pixel p of a width x height image.

    Returns:
        int for a scalar k, otherwise a uint64 array.
    """
    return ImagePlaneHalton(width, height).index(p.x, p.y, k)


@dataclass(frozen=True)
class IndexCongruence:
    """
    The indices i with i = residue mod modulus.

    Attributes:
        residue (int): Smallest member.
        modulus (int): Distance between members.
    """
    residue: int
    modulus: int

    def indices(self, count: int) -> np.ndarray:
        """The first `count` members as a uint64 array."""
        return np.uint64(self.residue) + np.uint64(self.modulus) * np.arange(count, dtype=np.uint64)

    def __contains__(self, i: int) -> bool:
        return i % self.modulus == self.residue


def partition_by_extra_dimension(part: int, parts: int, base: int = 2) -> IndexCongruence:
    """
    Indices whose radical inverse in `base` lies in [part / parts, (part + 1) / parts).

    With parts = base**k, phi_b(i) falls into that interval exactly when the first k
    digits of i, mirrored, spell `part`, so the indices form one residue class mod
    base**k. Assigning one class per worker splits a sequence without communication.

    Raises:
        IndexRangeError: If parts is not a power of base or part is out of range.
    """
    if base < 2:
        raise IndexRangeError(f"base must be at least 2, got {base}")
    k, power = 0, 1
    while power < parts:
        power *= base
        k += 1
    if parts < 1 or power != parts:
        raise IndexRangeError(f"{parts} parts is not a power of the base {base}")
    if not 0 <= part < parts:
        raise IndexRangeError(f"part {part} outside [0, {parts})")
    return IndexCongruence(digit_reverse(part, base, k), parts)


def sobol_integer_points(n_points: int, dims: int, matrices: Optional[GeneratorMatrixSet] = None) -> np.ndarray:
    """The first n_points Sobol' points at the integer stage, uint32 of shape (n_points, dims)."""
    matrices = matrices if matrices is not None else default_matrices()
    if not 0 <= dims <= matrices.dims:
        raise IndexRangeError(f"requested {dims} Sobol' dimensions, {matrices.dims} available")
    index = np.arange(n_points, dtype=np.uint64)
    zero = np.zeros(n_points, dtype=np.uint32)
    columns = [sobol_bits(index, j, zero, matrices) for j in range(dims)]
    return np.stack(columns, axis=-1) if columns else np.zeros((n_points, 0), dtype=np.uint32)


@dataclass(frozen=True, eq=False)
class XorTables:
    """
    Per-pixel reorder and scramble words for a stored point set.

    Attributes:
        reorder (np.ndarray): uint32 (128, 128), index XOR word r[x, y].
        scramble (np.ndarray): uint32 (128, 128, dims), digit scramble words s[x, y, j].
        points (np.ndarray): uint32 (n_points, dims), the point set at the integer stage.
    """
    reorder: np.ndarray
    scramble: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        size = (XOR_TABLE_SIZE, XOR_TABLE_SIZE)
        if self.reorder.shape != size:
            raise TableFormatError(f"reorder table must be {size}, got {self.reorder.shape}")
        if self.scramble.shape[:2] != size or self.scramble.ndim != 3:
            raise TableFormatError(f"scramble table must be {size} x dims, got {self.scramble.shape}")
        if self.points.ndim != 2 or self.points.shape[1] != self.scramble.shape[2]:
            raise TableFormatError(
                f"point set shape {self.points.shape} does not match {self.scramble.shape[2]} scramble dimensions")
        n = self.points.shape[0]
        if n & (n - 1) or n == 0:
            raise TableFormatError(f"point set size must be a power of two, got {n}")
        if int(self.reorder.max()) >= n:
            raise TableFormatError(f"reorder words must be below the point set size {n}")

    @property
    def dims(self) -> int:
        return self.scramble.shape[2]

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def xor_table_sample_bits(i: UnsignedLike, p: PixelCoord, tables: XorTables, j: int):
    """Integer stage of xor_table_sample: points[i ^ r[x, y], j] ^ s[x, y, j]."""
    index, scalar = as_u32(i)
    if index.size and int(index.max()) >= tables.n_points:
        raise IndexRangeError(f"sample index {int(index.max())} beyond the {tables.n_points} stored points")
    if not 0 <= j < tables.dims:
        raise IndexRangeError(f"dimension {j} outside [0, {tables.dims})")
    x, y = p.x % XOR_TABLE_SIZE, p.y % XOR_TABLE_SIZE
    reordered = index ^ tables.reorder[x, y]
    bits = tables.points[reordered.astype(np.intp), j] ^ tables.scramble[x, y, j]
    return unwrap_int(bits.astype(np.uint32), scalar)


def xor_table_sample(i: UnsignedLike, p: PixelCoord, tables: XorTables, j: int):
    """
    Component j of the i-th sample of pixel p, p_{i ^ r} ^ s with tables indexed by (x, y) mod 128.

    Returns:
        np.float32 or float32 array.
    """
    index, scalar = as_u32(i)
    return unwrap_float(unifloat_from_u32(xor_table_sample_bits(index, p, tables, j)), scalar)


def white_noise_tables(dims: int, n_points: int, seed: int = 0) -> XorTables:
    """
    Uniformly random reorder and scramble words over the first n_points Sobol' points.

    These exercise the table mechanics; they are not optimised for any error spectrum.
    """
    rng = np.random.default_rng(seed)
    size = (XOR_TABLE_SIZE, XOR_TABLE_SIZE)
    reorder = rng.integers(0, n_points, size=size, dtype=np.uint32)
    scramble = rng.integers(0, 1 << 32, size=size + (dims,), dtype=np.uint64).astype(np.uint32)
    return XorTables(reorder, scramble, sobol_integer_points(n_points, dims))


def write_xor_tables(tables: XorTables, path: Union[str, Path]) -> None:
    """Write the magic 'XQT1', then the reorder words, then the scramble words, little-endian."""
    with open(path, "wb") as f:
        f.write(XOR_TABLE_MAGIC)
        f.write(tables.reorder.astype("<u4").tobytes())
        f.write(tables.scramble.astype("<u4").tobytes())
    logger.info(f"Saved {tables.dims}-dimensional XOR tables to {path}")


def load_xor_tables(path: Union[str, Path], n_points: Optional[int] = None) -> XorTables:
    """
    Read XOR tables written by write_xor_tables and attach the Sobol' point set.

    The number of dimensions follows from the file size.

    Args:
        path: Table file.
        n_points: Size of the stored point set; the smallest power of two above every
            reorder word when omitted.

    Raises:
        TableFormatError: On a bad magic or a truncated file.
    """
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != XOR_TABLE_MAGIC:
        raise TableFormatError(f"{path}: missing {XOR_TABLE_MAGIC!r} magic")
    words, remainder = divmod(len(data) - 4, 4)
    cells = XOR_TABLE_SIZE * XOR_TABLE_SIZE
    if remainder or words < cells or (words - cells) % cells:
        raise TableFormatError(f"{path}: {len(data)} bytes do not hold 128x128 tables")
    values = np.frombuffer(data, dtype="<u4", offset=4).astype(np.uint32)
    dims = (words - cells) // cells
    reorder = values[:cells].reshape(XOR_TABLE_SIZE, XOR_TABLE_SIZE)
    scramble = values[cells:].reshape(XOR_TABLE_SIZE, XOR_TABLE_SIZE, dims)

    if n_points is None:
        n_points = 1 << int(reorder.max()).bit_length()
    tables = XorTables(reorder, scramble, sobol_integer_points(n_points, dims))
    logger.info(f"Loaded {dims}-dimensional XOR tables over {n_points} points from {path}")
    return tables
