"""
Test suite for the image-plane samplers.

Tests cover:
- Pixel coordinates and the Hilbert curve
- The pixel-shifted rank-1 lattice, its stratification and the ternary spread of its shifts
- Halton along the Hilbert curve
- Image-plane Halton and its per-pixel enumeration against a brute-force scan
- Partitioning by an extra dimension and the union of its classes
- XOR tables, including the binary file format
"""

# Third-party imports
import numpy as np
import pytest

# Local imports
from qmckit.errors import IndexRangeError, TableFormatError
from qmckit.imageplane import (
    XOR_TABLE_MAGIC,
    XOR_TABLE_SIZE,
    ImagePlaneHalton,
    IndexCongruence,
    PixelCoord,
    XorTables,
    digit_reverse,
    halton_along_hilbert_index,
    halton_along_hilbert_sample,
    halton_pixel_enumeration,
    hilbert_index,
    hilbert_order,
    hilbert_xy,
    load_xor_tables,
    partition_by_extra_dimension,
    pixel_shift_bits,
    pixel_shifted_lattice_bits,
    pixel_shifted_lattice_component,
    sobol_integer_points,
    white_noise_tables,
    write_xor_tables,
    xor_table_sample,
    xor_table_sample_bits,
)
from qmckit.lattice import lattice_component, lattice_component_bits, lfsr_generator_vector
from qmckit.radical import halton_point, radical_inverse_bits, radical_inverse_exact


@pytest.fixture
def tables():
    """
    Fixture providing small white-noise XOR tables.

    Returns:
        XorTables: Three dimensions over 64 Sobol' points.
    """
    return white_noise_tables(dims=3, n_points=64, seed=5)


def test_pixel_coord_validation() -> None:
    """
    Test pixel coordinate validation and the image constructor.
    """
    assert PixelCoord.in_image(5, 3, 6, 4) == PixelCoord(5, 3, 3)
    with pytest.raises(IndexRangeError):
        PixelCoord(2, 0, 1)
    with pytest.raises(IndexRangeError):
        PixelCoord(0, 0, 17)
    with pytest.raises(IndexRangeError):
        PixelCoord.in_image(6, 0, 6, 4)


@pytest.mark.parametrize("width, height, expected", [(1, 1, 0), (2, 1, 1), (64, 64, 6), (65, 2, 7)])
def test_hilbert_order(width: int, height: int, expected: int) -> None:
    """
    Test the smallest covering Hilbert order.

    Args:
        width (int): Image width.
        height (int): Image height.
        expected (int): Expected order.
    """
    assert hilbert_order(width, height) == expected


def test_hilbert_order_one() -> None:
    """
    Test the order-1 curve visits (0, 0), (0, 1), (1, 1), (1, 0).
    """
    visits = [(hilbert_xy(d, 1).x, hilbert_xy(d, 1).y) for d in range(4)]
    assert visits == [(0, 0), (0, 1), (1, 1), (1, 0)]


@pytest.mark.parametrize("order", [0, 1, 2, 4, 6])
def test_hilbert_curve_properties(order: int) -> None:
    """
    Test that the curve is a bijection of 4-neighbour steps.

    Verifies that:
    - hilbert_index inverts hilbert_xy for every index
    - Consecutive pixels are 4-neighbours

    Args:
        order (int): Hilbert order.
    """
    pixels = [hilbert_xy(d, order) for d in range(1 << (2 * order))]
    assert [hilbert_index(p) for p in pixels] == list(range(len(pixels)))
    for a, b in zip(pixels, pixels[1:]):
        assert abs(a.x - b.x) + abs(a.y - b.y) == 1
    with pytest.raises(IndexRangeError):
        hilbert_xy(1 << (2 * order), order)


def test_pixel_shifted_lattice() -> None:
    """
    Test the pixel-shifted lattice.

    Verifies that:
    - The shift is phi_3 of the Hilbert index
    - The pixel at Hilbert index 0 sees the plain lattice
    - Other pixels see the lattice translated by shift * g_j
    - Dimensions beyond the generator vector are rejected
    """
    g = lfsr_generator_vector(dims=4)
    i = np.arange(256, dtype=np.uint32)
    origin = PixelCoord(0, 0, 3)
    assert np.array_equal(pixel_shifted_lattice_component(i, 2, origin, g), lattice_component(i, g[2]))

    p = PixelCoord(5, 2, 3)
    shift = pixel_shift_bits(p)
    assert shift == radical_inverse_bits(hilbert_index(p), 1)
    assert shift != 0
    for j in range(4):
        translation = np.uint32((shift * g[j]) & 0xFFFFFFFF)
        assert np.array_equal(pixel_shifted_lattice_bits(i, j, p, g), lattice_component_bits(i, g[j]) + translation)
    with pytest.raises(IndexRangeError):
        pixel_shifted_lattice_component(0, 4, p, g)


def test_pixel_shifted_lattice_stratified_for_random_pixels() -> None:
    """
    Test one-dimensional stratification of the pixel-shifted lattice at 100 random pixels.

    Verifies that:
    - For every m <= 12 and every dimension the first 2**m samples of the pixel fall
      one into each interval of length 2**-m
    """
    g = lfsr_generator_vector(dims=4)
    rng = np.random.default_rng(8)
    i = np.arange(1 << 12, dtype=np.uint32)
    for x, y in rng.integers(0, 256, size=(100, 2)):
        p = PixelCoord.in_image(int(x), int(y), 256, 256)
        for j in range(4):
            bits = pixel_shifted_lattice_bits(i, j, p, g)
            for m in range(1, 13):
                strata = np.sort(bits[:1 << m] >> np.uint32(32 - m))
                assert np.array_equal(strata, np.arange(1 << m, dtype=np.uint32)), (x, y, j, m)


def test_pixel_shifts_fill_ternary_strata() -> None:
    """
    Test that the phi_3 shifts of 3**k consecutive Hilbert pixels are equidistributed.

    The lattice is stratified in base 2 and the shifts in base 3, so along the curve
    every block [c * 3**k, (c + 1) * 3**k) of pixels places one shift in each interval
    of length 3**-k.

    Verifies that:
    - For k = 4 and the blocks c = 1, ..., 11 of an order-5 curve the strata of the
      81 shifts are a permutation of 0, ..., 80
    """
    k = 4
    block = 3 ** k
    for c in range(1, 12):
        shifts = [pixel_shift_bits(hilbert_xy(h, 5)) for h in range(c * block, (c + 1) * block)]
        strata = sorted((shift * block) >> 32 for shift in shifts)
        assert strata == list(range(block)), c


def test_halton_along_hilbert() -> None:
    """
    Test Halton along the Hilbert curve.

    Verifies that:
    - Pixel p owns the index block starting at hilbert_index(p) * spp
    - Samples are the Halton points of those indices
    - Local indices outside [0, spp) are rejected
    """
    p = PixelCoord(3, 1, 2)
    h = hilbert_index(p)
    assert halton_along_hilbert_index(2, p, 16) == h * 16 + 2
    local = np.arange(16)
    assert np.array_equal(halton_along_hilbert_sample(local, p, 16, 3), halton_point(h * 16 + local, 3))
    with pytest.raises(IndexRangeError):
        halton_along_hilbert_index(16, p, 16)
    with pytest.raises(IndexRangeError):
        halton_along_hilbert_index(0, p, 0)


@pytest.mark.parametrize("value, base, digits, expected", [(6, 2, 3, 3), (5, 3, 2, 7), (1, 2, 4, 8), (0, 5, 3, 0)])
def test_digit_reverse(value: int, base: int, digits: int, expected: int) -> None:
    """
    Test mirrored digit strings.

    Args:
        value (int): Input.
        base (int): Base.
        digits (int): Number of digits.
        expected (int): Mirrored value.
    """
    assert digit_reverse(value, base, digits) == expected


@pytest.mark.parametrize("width, height", [(5, 4), (8, 9), (1, 1), (13, 2)])
def test_image_plane_halton_lands_in_pixel(width: int, height: int) -> None:
    """
    Test that every enumerated index falls into its pixel.

    Verifies that:
    - floor(2**a * phi_2(i)) == x and floor(3**b * phi_3(i)) == y for the first samples
    - Sub-pixel offsets equal the fractional parts, computed exactly
    - The stride is 2**a * 3**b

    Args:
        width (int): Image width.
        height (int): Image height.
    """
    sampler = ImagePlaneHalton(width, height)
    assert sampler.stride == (1 << sampler.a) * 3 ** sampler.b
    for x in range(width):
        for y in range(height):
            for k in range(3):
                i = sampler.index(x, y, k)
                u = radical_inverse_exact(i, 2) * (1 << sampler.a)
                v = radical_inverse_exact(i, 3) * 3 ** sampler.b
                assert (u.numerator // u.denominator, v.numerator // v.denominator) == (x, y)

                fu = (u - x) * (1 << 32)
                assert int(sampler.sample_bits(k, x, y, 0)[0]) == fu.numerator // fu.denominator


def test_image_plane_halton_offsets() -> None:
    """
    Test the offsets, higher components and pixel enumeration.

    Verifies that:
    - Offsets of all pixels are distinct and below the stride
    - Components j >= 2 are plain Halton components
    - halton_pixel_enumeration matches ImagePlaneHalton.index
    """
    sampler = ImagePlaneHalton(6, 5)
    offsets = {sampler.offset(x, y) for x in range(6) for y in range(5)}
    assert len(offsets) == 30 and max(offsets) < sampler.stride

    k = np.arange(10)
    i = sampler.index(4, 3, k)
    assert np.array_equal(sampler.sample_bits(k, 4, 3, 2), radical_inverse_bits(i.astype(np.uint32), 2))
    assert np.array_equal(halton_pixel_enumeration(PixelCoord.in_image(4, 3, 6, 5), 6, 5, k), i)
    with pytest.raises(IndexRangeError):
        sampler.offset(6, 0)
    with pytest.raises(IndexRangeError):
        ImagePlaneHalton(0, 5)


def _exact_cell(i: np.ndarray, base: int, cells: int) -> np.ndarray:
    """
    floor(cells * phi_base(i)) in exact integer arithmetic.

    Args:
        i (np.ndarray): uint64 indices.
        base (int): Base of the radical inverse.
        cells (int): Number of cells along the axis.

    Returns:
        np.ndarray: uint64 cell numbers.
    """
    work = i.copy()
    mirrored = np.zeros_like(work)
    scale = np.ones_like(work)
    while work.any():
        active = work > 0
        mirrored = np.where(active, mirrored * np.uint64(base) + work % np.uint64(base), mirrored)
        scale = np.where(active, scale * np.uint64(base), scale)
        work = work // np.uint64(base)
    return mirrored * np.uint64(cells) // scale


def test_halton_pixel_enumeration_matches_brute_force_scan() -> None:
    """
    Test per-pixel enumeration on a 4 x 9 image against a scan of the first 10**5 Halton points.

    Verifies that:
    - For every pixel the enumerated indices below 10**5 are exactly the scanned
      indices whose first two components land in it, in the same order
    - The next enumerated index lies beyond the scanned prefix
    """
    width, height, count = 4, 9, 10 ** 5
    i = np.arange(count, dtype=np.uint64)
    x = _exact_cell(i, 2, width)
    y = _exact_cell(i, 3, height)
    for px in range(width):
        for py in range(height):
            scanned = i[(x == px) & (y == py)]
            p = PixelCoord.in_image(px, py, width, height)
            enumerated = halton_pixel_enumeration(p, width, height, np.arange(scanned.size + 1))
            assert np.array_equal(enumerated[:-1], scanned), (px, py)
            assert enumerated[-1] >= count


@pytest.mark.parametrize("parts, base", [(8, 2), (9, 3), (1, 2)])
def test_partition_by_extra_dimension(parts: int, base: int) -> None:
    """
    Test partitioning indices by the radical inverse in an extra dimension.

    Verifies that:
    - Each class holds exactly the indices whose inverse lies in its interval
    - The classes cover every index once

    Args:
        parts (int): Number of parts.
        base (int): Base of the extra dimension.
    """
    classes = [partition_by_extra_dimension(part, parts, base) for part in range(parts)]
    for i in range(200):
        owners = [part for part, c in enumerate(classes) if i in c]
        assert len(owners) == 1
        assert int(radical_inverse_exact(i, base) * parts) == owners[0]
    members = classes[-1].indices(5)
    assert members.dtype == np.uint64
    assert all(int(i) in classes[-1] for i in members)


@pytest.mark.parametrize("parts", [2, 4, 8])
def test_partition_classes_cover_index_prefix(parts: int) -> None:
    """
    Test that the per-part enumerations together reproduce a sequence prefix exactly.

    Verifies that:
    - The classes' members below n, taken together, are 0, ..., n - 1 without repeats
    - The Sobol' points of the union, sorted by index, equal the prefix's points

    Args:
        parts (int): Number of parts P.
    """
    n = 1000
    members = []
    for part in range(parts):
        congruence = partition_by_extra_dimension(part, parts)
        count = -(-(n - congruence.residue) // congruence.modulus)
        members.append(congruence.indices(count))
    union = np.concatenate(members)
    assert union.size == n
    assert np.array_equal(np.sort(union), np.arange(n, dtype=np.uint64))

    order = np.argsort(union)
    points = np.concatenate([sobol_integer_points(n, 2)[m.astype(np.intp)] for m in members])
    assert np.array_equal(points[order], sobol_integer_points(n, 2))


def test_partition_rejects_bad_arguments() -> None:
    """
    Test that non-powers of the base and out-of-range parts are rejected.
    """
    assert partition_by_extra_dimension(1, 4) == IndexCongruence(2, 4)
    with pytest.raises(IndexRangeError):
        partition_by_extra_dimension(0, 6)
    with pytest.raises(IndexRangeError):
        partition_by_extra_dimension(4, 4)
    with pytest.raises(IndexRangeError):
        partition_by_extra_dimension(0, 4, base=1)


def test_xor_table_sample(tables) -> None:
    """
    Test sampling through XOR tables.

    Verifies that:
    - The first n_points samples of a pixel are the stored points, reordered and scrambled
    - Pixels wrap modulo 128
    - Indices beyond the point set are rejected

    Args:
        tables: Fixture providing XOR tables.
    """
    assert tables.dims == 3 and tables.n_points == 64
    p = PixelCoord(10, 20, 8)
    i = np.arange(64, dtype=np.uint32)
    for j in range(3):
        bits = xor_table_sample_bits(i, p, tables, j) ^ tables.scramble[10, 20, j]
        assert np.array_equal(np.sort(bits), np.sort(tables.points[:, j]))
    wrapped = PixelCoord(10 + XOR_TABLE_SIZE, 20, 8)
    assert np.array_equal(xor_table_sample(i, wrapped, tables, 1), xor_table_sample(i, p, tables, 1))
    with pytest.raises(IndexRangeError):
        xor_table_sample(64, p, tables, 0)
    with pytest.raises(IndexRangeError):
        xor_table_sample(0, p, tables, 3)


def test_xor_table_validation(tables) -> None:
    """
    Test that inconsistent table shapes are rejected.

    Args:
        tables: Fixture providing XOR tables.
    """
    with pytest.raises(TableFormatError):
        XorTables(tables.reorder[:64], tables.scramble, tables.points)
    with pytest.raises(TableFormatError):
        XorTables(tables.reorder, tables.scramble, tables.points[:48])
    with pytest.raises(TableFormatError):
        XorTables(tables.reorder + np.uint32(64), tables.scramble, tables.points)
    with pytest.raises(TableFormatError):
        XorTables(tables.reorder, tables.scramble[:, :, :2], tables.points)


def test_xor_table_file(tmp_path, tables) -> None:
    """
    Test the binary table format.

    Verifies that:
    - The file starts with the magic and holds 128 * 128 * (1 + dims) words
    - Loading restores the tables and infers the point count from the reorder words
    - Bad magic and truncated files raise TableFormatError

    Args:
        tmp_path: Pytest temporary directory.
        tables: Fixture providing XOR tables.
    """
    reorder = tables.reorder.copy()
    reorder[0, 0] = 63
    tables = XorTables(reorder, tables.scramble, tables.points)
    path = tmp_path / "tables.bin"
    write_xor_tables(tables, path)
    data = path.read_bytes()
    assert data[:4] == XOR_TABLE_MAGIC
    assert len(data) == 4 + 4 * XOR_TABLE_SIZE * XOR_TABLE_SIZE * 4

    loaded = load_xor_tables(path)
    assert loaded.n_points == 64 and loaded.dims == 3
    assert np.array_equal(loaded.reorder, tables.reorder)
    assert np.array_equal(loaded.scramble, tables.scramble)
    assert np.array_equal(loaded.points, sobol_integer_points(64, 3))
    assert load_xor_tables(path, n_points=128).n_points == 128

    path.write_bytes(b"XQT0" + data[4:])
    with pytest.raises(TableFormatError):
        load_xor_tables(path)
    path.write_bytes(data[:-3])
    with pytest.raises(TableFormatError):
        load_xor_tables(path)
