"""
Test suite for the Sobol' sequence.

Tests cover:
- Parsing and validation of Joe-Kuo direction-number files
- Generator matrix columns and their ranks
- Known components and points, with and without XOR scrambling
- Agreement of the packed and the per-column evaluation
- Stratification of the first 2**m points
"""

# Third-party imports
import numpy as np
import pytest

# Local imports
from qmckit.digitalnet import (
    SOBOL_COLUMNS,
    VAN_DER_CORPUT,
    DirectionNumbers,
    build_matrices,
    default_matrices,
    load_direction_numbers,
    parse_direction_numbers,
    random_scrambles,
    sobol_component,
    sobol_component_bits,
    sobol_component_bits_packed,
    sobol_point,
)
from qmckit.errors import DirectionNumberError, IndexRangeError
from qmckit.unitfloat import map_u32_to_unifloat

HEADER = "d       s       a       m_i\n"


def test_parse_single_dimension() -> None:
    """
    Test parsing a header and one degree-1 record.

    Verifies that:
    - Dimension 0 is synthesised as van der Corput
    - The record becomes dimension 1 with degree 1, a = 0, m = (1,)
    """
    dns = parse_direction_numbers(HEADER + "2 1 0 1\n")
    assert len(dns) == 2
    assert dns.dimensions[0] == VAN_DER_CORPUT
    assert dns.dimensions[1] == DirectionNumbers(1, 0, (1,))


def test_parse_empty_body() -> None:
    """
    Test that an empty file yields only the implicit dimension 0.
    """
    assert parse_direction_numbers("").dimensions == (VAN_DER_CORPUT,)
    assert len(parse_direction_numbers(HEADER)) == 1


@pytest.mark.parametrize("record", [
    "2 1 0 2",      # even direction number
    "3 2 1 1 5",    # m_2 >= 4
    "3 2 1 1",      # degree does not match the count of m values
    "2 1 1 1",      # coefficients do not fit the degree
    "2 1 0",        # too few fields
    "2 1 0 x",      # not an integer
])
def test_parse_rejects_invalid_records(record: str) -> None:
    """
    Test that invalid records raise DirectionNumberError naming the line.

    Args:
        record (str): An invalid record placed on line 3.
    """
    text = HEADER + "2 1 0 1\n" + record + "\n"
    with pytest.raises(DirectionNumberError) as excinfo:
        parse_direction_numbers(text)
    assert excinfo.value.line_number == 3
    assert "line 3" in str(excinfo.value)


def test_load_bundled_and_custom_files(tmp_path) -> None:
    """
    Test loading the bundled file and a custom file.

    Verifies that:
    - The bundled file covers 64 dimensions
    - Its first records are the well-known degree 1 and 2 polynomials
    - A custom path is read as well

    Args:
        tmp_path: Pytest temporary directory.
    """
    dns = load_direction_numbers()
    assert len(dns) == 64
    assert dns.dimensions[1] == DirectionNumbers(1, 0, (1,))
    assert dns.dimensions[2] == DirectionNumbers(2, 1, (1, 3))

    path = tmp_path / "dirnums.txt"
    path.write_text(HEADER + "2 1 0 1\n3 2 1 1 3\n")
    assert len(load_direction_numbers(path)) == 3


def test_generator_columns() -> None:
    """
    Test the column words of the first three dimensions.

    Verifies that:
    - Dimension 0 is the bit-reversal identity
    - Dimension 1 follows the m = 1 recurrence
    - Dimension 2 has v_2 = 3 << 29
    - Requesting zero dimensions gives an empty set
    """
    matrices = build_matrices(load_direction_numbers(), 3)
    assert matrices.columns.shape == (3, SOBOL_COLUMNS)
    assert matrices.columns[0, :4].tolist() == [0x80000000, 0x40000000, 0x20000000, 0x10000000]
    assert matrices.columns[1, :4].tolist() == [0x80000000, 0xC0000000, 0xA0000000, 0xF0000000]
    assert matrices.columns[2, :3].tolist() == [0x80000000, 0xC0000000, 0x60000000]
    assert build_matrices(load_direction_numbers(), 0).dims == 0
    with pytest.raises(IndexRangeError):
        build_matrices(load_direction_numbers(), 65)


def test_generator_matrices_have_full_rank() -> None:
    """
    Test that every leading 32 x 32 block is invertible over F_2.
    """
    matrices = default_matrices()
    assert all(matrices.rank(j) == 32 for j in range(matrices.dims))


@pytest.mark.parametrize("i, j, expected", [
    (0, 0, 0.0),
    (0, 5, 0.0),
    (1, 0, 0.5),
    (3, 0, 0.75),
    (2, 1, 0.75),
    (3, 1, 0.25),
])
def test_sobol_component_known_values(i: int, j: int, expected: float) -> None:
    """
    Test unscrambled components on hand-checked inputs.

    Args:
        i (int): Index.
        j (int): Dimension.
        expected (float): Expected value.
    """
    assert float(sobol_component(i, j)) == expected


def test_scramble_passthrough() -> None:
    """
    Test that index 0 returns the scramble word itself.

    Verifies that:
    - sobol_component(0, j, r) == map_u32_to_unifloat(r)
    - Scrambling is an XOR of the plain bits
    """
    r = 0x9E3779B9
    assert sobol_component(0, 4, r) == map_u32_to_unifloat(r)
    i = np.arange(1000, dtype=np.uint64)
    assert np.array_equal(sobol_component_bits(i, 4, r), sobol_component_bits(i, 4) ^ np.uint32(r))


@pytest.mark.parametrize("j", [0, 1, 7, 63])
def test_packed_matches_per_column(j: int) -> None:
    """
    Test that the four-column evaluation equals the per-column evaluation.

    Verifies that:
    - Both agree on small indices and on random 52-bit indices

    Args:
        j (int): Dimension.
    """
    rng = np.random.default_rng(j)
    i = np.concatenate([np.arange(4096, dtype=np.uint64),
                        rng.integers(0, 1 << 52, size=2048, dtype=np.uint64)])
    assert np.array_equal(sobol_component_bits_packed(i, j, 0x1234), sobol_component_bits(i, j, 0x1234))


def test_index_range() -> None:
    """
    Test the 52-bit index limit and the dimension range.
    """
    assert isinstance(sobol_component_bits((1 << 52) - 1, 3), int)
    with pytest.raises(IndexRangeError):
        sobol_component((1 << 52), 0)
    with pytest.raises(IndexRangeError):
        sobol_component(1, 64)


def test_sobol_point() -> None:
    """
    Test whole points.

    Verifies that:
    - The origin is the first point and (0.5, 0.5) the second
    - Components equal sobol_component with the same scramble words
    - The number of scramble words must match dims
    """
    assert not sobol_point(0, 6).any()
    assert sobol_point(1, 2).tolist() == [0.5, 0.5]

    scrambles = random_scrambles(5, seed=11)
    i = np.arange(256, dtype=np.uint64)
    points = sobol_point(i, 5, scrambles)
    assert points.shape == (256, 5)
    for j in range(5):
        assert np.array_equal(points[:, j], sobol_component(i, j, int(scrambles[j])))
    with pytest.raises(IndexRangeError):
        sobol_point(1, 3, [0, 0])


@pytest.mark.parametrize("m", [1, 4, 8, 12])
def test_one_dimensional_stratification(m: int) -> None:
    """
    Test that the first 2**m points fill every interval [k / 2**m, (k + 1) / 2**m) once.

    Args:
        m (int): Log2 of the point count.
    """
    i = np.arange(1 << m, dtype=np.uint64)
    for j in (0, 1, 2, 10, 40):
        cells = sobol_component_bits(i, j, 0xDEADBEEF) >> np.uint32(32 - m)
        assert np.array_equal(np.sort(cells), np.arange(1 << m))


def test_two_dimensional_net() -> None:
    """
    Test that the first 64 points of dimensions 0 and 1 put one point in each 8 x 8 cell.
    """
    i = np.arange(64, dtype=np.uint64)
    x = sobol_component_bits(i, 0) >> np.uint32(29)
    y = sobol_component_bits(i, 1) >> np.uint32(29)
    assert len(set(zip(x.tolist(), y.tolist()))) == 64


def test_random_scrambles_are_deterministic() -> None:
    """
    Test that the same seed gives the same scramble words.
    """
    assert np.array_equal(random_scrambles(8, 3), random_scrambles(8, 3))
    assert not np.array_equal(random_scrambles(8, 3), random_scrambles(8, 4))
    assert random_scrambles(8, 3).dtype == np.uint32
