"""
Test suite for sample streams and the make_stream registry.

Tests cover:
- Building every sampler kind by name, and parameter validation
- Agreement of streams with the underlying sampler functions
- Shapes, ranges and determinism shared by all streams
- Kind-specific behaviour of the per-pixel streams
"""

# Third-party imports
import numpy as np
import pytest

# Local imports
from qmckit.digitalnet import random_scrambles, sobol_point
from qmckit.errors import ConfigurationError, IndexRangeError
from qmckit.imageplane import ImagePlaneHalton, PixelCoord, hilbert_index, white_noise_tables, write_xor_tables
from qmckit.lattice import GeneratorVector, lattice_point, lfsr_generator_vector, random_lattice_bits
from qmckit.radical import halton_point
from qmckit.streams import (
    HaltonStream,
    PixelRandomLatticeStream,
    SamplerKind,
    SobolStream,
    make_stream,
)

DIMS = 3
WIDTH, HEIGHT = 8, 6


@pytest.fixture(params=[kind.value for kind in SamplerKind])
def stream(request):
    """
    Fixture providing one stream of every sampler kind.

    Args:
        request: Pytest request object with the kind as parameter.

    Returns:
        SampleStream: A three-dimensional stream; per-pixel kinds sample pixel (3, 2).
    """
    params = {"dims": DIMS}
    kind = SamplerKind(request.param)
    if kind.per_pixel:
        params.update(pixel=(3, 2), width=WIDTH, height=HEIGHT)
    if kind is SamplerKind.HALTON_HILBERT:
        params["spp"] = 64
    if kind is SamplerKind.SOBOL_XOR_TABLE:
        params["tables"] = white_noise_tables(DIMS, 64, seed=1)
    return make_stream(kind, **params)


def test_stream_points(stream) -> None:
    """
    Test shapes, ranges and consistency of the stream accessors.

    Verifies that:
    - points returns float32 of shape (n, dims) in [0, 1)
    - sample, samples, point and bits agree with each other
    - Evaluation is deterministic

    Args:
        stream: Fixture providing a stream.
    """
    i = np.arange(64, dtype=np.uint32)
    points = stream.points(i)
    assert points.shape == (64, DIMS) and points.dtype == np.float32
    assert np.all(points >= 0.0) and np.all(points < 1.0)
    assert np.array_equal(stream.points(i), points)
    for j in range(DIMS):
        assert np.array_equal(stream.samples(i, j), points[:, j])
        assert stream.sample(5, j) == points[5, j]
        assert stream.bits(i, j).dtype == np.uint32
    assert np.array_equal(stream.point(7), points[7])
    assert stream.params()["kind"] == stream.kind


def test_stream_rejects_bad_component(stream) -> None:
    """
    Test that components outside [0, dims) raise IndexRangeError.

    Args:
        stream: Fixture providing a stream.
    """
    with pytest.raises(IndexRangeError):
        stream.sample(0, DIMS)
    with pytest.raises(IndexRangeError):
        stream.samples([0, 1], -1)


def test_per_pixel_kinds() -> None:
    """
    Test which kinds are bound to a pixel.
    """
    global_kinds = {kind for kind in SamplerKind if not kind.per_pixel}
    assert global_kinds == {SamplerKind.SOBOL, SamplerKind.HALTON, SamplerKind.LATTICE, SamplerKind.RANDOM}


def test_make_stream_validation() -> None:
    """
    Test make_stream's parameter checks.

    Verifies that:
    - Unknown kinds, unknown and missing parameters raise ConfigurationError
    - dims must be positive
    - Pixel kinds with a bare (x, y) need the image size
    """
    with pytest.raises(ConfigurationError):
        make_stream("scrambled_noise", dims=2)
    with pytest.raises(ConfigurationError):
        make_stream("sobol", dims=2, spp=4)
    with pytest.raises(ConfigurationError):
        make_stream("halton")
    with pytest.raises(ConfigurationError):
        make_stream("lattice", dims=0)
    with pytest.raises(ConfigurationError):
        make_stream("pixel_shifted_lattice", dims=2, pixel=(1, 1))
    with pytest.raises(ConfigurationError):
        make_stream("halton", dims=2, mode="owen")
    stream = make_stream(SamplerKind.PIXEL_SHIFTED_LATTICE, dims=2, pixel=PixelCoord(1, 1, 2))
    assert stream.pixel == PixelCoord(1, 1, 2)


def test_sobol_stream() -> None:
    """
    Test that Sobol' streams match sobol_point.

    Verifies that:
    - Unseeded streams are the plain sequence
    - A seed selects random_scrambles(dims, seed)
    - Explicit scramble words are used and validated
    - Indices may use 52 bits
    """
    i = np.arange(100, dtype=np.uint64)
    assert np.array_equal(make_stream("sobol", dims=4).points(i), sobol_point(i, 4))
    seeded = make_stream("sobol", dims=4, seed=9)
    assert np.array_equal(seeded.points(i), sobol_point(i, 4, random_scrambles(4, 9)))
    explicit = SobolStream(2, scrambles=[1, 2])
    assert explicit.bits([0], 1)[0] == 2
    assert explicit.sample((1 << 52) - 1, 0) < 1.0
    with pytest.raises(ConfigurationError):
        SobolStream(2, scrambles=[1])
    with pytest.raises(ConfigurationError):
        SobolStream(65)


def test_sobol_stream_custom_direction_numbers(tmp_path) -> None:
    """
    Test a Sobol' stream over a direction-number file.

    Args:
        tmp_path: Pytest temporary directory.
    """
    path = tmp_path / "dirnums.txt"
    path.write_text("d s a m_i\n2 1 0 1\n")
    stream = make_stream("sobol", dims=2, dirnums=str(path))
    assert stream.matrices.dims == 2
    assert stream.points([0, 1, 2, 3]).tolist() == [[0.0, 0.0], [0.5, 0.5], [0.25, 0.75], [0.75, 0.25]]
    with pytest.raises(ConfigurationError):
        make_stream("sobol", dims=3, dirnums=str(path))


@pytest.mark.parametrize("mode", ["plain", "faure", "linear"])
def test_halton_stream(mode: str) -> None:
    """
    Test that Halton streams match halton_point.

    Args:
        mode (str): Scrambling mode.
    """
    i = np.arange(200, dtype=np.uint32)
    assert np.array_equal(HaltonStream(5, mode).points(i), halton_point(i, 5, mode))


def test_halton_stream_factor_file(tmp_path) -> None:
    """
    Test that a factor file path is loaded.

    Args:
        tmp_path: Pytest temporary directory.
    """
    path = tmp_path / "factors.txt"
    path.write_text("5 2\n")
    stream = make_stream("halton", dims=3, mode="linear", factors=str(path))
    assert stream.factors[5].factor == 2
    assert stream.sample(1, 2) == pytest.approx(0.4, abs=2 ** -24)


def test_lattice_stream(tmp_path) -> None:
    """
    Test lattice streams.

    Verifies that:
    - The default generator vector is the LFSR vector with seed 0xACE1
    - Vectors can be given as sequences or files
    - Too short vectors are rejected

    Args:
        tmp_path: Pytest temporary directory.
    """
    i = np.arange(64, dtype=np.uint32)
    default = make_stream("lattice", dims=4)
    assert default.gv == lfsr_generator_vector(0xACE1, 4)
    assert np.array_equal(default.points(i), lattice_point(i, default.gv))

    path = tmp_path / "gv.txt"
    GeneratorVector((1, 182667, 469891)).to_file(path)
    from_file = make_stream("lattice", dims=3, gv=str(path))
    assert from_file.gv.components == (1, 182667, 469891)
    assert make_stream("lattice", dims=2, gv=[1, 3]).params()["gv"] == [1, 3]
    with pytest.raises(ConfigurationError):
        make_stream("lattice", dims=3, gv=[1, 3])


def test_random_stream() -> None:
    """
    Test the hash-based random stream.

    Verifies that:
    - The same seed reproduces the samples and another seed changes them
    - Sample means are close to 1/2
    """
    i = np.arange(20000, dtype=np.uint32)
    a = make_stream("random", dims=2, seed=1).points(i)
    assert np.array_equal(a, make_stream("random", dims=2, seed=1).points(i))
    assert not np.array_equal(a, make_stream("random", dims=2, seed=2).points(i))
    assert np.abs(a.mean(axis=0) - 0.5).max() < 0.02


def test_halton_hilbert_stream() -> None:
    """
    Test that a pixel's samples are its Hilbert block of the Halton sequence.
    """
    stream = make_stream("halton_hilbert", dims=2, pixel=(3, 2), spp=16, width=WIDTH, height=HEIGHT)
    h = hilbert_index(stream.pixel)
    i = np.arange(16)
    assert np.array_equal(stream.points(i), halton_point(h * 16 + i, 2))
    with pytest.raises(IndexRangeError):
        stream.sample(16, 0)


def test_pixel_random_lattice_instances() -> None:
    """
    Test superimposed hashed lattices.

    Verifies that:
    - One instance is the single hashed lattice
    - With two instances, even and odd samples come from hash families 0 and 1
    """
    pixel = PixelCoord(4, 5, 3)
    i = np.arange(16, dtype=np.uint32)
    single = PixelRandomLatticeStream(2, pixel)
    assert np.array_equal(single.bits(i, 1), random_lattice_bits(i, 1, 4, 5)[0])

    double = PixelRandomLatticeStream(2, pixel, instances=2)
    bits = double.bits(i, 1)
    assert np.array_equal(bits[0::2], random_lattice_bits(i[:8], 1, 4, 5, salt=0)[0])
    assert np.array_equal(bits[1::2], random_lattice_bits(i[:8], 1, 4, 5, salt=1)[0])
    with pytest.raises(ConfigurationError):
        PixelRandomLatticeStream(2, pixel, instances=0)


def test_image_plane_halton_stream() -> None:
    """
    Test that the stream enumerates the pixel's Halton subsequence.
    """
    stream = make_stream("image_plane_halton", dims=3, pixel=(5, 4), width=WIDTH, height=HEIGHT)
    sampler = ImagePlaneHalton(WIDTH, HEIGHT)
    k = np.arange(8)
    for j in range(3):
        assert np.array_equal(stream.bits(k, j), sampler.sample_bits(k, 5, 4, j))
    assert stream.params()["width"] == WIDTH


def test_xor_table_stream(tmp_path) -> None:
    """
    Test XOR table streams from tables and from a file path.

    Args:
        tmp_path: Pytest temporary directory.
    """
    tables = white_noise_tables(2, 32, seed=4)
    path = tmp_path / "tables.bin"
    write_xor_tables(tables, path)
    in_memory = make_stream("sobol_xor_table", dims=2, pixel=(1, 1), tables=tables, width=4, height=4)
    from_file = make_stream("sobol_xor_table", dims=2, pixel=(1, 1), tables=str(path), width=4, height=4)
    i = np.arange(16)
    assert np.array_equal(in_memory.points(i), from_file.points(i))
    with pytest.raises(ConfigurationError):
        make_stream("sobol_xor_table", dims=3, pixel=(1, 1), tables=tables, width=4, height=4)
