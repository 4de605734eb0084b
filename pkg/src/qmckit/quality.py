"""
Quality measures for sample streams.

Uniformity is measured by the L2-star discrepancy (Warnock's closed form), one-
dimensional stratification and the minimum toroidal distance. Integration of test
functions with closed-form integrals gives an error measure; it runs in parallel
over a fixed set of index partitions whose partial sums are combined in partition
order, so estimates do not depend on the number of workers.
"""

# Standard library imports
import csv
import hashlib
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, ClassVar, Dict, List, Optional, Sequence, Tuple, Union

# Third-party imports
import numpy as np

# Local imports
from qmckit.errors import ConfigurationError, IndexRangeError, IntegrationError
from qmckit.handlers import JSONHandler
from qmckit.imageplane import partition_by_extra_dimension
from qmckit.streams import SampleStream

logger = logging.getLogger(__name__)

ACCUMULATOR_MODES = ("kahan", "int")

# Integer accumulation works in 2**-32 fixed point inside a signed 64-bit range.
FIXED_POINT_SCALE = 1 << 32
INT_ACCUMULATOR_LIMIT = 1 << 63

# Integration always splits indices into this many residue classes.
INTEGRATION_LEAVES = 64

# Rows per block in the O(N^2) kernels.
_BLOCK = 256


def _as_points(points: Union[np.ndarray, Sequence[Sequence[float]]]) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ConfigurationError(f"expected an (N, s) point array, got shape {arr.shape}")
    return arr


def l2_star_discrepancy(points: Union[np.ndarray, Sequence[Sequence[float]]]) -> float:
    """
    L2-star discrepancy by Warnock's formula.

    T^2 = 3^-s - (2/N) sum_i prod_j (1 - x_ij^2) / 2
          + (1/N^2) sum_i sum_k prod_j (1 - max(x_ij, x_kj))

    Args:
        points: Array of shape (N, s), or (N,) for s = 1.

    Returns:
        float: T, with negative round-off clamped to 0.

    Raises:
        ConfigurationError: For an empty point set or s = 0.
    """
    x = _as_points(points)
    n, s = x.shape
    if n == 0 or s == 0:
        raise ConfigurationError("discrepancy needs at least one point with at least one component")

    single = np.prod((1.0 - x * x) / 2.0, axis=1).sum()
    double = 0.0
    for start in range(0, n, _BLOCK):
        block = x[start:start + _BLOCK]
        product = np.ones((block.shape[0], n))
        for j in range(s):
            product *= 1.0 - np.maximum(block[:, j, None], x[None, :, j])
        double += product.sum()

    t2 = 3.0 ** -s - 2.0 / n * single + double / (n * n)
    return math.sqrt(max(t2, 0.0))


@dataclass(frozen=True, eq=False)
class StratificationResult:
    """
    Attributes:
        ok (bool): Every stratum holds exactly one value.
        histogram (np.ndarray): Values per stratum [k / 2**m, (k + 1) / 2**m).
    """
    ok: bool
    histogram: np.ndarray


def check_1d_stratification(stream: SampleStream, j: int, m: int) -> StratificationResult:
    """
    Whether the first 2**m values of component j fall one into each dyadic interval of length 2**-m.

    Strata are read off the top m bits of the integer stage, which equals flooring the
    binary32 value since map_u32_to_unifloat never rounds across k / 2**m.

    Raises:
        IndexRangeError: If m is outside [0, 20].
    """
    if not 0 <= m <= 20:
        raise IndexRangeError(f"stratification level m must be in [0, 20], got {m}")
    bits = stream.bits(np.arange(1 << m, dtype=np.uint64), j).astype(np.uint64)
    strata = bits >> np.uint64(32 - m) if m else np.zeros_like(bits)
    histogram = np.bincount(strata.astype(np.intp), minlength=1 << m)
    return StratificationResult(bool(np.all(histogram == 1)), histogram)


def min_toroidal_distance(points: Union[np.ndarray, Sequence[Sequence[float]]]) -> float:
    """
    Smallest wrap-around Euclidean distance between two distinct points of the set.

    Raises:
        ConfigurationError: For fewer than two points.
    """
    x = _as_points(points)
    n = x.shape[0]
    if n < 2:
        raise ConfigurationError(f"minimum distance needs at least two points, got {n}")

    best = math.inf
    for start in range(0, n, _BLOCK):
        block = x[start:start + _BLOCK]
        delta = np.abs(block[:, None, :] - x[None, :, :])
        delta = np.minimum(delta, 1.0 - delta)
        dist2 = (delta * delta).sum(axis=2)
        rows = np.arange(block.shape[0])
        dist2[rows, start + rows] = np.inf
        best = min(best, float(dist2.min()))
    return math.sqrt(best)


@dataclass(frozen=True)
class TestIntegrand:
    """
    A function on the unit cube with a known integral.

    Attributes:
        name (str): Identifier used on the command line and in reports.
        dims (int): Number of arguments s.
        evaluate (Callable): Maps an (N, s) float64 array to N values.
        exact_integral (float): Integral over [0, 1)^s.
    """
    __test__: ClassVar[bool] = False

    name: str
    dims: int
    evaluate: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    exact_integral: float

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate(_as_points(points)[:, :self.dims])


def product_sine(dims: int) -> TestIntegrand:
    """prod_j (pi / 2) sin(pi x_j), integral 1."""
    return TestIntegrand(
        "product-sine", dims, lambda x: np.prod(np.pi / 2 * np.sin(np.pi * x), axis=1), 1.0)


def product_poly(dims: int) -> TestIntegrand:
    """prod_j 3 x_j^2, integral 1."""
    return TestIntegrand("product-poly", dims, lambda x: np.prod(3.0 * x * x, axis=1), 1.0)


def indicator(dims: int, corner: Optional[Sequence[float]] = None) -> TestIntegrand:
    """prod_j 1[x_j < c_j], integral prod_j c_j; c_j = 0.5 by default."""
    c = np.full(dims, 0.5) if corner is None else np.asarray(corner, dtype=np.float64)
    if c.shape != (dims,) or np.any(c < 0) or np.any(c > 1):
        raise ConfigurationError(f"indicator corner must hold {dims} values in [0, 1], got {corner}")
    return TestIntegrand("indicator", dims, lambda x: np.all(x < c, axis=1).astype(np.float64), float(np.prod(c)))


def constant(dims: int, value: float = 1.0) -> TestIntegrand:
    return TestIntegrand("constant", dims, lambda x: np.full(x.shape[0], value), float(value))


INTEGRANDS: Dict[str, Callable[[int], TestIntegrand]] = {
    "product-sine": product_sine,
    "product-poly": product_poly,
    "indicator": indicator,
}


def builtin_integrands(dims: int = 3) -> List[TestIntegrand]:
    """The built-in test integrands in `dims` dimensions."""
    return [factory(dims) for factory in INTEGRANDS.values()]


def integrand_by_name(name: str, dims: int) -> TestIntegrand:
    try:
        return INTEGRANDS[name](dims)
    except KeyError as e:
        raise ConfigurationError(f"unknown integrand '{name}', expected one of {list(INTEGRANDS)}") from e


class Accumulator:
    """
    Running sum in one of two modes.

    'kahan' keeps a float64 sum with a Neumaier compensation term. 'int' quantises
    every value to 2**-32 fixed point and adds integers, which is associative and
    commutative as long as the total stays within the signed 64-bit range.

    Attributes:
        mode (str): 'kahan' or 'int'.
        count (int): Number of values added.
    """

    def __init__(self, mode: str = "kahan"):
        if mode not in ACCUMULATOR_MODES:
            raise ConfigurationError(f"unknown accumulator mode '{mode}', expected one of {ACCUMULATOR_MODES}")
        self.mode = mode
        self.count = 0
        self.total = 0.0
        self.compensation = 0.0
        self.fixed = 0

    def _add_float(self, x: float) -> None:
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.compensation += (self.total - t) + x
        else:
            self.compensation += (x - t) + self.total
        self.total = t

    def _add_fixed(self, q: int) -> None:
        self.fixed += q
        if not -INT_ACCUMULATOR_LIMIT <= self.fixed < INT_ACCUMULATOR_LIMIT:
            raise IntegrationError(f"integer accumulator left the 64-bit range after {self.count} values")

    def add(self, value: float) -> None:
        self.add_array(np.array([value], dtype=np.float64))

    def add_array(self, values: np.ndarray) -> None:
        """Add values in array order."""
        values = np.asarray(values, dtype=np.float64).ravel()
        if self.mode == "kahan":
            for x in values.tolist():
                self._add_float(x)
        else:
            if values.size and np.max(np.abs(values)) >= INT_ACCUMULATOR_LIMIT / FIXED_POINT_SCALE:
                raise IntegrationError("value too large for 2**-32 fixed-point accumulation")
            self._add_fixed(sum(np.rint(values * FIXED_POINT_SCALE).astype(np.int64).tolist()))
        self.count += values.size

    def merge(self, other: "Accumulator") -> None:
        """Add another accumulator of the same mode."""
        if other.mode != self.mode:
            raise ConfigurationError(f"cannot merge a '{other.mode}' accumulator into a '{self.mode}' one")
        if self.mode == "kahan":
            self._add_float(other.total)
            self._add_float(other.compensation)
        else:
            self._add_fixed(other.fixed)
        self.count += other.count

    @property
    def value(self) -> float:
        if self.mode == "kahan":
            return self.total + self.compensation
        return self.fixed / FIXED_POINT_SCALE


def reduce_deterministic(partials: Sequence[Tuple[int, Union[float, Accumulator]]], mode: str = "kahan") -> float:
    """
    Combine rank-tagged partial results in rank order.

    Args:
        partials: (rank, partial) pairs in any order; a partial is a float or an Accumulator.
        mode (str): Accumulation mode for float partials; accumulators bring their own.

    Returns:
        float: The combined sum, independent of the order the partials arrived in.
    """
    ordered = sorted(partials, key=lambda item: item[0])
    accumulators = [p for _, p in ordered if isinstance(p, Accumulator)]
    total = Accumulator(accumulators[0].mode if accumulators else mode)
    for _, partial in ordered:
        if isinstance(partial, Accumulator):
            total.merge(partial)
        else:
            total.add(partial)
    return total.value


@dataclass(frozen=True)
class IntegrationRow:
    """
    One integration run.

    Attributes:
        n (int): Number of samples.
        estimate (float): Sample mean.
        exact (float): Exact integral.
        abs_error (float): |estimate - exact|.
        seconds (float): Wall time.
    """
    n: int
    estimate: float
    exact: float
    abs_error: float
    seconds: float


def _leaf_sum(stream: SampleStream, f: TestIntegrand, n: int, rank: int, mode: str) -> Tuple[int, Accumulator]:
    congruence = partition_by_extra_dimension(rank, INTEGRATION_LEAVES)
    count = max(0, -(-(n - congruence.residue) // congruence.modulus))
    indices = congruence.indices(count)
    acc = Accumulator(mode)
    if count:
        x = np.stack([stream.samples(indices, j) for j in range(f.dims)], axis=-1).astype(np.float64)
        values = np.asarray(f.evaluate(x), dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise IntegrationError(
                f"{f.name} is not finite at sample {int(indices[bad[0]])}: {x[bad[0]].tolist()}")
        acc.add_array(values)
    return rank, acc


def integrate(stream: SampleStream, f: TestIntegrand, n: int, mode: str = "kahan", workers: int = 1) -> IntegrationRow:
    """
    Estimate the integral of f by the mean over the first n samples of the stream.

    The indices are split into 64 residue classes mod 64; each class is summed in
    index order, possibly on another worker, and the partial sums are reduced in
    class order. The estimate is therefore the same for any worker count.

    Args:
        stream (SampleStream): Sampler with at least f.dims components.
        f (TestIntegrand): The integrand.
        n (int): Number of samples, at least 1.
        mode (str): 'kahan' or 'int' accumulation.
        workers (int): Threads evaluating partitions.

    Returns:
        IntegrationRow: The estimate and its error.

    Raises:
        ConfigurationError: If the stream has too few dimensions or n < 1.
        IntegrationError: If f returns a non-finite value.
    """
    if stream.dims < f.dims:
        raise ConfigurationError(f"{f.name} needs {f.dims} dimensions, the stream has {stream.dims}")
    if n < 1:
        raise ConfigurationError(f"sample count must be positive, got {n}")
    if workers < 1:
        raise ConfigurationError(f"worker count must be positive, got {workers}")
    if mode not in ACCUMULATOR_MODES:
        raise ConfigurationError(f"unknown accumulator mode '{mode}', expected one of {ACCUMULATOR_MODES}")

    start = time.perf_counter()
    ranks = range(INTEGRATION_LEAVES)
    if workers == 1:
        partials = [_leaf_sum(stream, f, n, rank, mode) for rank in ranks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_leaf_sum, stream, f, n, rank, mode) for rank in ranks]
            partials = [future.result() for future in futures]
    estimate = reduce_deterministic(partials) / n
    seconds = time.perf_counter() - start

    logger.debug(f"Integrated {f.name} with {n} samples: {estimate!r}")
    return IntegrationRow(n, estimate, f.exact_integral, abs(estimate - f.exact_integral), seconds)


@dataclass
class IntegrationReport:
    """
    Integration results over a schedule of sample counts.

    Attributes:
        sampler (Dict[str, object]): Stream parameters.
        integrand (str): Integrand name.
        dims (int): Integrand dimensions.
        mode (str): Accumulation mode.
        rows (List[IntegrationRow]): One row per sample count, increasing.
    """
    sampler: Dict[str, object]
    integrand: str
    dims: int
    mode: str
    rows: List[IntegrationRow] = field(default_factory=list)

    FIELDS: ClassVar[Tuple[str, ...]] = ("n", "estimate", "exact", "abs_error", "seconds")

    def to_rows(self) -> List[Dict[str, object]]:
        return [asdict(row) for row in self.rows]

    def to_dict(self) -> Dict[str, object]:
        return {
            "sampler": {k: v if isinstance(v, (int, float, str, list, type(None))) else str(v)
                        for k, v in self.sampler.items()},
            "integrand": self.integrand,
            "dims": self.dims,
            "mode": self.mode,
            "rows": self.to_rows(),
        }

    def write_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=self.FIELDS)
            writer.writeheader()
            writer.writerows(self.to_rows())
        logger.info(f"Saved integration report with {len(self.rows)} rows to {path}")

    def write_json(self, path: Union[str, Path]) -> None:
        JSONHandler(path).save(self.to_dict())
        logger.info(f"Saved integration report with {len(self.rows)} rows to {path}")


def integration_report(
        stream: SampleStream,
        f: TestIntegrand,
        schedule: Sequence[int],
        mode: str = "kahan",
        workers: int = 1) -> IntegrationReport:
    """
    Run integrate for every sample count of a strictly increasing schedule.

    Raises:
        ConfigurationError: If the schedule is empty or not strictly increasing.
    """
    counts = [int(n) for n in schedule]
    if not counts or any(b <= a for a, b in zip(counts, counts[1:])):
        raise ConfigurationError(f"schedule must be a non-empty increasing list, got {counts}")
    report = IntegrationReport(stream.params(), f.name, f.dims, mode)
    for n in counts:
        report.rows.append(integrate(stream, f, n, mode, workers))
    return report


@dataclass(frozen=True)
class ThroughputResult:
    """
    Attributes:
        sampler (Dict[str, object]): Stream parameters.
        count (int): Samples per dimension.
        dims (int): Dimensions evaluated.
        seconds (float): Timed wall time.
        components_per_second (float): count * dims / seconds.
        checksum (str): SHA-256 of the produced uint32 words, little-endian.
    """
    sampler: Dict[str, object]
    count: int
    dims: int
    seconds: float
    components_per_second: float
    checksum: str


def measure_throughput(stream: SampleStream, count: int, dims: Optional[int] = None) -> ThroughputResult:
    """
    Time the generation of `count` samples in `dims` dimensions, after one warm-up pass.

    Raises:
        ConfigurationError: If count < 1 or dims exceeds the stream.
    """
    dims = stream.dims if dims is None else dims
    if count < 1:
        raise ConfigurationError(f"benchmark count must be positive, got {count}")
    if not 1 <= dims <= stream.dims:
        raise ConfigurationError(f"benchmark dims must be in [1, {stream.dims}], got {dims}")

    indices = np.arange(count, dtype=np.uint64)
    warmup = indices[:min(count, 1024)]
    for j in range(dims):
        stream.bits(warmup, j)

    digest = hashlib.sha256()
    start = time.perf_counter()
    for j in range(dims):
        digest.update(stream.bits(indices, j).astype("<u4").tobytes())
    seconds = max(time.perf_counter() - start, 1e-9)

    return ThroughputResult(stream.params(), count, dims, seconds, count * dims / seconds, digest.hexdigest())
