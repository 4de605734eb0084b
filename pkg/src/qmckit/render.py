"""
Rendering of a synthetic scene to compare samplers in screen space.

Each pixel value is the sample mean of a scene function over the pixel footprint,
with sub-pixel positions taken from components 0 and 1 of the pixel's stream. The
scene has a closed-form smooth part and a disk edge, so a per-pixel reference and
the error image are cheap to obtain.

Per-pixel kinds get one stream per pixel. Global kinds give pixel n = y * width + x
the index block [n * spp, (n + 1) * spp) of one shared stream.
"""

# Standard library imports
import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Union

# Third-party imports
import numpy as np

# Local imports
from qmckit.errors import ConfigurationError
from qmckit.quality import ACCUMULATOR_MODES, Accumulator
from qmckit.streams import SampleStream, SamplerKind, make_stream

logger = logging.getLogger(__name__)

SCENE_FREQUENCY = 8 * np.pi
DISK_CENTER = (0.5, 0.5)
DISK_RADIUS = 0.3
REFERENCE_SUPERSAMPLING = 32
IMAGE_FORMATS = ("pgm", "ppm")


def _sine_part(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.sin(SCENE_FREQUENCY * u) * np.sin(SCENE_FREQUENCY * v))


def _disk_part(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    du, dv = u - DISK_CENTER[0], v - DISK_CENTER[1]
    return (du * du + dv * dv < DISK_RADIUS * DISK_RADIUS).astype(np.float64)


SCENES: Dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "scene": lambda u, v: 0.5 * _sine_part(u, v) + 0.5 * _disk_part(u, v),
    "sine": _sine_part,
    "disk": _disk_part,
}


def scene_value(u: np.ndarray, v: np.ndarray, scene: str = "scene") -> np.ndarray:
    """The scene at image-normalised positions (u, v) in [0, 1)^2."""
    try:
        return SCENES[scene](np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64))
    except KeyError as e:
        raise ConfigurationError(f"unknown scene '{scene}', expected one of {list(SCENES)}") from e


def _sine_average(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # mean of sin(w t) over [lo, hi]
    return (np.cos(SCENE_FREQUENCY * lo) - np.cos(SCENE_FREQUENCY * hi)) / (SCENE_FREQUENCY * (hi - lo))


@lru_cache(maxsize=8)
def _disk_reference(width: int, height: int) -> np.ndarray:
    k = REFERENCE_SUPERSAMPLING
    offsets = (np.arange(k) + 0.5) / k
    u = ((np.arange(width)[:, None] + offsets[None, :]) / width).ravel()
    image = np.empty((height, width))
    for y in range(height):
        v = (y + offsets) / height
        inside = _disk_part(u[None, :], v[:, None])
        image[y] = inside.reshape(k, width, k).mean(axis=(0, 2))
    logger.debug(f"Computed {width}x{height} disk reference with {k}x{k} supersampling")
    return image


def reference_image(width: int, height: int, scene: str = "scene") -> np.ndarray:
    """
    Per-pixel averages of the scene, shape (height, width).

    The sine part is integrated in closed form, the disk by midpoint supersampling
    with 32 x 32 samples per pixel.
    """
    if scene not in SCENES:
        raise ConfigurationError(f"unknown scene '{scene}', expected one of {list(SCENES)}")
    x = np.arange(width)
    y = np.arange(height)
    su = _sine_average(x / width, (x + 1) / width)
    sv = _sine_average(y / height, (y + 1) / height)
    sine = 0.5 * (1.0 + sv[:, None] * su[None, :])
    if scene == "sine":
        return sine
    disk = _disk_reference(width, height)
    return disk.copy() if scene == "disk" else 0.5 * sine + 0.5 * disk


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """
    A grayscale image of per-pixel values.

    Attributes:
        width (int): Columns.
        height (int): Rows.
        values (np.ndarray): float64 array of shape (height, width), all finite.
    """
    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.height, self.width):
            raise ConfigurationError(f"image values have shape {self.values.shape}, expected {(self.height, self.width)}")
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationError("image contains non-finite values")

    def to_bytes8(self) -> np.ndarray:
        """Values quantised to 0..255 by floor(clip(v, 0, 1) * 255 + 0.5)."""
        return np.floor(np.clip(self.values, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)

    def encode(self, fmt: str = "pgm") -> bytes:
        """Binary PGM (P5) or PPM (P6, gray replicated to RGB), maxval 255."""
        pixels = self.to_bytes8()
        if fmt == "pgm":
            return b"P5\n%d %d\n255\n" % (self.width, self.height) + pixels.tobytes()
        if fmt == "ppm":
            return b"P6\n%d %d\n255\n" % (self.width, self.height) + np.repeat(pixels, 3, axis=1).tobytes()
        raise ConfigurationError(f"unknown image format '{fmt}', expected one of {IMAGE_FORMATS}")

    def write(self, path: Union[str, Path], fmt: str = "pgm") -> None:
        with open(path, "wb") as f:
            f.write(self.encode(fmt))
        logger.info(f"Saved {self.width}x{self.height} {fmt.upper()} image to {path}")

    def checksum(self, fmt: str = "pgm") -> str:
        """SHA-256 of the encoded image."""
        return hashlib.sha256(self.encode(fmt)).hexdigest()

    def rms_error(self, reference: np.ndarray) -> float:
        return float(np.sqrt(np.mean((self.values - reference) ** 2)))


@dataclass
class RenderJob:
    """
    Everything needed to render one image.

    Attributes:
        width (int): Image width.
        height (int): Image height.
        spp (int): Samples per pixel.
        kind (str): Sampler kind.
        sampler_params (Dict[str, Any]): Extra make_stream parameters of the kind.
        scene (str): 'scene', 'sine' or 'disk'.
        output (Optional[Path]): Image file to write.
        workers (int): Threads rendering rows.
        accum (str): 'kahan' or 'int' accumulation per pixel.
        fmt (str): 'pgm' or 'ppm'.
    """
    width: int
    height: int
    spp: int
    kind: str = "sobol"
    sampler_params: Dict[str, Any] = field(default_factory=dict)
    scene: str = "scene"
    output: Optional[Path] = None
    workers: int = 1
    accum: str = "kahan"
    fmt: str = "pgm"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigurationError(f"image size must be positive, got {self.width}x{self.height}")
        if self.spp < 1:
            raise ConfigurationError(f"samples per pixel must be positive, got {self.spp}")
        if self.workers < 1:
            raise ConfigurationError(f"worker count must be positive, got {self.workers}")
        if self.accum not in ACCUMULATOR_MODES:
            raise ConfigurationError(f"unknown accumulator mode '{self.accum}'")
        if self.fmt not in IMAGE_FORMATS:
            raise ConfigurationError(f"unknown image format '{self.fmt}', expected one of {IMAGE_FORMATS}")
        if self.scene not in SCENES:
            raise ConfigurationError(f"unknown scene '{self.scene}', expected one of {list(SCENES)}")
        try:
            self.kind = SamplerKind(self.kind).value
        except ValueError as e:
            raise ConfigurationError(f"unknown sampler kind '{self.kind}'") from e


class Renderer:
    """
    Renders a RenderJob.

    Rows are distributed over a thread pool; every pixel is computed from its own
    samples in index order, so the image does not depend on the worker count.
    """

    def __init__(self, job: RenderJob):
        self.job = job
        self.kind = SamplerKind(job.kind)
        self._shared: Optional[SampleStream] = None
        if not self.kind.per_pixel:
            self._shared = make_stream(self.kind, dims=2, **job.sampler_params)

    def stream_for(self, x: int, y: int) -> SampleStream:
        """The stream sampling pixel (x, y)."""
        if self._shared is not None:
            return self._shared
        params = dict(self.job.sampler_params, dims=2, pixel=(x, y), width=self.job.width, height=self.job.height)
        if self.kind is SamplerKind.HALTON_HILBERT:
            params.setdefault("spp", self.job.spp)
        return make_stream(self.kind, **params)

    def pixel_value(self, x: int, y: int) -> float:
        job = self.job
        stream = self.stream_for(x, y)
        local = np.arange(job.spp, dtype=np.uint64)
        if self._shared is not None:
            local = local + np.uint64((y * job.width + x) * job.spp)
        su = stream.samples(local, 0).astype(np.float64)
        sv = stream.samples(local, 1).astype(np.float64)
        values = scene_value((x + su) / job.width, (y + sv) / job.height, job.scene)
        acc = Accumulator(job.accum)
        acc.add_array(values)
        return acc.value / job.spp

    def render_row(self, y: int) -> np.ndarray:
        return np.array([self.pixel_value(x, y) for x in range(self.job.width)])

    def render(self) -> ImageBuffer:
        job = self.job
        if job.workers == 1:
            rows = [self.render_row(y) for y in range(job.height)]
        else:
            with ThreadPoolExecutor(max_workers=job.workers) as pool:
                rows = list(pool.map(self.render_row, range(job.height)))
        image = ImageBuffer(job.width, job.height, np.vstack(rows))
        logger.info(f"Rendered {job.width}x{job.height} at {job.spp} spp with {job.kind}")
        return image


def render(job: RenderJob) -> ImageBuffer:
    """Render the job and write its output file if one is set."""
    image = Renderer(job).render()
    if job.output is not None:
        image.write(job.output, job.fmt)
    return image
