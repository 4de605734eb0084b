"""
Command-line front end.

    qmckit points    --sampler sobol --n 1024 --dims 2 --format csv
    qmckit render    --sampler pixel_shifted_lattice --size 128x128 --spp 4 -o out.pgm
    qmckit check     gv.txt --m-max 16
    qmckit bench     --sampler pixel_shifted_lattice --against halton --dims 32 --count 65536
    qmckit integrate --sampler lattice --integrand product-sine --schedule 256,1024,4096
    qmckit verify    --sampler sobol --dims 4 --m-max 12
    qmckit profile   -o profile.toml
    qmckit tables    --dims 4 --n 256 -o tables.xqt

Every command reads its defaults from the run profile given with --config; flags
override the profile. Exit codes: 0 success, 1 quality check failed, 2 usage or
configuration error.
"""

# Standard library imports
import argparse
import inspect
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

# Third-party imports
import numpy as np

# Local imports
from qmckit.errors import ConfigurationError, QMCError
from qmckit.handlers import JSONHandler
from qmckit.imageplane import XorTables, load_xor_tables, white_noise_tables, write_xor_tables
from qmckit.lattice import GeneratorVector, check_admissible
from qmckit.quality import (
    check_1d_stratification, integrand_by_name, integration_report, l2_star_discrepancy, measure_throughput,
    min_toroidal_distance,
)
from qmckit.radical import load_scramble_factors
from qmckit.render import IMAGE_FORMATS, SCENES, RenderJob, reference_image, render
from qmckit.settings import Profile, Settings
from qmckit.streams import STREAM_CLASSES, SampleStream, SamplerKind, make_stream

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_QUALITY = 1
EXIT_USAGE = 2

# Discrepancy and distance are quadratic in the number of points.
VERIFY_MAX_POINTS = 4096


def parse_size(text: str) -> Tuple[int, int]:
    try:
        width, height = (int(v) for v in text.lower().split("x"))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got '{text}'") from e
    return width, height


def parse_pixel(text: str) -> Tuple[int, int]:
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected X,Y, got '{text}'") from e
    return x, y


def parse_schedule(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated sample counts, got '{text}'") from e


def _next_power_of_two(n: int) -> int:
    return 1 << max(int(n) - 1, 0).bit_length()


def sampler_params(profile: Profile, kind: SamplerKind, dims: int, n_points: int) -> Dict[str, Any]:
    """
    Constructor parameters of `kind` taken from the profile, with files loaded once.

    Parameters the kind does not accept and unset values are left out. XOR-table
    kinds without a table file get white-noise tables over n_points points.
    """
    s = profile.sampler
    accepted = inspect.signature(STREAM_CLASSES[kind].__init__).parameters
    candidates = {
        "seed": s.seed, "mode": s.mode, "gv": s.gv, "dirnums": s.dirnums,
        "factors": s.factors, "tables": s.tables, "instances": s.instances,
    }
    params = {k: v for k, v in candidates.items() if k in accepted and v is not None}

    if isinstance(params.get("gv"), str):
        params["gv"] = GeneratorVector.from_file(params["gv"])
    if isinstance(params.get("factors"), str):
        params["factors"] = load_scramble_factors(params["factors"])
    if kind is SamplerKind.SOBOL_XOR_TABLE:
        if "tables" in params:
            params["tables"] = load_xor_tables(params["tables"])
        else:
            logger.warning("No XOR table file given; using white-noise tables")
            params["tables"] = white_noise_tables(dims, _next_power_of_two(n_points), s.seed or 0)
    return params


def build_stream(
        profile: Profile,
        kind: Optional[str] = None,
        dims: Optional[int] = None,
        pixel: Optional[Tuple[int, int]] = None,
        count: Optional[int] = None) -> SampleStream:
    """
    The stream described by the profile.

    Per-pixel kinds are bound to `pixel` (default (0, 0)) of the profile's image;
    `count` is the number of samples the caller will draw from it.
    """
    kind = SamplerKind(kind or profile.sampler.kind)
    dims = dims or profile.sampler.dims
    count = count or profile.image.spp
    params = sampler_params(profile, kind, dims, count)
    if kind.per_pixel:
        params.update(pixel=pixel or (0, 0), width=profile.image.width, height=profile.image.height)
        if kind is SamplerKind.HALTON_HILBERT:
            params["spp"] = max(count, profile.image.spp)
    return make_stream(kind, dims=dims, **params)


def _write_text(path: Optional[Path], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)
        logger.info(f"Wrote {path}")


def _write_bytes(path: Optional[Path], data: bytes) -> None:
    if path is None:
        sys.stdout.buffer.write(data)
    else:
        with open(path, "wb") as f:
            f.write(data)
        logger.info(f"Wrote {path}")


def cmd_points(args: argparse.Namespace, settings: Settings) -> int:
    """Write the first n points as CSV (nine decimals) or little-endian binary32."""
    profile = settings.profile
    n = profile.run.n
    stream = build_stream(profile, pixel=args.pixel, count=n)
    points = stream.points(np.arange(n, dtype=np.uint64))
    fmt = args.format or "csv"
    if fmt == "csv":
        lines = [",".join(f"{v:.9f}" for v in row) for row in points.tolist()]
        _write_text(args.output, "".join(line + "\n" for line in lines))
    elif fmt == "bin":
        _write_bytes(args.output, points.astype("<f4").tobytes())
    else:
        raise ConfigurationError(f"points supports --format csv or bin, got '{fmt}'")
    return EXIT_OK


def cmd_render(args: argparse.Namespace, settings: Settings) -> int:
    """Render the test scene with the selected sampler and report the RMS error."""
    profile = settings.profile
    kind = SamplerKind(profile.sampler.kind)
    fmt = args.format or "pgm"
    if fmt not in IMAGE_FORMATS:
        raise ConfigurationError(f"render supports --format {' or '.join(IMAGE_FORMATS)}, got '{fmt}'")
    job = RenderJob(
        width=profile.image.width,
        height=profile.image.height,
        spp=profile.image.spp,
        kind=kind.value,
        sampler_params=sampler_params(profile, kind, 2, profile.image.spp),
        scene=args.scene,
        output=args.output,
        workers=profile.run.workers,
        accum=profile.run.accum,
        fmt=fmt,
    )
    image = render(job)
    rms = image.rms_error(reference_image(job.width, job.height, job.scene))
    print(f"sampler={job.kind} size={job.width}x{job.height} spp={job.spp} "
          f"rms_error={rms:.6e} sha256={image.checksum(fmt)}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace, settings: Settings) -> int:
    """Print the admissibility report of a generator vector; exit 1 on duplicates."""
    path = args.file or settings.profile.sampler.gv
    if path is None:
        raise ConfigurationError("check needs a generator-vector file")
    vector = GeneratorVector.from_file(path, m_max=None)
    report = check_admissible(vector, settings.profile.run.m_max)
    rows = report.to_rows()
    if args.format == "json":
        _write_text(args.output, JSONHandler.dumps({"file": str(path), "levels": rows}) + "\n")
    else:
        header = ",".join(rows[0]) if rows else "m"
        lines = [",".join(str(v).lower() if isinstance(v, bool) else str(v) for v in row.values()) for row in rows]
        _write_text(args.output, "\n".join([header] + lines) + "\n")
    return EXIT_OK if report.admissible else EXIT_QUALITY


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    """Compare the throughput of two samplers and print the ratio A / B."""
    profile = settings.profile
    count = profile.run.count
    first = build_stream(profile, count=count)
    second = build_stream(profile, kind=args.against or profile.sampler.kind, count=count)
    a = measure_throughput(first, count)
    b = measure_throughput(second, count)
    for name, result in (("A", a), ("B", b)):
        print(f"{name}: {result.sampler['kind']} dims={result.dims} count={result.count} "
              f"components_per_second={result.components_per_second:.4e} sha256={result.checksum}")
    print(f"ratio={a.components_per_second / b.components_per_second:.3f}")
    return EXIT_OK


def cmd_integrate(args: argparse.Namespace, settings: Settings) -> int:
    """Integrate a test function over a schedule of sample counts and write the report."""
    run = settings.profile.run
    schedule = run.schedule
    stream = build_stream(settings.profile, count=max(schedule) if schedule else None)
    f = integrand_by_name(run.integrand, stream.dims)
    report = integration_report(stream, f, schedule, run.accum, run.workers)
    fmt = args.format or "csv"
    if fmt == "json":
        if args.output is None:
            print(JSONHandler.dumps(report.to_dict()))
        else:
            report.write_json(args.output)
    elif fmt == "csv":
        if args.output is None:
            for row in report.to_rows():
                print(",".join(str(row[k]) for k in report.FIELDS))
        else:
            report.write_csv(args.output)
    else:
        raise ConfigurationError(f"integrate supports --format csv or json, got '{fmt}'")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    """Check one-dimensional stratification and print discrepancy and distance; exit 1 on failure."""
    profile = settings.profile
    m = min(profile.run.m_max, 20)
    stream = build_stream(profile, pixel=args.pixel, count=1 << m)
    failures = []
    for j in range(stream.dims):
        if not check_1d_stratification(stream, j, m).ok:
            failures.append(j)
    n = min(1 << m, VERIFY_MAX_POINTS)
    points = stream.points(np.arange(n, dtype=np.uint64))
    print(f"sampler={stream.kind} dims={stream.dims} m={m} "
          f"stratified={'all' if not failures else 'failed:' + ','.join(map(str, failures))}")
    print(f"l2_star_discrepancy(n={n})={l2_star_discrepancy(points):.6e}")
    if n >= 2:
        print(f"min_toroidal_distance(n={n})={min_toroidal_distance(points):.6e}")
    return EXIT_OK if not failures else EXIT_QUALITY


def cmd_profile(args: argparse.Namespace, settings: Settings) -> int:
    """Write the effective profile, defaults merged with --config and flags."""
    if args.output is None:
        raise ConfigurationError("profile needs an output file (-o), its suffix selects the format")
    settings.save_config(args.output)
    return EXIT_OK


def cmd_tables(args: argparse.Namespace, settings: Settings) -> int:
    """Write white-noise XOR tables in the binary table format."""
    if args.output is None:
        raise ConfigurationError("tables needs an output file (-o)")
    profile = settings.profile
    n_points = _next_power_of_two(profile.run.n)
    tables: XorTables = white_noise_tables(profile.sampler.dims, n_points, profile.sampler.seed or 0)
    write_xor_tables(tables, args.output)
    return EXIT_OK


COMMANDS = {
    "points": cmd_points,
    "render": cmd_render,
    "check": cmd_check,
    "bench": cmd_bench,
    "integrate": cmd_integrate,
    "verify": cmd_verify,
    "profile": cmd_profile,
    "tables": cmd_tables,
}

# Flag destination -> profile key.
OVERRIDES = {
    "sampler": "sampler.kind",
    "dims": "sampler.dims",
    "seed": "sampler.seed",
    "mode": "sampler.mode",
    "gv": "sampler.gv",
    "dirnums": "sampler.dirnums",
    "factors": "sampler.factors",
    "tables": "sampler.tables",
    "instances": "sampler.instances",
    "spp": "image.spp",
    "n": "run.n",
    "workers": "run.workers",
    "accum": "run.accum",
    "integrand": "run.integrand",
    "schedule": "run.schedule",
    "m_max": "run.m_max",
    "count": "run.count",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run profile (.json, .toml, .yaml)")
    common.add_argument("--sampler", help=f"one of {', '.join(k.value for k in SamplerKind)}")
    common.add_argument("--dims", type=int)
    common.add_argument("--n", type=int, help="number of points")
    common.add_argument("--spp", type=int, help="samples per pixel")
    common.add_argument("--size", type=parse_size, help="image size WxH")
    common.add_argument("--pixel", type=parse_pixel, help="pixel X,Y for per-pixel samplers")
    common.add_argument("--seed", type=int)
    common.add_argument("--gv", help="generator-vector file")
    common.add_argument("--dirnums", help="Sobol' direction-number file")
    common.add_argument("--mode", choices=("plain", "faure", "linear"), help="Halton scrambling")
    common.add_argument("--factors", help="linear scramble factor file")
    common.add_argument("--tables", help="XOR table file")
    common.add_argument("--instances", type=int, help="superimposed random lattices per pixel")
    common.add_argument("--workers", type=int)
    common.add_argument("--accum", choices=("kahan", "int"))
    common.add_argument("--integrand")
    common.add_argument("--schedule", type=parse_schedule, help="comma-separated sample counts")
    common.add_argument("--m-max", dest="m_max", type=int)
    common.add_argument("--count", type=int, help="samples per dimension for bench")
    common.add_argument("--format", choices=("csv", "bin", "pgm", "ppm", "json"))
    common.add_argument("-o", "--output", type=Path)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qmckit", description="Quasi-Monte Carlo sampler toolkit.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command in COMMANDS.items():
        sub = subparsers.add_parser(name, parents=[common], help=command.__doc__.splitlines()[0])
        if name == "check":
            sub.add_argument("file", nargs="?", help="generator-vector file")
        if name == "bench":
            sub.add_argument("--against", help="sampler B, compared against --sampler")
        if name == "render":
            sub.add_argument("--scene", choices=tuple(SCENES), default="scene")
    return parser


def load_settings(args: argparse.Namespace) -> Settings:
    """Profile from --config, overridden by the flags given on the command line."""
    settings = Settings.from_file(args.config) if args.config is not None else Settings()
    overrides = {key: getattr(args, dest, None) for dest, key in OVERRIDES.items()}
    if args.size is not None:
        overrides["image.width"], overrides["image.height"] = args.size
    settings.update(overrides)
    return settings


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        settings = load_settings(args)
        return COMMANDS[args.command](args, settings)
    except (QMCError, OSError) as e:
        logger.debug("Command failed", exc_info=True)
        print(f"qmckit {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
