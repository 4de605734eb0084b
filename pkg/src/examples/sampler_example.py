"""Example module demonstrating samplers and run profiles with qmckit.

This module shows how to use qmckit to configure and evaluate quasi-Monte Carlo
samplers. It demonstrates:
- Keeping a run profile in JSON, TOML or YAML and changing it with dot-notation
- Building sample streams from a sampler kind
- Checking a generator vector for admissibility
- Integrating a test function and comparing samplers
"""

# Standard library imports
from pathlib import Path

# Third-party imports
import numpy as np

# Local imports
from qmckit import Settings, check_admissible, lfsr_generator_vector, make_stream
from qmckit.quality import integrate, product_sine


def handle_profile(profile_path: Path) -> None:
    """Load a run profile, change it and sample with the configured stream.

    Creates the profile file with defaults when it does not exist, switches the
    sampler to a rank-1 lattice and prints its first points.

    Args:
        profile_path: Path to the profile file; the suffix selects the format
    """
    settings = Settings.from_file(profile_path)
    print(f"Profile: {profile_path}")
    print(f"Sampler: {settings.get('sampler.kind')}")

    settings.set("sampler.kind", "lattice")
    settings.set("sampler.dims", 3)
    stream = make_stream(settings.get("sampler.kind"), dims=settings.get("sampler.dims"))
    print(f"Updated sampler: {stream.params()}")
    print(stream.points(np.arange(4, dtype=np.uint32)))
    print()


def compare_samplers(n: int = 4096, dims: int = 3) -> None:
    """Integrate the product-sine function with several samplers.

    Args:
        n: Number of samples
        dims: Number of dimensions
    """
    f = product_sine(dims)
    for kind in ("random", "halton", "sobol", "lattice"):
        row = integrate(make_stream(kind, dims=dims), f, n)
        print(f"{kind:>8}: estimate={row.estimate:.6f} abs_error={row.abs_error:.2e}")

    report = check_admissible(lfsr_generator_vector(0xACE1, 8), 12)
    print(f"LFSR generator vector admissible up to m=12: {report.admissible}")


if __name__ == "__main__":
    for path in ("profile.json", "profile.toml", "profile.yaml"):
        handle_profile(Path(path))
    compare_samplers()
