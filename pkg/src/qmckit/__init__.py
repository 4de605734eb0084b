"""
Quasi-Monte Carlo sampling for image synthesis.

qmckit evaluates low-discrepancy samplers in 32-bit integer arithmetic and maps the
results to binary32 in one final step: radical inverses with digit scrambling,
Sobol' sequences, rank-1 lattice sequences with shared, hashed or pixel-shifted
generator vectors, and image-plane constructions on top of them. Every sampler is
reachable as a SampleStream through make_stream.
"""

# Local imports
from qmckit.digitalnet import sobol_component, sobol_point
from qmckit.lattice import GeneratorVector, check_admissible, lattice_component, lattice_point, lfsr_generator_vector
from qmckit.radical import halton_point, radical_inverse
from qmckit.settings import Profile, Settings
from qmckit.streams import SampleStream, SamplerKind, make_stream
from qmckit.unitfloat import bit_reverse32, map_u32_to_unifloat

__version__ = "0.1.0"

__all__ = [
    'GeneratorVector',
    'Profile',
    'SampleStream',
    'SamplerKind',
    'Settings',
    'bit_reverse32',
    'check_admissible',
    'halton_point',
    'lattice_component',
    'lattice_point',
    'lfsr_generator_vector',
    'make_stream',
    'map_u32_to_unifloat',
    'radical_inverse',
    'sobol_component',
    'sobol_point',
]
