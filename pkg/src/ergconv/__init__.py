"""Mean, uniform and vague ergodicity of convolution operators on discrete groups."""
from .errors import ConfigError, ConsistencyError, ResourceError, StructuralError
from .groups import GroupHandle, abelian, ball, cyclic, dihedral, finite_cayley, free, generated_subgroup, lattice, word
from .measure import Measure, cesaro, convolve, involution, power, vague_probe
from .operator import ConvOperator, SupportedVector, apply, iterate_cesaro, operator_norm
from .spectral import gap_at_one, radius_estimate, spectrum2
from .ergodicity import classify, cross_check, fixed_point_analysis

__all__ = [
    "ConfigError", "ConsistencyError", "ResourceError", "StructuralError",
    "GroupHandle", "abelian", "ball", "cyclic", "dihedral", "finite_cayley", "free", "generated_subgroup", "lattice", "word",
    "Measure", "cesaro", "convolve", "involution", "power", "vague_probe",
    "ConvOperator", "SupportedVector", "apply", "iterate_cesaro", "operator_norm",
    "gap_at_one", "radius_estimate", "spectrum2",
    "classify", "cross_check", "fixed_point_analysis",
]
