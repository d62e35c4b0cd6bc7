"""Sampling and iterative reconstruction in shift-invariant subspaces of mixed Lebesgue spaces L^{p,q}.

All computation happens on a periodic torus ``[0, L)^{1+d}`` sampled on a
uniform grid; see :mod:`lpqsample.grid`.
"""

from .generator import DualData, Generator, StabilityViolation, make_dual, semi_discrete_conv
from .grid import CoeffArray, Domain, GridFunction, Point, quadrature, torus_distance
from .norms import INF, Exponents, amalgam_norm, lpq_grid_norm, lpq_seq_norm, osc_field
from .reconstruct import IterationConfig, ReconstructionReport, contraction_probe, density_sweep, fit_rate, reconstruct
from .sampling import Bupu, SamplingSet, build_bupu, certify_density, make_jittered, quasi_interpolant, sample_field
from .space import MultiSpace, SISpace, multi_gram_min, multi_synthesize, project, synthesize

__version__ = "0.1.0"
