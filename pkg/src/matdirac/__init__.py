"""Numerical verification toolkit for the matrix Dirac equation and its gauge fields."""

from .commutant import (
    LieBasis,
    commutant_basis,
    exp_generator,
    group_membership,
    lie_algebra_basis,
    project_to_L,
)
from .dynamics import (
    PlaneWaveSolution,
    bilinear_current_raw,
    build_plane_wave,
    current_J,
    dirac_residual,
    divergence,
    current_identity_residual,
    kg_residual,
)
from .fields import FourierField, GaugeTransformField
from .gamma import METRIC, anticommutator, build_dirac_gammas, decompose_in_basis
from .gauge import GaugeField, field_strength, gauge_transform, polar_gauge, ym_residual
from .linalg import Tolerances, joint_diagonalize, null_space, polar_decompose
from .nk import (
    CanonicalNK,
    NKPair,
    classify,
    make_canonical,
    make_diagonal_pair,
    make_jordan_pair,
    validate_consistency,
    validate_two_level_structure,
)

__version__ = "0.1.0"
