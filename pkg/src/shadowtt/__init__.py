"""shadowtt: tensor-train tomography of matrix-product states from
randomized Pauli-measurement shadows, with exact small-system oracles."""

from shadowtt.hamiltonians import HamiltonianSpec, exact_ground_state, heisenberg_1d, tfim_1d
from shadowtt.linalg import SVDResult, contract, least_squares, truncated_svd
from shadowtt.mle import MLEConfig, amplitude, nll, nll_gradient, train
from shadowtt.mps import (
    MPS,
    canonicalize,
    mps_expectation,
    mps_to_statevector,
    random_mps,
    statevector_to_mps,
)
from shadowtt.pauli import PauliString
from shadowtt.paulitt import (
    TTCoeff,
    density_to_coeff,
    mps_to_tt_coeff,
    tt_entry,
    tt_frobenius_distance,
    tt_inner,
    tt_norm,
    tt_pauli_expectation,
    tt_renyi2,
    tt_to_density,
)
from shadowtt.shadows import (
    ShadowBatch,
    ShadowSample,
    TraceTable,
    build_trace_table,
    sample_shadows,
    shadow_pauli_estimate,
    shadow_weighted_estimate,
)
from shadowtt.sketch import (
    SketchFamily,
    SketchMoments,
    TomographyReport,
    default_sketch_family,
    estimate_moments,
    exact_moments,
    factorize_cuts,
    sketch_tomography,
    sketch_tomography_exact,
    solve_components,
    two_local_sketch_family,
)

__version__ = "0.1.0"

__all__ = [
    "MPS",
    "MLEConfig",
    "HamiltonianSpec",
    "PauliString",
    "ShadowBatch",
    "ShadowSample",
    "SketchFamily",
    "SketchMoments",
    "SVDResult",
    "TTCoeff",
    "TomographyReport",
    "TraceTable",
    "amplitude",
    "build_trace_table",
    "canonicalize",
    "contract",
    "default_sketch_family",
    "density_to_coeff",
    "estimate_moments",
    "exact_ground_state",
    "exact_moments",
    "factorize_cuts",
    "heisenberg_1d",
    "least_squares",
    "mps_expectation",
    "mps_to_statevector",
    "mps_to_tt_coeff",
    "nll",
    "nll_gradient",
    "random_mps",
    "sample_shadows",
    "shadow_pauli_estimate",
    "shadow_weighted_estimate",
    "sketch_tomography",
    "sketch_tomography_exact",
    "solve_components",
    "statevector_to_mps",
    "tfim_1d",
    "train",
    "truncated_svd",
    "two_local_sketch_family",
    "tt_entry",
    "tt_frobenius_distance",
    "tt_inner",
    "tt_norm",
    "tt_pauli_expectation",
    "tt_renyi2",
    "tt_to_density",
]
