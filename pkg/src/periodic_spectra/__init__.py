"""Spectra of periodic lattice graphs and their non-compact perturbations.

The package computes band spectra of Z^d-periodic graph Laplacians through
their quasimomentum fiber matrices, and certifies numerically that those
spectra survive perturbations (vertex/edge removals and additions, possibly
infinitely many) whenever arbitrarily large lattice boxes stay untouched: it
constructs normalized test states parked on such boxes and measures how fast
their Laplacian residuals decay.
"""

__version__ = "0.1.0"

from .catalog import (
    CatalogEntry,
    clear_box_monte_carlo,
    clear_box_probability,
    get_entry,
    make_cone,
    make_counterexample,
    make_g11,
    make_g21,
    make_half_plane,
    make_lattice,
    make_random_pendant,
)
from .floquet import (
    BandSample,
    FloquetMatrix,
    SpectrumApprox,
    band_eigensystem,
    band_grid,
    essential_spectrum,
    floquet_matrix,
    locate_band_value,
)
from .graphs import (
    FundEdge,
    GraphOracle,
    PeriodicGraph,
    Vertex,
    apply_laplacian,
    build_periodic,
    edge_index,
    periodic_oracle,
    propagation_length,
    translate_state,
    vert,
    weighted_inner,
    weighted_norm,
)
from .perturbation import (
    Patch,
    PerturbedGraph,
    PredicatePatch,
    WindowReport,
    apply_defect,
    box_is_clear,
    embed_state,
    embedding_norm_bounds,
    find_unperturbed_box,
    in_unperturbed_set,
)
from .truncation import (
    BoxGraph,
    TruncationReport,
    compare_spectra,
    spectrum_of_box,
    truncate,
    zero_mode_count,
)
from .weyl import (
    ResidualRow,
    TentCutoff,
    WeylState,
    build_weyl_state,
    fit_loglog_slope,
    residual,
    residual_bound,
    residual_row,
    residual_sweep,
    shifted_tent_diff_parts,
    shifted_tent_diff_sum,
    tent_norm_sq,
    tent_value,
    windowed_bloch_state,
)

__all__ = [
    "__version__",
    "BandSample",
    "BoxGraph",
    "CatalogEntry",
    "FloquetMatrix",
    "FundEdge",
    "GraphOracle",
    "Patch",
    "PeriodicGraph",
    "PerturbedGraph",
    "PredicatePatch",
    "ResidualRow",
    "SpectrumApprox",
    "TentCutoff",
    "TruncationReport",
    "Vertex",
    "WeylState",
    "WindowReport",
    "apply_defect",
    "apply_laplacian",
    "band_eigensystem",
    "band_grid",
    "box_is_clear",
    "build_periodic",
    "build_weyl_state",
    "clear_box_monte_carlo",
    "clear_box_probability",
    "compare_spectra",
    "edge_index",
    "embed_state",
    "embedding_norm_bounds",
    "essential_spectrum",
    "find_unperturbed_box",
    "fit_loglog_slope",
    "floquet_matrix",
    "get_entry",
    "in_unperturbed_set",
    "locate_band_value",
    "make_cone",
    "make_counterexample",
    "make_g11",
    "make_g21",
    "make_half_plane",
    "make_lattice",
    "make_random_pendant",
    "periodic_oracle",
    "propagation_length",
    "residual",
    "residual_bound",
    "residual_row",
    "residual_sweep",
    "shifted_tent_diff_parts",
    "shifted_tent_diff_sum",
    "spectrum_of_box",
    "tent_norm_sq",
    "tent_value",
    "translate_state",
    "truncate",
    "vert",
    "weighted_inner",
    "weighted_norm",
    "windowed_bloch_state",
    "zero_mode_count",
]
