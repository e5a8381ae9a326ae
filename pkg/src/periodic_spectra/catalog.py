"""Named graphs and perturbations with their known reference data.

Each entry bundles a base periodic graph, an optional perturbation, the known
essential spectrum of the relevant graph (when there is a closed form) and a
closed-form description of the unperturbed set.  These are the graphs every
cross-check in the test suite runs against, and the ones the CLI exposes as
``builtin:<name>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError
from .floquet import SpectrumApprox
from .graphs import FundEdge, PeriodicGraph, Vertex, build_periodic
from .perturbation import PerturbedGraph, PredicatePatch
from .randomfield import bernoulli, bernoulli_array


@dataclass(frozen=True)
class CatalogEntry:
    """A named graph (possibly perturbed) with attached reference data."""

    name: str
    base: PeriodicGraph
    perturbation: PerturbedGraph | None
    reference_spectrum: SpectrumApprox | None
    reference_lambda: Callable[[Vertex], bool] | None
    note: str


def _spectrum(intervals, flats=()) -> SpectrumApprox:
    return SpectrumApprox(
        intervals=tuple(intervals),
        flat_points=tuple(flats),
        resolution=0,
        flat_tol=1e-8,
    )


def make_lattice(dim: int) -> PeriodicGraph:
    """The integer lattice Z^dim: one vertex per cell, one edge per axis."""
    edges = [
        FundEdge(0, 0, tuple(1 if j == axis else 0 for j in range(dim)))
        for axis in range(dim)
    ]
    return build_periodic(dim, 1, edges)


def lattice_entry(dim: int) -> CatalogEntry:
    return CatalogEntry(
        name=f"lattice{dim}",
        base=make_lattice(dim),
        perturbation=None,
        reference_spectrum=_spectrum([(-1.0, 1.0)]),
        reference_lambda=None,
        note=f"Z^{dim}; bands fill [-1, 1]",
    )


def make_g11() -> CatalogEntry:
    """Chain with one pendant per cell: labels (chain, pendant), degrees (3, 1)."""
    base = build_periodic(
        1, 2, [FundEdge(0, 0, (1,)), FundEdge(0, 1, (0,))]
    )
    return CatalogEntry(
        name="g11",
        base=base,
        perturbation=None,
        reference_spectrum=_spectrum([(-1.0, -1.0 / 3.0), (1.0 / 3.0, 1.0)]),
        reference_lambda=None,
        note="pendant chain; spectrum [-1,-1/3] u [1/3,1]",
    )


def make_g21() -> CatalogEntry:
    """Chain with a pendant on every second vertex.

    Cell of three labels: 0 = decorated chain site, 1 = bare chain site,
    2 = pendant; degrees (3, 2, 1).  Middle band is flat at zero.
    """
    root3 = float(np.sqrt(3.0))
    base = build_periodic(
        1,
        3,
        [FundEdge(0, 1, (0,)), FundEdge(1, 0, (1,)), FundEdge(0, 2, (0,))],
    )
    return CatalogEntry(
        name="g21",
        base=base,
        perturbation=None,
        reference_spectrum=_spectrum(
            [(-1.0, -1.0 / root3), (0.0, 0.0), (1.0 / root3, 1.0)], flats=(0.0,)
        ),
        reference_lambda=None,
        note="alternating pendant chain; flat band at 0",
    )


def make_half_plane() -> CatalogEntry:
    """Z^2 cut to the half-plane x2 >= 0; untouched set is x2 >= 1."""
    base = make_lattice(2)
    patch = PredicatePatch(
        keep=lambda v: v.cell[1] >= 0,
        influence_radius=1,
    )
    graph = PerturbedGraph(
        base, patch, name="half_plane", lambda_closed_form="x2 >= 1"
    )
    return CatalogEntry(
        name="half_plane",
        base=base,
        perturbation=graph,
        reference_spectrum=_spectrum([(-1.0, 1.0)]),
        reference_lambda=lambda v: v.cell[1] >= 1,
        note="half-plane restriction of Z^2; keeps the full spectrum [-1, 1]",
    )


def make_cone() -> CatalogEntry:
    """Quadrant of Z^2 with extra edges joining (a, 0) to (0, a) for a >= 1.

    No edge is attached at a = 0: that variant would be a loop at the origin
    and changes neither the untouched set nor the spectrum claim.
    """
    base = make_lattice(2)

    def added_neighbors(v: Vertex) -> tuple[Vertex, ...]:
        x1, x2 = v.cell
        if v.label != 0:
            return ()
        if x2 == 0 and x1 >= 1:
            return (Vertex((0, x1), 0),)
        if x1 == 0 and x2 >= 1:
            return (Vertex((x2, 0), 0),)
        return ()

    patch = PredicatePatch(
        keep=lambda v: v.cell[0] >= 0 and v.cell[1] >= 0,
        added_neighbors=added_neighbors,
        influence_radius=1,
    )
    graph = PerturbedGraph(
        base, patch, name="cone", lambda_closed_form="x1 >= 1 and x2 >= 1"
    )
    return CatalogEntry(
        name="cone",
        base=base,
        perturbation=graph,
        reference_spectrum=_spectrum([(-1.0, 1.0)]),
        reference_lambda=lambda v: v.cell[0] >= 1 and v.cell[1] >= 1,
        note="quadrant with boundary arcs glued; keeps the full spectrum",
    )


def make_random_pendant(p: float, seed: int, dim: int = 2) -> CatalogEntry:
    """Z^dim with a pendant attached independently at each cell.

    The pendant indicator at a cell is a pure function of (seed, cell), so the
    oracle is reproducible across runs and thread counts.  A cell belongs to
    the untouched set exactly when it drew no pendant.
    """
    if not 0.0 <= p <= 1.0:
        raise InputError(f"pendant probability must be in [0, 1], got {p}")
    base = make_lattice(dim)

    def has_pendant(cell) -> bool:
        return bernoulli(seed, cell, p)

    def added_contains(v: Vertex) -> bool:
        return v.label == 1 and has_pendant(v.cell)

    def added_neighbors(v: Vertex) -> tuple[Vertex, ...]:
        if not has_pendant(v.cell):
            return ()
        if v.label == 0:
            return (Vertex(v.cell, 1),)
        if v.label == 1:
            return (Vertex(v.cell, 0),)
        return ()

    def added_in_cell(cell) -> tuple[Vertex, ...]:
        return (Vertex(cell, 1),) if has_pendant(cell) else ()

    patch = PredicatePatch(
        keep=lambda v: True,
        added_contains=added_contains,
        added_neighbors=added_neighbors,
        added_in_cell=added_in_cell,
        influence_radius=0,
    )
    graph = PerturbedGraph(
        base,
        patch,
        name=f"random_pendant(p={p}, seed={seed})",
        lambda_closed_form="no pendant drawn at the cell",
    )
    return CatalogEntry(
        name="random_pendant",
        base=base,
        perturbation=graph,
        reference_spectrum=_spectrum([(-1.0, 1.0)]) if p < 1.0 else None,
        reference_lambda=lambda v: not has_pendant(v.cell),
        note=f"Z^{dim} with pendant probability {p}, seed {seed}",
    )


def make_counterexample() -> CatalogEntry:
    """Pendant chain with a second pendant added at every cell x >= 0.

    The perturbed graph gains an exact zero mode on each added pendant pair,
    so its essential spectrum strictly contains the base one.  The untouched
    set is every vertex with x < 0 together with the original pendants at
    x >= 0 (those keep their degree and their only edge).
    """
    g11 = make_g11()
    base = g11.base

    def added_contains(v: Vertex) -> bool:
        return v.label == 2 and v.cell[0] >= 0

    def added_neighbors(v: Vertex) -> tuple[Vertex, ...]:
        if v.cell[0] < 0:
            return ()
        if v.label == 0:
            return (Vertex(v.cell, 2),)
        if v.label == 2:
            return (Vertex(v.cell, 0),)
        return ()

    def added_in_cell(cell) -> tuple[Vertex, ...]:
        return (Vertex(cell, 2),) if cell[0] >= 0 else ()

    patch = PredicatePatch(
        keep=lambda v: True,
        added_contains=added_contains,
        added_neighbors=added_neighbors,
        added_in_cell=added_in_cell,
        influence_radius=0,
    )
    graph = PerturbedGraph(
        base,
        patch,
        name="counterexample",
        lambda_closed_form="x < 0, or the original pendant (label 1) at x >= 0",
    )
    return CatalogEntry(
        name="counterexample",
        base=base,
        perturbation=graph,
        reference_spectrum=None,
        reference_lambda=lambda v: v.cell[0] < 0 or v.label == 1,
        note=(
            "pendant chain with doubled pendants on x >= 0; gains a zero "
            "eigenvalue of infinite multiplicity on top of the base bands"
        ),
    )


def clear_box_probability(n: int, p: float, dim: int = 2) -> float:
    """Chance that a pendant-free box of radius ``n`` sits at a given cell:
    (1 - p) to the number of cells in the box."""
    if n < 1:
        raise InputError(f"box radius must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise InputError(f"probability must be in [0, 1], got {p}")
    return (1.0 - p) ** ((2 * n + 1) ** dim)


def clear_box_monte_carlo(
    n: int,
    p: float,
    dim: int,
    trials: int,
    seed: int,
    pool=None,
    chunk: int = 65536,
) -> float:
    """Monte Carlo estimate of ``clear_box_probability``.

    Draws ``trials`` disjoint boxes from one seeded pendant field (disjoint
    boxes see independent cells) and counts the pendant-free ones.  Chunks are
    evaluated independently and reduced by integer sum, so the estimate is
    identical for any pool size.
    """
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    side = 2 * n + 1
    offsets = np.array(
        [np.unravel_index(i, (side,) * dim) for i in range(side**dim)],
        dtype=np.int64,
    )

    def count_chunk(bounds: tuple[int, int]) -> int:
        lo, hi = bounds
        base = np.zeros((hi - lo, dim), dtype=np.int64)
        # boxes tile along the first axis, spaced one box apart
        base[:, 0] = np.arange(lo, hi, dtype=np.int64) * side
        clear = np.ones(hi - lo, dtype=bool)
        for off in offsets:
            cells = base + off
            clear &= ~bernoulli_array(seed, cells, p)
        return int(np.sum(clear))

    bounds = [
        (lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)
    ]
    if pool is None:
        hits = [count_chunk(b) for b in bounds]
    else:
        hits = list(pool.map(count_chunk, bounds))
    return sum(hits) / trials


_PLAIN_BUILDERS: dict[str, Callable[[], CatalogEntry]] = {
    "lattice1": lambda: lattice_entry(1),
    "lattice2": lambda: lattice_entry(2),
    "lattice3": lambda: lattice_entry(3),
    "g11": make_g11,
    "g21": make_g21,
    "cone": make_cone,
    "half_plane": make_half_plane,
    "counterexample": make_counterexample,
}


def entry_names() -> list[str]:
    return sorted(_PLAIN_BUILDERS) + ["random_pendant"]


def get_entry(name: str, **params) -> CatalogEntry:
    """Look up a catalog entry by name; ``random_pendant`` takes p and seed."""
    if name == "random_pendant":
        try:
            p = float(params.pop("p"))
            seed = int(params.pop("seed"))
        except KeyError as missing:
            raise InputError(
                f"random_pendant needs parameter {missing}"
            ) from None
        dim = int(params.pop("dim", 2))
        if params:
            raise InputError(f"unknown random_pendant parameters: {sorted(params)}")
        return make_random_pendant(p, seed, dim)
    builder = _PLAIN_BUILDERS.get(name)
    if builder is None:
        raise InputError(
            f"unknown builtin '{name}'; available: {', '.join(entry_names())}"
        )
    if params:
        raise InputError(f"builtin '{name}' takes no parameters")
    return builder()
