"""Bundled reference tables for the reproduction harness.

Each cell pairs a generator spec with target values: an exact rational
classical value, a heuristic lower-bound target (one-sided), and upper-bound
or exact-value targets (two-sided at REL_TOL). Two cells carry corrections:
their listed numbers contradict exact laws that other cells of the same table
obey, so the harness compares against the self-consistent value and reports
both (see the cell notes).

Geometry conventions. ``loop_x = u`` labels the column-0 horizontal edge in
every row with the shift of class u: that band leaves all cells defect-free,
sets the x-direction holonomy to u, and frustrates every row ring (length =
cols). ``loop_y`` is the transposed construction. The two small-grid tables
use fixed edge placements recovered by exhaustive search against the table
values themselves; the search also fixed a relative orientation convention
for the third edge (its class enters negated), see THIRD_EDGE_NEGATED.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

# comparison tolerances, embedded into every report
REL_TOL = 1e-4      # two-sided: upper bounds and d=2 exact values
LOWER_SLACK = 1e-3  # one-sided: heuristic lower bounds may fall short by this
SANDWICH_TOL = 1e-6
EQUIV_TOL = 1e-5


def unit_ring_value(d: int, m: int) -> float:
    """Level-1 value of a single length-m ring whose net class is a unit
    shift: (1 + (d - 1) cos(2 pi / (d m))) / d."""
    return (1.0 + (d - 1) * math.cos(2.0 * math.pi / (d * m))) / d


def loop_grid_upper(d: int, rows: int, cols: int, x: int, y: int) -> float:
    """Composite level-1 value of the two-loop grid: an x-class loop
    frustrates the `rows` row rings of length `cols` and vice versa;
    unfrustrated edges contribute value 1 with weight 1/2 per direction."""
    qx = unit_ring_value(d, cols) if x % d else 1.0
    qy = unit_ring_value(d, rows) if y % d else 1.0
    return (qx + qy) / 2.0


def loop_grid_classical(rows: int, cols: int, x: int, y: int) -> Fraction:
    """Exact classical value of the two-loop grid: beta counts one violated
    edge per frustrated ring."""
    beta = (rows if x else 0) + (cols if y else 0)
    return Fraction(2 * rows * cols - beta, 2 * rows * cols)


@dataclass(frozen=True)
class GameSpec:
    rows: int
    cols: int
    boundary: str
    d: int
    loop_x: int = 0
    loop_y: int = 0
    edges: tuple[tuple[int, int, str, int], ...] = ()


@dataclass(frozen=True)
class CellSpec:
    """One reference cell: a game plus its target values.

    classical / q_exact / q_upper are two-sided targets (exact rational /
    REL_TOL floats). q_lower is one-sided: computed >= target - LOWER_SLACK.
    *_corrected, when set, replaces the listed value for comparison.
    """

    table: str
    key: str
    game: GameSpec
    classical: Fraction | None = None
    classical_corrected: Fraction | None = None
    # d=2 cells: q_exact is the single quantum target for every route
    q_exact: float | None = None
    q_exact_corrected: float | None = None
    # d>2 cells: separate lower (one-sided) and upper (two-sided) targets
    q_lower: float | None = None
    q_upper: float | None = None
    note: str = ""
    seesaw_two_sided: bool = False  # exact-value-grade seesaw target

    def classical_target(self) -> Fraction | None:
        return self.classical_corrected if self.classical_corrected is not None else self.classical

    def q_exact_target(self) -> float | None:
        return self.q_exact_corrected if self.q_exact_corrected is not None else self.q_exact


# ------------------------------------------------------------------ law

def loop_law_cells() -> list[CellSpec]:
    """Single wrapping loop on a k x k torus: classical value (2k-1)/(2k)
    for every nontrivial class, independent of the class."""
    cells = []
    for k in (2, 3, 4):
        for d in (2, 3):
            for u in range(1, d):
                cells.append(CellSpec(
                    table="law",
                    key=f"k={k} d={d} class={u}",
                    game=GameSpec(k, k, "torus", d, loop_x=u),
                    classical=Fraction(2 * k - 1, 2 * k),
                ))
    return cells


# ------------------------------------------------------------- loop grid

TYPE_A_SHAPE = (4, 4)
TYPE_B_SHAPE = (8, 4)

TYPE_B_INFERENCE = (
    "the second grid family is pinned by its own values: classical 0.875 for "
    "(1,0) means the x band crosses 8 rows of 64 edges, classical 0.9375 for "
    "(0,1) means the y band crosses 4 columns, and the quantum column pairs "
    "(1+unit_ring_value(d,4))/2 with (1+unit_ring_value(d,8))/2, so the x "
    "loop frustrates length-4 rings and the y loop length-8 rings: an 8x4 "
    "torus (32 vertices, 64 edges)"
)

# the listed single-loop d=2 value 0.926666 contradicts the composite law and
# the identical game in the loop-plus-edges table (0.926777); compare against
# the exact composite instead
_SINGLE_LOOP_D2 = (1.0 + unit_ring_value(2, 4)) / 2.0
_ERR_LOOP_NOTE = (
    "listed 0.926666 is inconsistent with the ring composite "
    f"(1+unit_ring_value(2,4))/2 = {_SINGLE_LOOP_D2:.6f} and with the "
    "identical game in table 3 (0.926777); compared against the composite"
)
_ERR_C_NOTE = (
    "listed classical 0.9375 contradicts the quantum values in the same "
    "column (both match the x-loop row of this grid) and the (2,0) cell of "
    "the 4x4 grid; the x band crosses 8 rows, so the exact value is 0.875"
)


def _grid_cell(typ: str, n: int, x: int, y: int, C, **kw) -> CellSpec:
    rows, cols = TYPE_A_SHAPE if typ == "a" else TYPE_B_SHAPE
    return CellSpec(
        table="1",
        key=f"{typ} n={n} ({x},{y})",
        game=GameSpec(rows, cols, "torus", n, loop_x=x, loop_y=y),
        classical=C,
        seesaw_two_sided=(n == 2),
        **kw,
    )


def loop_grid_cells() -> list[CellSpec]:
    F = Fraction
    cells = [
        _grid_cell("a", 2, 1, 0, F(7, 8), q_exact=0.926666,
                   q_exact_corrected=_SINGLE_LOOP_D2, note=_ERR_LOOP_NOTE),
        _grid_cell("a", 2, 0, 1, F(7, 8), q_exact=0.926666,
                   q_exact_corrected=_SINGLE_LOOP_D2, note=_ERR_LOOP_NOTE),
        _grid_cell("a", 2, 1, 1, F(3, 4), q_exact=0.853553),
        _grid_cell("b", 2, 1, 0, F(7, 8), q_exact=0.926666,
                   q_exact_corrected=_SINGLE_LOOP_D2, note=_ERR_LOOP_NOTE),
        _grid_cell("b", 2, 0, 1, F(15, 16), q_exact=0.980970),
        _grid_cell("b", 2, 1, 1, F(13, 16), q_exact=0.907747),
        # n=3
        _grid_cell("a", 3, 1, 0, F(7, 8), q_lower=0.915578, q_upper=0.955342),
        _grid_cell("a", 3, 0, 1, F(7, 8), q_lower=0.915578, q_upper=0.955342),
        _grid_cell("a", 3, 0, 2, F(7, 8), q_lower=0.915578, q_upper=0.955342),
        _grid_cell("a", 3, 2, 0, F(7, 8), q_lower=0.915578, q_upper=0.955342),
        _grid_cell("a", 3, 1, 1, F(3, 4), q_lower=0.831812, q_upper=0.910684),
        _grid_cell("a", 3, 1, 2, F(3, 4), q_lower=0.833062, q_upper=0.910684),
        _grid_cell("a", 3, 2, 1, F(3, 4), q_lower=0.832910, q_upper=0.910684),
        _grid_cell("a", 3, 2, 2, F(3, 4), q_lower=0.833325, q_upper=0.910684),
        _grid_cell("b", 3, 1, 0, F(7, 8), q_lower=0.915357, q_upper=0.955342),
        _grid_cell("b", 3, 0, 1, F(15, 16), q_lower=0.977439, q_upper=0.988642),
        _grid_cell("b", 3, 0, 2, F(15, 16), q_lower=0.977439, q_upper=0.988642),
        _grid_cell("b", 3, 2, 0, F(15, 16), q_lower=0.915520, q_upper=0.955342,
                   classical_corrected=F(7, 8), note=_ERR_C_NOTE),
        _grid_cell("b", 3, 1, 1, F(13, 16), q_lower=0.893144, q_upper=0.943984),
        _grid_cell("b", 3, 1, 2, F(13, 16), q_lower=0.891906, q_upper=0.943984),
        _grid_cell("b", 3, 2, 1, F(13, 16), q_lower=0.892333, q_upper=0.943984),
        _grid_cell("b", 3, 2, 2, F(13, 16), q_lower=0.891906, q_upper=0.943984),
    ]
    return cells


# ----------------------------------------------------------- edge triples

# Placement of the three labeled edges on the 4x4 torus, recovered by
# exhaustive search over all edge triples against the full value table (the
# equivalence class is unique up to lattice automorphisms and a second
# value-equivalent class). Roles: first two horizontal edges two rows apart
# in the same column, third adjacent to the second.
TRIPLE_X = (0, 0, "R")
TRIPLE_Y = (2, 0, "R")
TRIPLE_Z = (2, 1, "R")
# the third class enters negated: (sx, sy, sz) labels TRIPLE_Z with -sz mod d
THIRD_EDGE_NEGATED = True


def _triple_game(d: int, sx: int, sy: int, sz: int) -> GameSpec:
    edges = []
    for (r, c, kind), s in ((TRIPLE_X, sx), (TRIPLE_Y, sy), (TRIPLE_Z, (-sz) % d)):
        if s % d:
            edges.append((r, c, kind, s % d))
    return GameSpec(4, 4, "torus", d, edges=tuple(edges))


def _triple_cell(n, sx, sy, sz, C, **kw) -> CellSpec:
    return CellSpec(
        table="2",
        key=f"n={n} ({sx},{sy},{sz})",
        game=_triple_game(n, sx, sy, sz),
        classical=C,
        seesaw_two_sided=(n == 2),
        **kw,
    )


def edge_triple_cells() -> list[CellSpec]:
    F = Fraction
    c1, c2, c3 = F(31, 32), F(15, 16), F(29, 32)
    cells = [
        _triple_cell(2, 1, 0, 0, c1, q_exact=0.968750),
        _triple_cell(2, 0, 1, 0, c1, q_exact=0.968750),
        _triple_cell(2, 0, 0, 1, c1, q_exact=0.968750),
        _triple_cell(2, 0, 1, 1, c2, q_exact=0.949843),
        _triple_cell(2, 1, 1, 0, c2, q_exact=0.937842),
        _triple_cell(2, 1, 0, 1, c2, q_exact=0.937500),
        _triple_cell(2, 1, 1, 1, c3, q_exact=0.922388),
    ]
    singles3 = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0), (0, 2, 0), (0, 0, 2)]
    for sx, sy, sz in singles3:
        cells.append(_triple_cell(3, sx, sy, sz, c1, q_lower=0.968750, q_upper=0.977378))
    pairs3 = [
        ((0, 1, 1), 0.942724, 0.968772),
        ((0, 2, 1), 0.937500, 0.945183),
        ((0, 1, 2), 0.937500, 0.945183),
        ((0, 2, 2), 0.942724, 0.968772),
        ((1, 1, 0), 0.937500, 0.958457),
        ((2, 1, 0), 0.937500, 0.951486),
        ((1, 2, 0), 0.937500, 0.951486),
        ((2, 2, 0), 0.937500, 0.958457),
        ((1, 0, 1), 0.937500, 0.955486),
        ((2, 0, 1), 0.937500, 0.954088),
        ((1, 0, 2), 0.937500, 0.954088),
        ((2, 0, 2), 0.937500, 0.955486),
    ]
    for (sx, sy, sz), qlow, qup in pairs3:
        cells.append(_triple_cell(3, sx, sy, sz, c2, q_lower=qlow, q_upper=qup))
    triples3 = [
        ((1, 1, 1), 0.913291, 0.951016),
        ((2, 2, 2), 0.913290, 0.951016),
        ((1, 1, 2), 0.906250, 0.925112),
        ((1, 2, 1), 0.906250, 0.920754),
        ((2, 1, 1), 0.912307, 0.941841),
        ((2, 2, 1), 0.906250, 0.925112),
        ((2, 1, 2), 0.906250, 0.920754),
        ((1, 2, 2), 0.912307, 0.941841),
    ]
    for (sx, sy, sz), qlow, qup in triples3:
        cells.append(_triple_cell(3, sx, sy, sz, c3, q_lower=qlow, q_upper=qup))
    return cells


# ------------------------------------------------------- loop plus edges

# Wrapping band (loop_x) plus two vertical edges in row 0, two columns
# apart, both classes direct. Recovered by the same exhaustive search.
LOOP_EDGE_Y = (0, 0, "D")
LOOP_EDGE_Z = (0, 2, "D")


def _loop_edge_game(d: int, sx: int, sy: int, sz: int) -> GameSpec:
    edges = []
    for (r, c, kind), s in ((LOOP_EDGE_Y, sy % d), (LOOP_EDGE_Z, sz % d)):
        if s:
            edges.append((r, c, kind, s))
    return GameSpec(4, 4, "torus", d, loop_x=sx % d, edges=tuple(edges))


def _loop_edge_cell(n, sx, sy, sz, C, **kw) -> CellSpec:
    return CellSpec(
        table="3",
        key=f"n={n} ({sx},{sy},{sz})",
        game=_loop_edge_game(n, sx, sy, sz),
        classical=C,
        seesaw_two_sided=(n == 2),
        **kw,
    )


def loop_edge_cells() -> list[CellSpec]:
    F = Fraction
    single, loop, loop1, loop2 = F(31, 32), F(7, 8), F(27, 32), F(13, 16)
    pair = F(15, 16)
    cells = [
        _loop_edge_cell(2, 1, 0, 0, loop, q_exact=0.926777),
        _loop_edge_cell(2, 0, 1, 0, single, q_exact=0.968750),
        _loop_edge_cell(2, 0, 0, 1, single, q_exact=0.968750),
        _loop_edge_cell(2, 0, 1, 1, pair, q_exact=0.937842),
        _loop_edge_cell(2, 1, 1, 0, loop1, q_exact=0.896670),
        _loop_edge_cell(2, 1, 0, 1, loop1, q_exact=0.896670),
        _loop_edge_cell(2, 1, 1, 1, loop2, q_exact=0.866172,
                        note="lower and upper prints differ in the last digit"),
    ]
    n3 = [
        ((1, 0, 0), loop, 0.915578, 0.955342),
        ((0, 1, 0), single, 0.968750, 0.977378),
        ((0, 0, 1), single, 0.968750, 0.977378),
        ((2, 0, 0), loop, 0.915577, 0.955342),
        ((0, 2, 0), single, 0.968750, 0.977378),
        ((0, 0, 2), single, 0.968750, 0.977378),
        ((0, 1, 1), pair, 0.937500, 0.958457),
        ((0, 2, 1), pair, 0.937500, 0.951486),
        ((0, 1, 2), pair, 0.937500, 0.951486),
        ((0, 2, 2), pair, 0.937500, 0.958457),
        ((1, 1, 0), loop1, 0.884399, 0.933402),
        ((2, 1, 0), loop1, 0.884399, 0.933402),
        ((1, 2, 0), loop1, 0.884399, 0.933402),
        ((2, 2, 0), loop1, 0.884398, 0.933402),
        ((1, 0, 1), loop1, 0.884399, 0.933402),
        ((2, 0, 1), loop1, 0.884399, 0.933402),
        ((1, 0, 2), loop1, 0.884399, 0.933402),
        ((2, 0, 2), loop1, 0.884399, 0.933402),
        ((1, 1, 1), loop2, 0.853247, 0.914745),
        ((2, 2, 2), loop2, 0.853225, 0.914745),
        ((1, 1, 2), loop2, 0.853209, 0.908438),
        ((1, 2, 1), loop2, 0.853210, 0.908438),
        ((2, 1, 1), loop2, 0.853251, 0.914745),
        ((2, 2, 1), loop2, 0.853210, 0.908438),
        ((2, 1, 2), loop2, 0.853209, 0.908438),
        ((1, 2, 2), loop2, 0.853248, 0.914745),
    ]
    for (sx, sy, sz), C, qlow, qup in n3:
        cells.append(_loop_edge_cell(3, sx, sy, sz, C, q_lower=qlow, q_upper=qup))
    return cells


TABLES: dict[str, tuple[str, Callable[[], list[CellSpec]]]] = {
    "law": ("single-loop classical law on k x k tori", loop_law_cells),
    "1": ("two-loop grids (4x4 torus and inferred 8x4 torus)", loop_grid_cells),
    "2": ("three labeled edges on the 4x4 torus", edge_triple_cells),
    "3": ("wrapping band plus two edges on the 4x4 torus", loop_edge_cells),
}


def cells_for(table_id: str) -> list[CellSpec]:
    if table_id == "all":
        out = []
        for tid in ("law", "1", "2", "3"):
            out.extend(TABLES[tid][1]())
        return out
    if table_id not in TABLES:
        raise ValueError(f"unknown table id {table_id!r}; choose from "
                         f"{sorted(TABLES)} or 'all'")
    return TABLES[table_id][1]()
