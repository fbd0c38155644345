"""Finite lattices and q-swap rewiring.

Node ``k`` sits at integer grid coordinates ``coords[k] = (i, j)``; edges are
``(a, b, slot)`` records, where ``slot`` distinguishes parallel bonds. The
spanning axis is always the ``i`` direction: the source side is ``i == 0`` and
the sink side is ``i == nx - 1``.

Closed-form sizes for open boundaries:

=========== ==================== ============ ========================
kind        grid (nx, ny)        nodes        edges
=========== ==================== ============ ========================
square      (L, L)               L^2          2 L (L - 1)
triangular  (L, L)               L^2          (L - 1)(3 L - 1)
honeycomb   (2 L, L)             2 L^2        3 L^2 - 2 L
=========== ==================== ============ ========================

Double bonds double the edge count. The triangular lattice is embedded as a
120-degree rhombus and the honeycomb as a brick wall with roughly square
physical extent, so that side-to-side crossing sits near 1/2 at threshold.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

KINDS = ("square", "triangular", "honeycomb")
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class Lattice:
    kind: str
    coords: np.ndarray
    positions: np.ndarray
    edges: np.ndarray
    source: np.ndarray
    sink: np.ndarray
    boundary_mode: str = "open"
    period: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.coords, self.positions, self.edges, self.source, self.sink):
            arr.setflags(write=False)
        e = self.edges
        if e.ndim != 2 or e.shape[1] != 3:
            raise ValueError("edges must be an (m, 3) array of (a, b, slot)")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
        if e.size:
            key = np.stack([np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1]), e[:, 2]], axis=1)
            if len(np.unique(key, axis=0)) != len(key):
                raise ValueError("parallel edges must use distinct slots")
        if self.source.size == 0 or self.sink.size == 0:
            raise ValueError("boundary sets must be nonempty")
        if np.intersect1d(self.source, self.sink).size:
            raise ValueError("boundary sets must be disjoint")

    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self, slot: Optional[int] = None) -> np.ndarray:
        e = self.edges if slot is None else self.edges[self.edges[:, 2] == slot]
        return np.bincount(e[:, :2].ravel(), minlength=self.n_nodes)

    def incident(self, node: int, slot: Optional[int] = None) -> np.ndarray:
        """Indices of edges touching ``node``."""
        mask = (self.edges[:, 0] == node) | (self.edges[:, 1] == node)
        if slot is not None:
            mask &= self.edges[:, 2] == slot
        return np.flatnonzero(mask)

    def displacement(self, a: int, b: int) -> np.ndarray:
        d = self.positions[b] - self.positions[a]
        if self.period is not None:
            p = self.period
            d = d - np.round(d @ p / (p @ p)) * p
        return d

    def descriptor(self) -> str:
        m = self.meta
        text = f"{self.kind}(L={m.get('L')}, shape={m.get('shape')}, {self.boundary_mode}"
        if m.get("double_bonds"):
            text += ", double-bond"
        return text + ")"

    def to_edge_csv(self, path, scps=None) -> None:
        """Write ``node_a,node_b,slot,scp`` rows (scp blank when not given)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_a", "node_b", "slot", "scp"])
            for k, (a, b, s) in enumerate(self.edges):
                w.writerow([int(a), int(b), int(s), "" if scps is None else repr(float(scps[k]))])


def _grid(nx, ny):
    j, i = np.divmod(np.arange(nx * ny), nx)
    return np.stack([i, j], axis=1)


def build_lattice(kind: str, L: int, double_bonds: bool = False, boundary_mode: str = "open",
                  shape: Optional[tuple[int, int]] = None) -> Lattice:
    """Build a square, triangular or honeycomb lattice of side ``L``.

    ``shape=(nx, ny)`` overrides the default grid. ``boundary_mode="wrapped"``
    closes the transverse (``j``) direction periodically.
    """
    if kind not in KINDS:
        raise ValueError(f"unsupported lattice kind {kind!r}; choose from {KINDS}")
    if boundary_mode not in ("open", "wrapped"):
        raise ValueError("boundary_mode must be 'open' or 'wrapped'")
    if shape is None:
        if L < 2:
            raise ValueError("L must be at least 2")
        shape = (2 * L, L) if kind == "honeycomb" else (L, L)
    nx, ny = shape
    if nx < 2 or ny < 1:
        raise ValueError("grid too small")
    wrapped = boundary_mode == "wrapped"
    if wrapped and ny < 3:
        raise ValueError("wrapped boundaries need at least 3 rows")
    if wrapped and kind == "honeycomb" and ny % 2:
        raise ValueError("wrapped honeycomb needs an even number of rows")

    coords = _grid(nx, ny)
    i, j = coords[:, 0], coords[:, 1]
    idx = lambda ii, jj: ii + nx * jj  # noqa: E731
    pairs = []
    right = i < nx - 1
    pairs.append(np.stack([idx(i[right], j[right]), idx(i[right] + 1, j[right])], axis=1))
    up_ok = (j < ny - 1) | wrapped
    if kind == "honeycomb":
        up_ok &= (i + j) % 2 == 0
    sel = up_ok
    pairs.append(np.stack([idx(i[sel], j[sel]), idx(i[sel], (j[sel] + 1) % ny)], axis=1))
    if kind == "triangular":
        sel = (i < nx - 1) & ((j < ny - 1) | wrapped)
        pairs.append(np.stack([idx(i[sel], j[sel]), idx(i[sel] + 1, (j[sel] + 1) % ny)], axis=1))
    ab = np.concatenate(pairs).astype(np.int64)

    if kind == "square":
        pos = coords.astype(float)
        period = np.array([0.0, ny]) if wrapped else None
    elif kind == "triangular":
        pos = np.stack([i - 0.5 * j, 0.5 * SQRT3 * j], axis=1).astype(float)
        period = ny * np.array([-0.5, 0.5 * SQRT3]) if wrapped else None
    else:
        pos = np.stack([0.5 * SQRT3 * i, 1.5 * j + np.where((i + j) % 2 == 0, 0.25, -0.25)], axis=1)
        period = np.array([0.0, 1.5 * ny]) if wrapped else None

    slots = np.zeros((len(ab), 1), dtype=np.int64)
    edges = np.concatenate([ab, slots], axis=1)
    if double_bonds:
        edges = np.concatenate([edges, np.concatenate([ab, slots + 1], axis=1)])
    return Lattice(
        kind=kind,
        coords=coords,
        positions=pos,
        edges=edges,
        source=np.flatnonzero(i == 0),
        sink=np.flatnonzero(i == nx - 1),
        boundary_mode=boundary_mode,
        period=period,
        meta={"L": L, "shape": (nx, ny), "double_bonds": bool(double_bonds)},
    )


def expected_counts(kind: str, L: int, double_bonds: bool = False) -> tuple[int, int]:
    """(nodes, edges) for the default open-boundary lattice of side ``L``."""
    nodes, edges = {
        "square": (L * L, 2 * L * (L - 1)),
        "triangular": (L * L, (L - 1) * (3 * L - 1)),
        "honeycomb": (2 * L * L, 3 * L * L - 2 * L),
    }[kind]
    return nodes, edges * (2 if double_bonds else 1)


# q-swaps


@dataclass(frozen=True)
class QSwapPlan:
    """Swap nodes and, for each, the cyclic order of the neighbors it joins.

    ``neighbor_order[k]`` lists the edge indices of swap node ``swap_nodes[k]``
    in cyclic order; the neighbor is the far end of each edge.
    """

    swap_nodes: tuple
    neighbor_order: tuple
    slot: int = 0


def _incidence(lattice: Lattice, slot: int):
    sel = np.flatnonzero(lattice.edges[:, 2] == slot)
    ends = np.concatenate([lattice.edges[sel, 0], lattice.edges[sel, 1]])
    ids = np.concatenate([sel, sel])
    order = np.argsort(ends, kind="stable")
    ends, ids = ends[order], ids[order]
    starts = np.searchsorted(ends, np.arange(lattice.n_nodes + 1))
    return lambda node: np.sort(ids[starts[node]:starts[node + 1]])


def make_plan(lattice: Lattice, swap_nodes: Sequence[int], slot: int = 0) -> QSwapPlan:
    """Plan with counterclockwise neighbor order, validated for independence."""
    swap_nodes = tuple(int(s) for s in swap_nodes)
    swap_set = set(swap_nodes)
    if len(swap_set) != len(swap_nodes):
        raise ValueError("duplicate swap nodes")
    e = lattice.edges
    both = np.isin(e[:, 0], swap_nodes) & np.isin(e[:, 1], swap_nodes)
    if np.any(both):
        k = int(np.flatnonzero(both)[0])
        raise ValueError(f"swap nodes {int(e[k, 0])} and {int(e[k, 1])} are adjacent; swap set must be independent")
    inc_of = _incidence(lattice, slot)
    orders = []
    for s in swap_nodes:
        inc = inc_of(s)
        if len(inc) < 2:
            raise ValueError(f"swap node {s} has degree {len(inc)} < 2")
        far = np.where(e[inc, 0] == s, e[inc, 1], e[inc, 0])
        ang = [math.atan2(*lattice.displacement(s, int(n))[::-1]) for n in far]
        orders.append(tuple(int(inc[k]) for k in np.argsort(ang, kind="stable")))
    return QSwapPlan(swap_nodes, tuple(orders), slot)


def swap_class(lattice: Lattice, parity: int = 0) -> np.ndarray:
    """Nodes of one independent color class of the parent lattice."""
    i, j = lattice.coords[:, 0], lattice.coords[:, 1]
    if lattice.kind == "triangular":
        return np.flatnonzero((i + j) % 3 == parity)
    return np.flatnonzero((i + j) % 2 == parity)


def default_plan(lattice: Lattice, parity: int = 0, slot: int = 0) -> QSwapPlan:
    """Swap every node of one color class that has the full degree q.

    ``q`` is the largest slot degree in the class; boundary nodes with fewer
    bonds are left alone.
    """
    cls = swap_class(lattice, parity)
    deg = lattice.degree(slot)[cls]
    if cls.size == 0 or deg.max() < 2:
        raise ValueError("no swappable nodes")
    return make_plan(lattice, cls[deg == deg.max()], slot)


def swap_structure(lattice: Lattice, plan: QSwapPlan) -> tuple[Lattice, np.ndarray]:
    """Rewired lattice plus, per output edge, the two input edges it derives from.

    Retained edges map to ``(e, e)``; a new cycle bond between consecutive
    neighbors maps to the pair of consumed edges. Output SCPs are therefore
    ``min(scp[src[:, 0]], scp[src[:, 1]])``.
    """
    e = lattice.edges
    consumed = np.zeros(len(e), dtype=bool)
    new_pairs, new_src = [], []
    for s, order in zip(plan.swap_nodes, plan.neighbor_order):
        order = list(order)
        if consumed[order].any():
            raise ValueError("an edge is consumed by two swaps")
        for k in order:
            if s not in (e[k, 0], e[k, 1]):
                raise ValueError(f"edge {k} is not incident to swap node {s}")
        consumed[order] = True
        far = [int(e[k, 1] if e[k, 0] == s else e[k, 0]) for k in order]
        q = len(order)
        # a 2-cycle would double the bond; keep a single one
        links = [(0, 1)] if q == 2 else [(k, (k + 1) % q) for k in range(q)]
        for k1, k2 in links:
            if far[k1] != far[k2]:
                new_pairs.append((far[k1], far[k2]))
                new_src.append((order[k1], order[k2]))

    kept = np.flatnonzero(~consumed)
    pairs = [(int(a), int(b)) for a, b in e[kept, :2]] + new_pairs
    src = np.concatenate([np.stack([kept, kept], axis=1), np.asarray(new_src, dtype=np.int64).reshape(-1, 2)])

    used: dict = {}
    slots = []
    for (a, b), s in zip(pairs[: len(kept)], e[kept, 2]):
        used.setdefault((min(a, b), max(a, b)), set()).add(int(s))
        slots.append(int(s))
    for a, b in new_pairs:
        taken = used.setdefault((min(a, b), max(a, b)), set())
        s = 0
        while s in taken:
            s += 1
        taken.add(s)
        slots.append(s)

    alive = np.ones(lattice.n_nodes, dtype=bool)
    remaining = np.bincount(np.asarray(pairs, dtype=np.int64).ravel(), minlength=lattice.n_nodes) if pairs else np.zeros(lattice.n_nodes, int)
    for s in plan.swap_nodes:
        if remaining[s] == 0:
            alive[s] = False
    remap = -np.ones(lattice.n_nodes, dtype=np.int64)
    remap[alive] = np.arange(alive.sum())
    ab = remap[np.asarray(pairs, dtype=np.int64).reshape(-1, 2)]
    edges = np.concatenate([ab, np.asarray(slots, dtype=np.int64).reshape(-1, 1)], axis=1)
    source = remap[lattice.source[alive[lattice.source]]]
    sink = remap[lattice.sink[alive[lattice.sink]]]
    out = Lattice(
        kind=lattice.kind + "+qswap",
        coords=lattice.coords[alive],
        positions=lattice.positions[alive],
        edges=edges,
        source=source,
        sink=sink,
        boundary_mode=lattice.boundary_mode,
        period=lattice.period,
        meta={**lattice.meta, "swapped": len(plan.swap_nodes)},
    )
    return out, src


def _check_scps(lattice, edge_scps):
    scps = np.asarray(edge_scps, dtype=float)
    if scps.shape != (lattice.n_edges,):
        raise ValueError(f"need one SCP per edge ({lattice.n_edges}), got shape {scps.shape}")
    if np.any(np.isnan(scps)):
        raise ValueError("missing SCP (NaN) on an edge")
    return scps


def q_swap(lattice: Lattice, plan: QSwapPlan, edge_scps) -> tuple[Lattice, np.ndarray]:
    """Apply the q-swaps of ``plan``; new bonds carry the min of the two consumed SCPs."""
    scps = _check_scps(lattice, edge_scps)
    out, src = swap_structure(lattice, plan)
    return out, np.minimum(scps[src[:, 0]], scps[src[:, 1]])


def honeycomb_to_triangular_structure(lattice: Lattice, keep_direct_bonds: bool = False):
    """Structural part of :func:`honeycomb_to_triangular`.

    Returns ``(triangular, src)`` with ``src`` indexing the input edges.
    """
    if lattice.kind != "honeycomb" or not lattice.meta.get("double_bonds"):
        raise ValueError("honeycomb_to_triangular needs a double-bond honeycomb lattice")
    if keep_direct_bonds:
        base, base_idx = lattice, np.arange(lattice.n_edges)
    else:
        base_idx = np.flatnonzero(lattice.edges[:, 2] == 0)
        base = Lattice(lattice.kind, lattice.coords.copy(), lattice.positions.copy(), lattice.edges[base_idx],
                       lattice.source.copy(), lattice.sink.copy(), lattice.boundary_mode, lattice.period,
                       {**lattice.meta, "double_bonds": False})
    out, src = swap_structure(base, default_plan(base, parity=0, slot=0))
    return out, base_idx[src]


def honeycomb_to_triangular(lattice: Lattice, edge_scps, keep_direct_bonds: bool = False):
    """3-swap one sublattice of a double-bond honeycomb into a triangular lattice.

    Slot-0 bonds feed the swaps. By default the unused slot-1 bonds are
    dropped so the result is the bare triangular pattern; with
    ``keep_direct_bonds`` they stay as direct bonds.
    """
    scps = _check_scps(lattice, edge_scps)
    out, src = honeycomb_to_triangular_structure(lattice, keep_direct_bonds)
    return out, np.minimum(scps[src[:, 0]], scps[src[:, 1]])
