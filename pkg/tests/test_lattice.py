import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randperc.lattice import (
    Lattice,
    build_lattice,
    default_plan,
    expected_counts,
    honeycomb_to_triangular,
    honeycomb_to_triangular_structure,
    make_plan,
    q_swap,
    swap_structure,
)
from randperc.rng import stream


def as_graph(lat: Lattice) -> nx.MultiGraph:
    g = nx.MultiGraph()
    g.add_nodes_from(range(lat.n_nodes))
    g.add_edges_from((int(a), int(b)) for a, b, _ in lat.edges)
    return g


# construction

def test_square_2x2():
    lat = build_lattice("square", 2)
    assert (lat.n_nodes, lat.n_edges) == (4, 4)


def test_triangular_3x3_hand_count():
    # 3 rows x 2 horizontal + 3 columns x 2 vertical + 2 x 2 diagonals
    lat = build_lattice("triangular", 3)
    assert (lat.n_nodes, lat.n_edges) == (9, 16)
    deg = lat.degree()
    # corners on the diagonal axis have degree 3, the other two corners 2, the centre 6
    assert sorted(deg.tolist()) == [2, 2, 3, 3, 4, 4, 4, 4, 6]


@pytest.mark.parametrize("kind", ["square", "triangular", "honeycomb"])
@pytest.mark.parametrize("L", [2, 3, 5, 16])
def test_closed_form_counts(kind, L):
    lat = build_lattice(kind, L)
    assert (lat.n_nodes, lat.n_edges) == expected_counts(kind, L)
    dbl = build_lattice(kind, L, double_bonds=True)
    assert dbl.n_edges == 2 * lat.n_edges
    assert set(dbl.edges[:, 2].tolist()) == {0, 1}
    assert nx.is_connected(as_graph(lat))


@pytest.mark.parametrize("kind,bulk", [("square", 4), ("triangular", 6), ("honeycomb", 3)])
def test_bulk_degree_and_bond_length(kind, bulk):
    lat = build_lattice(kind, 10)
    assert lat.degree().max() == bulk
    d = lat.positions[lat.edges[:, 1]] - lat.positions[lat.edges[:, 0]]
    np.testing.assert_allclose(np.hypot(d[:, 0], d[:, 1]), 1.0, atol=1e-12)


def test_wrapped_boundary():
    lat = build_lattice("square", 5, boundary_mode="wrapped")
    assert lat.n_edges == 2 * 25 - 5
    assert np.all(lat.degree()[np.flatnonzero((lat.coords[:, 0] > 0) & (lat.coords[:, 0] < 4))] == 4)
    for a, b, _ in lat.edges:
        assert np.linalg.norm(lat.displacement(a, b)) == pytest.approx(1.0)


def test_boundaries():
    lat = build_lattice("honeycomb", 4)
    assert lat.source.size and lat.sink.size
    assert not set(lat.source) & set(lat.sink)


@pytest.mark.parametrize("kwargs", [dict(kind="kagome", L=4), dict(kind="square", L=1),
                                    dict(kind="square", L=4, boundary_mode="twisted")])
def test_build_errors(kwargs):
    with pytest.raises(ValueError):
        build_lattice(**kwargs)


def test_lattice_invariants_enforced():
    lat = build_lattice("square", 3)
    with pytest.raises(ValueError, match="self-loops"):
        Lattice("x", lat.coords.copy(), lat.positions.copy(), np.array([[0, 0, 0]]), lat.source.copy(), lat.sink.copy())
    with pytest.raises(ValueError, match="distinct slots"):
        Lattice("x", lat.coords.copy(), lat.positions.copy(), np.array([[0, 1, 0], [1, 0, 0]]),
                lat.source.copy(), lat.sink.copy())
    with pytest.raises(ValueError, match="disjoint"):
        Lattice("x", lat.coords.copy(), lat.positions.copy(), lat.edges.copy(), np.array([0]), np.array([0]))


# q-swaps

def test_qswap_min_rule_star():
    lat = build_lattice("square", 3)
    centre = 4
    plan = make_plan(lat, [centre])
    scps = np.linspace(0.1, 0.9, lat.n_edges)
    out, new = q_swap(lat, plan, scps)
    order = plan.neighbor_order[0]
    assert len(order) == 4
    assert out.n_nodes == lat.n_nodes - 1
    assert out.n_edges == lat.n_edges
    # the last four output bonds are the cycle, in neighbour order
    expected = [min(scps[order[k]], scps[order[(k + 1) % 4]]) for k in range(4)]
    np.testing.assert_array_equal(new[-4:], expected)
    kept = [k for k in range(lat.n_edges) if k not in order]
    np.testing.assert_array_equal(new[:-4], scps[kept])


def test_ccw_neighbor_order():
    lat = build_lattice("square", 3)
    plan = make_plan(lat, [4])
    far = [int(lat.edges[k, 1] if lat.edges[k, 0] == 4 else lat.edges[k, 0]) for k in plan.neighbor_order[0]]
    ang = [math.atan2(*(lat.positions[n] - lat.positions[4])[::-1]) for n in far]
    assert ang == sorted(ang)


def test_qswap_chain_node():
    # a path 0 - 1 - 2: swapping node 1 leaves a single relay bond
    lat = build_lattice("square", 3, shape=(3, 1))
    scps = np.array([0.8, 0.3])
    out, new = q_swap(lat, make_plan(lat, [1]), scps)
    assert out.n_edges == 1 and out.n_nodes == 2
    assert new.tolist() == [0.3]


def test_qswap_equal_scps():
    lat = build_lattice("triangular", 6)
    plan = default_plan(lat)
    out, new = q_swap(lat, plan, np.full(lat.n_edges, 0.37))
    assert np.all(new == 0.37)
    assert out.n_nodes == lat.n_nodes - len(plan.swap_nodes)


def test_independence_enforced():
    lat = build_lattice("square", 4)
    with pytest.raises(ValueError, match="independent"):
        make_plan(lat, [5, 6])


def test_missing_scp_rejected():
    lat = build_lattice("square", 3)
    scps = np.full(lat.n_edges, 0.5)
    scps[0] = np.nan
    with pytest.raises(ValueError, match="missing"):
        q_swap(lat, make_plan(lat, [4]), scps)
    with pytest.raises(ValueError):
        q_swap(lat, make_plan(lat, [4]), scps[:-1])


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["square", "triangular", "honeycomb"]), st.integers(3, 9), st.integers(0, 1))
def test_edge_conservation(kind, L, parity):
    lat = build_lattice(kind, L)
    plan = default_plan(lat, parity=parity)
    out, src = swap_structure(lat, plan)
    q = [len(o) for o in plan.neighbor_order]
    dedup = sum(1 for k in q if k == 2)
    assert out.n_edges == lat.n_edges - dedup
    assert out.n_nodes == lat.n_nodes - len(plan.swap_nodes)
    assert np.all(src >= 0) and np.all(src < lat.n_edges)


def test_uniform_min_rule_monte_carlo():
    lat = build_lattice("honeycomb", 24, double_bonds=True)
    _, src = honeycomb_to_triangular_structure(lat)
    new = src[src[:, 0] != src[:, 1]]
    rng = stream(123)
    total, vals = 0, []
    while total < 1_000_000:
        scp = rng.random(lat.n_edges)
        vals.append(np.minimum(scp[new[:, 0]], scp[new[:, 1]]))
        total += len(new)
    v = np.concatenate(vals)
    # bonds of one cycle share edges, so the error bar comes from per-lattice means
    means = np.array([x.mean() for x in vals])
    se = means.std(ddof=1) / math.sqrt(len(means))
    assert abs(v.mean() - 1 / 3) <= 4 * se


def test_determinism():
    lat = build_lattice("honeycomb", 6, double_bonds=True)
    scps = stream(1).random(lat.n_edges)
    a, sa = honeycomb_to_triangular(lat, scps)
    b, sb = honeycomb_to_triangular(lat, scps.copy())
    assert np.array_equal(a.edges, b.edges) and np.array_equal(sa, sb)
    assert sa.tobytes() == sb.tobytes()


# honeycomb to triangular

def test_hexagon_ring_becomes_triangle():
    ring = build_lattice("honeycomb", 2, double_bonds=True, shape=(3, 2))
    assert ring.n_edges == 12
    assert all(d == 4 for d in ring.degree())
    out, scps = honeycomb_to_triangular(ring, np.ones(ring.n_edges))
    g = nx.Graph([(int(a), int(b)) for a, b, _ in out.edges])
    assert nx.is_isomorphic(g, nx.complete_graph(3))
    assert out.n_nodes == 3
    # survivors are the three nodes of the other parity
    assert sorted(map(tuple, out.coords.tolist())) == [(0, 1), (1, 0), (2, 1)]
    assert np.all(scps == 1.0)


def _new_bonds(lat):
    out, src = honeycomb_to_triangular_structure(lat)
    return out, src[:, 0] != src[:, 1]


def _bulk(pos, margin):
    x, y = pos[:, 0], pos[:, 1]
    return (x > x.min() + margin) & (x < x.max() - margin) & (y > y.min() + margin) & (y < y.max() - margin)


def test_honeycomb_to_triangular_bulk():
    lat = build_lattice("honeycomb", 10, double_bonds=True)
    out, scps = honeycomb_to_triangular(lat, np.ones(lat.n_edges))
    assert np.all(scps == 1.0)
    _, new = _new_bonds(lat)
    d = out.positions[out.edges[new, 1]] - out.positions[out.edges[new, 0]]
    np.testing.assert_allclose(np.hypot(d[:, 0], d[:, 1]), math.sqrt(3), atol=1e-12)
    ang = np.degrees(np.arctan2(d[:, 1], d[:, 0])) % 180
    assert np.allclose(np.minimum(ang % 60, 60 - ang % 60), 0, atol=1e-9)
    # only bonds of unswapped boundary nodes survive unchanged
    kept = out.edges[~new, :2].ravel()
    parity = out.coords[:, 0] + out.coords[:, 1]
    assert np.all(out.degree()[_bulk(out.positions, 2.5)] == 6)
    assert _bulk(out.positions, 2.5).sum() > 10
    assert not np.any(np.isin(kept, np.flatnonzero(_bulk(out.positions, 2.5) & (parity % 2 == 1))))


def test_honeycomb_to_triangular_matches_triangular_patch():
    # spot isomorphism: inside the patch the new bonds are exactly the
    # triangular lattice induced on the surviving points
    lat = build_lattice("honeycomb", 6, double_bonds=True)
    out, new = _new_bonds(lat)
    pos = out.positions
    dist = np.hypot(*(pos[:, None, :] - pos[None, :, :]).transpose(2, 0, 1))
    ref = nx.Graph()
    ref.add_nodes_from(range(out.n_nodes))
    ref.add_edges_from((int(a), int(b)) for a, b in zip(*np.nonzero(np.triu(np.isclose(dist, math.sqrt(3))))))
    got = nx.Graph()
    got.add_nodes_from(range(out.n_nodes))
    got.add_edges_from((int(a), int(b)) for a, b, _ in out.edges[new])
    assert all(ref.has_edge(a, b) for a, b in got.edges)
    inner = np.flatnonzero(_bulk(pos, 1.6))
    assert len(inner) >= 7
    assert nx.is_isomorphic(got.subgraph(inner), ref.subgraph(inner))
    assert set(got.subgraph(inner).edges) == set(ref.subgraph(inner).edges)


def test_keep_direct_bonds():
    lat = build_lattice("honeycomb", 4, double_bonds=True)
    bare, _ = honeycomb_to_triangular_structure(lat)
    full, src = honeycomb_to_triangular_structure(lat, keep_direct_bonds=True)
    n_slot1 = int(np.sum(lat.edges[:, 2] == 1))
    assert full.n_edges == bare.n_edges + n_slot1
    # every consumed edge is a slot-0 bond
    consumed = src[src[:, 0] != src[:, 1]].ravel()
    assert np.all(lat.edges[consumed, 2] == 0)


def test_honeycomb_to_triangular_needs_double_bonds():
    with pytest.raises(ValueError):
        honeycomb_to_triangular(build_lattice("honeycomb", 4), np.ones(40))
    with pytest.raises(ValueError):
        honeycomb_to_triangular(build_lattice("square", 4, double_bonds=True), np.ones(48))


def test_edge_csv(tmp_path):
    lat = build_lattice("square", 3)
    scps = np.linspace(0, 1, lat.n_edges)
    path = tmp_path / "edges.csv"
    lat.to_edge_csv(path, scps)
    lines = path.read_text().splitlines()
    assert lines[0] == "node_a,node_b,slot,scp"
    assert len(lines) == lat.n_edges + 1
    assert all(len(row.split(",")) == 4 for row in lines)
    assert float(lines[-1].split(",")[3]) == 1.0
