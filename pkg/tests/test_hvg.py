import numpy as np
import pytest
from hypothesis import given, strategies as st

from rmvg.hvg import (Mode, VisibilityGraph, build_hvg, degree_law_check, read_edges,
                      write_edges)


def brute_force_edges(x):
    """All pairs (i, j) whose strictly intermediate samples are all strictly
    below min(x[i], x[j])."""
    n = len(x)
    out = set()
    for i in range(n):
        for j in range(i + 1, n):
            if all(x[k] < min(x[i], x[j]) for k in range(i + 1, j)):
                out.add((i, j))
    return out


def edge_set(g):
    return set(zip(g.src.tolist(), g.dst.tolist()))


series = st.lists(st.integers(0, 5), min_size=2, max_size=40).map(
    lambda v: np.array(v, dtype=float))
real_series = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=40).map(
    np.array)


def test_small_example():
    g = build_hvg([3, 1, 2, 4])
    assert edge_set(g) == {(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)}
    assert list(g.degrees()) == [3, 2, 3, 2]


def test_plateau_blocks():
    g = build_hvg([1, 1, 1])
    assert edge_set(g) == {(0, 1), (1, 2)}
    assert list(g.degrees()) == [1, 2, 1]


def test_equal_intermediate_blocks_longer_edge():
    # a literal "stop when top > x[i]" scan would also link vertices 0 and 3
    assert edge_set(build_hvg([2, 1, 2, 3])) == {(0, 1), (0, 2), (1, 2), (2, 3)}


def test_weighted_pair():
    g = build_hvg([1, 2], Mode.WEIGHTED)
    assert g.weight[0] == pytest.approx(1 / np.sqrt(2))
    assert g.weight[0] == pytest.approx(0.70711, abs=1e-5)


def test_monotone_is_path():
    g = build_hvg(np.arange(50.0))
    assert edge_set(g) == {(i, i + 1) for i in range(49)}


def test_input_validation():
    with pytest.raises(ValueError):
        build_hvg([1.0])
    with pytest.raises(ValueError):
        build_hvg([1.0, np.inf])


@given(series)
def test_oracle_with_ties(x):
    assert edge_set(build_hvg(x)) == brute_force_edges(x)


@given(real_series)
def test_oracle_real_values(x):
    assert edge_set(build_hvg(x)) == brute_force_edges(x)


@given(series, st.integers(0, 10))
def test_shift_invariance(x, tau):
    tau = min(tau, len(x) - 2)
    full = edge_set(build_hvg(x))
    tail = edge_set(build_hvg(x[tau:]))
    assert tail == {(i - tau, j - tau) for i, j in full if i >= tau}


@given(real_series, st.floats(1e-3, 1e3), st.floats(-1e3, 1e3))
def test_affine_invariance(x, a, b):
    y = a * x + b
    # a positive affine map can merge or split values only through rounding
    if np.array_equal(np.argsort(x, kind="stable"), np.argsort(y, kind="stable")) and \
            np.array_equal(np.diff(np.sort(x)) == 0, np.diff(np.sort(y)) == 0):
        assert build_hvg(y) == build_hvg(x)


@given(series)
def test_time_reversal(x):
    n = len(x)
    fwd = edge_set(build_hvg(x))
    rev = edge_set(build_hvg(x[::-1]))
    assert rev == {(n - 1 - j, n - 1 - i) for i, j in fwd}


@given(series)
def test_weights_in_unit_interval(x):
    g = build_hvg(x, Mode.WEIGHTED)
    assert np.all((g.weight > 0) & (g.weight <= 1))
    eq = (g.dst - g.src == 1) & (x[g.src] == x[g.dst])
    assert np.all(g.weight[eq] == 1.0)


def test_edges_sorted_and_adjacency_symmetric(rng):
    g = build_hvg(rng.standard_normal(300), Mode.WEIGHTED)
    keys = g.edge_keys()
    assert np.all(np.diff(keys) > 0)
    a = g.adjacency
    assert (a - a.T).nnz == 0
    np.testing.assert_allclose(np.asarray(a.sum(axis=1)).ravel(), g.degrees())


def test_binarized_and_from_edges():
    g = build_hvg([3.0, 1.0, 2.0, 4.0], Mode.WEIGHTED)
    b = g.binarized()
    assert b.mode is Mode.BINARY and np.all(b.weight == 1)
    assert b == build_hvg([3.0, 1.0, 2.0, 4.0])
    h = VisibilityGraph.from_edges(4, [(2, 0), (1, 0), (3, 2), (3, 0), (2, 1)])
    assert h == b


def test_degree_law():
    pk, mean = degree_law_check(10_000, seed=1)
    assert 3.9 <= mean <= 4.1
    pk, mean = degree_law_check(100_000, seed=1)
    assert abs(pk[2] - 1 / 3) < 0.02
    assert np.all(np.diff(pk[2:11]) < 0)


def test_edge_file_roundtrip(tmp_path, rng):
    g = build_hvg(rng.standard_normal(60), Mode.WEIGHTED)
    path = tmp_path / "g.edges"
    write_edges(g, path)
    first = path.read_text().splitlines()[0].split()
    assert first[:2] == [str(g.src[0] + 1), str(g.dst[0] + 1)]
    assert read_edges(path, 60, Mode.WEIGHTED) == g
