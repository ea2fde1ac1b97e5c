from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchlab import (
    InputError,
    PreferenceMatrices,
    Side,
    UserRef,
    build_matching_graph,
    degree,
    delta_overload,
    read_instance,
    write_instance,
)
from matchlab.core import all_degrees
from matchlab.rng import philox

from oracles import and_matrix_edges


def random_prefs(n, seed, p=0.5):
    g = philox(seed, 99)
    return PreferenceMatrices.from_bool_arrays(g.random((n, n)) < p, g.random((n, n)) < p)


def test_demo_instance_matches(demo_prefs):
    mg = build_matching_graph(demo_prefs)
    assert mg.match_count == 4
    assert (0, 2) in set(mg.edges())  # boy 0 with girl 2
    assert degree(mg, UserRef(Side.GIRL, 0)) == 3
    assert degree(mg, UserRef(Side.BOY, 1)) == 1


def test_all_false_gives_empty_graph():
    prefs = PreferenceMatrices(5, (0,) * 5, (0,) * 5)
    mg = build_matching_graph(prefs)
    assert mg.match_count == 0
    assert mg.edges() == []
    assert degree(mg, UserRef(Side.BOY, 3)) == 0


def test_graph_equals_entrywise_and_oracle():
    prefs = random_prefs(8, seed=42)
    mg = build_matching_graph(prefs)
    assert set(mg.edges()) == and_matrix_edges(prefs)


def test_degree_equals_popcount_oracle():
    prefs = random_prefs(7, seed=3)
    mg = build_matching_graph(prefs)
    edges = and_matrix_edges(prefs)
    for b in range(7):
        assert degree(mg, UserRef(Side.BOY, b)) == sum(1 for e in edges if e[0] == b)
    for g in range(7):
        assert degree(mg, UserRef(Side.GIRL, g)) == sum(1 for e in edges if e[1] == g)


def test_degree_rejects_out_of_range():
    mg = build_matching_graph(random_prefs(4, seed=0))
    with pytest.raises(InputError):
        degree(mg, UserRef(Side.BOY, 4))


def test_delta_overload_demo(demo_prefs):
    mg = build_matching_graph(demo_prefs)
    # degrees: boys (2,1,0,1), girls (3,0,1,0); T/n = 1
    assert delta_overload(mg, 4) == Fraction(3)


def test_delta_overload_zero_cases(demo_prefs):
    mg = build_matching_graph(demo_prefs)
    assert delta_overload(mg, 4 * 3) == 0  # T/n = max degree
    empty = build_matching_graph(PreferenceMatrices(3, (0,) * 3, (0,) * 3))
    assert delta_overload(empty, 17) == 0


def test_delta_is_exact_rational():
    mg = build_matching_graph(random_prefs(6, seed=9))
    d = delta_overload(mg, 7)
    assert isinstance(d, Fraction)
    assert d.denominator in (1, 2, 3, 6)


bool_matrix = st.integers(1, 6).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.integers(0, (1 << n) - 1), min_size=n, max_size=n),
        st.lists(st.integers(0, (1 << n) - 1), min_size=n, max_size=n),
    )
)


@given(bool_matrix)
def test_matching_symmetry_and_count(data):
    n, boys, girls = data
    mg = build_matching_graph(PreferenceMatrices(n, tuple(boys), tuple(girls)))
    girl_rows = mg.girl_rows()
    for b in range(n):
        for g in range(n):
            assert ((mg.boy_rows[b] >> g) & 1) == ((girl_rows[g] >> b) & 1)
    boy_deg, girl_deg = all_degrees(mg)
    assert sum(boy_deg) == sum(girl_deg) == mg.match_count
    assert all(0 <= d <= n for d in boy_deg + girl_deg)


@given(bool_matrix, st.integers(0, 50))
def test_delta_monotone_in_T(data, T):
    n, boys, girls = data
    mg = build_matching_graph(PreferenceMatrices(n, tuple(boys), tuple(girls)))
    assert delta_overload(mg, T) >= delta_overload(mg, T + 1)
    boy_deg, girl_deg = all_degrees(mg)
    dmax = max(boy_deg + girl_deg)
    assert delta_overload(mg, n * dmax) == 0


@settings(max_examples=30)
@given(bool_matrix)
def test_instance_file_roundtrip(tmp_path_factory, data):
    n, boys, girls = data
    prefs = PreferenceMatrices(n, tuple(boys), tuple(girls))
    path = tmp_path_factory.mktemp("inst") / "i.txt"
    write_instance(prefs, path)
    assert read_instance(path) == prefs


def test_bool_array_roundtrip():
    prefs = random_prefs(9, seed=5)
    b, g = prefs.to_bool_arrays()
    assert PreferenceMatrices.from_bool_arrays(b, g) == prefs
    assert b.shape == (9, 9) and b.dtype == bool


def test_rejects_malformed():
    with pytest.raises(InputError):
        PreferenceMatrices(2, (0, 4), (0, 0))  # bit outside n
    with pytest.raises(InputError):
        PreferenceMatrices(2, (0,), (0, 0))
    arr = np.zeros((2, 3), dtype=bool)
    with pytest.raises(InputError):
        PreferenceMatrices.from_bool_arrays(arr, arr)
