import json

import pytest
from hypothesis import given, settings, strategies as st

from cflab import catalog, finite_catalog as fc
from cflab.bratteli import (MAXIMAL, DEdge, OrderedBratteliDiagram, equivalence_oracle, export, minimal_path,
                            permute_ranks, to_cf, vershik_successor)
from cflab.errors import UnsupportedShape

import oracles


def test_export_shape_r2():
    d = export(fc.r2(6))
    assert [len(lv) for lv in d.levels] == [2] + [8] * 6
    assert sorted(e.rank for e in d.levels[1] if e.tgt == 1) == [0, 1, 2, 3]
    assert d.incoming(2, 2)[0] == DEdge(2, 2, 0)


def test_spacers_rejected():
    with pytest.raises(UnsupportedShape):
        export(catalog.chacon(3))
    with pytest.raises(UnsupportedShape):
        export(fc.r2s(3))


def test_json_schema_and_round_trip():
    d = export(fc.fb(4))
    data = json.loads(d.dumps())
    assert set(data) == {"k", "levels"}
    assert set(data["levels"][1]["edges"][0]) == {"src", "tgt", "rank"}
    assert OrderedBratteliDiagram.from_json(data) == d


def test_dot_ids_are_deterministic():
    dot = export(catalog.odometer(2)).to_dot()
    assert 'v0_1 -> v1_1 [id="e1_1_1", label="1"];' in dot
    assert dot == export(catalog.odometer(2)).to_dot()


def test_odometer_successor_is_binary_increment():
    d = export(catalog.odometer(6))
    path = minimal_path(d, 6, 1)
    for value in range(1, 64):
        path = vershik_successor(d, path)
        assert [e.rank for e in path[1:]] == oracles.odometer_digits(value, 6)
    assert vershik_successor(d, path) == MAXIMAL


@pytest.mark.parametrize("sys", [fc.r2(6), fc.fb(6), catalog.odometer(6)], ids=["r2", "fb", "odometer"])
def test_to_cf_round_trip(sys):
    d = export(sys)
    assert export(to_cf(d)) == d


@pytest.mark.parametrize("sys", [fc.r2(6), fc.fb(6), catalog.odometer(6)], ids=["r2", "fb", "odometer"])
def test_oracle_passes(sys):
    rep = equivalence_oracle(sys, 6)
    ksys = sys.as_rank_k() if hasattr(sys, "as_rank_k") else sys
    assert rep.passed and rep.checked == sum(ksys.heights(6))


def test_permuted_order_caught():
    d = permute_ranks(export(fc.r2(6)), 3, 1, [0, 2, 1, 3])
    rep = equivalence_oracle(fc.r2(6), 6, d)
    assert not rep.passed and rep.counterexample["path"]


def test_bad_rank_set_rejected():
    with pytest.raises(ValueError):
        OrderedBratteliDiagram(1, ((DEdge(0, 1, 0),), (DEdge(1, 1, 0), DEdge(1, 1, 2))))


@settings(max_examples=20, deadline=None)
@given(st.permutations([1, 1, 2, 2]), st.permutations([2, 2, 1, 1]))
def test_successor_orbit_visits_every_path_once(a, b):
    sys = fc.r2_orders((list(a), list(b)), 3)
    d = export(sys)
    for j in (1, 2):
        path, seen = minimal_path(d, 3, j), set()
        while path != MAXIMAL:
            assert path not in seen
            seen.add(path)
            path = vershik_successor(d, path)
        assert len(seen) == sys.heights(3)[j - 1]


@settings(max_examples=15, deadline=None)
@given(st.permutations([1, 1, 2, 2]), st.permutations([2, 2, 1, 1]))
def test_oracle_passes_on_reordered_castles(a, b):
    assert equivalence_oracle(fc.r2_orders((list(a), list(b)), 4), 4).passed
