import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from isingtsp.distance import build_distance_matrix, quantize_weights
from isingtsp.macro import PATH, SpinStorage, candidate_set, update_spin
from isingtsp.solver import fix_endpoints
from isingtsp.tsplib import parse_tour, write_tour

coords = st.lists(
    st.tuples(st.integers(0, 10_000), st.integers(0, 10_000)), min_size=3, max_size=14, unique=True
).map(lambda c: np.array(c, dtype=float))


@given(st.permutations(list(range(12))))
def test_tour_round_trip(perm):
    np.testing.assert_array_equal(parse_tour(write_tour(perm, "t"), 12), perm)


@given(coords, st.sampled_from([2, 3, 4]))
def test_weight_range_and_monotonicity(points, bits):
    dm = build_distance_matrix(points)
    w = quantize_weights(dm, bits).w
    n = len(points)
    off = ~np.eye(n, dtype=bool)
    assert np.all(np.diag(w) == 0)
    assert np.all((w[off] >= 1) & (w[off] <= 2**bits - 1))
    np.testing.assert_array_equal(w, w.T)
    assert np.all(w[(dm.d == dm.d_min) & off] == 2**bits - 1)
    d, q = dm.d[off], w[off]
    order = np.argsort(d, kind="stable")
    assert np.all(np.diff(q[order]) <= 0)


@st.composite
def storages(draw):
    n = draw(st.integers(4, 12))
    assign = np.array(draw(st.permutations(list(range(n)))))
    if draw(st.booleans()):
        return SpinStorage(assign, PATH, int(assign[0]), int(assign[-1]))
    return SpinStorage(assign)


@settings(max_examples=200)
@given(storages(), st.data())
def test_update_keeps_permutation_and_pins(spins, data):
    order = data.draw(st.sampled_from(list(spins.optimizable_orders)))
    mask = np.array(data.draw(st.lists(st.booleans(), min_size=spins.n, max_size=spins.n)))
    cand = candidate_set(spins, order, mask)
    assert cand.any()
    city = data.draw(st.sampled_from(np.flatnonzero(cand).tolist()))
    out = update_spin(spins, order, city)
    assert sorted(out.assign.tolist()) == list(range(spins.n))
    assert out.assign[0] == spins.assign[0]
    if spins.mode == PATH:
        assert out.assign[-1] == spins.assign[-1]
    changed = np.flatnonzero(out.assign != spins.assign)
    assert len(changed) in (0, 2)


@given(coords, st.integers(2, 4), st.randoms(use_true_random=False))
def test_endpoints_belong_to_their_cluster(points, k, rnd):
    n = len(points)
    k = min(k, n)
    labels = np.arange(n) % k
    members = [np.flatnonzero(labels == c) for c in range(k)]
    order = list(range(k))
    rnd.shuffle(order)
    ends = fix_endpoints(order, members, points)
    for c in range(k):
        entry, exit_ = ends[c]
        assert entry in members[c] and exit_ in members[c]
        if len(members[c]) > 1:
            assert entry != exit_
