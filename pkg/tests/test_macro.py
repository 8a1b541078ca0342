import numpy as np
import pytest

from conftest import random_points
from isingtsp.distance import build_distance_matrix, quantize_weights, tour_length
from isingtsp.macro import (
    CYCLE,
    PATH,
    AnnealSchedule,
    MacroState,
    SpinStorage,
    SpinUpdateError,
    anneal,
    anneal_reference,
    argmax_select,
    calibrate_stochastic_model,
    candidate_set,
    draw_mask_bits,
    mac_currents,
    macro_rng,
    stochastic_mask,
    superpose,
    swap_gain,
    sweep,
    update_spin,
)
from isingtsp.oracle import held_karp_cycle

A, B, C, D, E = range(5)


def weights_of(points, bits=4):
    return quantize_weights(build_distance_matrix(points), bits)


@pytest.fixture
def tri_weights(triangle):
    return weights_of(triangle)


# -- superpose ----------------------------------------------------------------


def test_superpose_cycle_neighbours():
    u = superpose(SpinStorage(np.array([A, B, C, D])), 2)
    assert np.flatnonzero(u).tolist() == [B, D]


def test_superpose_path_includes_fixed_entry():
    spins = SpinStorage(np.array([2, 0, 3, 1]), PATH, 2, 1)
    assert np.flatnonzero(superpose(spins, 1)).tolist() == [2, 3]


def test_superpose_drives_both_neighbour_rows():
    # A at order 1, D at order 3, order 2 being optimized
    spins = SpinStorage(np.array([B, A, C, D]))
    assert np.flatnonzero(superpose(spins, 2)).tolist() == [A, D]


def test_superpose_rejects_pinned_order():
    with pytest.raises(SpinUpdateError):
        superpose(SpinStorage(np.arange(4)), 0)
    with pytest.raises(SpinUpdateError):
        superpose(SpinStorage(np.arange(4), PATH, 0, 3), 3)


# -- MAC ----------------------------------------------------------------------


def test_mac_zero_input(tri_weights):
    np.testing.assert_array_equal(mac_currents(tri_weights, np.zeros(3, int)), 0)


def test_mac_triangle(tri_weights):
    np.testing.assert_array_equal(mac_currents(tri_weights, np.array([1, 1, 0])), [15, 15, 20])


def test_mac_size_mismatch(tri_weights):
    with pytest.raises(ValueError):
        mac_currents(tri_weights, np.ones(4, int))


def test_mac_with_leak(tri_weights):
    got = mac_currents(tri_weights, np.array([1, 1, 0]), leak=0.1)
    np.testing.assert_allclose(got, [15 + 1.5, 15 + 1.5, 20 + 3.0])


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_mac_equals_naive_spin_sum(n):
    """d_hat[x] summed over the one-hot spin matrix, term by term."""
    w = weights_of(random_points(n, n))
    rng = np.random.default_rng(n)
    spins = SpinStorage(rng.permutation(n))
    sigma = spins.spin_matrix()
    for order in spins.optimizable_orders:
        expected = []
        for x in range(n):
            total = 0
            for k in range(n):
                if k != x:
                    total += w.w[x, k] * (sigma[k, order - 1] | sigma[k, (order + 1) % n])
            expected.append(total)
        np.testing.assert_array_equal(mac_currents(w, superpose(spins, order)), expected)


def test_mac_prefers_closest_city():
    # the city nearest both neighbours draws the largest current
    pts = np.array([[0, 0], [10, 0], [5, 1], [5, 8], [30, 30]], dtype=float)
    d_hat = mac_currents(weights_of(pts), np.array([1, 1, 0, 0, 0]))
    assert int(np.argmax(d_hat[2:])) + 2 == 2


# -- stochastic mask, candidates, argmax ---------------------------------------


def test_mask_extremes():
    rng = np.random.default_rng(0)
    assert stochastic_mask(12, 0.0, rng).all()
    assert stochastic_mask(12, 1.0, rng).all()


def test_mask_bit_count_statistics():
    rng = np.random.default_rng(1)
    trials, n, p = 100_000, 12, 0.2
    counts = (rng.random((trials, n)) < p).sum(axis=1)
    mean = counts.mean()
    sigma = np.sqrt(n * p * (1 - p) / trials)
    assert abs(mean - 2.4) < 3 * sigma
    # the library draw follows the same distribution
    lib = np.array([draw_mask_bits(n, p, rng).sum() for _ in range(20_000)])
    assert abs(lib.mean() - 2.4) < 3 * np.sqrt(n * p * (1 - p) / 20_000)


def test_mask_probability_range():
    with pytest.raises(ValueError):
        stochastic_mask(4, 1.5, np.random.default_rng(0))


def mask_of(n, members):
    m = np.zeros(n, dtype=bool)
    m[list(members)] = True
    return m


def test_candidates_exclude_neighbours_and_anchor():
    spins = SpinStorage(np.array([A, B, C, D]))
    # order 2 has neighbours B and D; A is the cycle anchor
    assert np.flatnonzero(candidate_set(spins, 2, mask_of(4, range(4)))).tolist() == [C]
    assert np.flatnonzero(candidate_set(spins, 2, mask_of(4, [B]))).tolist() == [C]


def test_candidates_keep_masked_city():
    spins = SpinStorage(np.array([A, B, C, D, E]))
    assert np.flatnonzero(candidate_set(spins, 2, mask_of(5, [E]))).tolist() == [E]
    assert np.flatnonzero(candidate_set(spins, 2, mask_of(5, [A, B]))).tolist() == [C, E]


def test_candidates_exclude_fixed_endpoints():
    spins = SpinStorage(np.array([A, B, C, D, E]), PATH, A, E)
    assert np.flatnonzero(candidate_set(spins, 2, mask_of(5, range(5)))).tolist() == [C]


def test_argmax_examples():
    d_hat = np.array([15, 15, 20])
    assert argmax_select(d_hat, [True, True, True]) == 2
    assert argmax_select(d_hat, [True, True, False]) == 0
    assert argmax_select(d_hat, [False, True, False]) == 1
    with pytest.raises(ValueError):
        argmax_select(d_hat, [False, False, False])


# -- spin update ----------------------------------------------------------------


def test_update_swaps():
    spins = SpinStorage(np.array([A, B, C, D, E]))
    out = update_spin(spins, 2, E)
    assert out.assign.tolist() == [A, B, E, D, C]
    assert spins.assign.tolist() == [A, B, C, D, E]


def test_update_swap_four_city_path():
    spins = SpinStorage(np.array([A, B, C, D, E]), PATH, A, E)
    assert update_spin(spins, 1, D).assign.tolist() == [A, D, C, B, E]


def test_update_in_place_is_noop():
    spins = SpinStorage(np.array([A, B, C, D, E]))
    assert update_spin(spins, 2, C).assign.tolist() == [A, B, C, D, E]


def test_update_rejects_pinned_and_neighbours():
    spins = SpinStorage(np.array([A, B, C, D, E]), PATH, A, E)
    with pytest.raises(SpinUpdateError):
        update_spin(spins, 2, A)
    with pytest.raises(SpinUpdateError):
        update_spin(spins, 2, B)
    with pytest.raises(SpinUpdateError):
        update_spin(spins, 0, C)


def test_storage_rejects_broken_assignments():
    with pytest.raises(SpinUpdateError):
        SpinStorage(np.array([0, 0, 1]))
    with pytest.raises(SpinUpdateError):
        SpinStorage(np.array([0, 1, 2]), PATH, 0, 1)


def test_swap_gain_matches_weight_bookkeeping():
    pts = random_points(9, 7)
    w = weights_of(pts)
    spins = SpinStorage(np.arange(7))

    def total(assign):
        return sum(w.w[assign[i], assign[(i + 1) % 7]] for i in range(7))

    for order in spins.optimizable_orders:
        prev, nxt = spins.neighbors(order)
        for city in range(7):
            if city in (prev, nxt) or city in spins.pinned:
                continue
            after = update_spin(spins, order, city)
            assert swap_gain(w, spins, order, city) == total(after.assign) - total(spins.assign)


# -- macro state, sweeps, schedule -------------------------------------------------


def test_crossbar_footprint(tri_weights):
    state = MacroState(tri_weights, SpinStorage.initial(3), np.random.default_rng(0))
    assert state.crossbar_shape == (3, 15)


def test_updates_per_sweep(tri_weights):
    state = MacroState(tri_weights, SpinStorage.initial(3), np.random.default_rng(0))
    assert state.order_updates_per_sweep == 2
    path = MacroState(weights_of(random_points(0, 12)), SpinStorage.initial(12, PATH, 0, 11), None)
    assert path.order_updates_per_sweep == 10


def _greedy_history(points, sweeps):
    n = len(points)
    state = MacroState(weights_of(points), SpinStorage.initial(n), np.random.default_rng(0))
    history = [state.spins.assign.copy()]
    for _ in range(sweeps):
        sweep(state, 0.0)
        history.append(state.spins.assign.copy())
    return history


def test_greedy_sweeps_settle_on_triangle(triangle):
    history = _greedy_history(triangle, 3)
    assert any((history[i] == history[i - 1]).all() for i in range(1, 4))


@pytest.mark.parametrize("seed", range(5))
def test_greedy_fixed_point_is_absorbing(seed):
    history = _greedy_history(random_points(seed, 6), 12)
    still = [i for i in range(1, len(history)) if (history[i] == history[i - 1]).all()]
    if still:
        assert all((h == history[still[0]]).all() for h in history[still[0]:])


def test_stochastic_model_anchors():
    model = calibrate_stochastic_model()
    assert abs(model.probability(353.0) - 0.01) < 1e-9
    assert abs(model.probability(420.0) - 0.20) < 1e-9
    assert model.probability(650.0) > 0.999
    assert model.probability(353.0) < model.probability(400.0) < model.probability(420.0)
    assert model.k == pytest.approx(20.88, abs=0.01)
    assert model.i0 == pytest.approx(448.9, abs=0.1)


def test_schedule_shape():
    sched = AnnealSchedule()
    p = sched.probabilities(calibrate_stochastic_model())
    assert sched.sweep_count == 1340 and len(p) == 1340
    assert abs(p[0] - 0.20) < 1e-9 and abs(p[-1] - 0.01) < 1e-9
    assert np.all(np.diff(p) < 0)
    assert np.all(sched.currents() >= sched.i_stop)


def test_update_granularity(tri_weights):
    pts = random_points(2, 6)
    sched = AnnealSchedule(granularity="update")
    state = MacroState(weights_of(pts), SpinStorage.initial(6), macro_rng(0), sched)
    orders, pvals = state.step_plan()
    assert len(orders) == 1340 and orders[:6].tolist() == [1, 2, 3, 4, 5, 1]
    res = anneal(state)
    assert res.order_updates == 1340 and res.sweeps == 268


def _pair(points, spins, seed, **kw):
    w = weights_of(points, kw.pop("bits", 4))
    a = MacroState(w, spins.copy(), macro_rng(seed, (0, 1)), **kw)
    b = MacroState(w, spins.copy(), macro_rng(seed, (0, 1)), **kw)
    return a, b


@pytest.mark.parametrize("repair", ["swap", "descent"])
@pytest.mark.parametrize("mode", [CYCLE, PATH])
def test_kernel_matches_reference(mode, repair):
    for seed in range(3):
        pts = random_points(seed, 9)
        spins = SpinStorage.initial(9) if mode == CYCLE else SpinStorage.initial(9, PATH, 4, 1)
        a, b = _pair(pts, spins, seed, repair=repair)
        np.testing.assert_array_equal(anneal(a).tour, anneal_reference(b))


def test_kernel_matches_reference_with_leak():
    pts = random_points(5, 8)
    a, b = _pair(pts, SpinStorage.initial(8), 3, leak=0.05)
    np.testing.assert_array_equal(anneal(a).tour, anneal_reference(b))


def test_zero_leak_is_ideal():
    pts = random_points(6, 10)
    w = weights_of(pts)
    u = superpose(SpinStorage.initial(10), 3)
    np.testing.assert_array_equal(mac_currents(w, u, leak=0.0), mac_currents(w, u))
    ideal, _ = _pair(pts, SpinStorage.initial(10), 1)
    zero, _ = _pair(pts, SpinStorage.initial(10), 1, leak=0.0)
    np.testing.assert_array_equal(anneal(ideal).tour, anneal(zero).tour)


def test_anneal_is_deterministic():
    pts = random_points(8, 11)
    tours = [anneal(_pair(pts, SpinStorage.initial(11, PATH, 0, 10), 5)[0]).tour for _ in range(2)]
    np.testing.assert_array_equal(*tours)


def test_anneal_result_and_trace():
    pts = random_points(3, 12)
    dm = build_distance_matrix(pts)
    state = MacroState(weights_of(pts), SpinStorage.initial(12, PATH, 0, 11), macro_rng(0))
    res = anneal(state, dm)
    assert res.order_updates == 13400 and res.sweeps == 1340
    assert res.tour[0] == 0 and res.tour[-1] == 11
    assert sorted(res.tour.tolist()) == list(range(12))
    assert len(res.trace) == 1340
    step, current, p, length = res.trace[-1]
    assert step == 1339 and current == pytest.approx(353.0) and p == pytest.approx(0.01)
    assert length == tour_length(res.tour, dm, cyclic=False)


def test_streams_differ_per_key():
    a = macro_rng(0, (1, 2)).random(4)
    b = macro_rng(0, (1, 3)).random(4)
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, macro_rng(0, (1, 2)).random(4))


def test_state_size_mismatch(tri_weights):
    with pytest.raises(ValueError):
        MacroState(tri_weights, SpinStorage.initial(4), None)
    with pytest.raises(ValueError):
        MacroState(tri_weights, SpinStorage.initial(3), None, repair="greedy")


def test_eight_city_cycles_reach_optimum():
    """Annealed 8-city cycles: at least 80% optimal, none beyond 1.10x."""
    hits, worst = 0, 0.0
    for seed in range(50):
        dm = build_distance_matrix(random_points(1000 + seed, 8))
        opt, _ = held_karp_cycle(dm)
        state = MacroState(quantize_weights(dm, 4), SpinStorage.initial(8), macro_rng(seed))
        length = tour_length(anneal(state).tour, dm)
        hits += length == opt
        worst = max(worst, length / opt)
    assert hits >= 40 and worst <= 1.10, f"{hits}/50 optimal, worst ratio {worst:.3f}"
