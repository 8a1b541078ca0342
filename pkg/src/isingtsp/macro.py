"""Behavioral model of one crossbar Ising macro solving a small TSP.

The macro stores quantized inverse distances in its weight partitions and
a one-hot city-by-order assignment in its spin storage.  One *order
update* optimizes a single visiting order:

    superpose -> MAC currents -> stochastic mask -> argmax -> spin update

and a *sweep* runs one order update for every optimizable order.  The
stochastic mask comes from SOT-MRAM switching whose probability follows a
sigmoid in the write current; annealing lowers the write current linearly.

Permutation repair is a swap: the chosen city's old order receives the
displaced city.  ``repair="descent"`` adds a second read at the vacated
order and keeps the swap only if the summed conductance along the path
does not drop.

Two execution paths exist.  :func:`sweep` composes the individual
operations and is meant for inspection and testing; :func:`anneal` runs a
compiled kernel that draws random numbers in the same order, so both give
identical tours for the same generator state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from .distance import DistanceMatrix, WeightMatrix

CYCLE = "cycle"
PATH = "path"
REPAIR_POLICIES = ("swap", "descent")


class SpinUpdateError(ValueError):
    pass


# -- stochastic switching ----------------------------------------------------


@dataclass(frozen=True)
class StochasticModel:
    """Logistic switching probability of the SOT device versus write current (uA)."""

    i0: float
    k: float
    i_stoch_lo: float = 300.0
    i_det: float = 650.0

    def probability(self, current):
        return 1.0 / (1.0 + np.exp(-(np.asarray(current, dtype=np.float64) - self.i0) / self.k))


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def calibrate_stochastic_model(
    anchors=((353.0, 0.01), (420.0, 0.20)),
) -> StochasticModel:
    """Fit the logistic curve exactly through two (current, probability) anchors."""
    (i_a, p_a), (i_b, p_b) = anchors
    k = (i_b - i_a) / (_logit(p_b) - _logit(p_a))
    i0 = i_b - k * _logit(p_b)
    model = StochasticModel(i0=i0, k=k)
    if model.probability(model.i_det) <= 0.999:
        raise ValueError("fitted curve is not deterministic at the top of the range")
    return model


@dataclass(frozen=True)
class AnnealSchedule:
    """Linear write-current ramp from ``i_start`` down to ``i_stop``.

    ``granularity`` says what one schedule step is: a full ``"sweep"`` over
    all optimizable orders, or a single order ``"update"``.  The step count
    is ``round((i_start - i_stop) / i_step)`` and the ramp hits both end
    currents exactly, so the effective decrement is
    ``(i_start - i_stop) / (steps - 1)``.
    """

    i_start: float = 420.0
    i_stop: float = 353.0
    i_step: float = 0.05
    granularity: str = "sweep"

    def __post_init__(self):
        if self.granularity not in ("sweep", "update"):
            raise ValueError(f"granularity must be 'sweep' or 'update', not {self.granularity!r}")
        if self.i_stop > self.i_start or self.i_step <= 0:
            raise ValueError("schedule must decrease")

    @property
    def sweep_count(self) -> int:
        return int(round((self.i_start - self.i_stop) / self.i_step))

    def currents(self) -> np.ndarray:
        return np.linspace(self.i_start, self.i_stop, self.sweep_count)

    def probabilities(self, model: StochasticModel) -> np.ndarray:
        return model.probability(self.currents())


DEFAULT_SCHEDULE = AnnealSchedule()


# -- spin storage ------------------------------------------------------------


@dataclass
class SpinStorage:
    """Visiting order of a sub-problem; ``assign[order]`` is a local city index.

    In path mode the first and last orders hold the fixed entry and exit.
    In cycle mode order 0 is pinned to its initial city.
    """

    assign: np.ndarray
    mode: str = CYCLE
    fixed_first: int | None = None
    fixed_last: int | None = None

    def __post_init__(self):
        self.assign = np.asarray(self.assign, dtype=np.int64)
        n = len(self.assign)
        if self.mode not in (CYCLE, PATH):
            raise ValueError(f"unknown mode {self.mode!r}")
        if sorted(self.assign.tolist()) != list(range(n)):
            raise SpinUpdateError("assignment is not a permutation")
        if self.mode == CYCLE:
            if self.fixed_first is None:
                self.fixed_first = int(self.assign[0])
            self.fixed_last = None
        if self.assign[0] != self.fixed_first:
            raise SpinUpdateError("order 0 must hold the fixed first city")
        if self.mode == PATH and self.assign[-1] != self.fixed_last:
            raise SpinUpdateError("last order must hold the fixed last city")

    @classmethod
    def initial(cls, n: int, mode: str = CYCLE, entry: int | None = None, exit: int | None = None):
        """Input-order assignment, with entry/exit pre-placed in path mode."""
        if mode == CYCLE:
            return cls(np.arange(n), CYCLE)
        if entry is None or exit is None or entry == exit:
            raise ValueError("path mode needs distinct entry and exit")
        middle = [c for c in range(n) if c not in (entry, exit)]
        return cls(np.array([entry, *middle, exit]), PATH, entry, exit)

    @property
    def n(self) -> int:
        return len(self.assign)

    @property
    def pinned(self) -> tuple[int, ...]:
        if self.mode == PATH:
            return (self.fixed_first, self.fixed_last)
        return (self.fixed_first,)

    @property
    def optimizable_orders(self) -> range:
        return range(1, self.n - 1) if self.mode == PATH else range(1, self.n)

    def neighbors(self, order: int) -> tuple[int, int]:
        if order not in self.optimizable_orders:
            raise SpinUpdateError(f"order {order} is not optimizable")
        return int(self.assign[order - 1]), int(self.assign[(order + 1) % self.n])

    def copy(self) -> "SpinStorage":
        return replace(self, assign=self.assign.copy())

    def spin_matrix(self) -> np.ndarray:
        """One-hot sigma[city, order]."""
        sigma = np.zeros((self.n, self.n), dtype=np.int8)
        sigma[self.assign, np.arange(self.n)] = 1
        return sigma


# -- the five macro operations ----------------------------------------------


def superpose(spins: SpinStorage, order: int) -> np.ndarray:
    """Binary OR of the one-hot columns at ``order - 1`` and ``order + 1``."""
    prev, nxt = spins.neighbors(order)
    u = np.zeros(spins.n, dtype=np.int64)
    u[prev] = 1
    u[nxt] = 1
    return u


def effective_weights(weights: WeightMatrix, leak: float = 0.0) -> np.ndarray:
    """Cross-point conductances, with HRS leakage added off the diagonal when ``leak > 0``."""
    if leak == 0.0:
        return weights.w
    w = weights.w + leak * weights.full_scale
    np.fill_diagonal(w, 0.0)
    return w


def mac_currents(weights: WeightMatrix, u, leak: float = 0.0) -> np.ndarray:
    """Column currents ``d_hat[x] = sum_k w[x, k] * u[k]``; larger means closer."""
    u = np.asarray(u)
    if u.shape != (weights.n,):
        raise ValueError(f"input vector has shape {u.shape}, expected ({weights.n},)")
    return effective_weights(weights, leak) @ u


def draw_mask_bits(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Raw switching outcome of the n stochastic units, before the empty-set rule."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return rng.random(n) < p


def stochastic_mask(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Boolean mask of columns allowed through; all of them if no unit switched."""
    bits = draw_mask_bits(n, p, rng)
    if not bits.any():
        bits[:] = True
    return bits


def candidate_set(spins: SpinStorage, order: int, mask) -> np.ndarray:
    """Cities eligible at ``order``: the mask minus both neighbours and pinned cities.

    Falls back to every eligible city when the masked set is empty.
    """
    valid = np.ones(spins.n, dtype=bool)
    valid[list(spins.neighbors(order))] = False
    valid[list(spins.pinned)] = False
    if not valid.any():
        raise SpinUpdateError(f"no valid candidate for order {order} (n={spins.n})")
    cand = valid & np.asarray(mask, dtype=bool)
    return cand if cand.any() else valid


def argmax_select(d_hat, candidates) -> int:
    """Index of the largest current among candidates; lowest index on ties."""
    cand = np.asarray(candidates, dtype=bool)
    if not cand.any():
        raise ValueError("empty candidate set")
    masked = np.where(cand, np.asarray(d_hat, dtype=np.float64), -np.inf)
    return int(np.argmax(masked))


def update_spin(spins: SpinStorage, order: int, city: int) -> SpinStorage:
    """Write ``city`` into ``order``; its previous order receives the displaced city."""
    if order not in spins.optimizable_orders:
        raise SpinUpdateError(f"order {order} is not optimizable")
    if city in spins.pinned:
        raise SpinUpdateError(f"city {city} is pinned")
    if city in spins.neighbors(order):
        raise SpinUpdateError(f"city {city} is a neighbour of order {order}")
    out = spins.copy()
    old = int(np.flatnonzero(out.assign == city)[0])
    if old != order:
        out.assign[old] = out.assign[order]
        out.assign[order] = city
    return out


def swap_gain(weights: WeightMatrix, spins: SpinStorage, order: int, city: int, leak: float = 0.0) -> float:
    """Change in summed neighbour conductance if ``city`` is swapped into ``order``.

    Needs a second superpose/MAC read at the order ``city`` currently holds.
    """
    old = int(np.flatnonzero(spins.assign == city)[0])
    if old == order:
        return 0.0
    here = int(spins.assign[order])
    d_o = mac_currents(weights, superpose(spins, order), leak)
    d_q = mac_currents(weights, superpose(spins, old), leak)
    return float(d_o[city] - d_o[here] + d_q[here] - d_q[city])


# -- macro state, sweeps and annealing --------------------------------------


@dataclass
class MacroState:
    weights: WeightMatrix
    spins: SpinStorage
    rng: np.random.Generator
    schedule: AnnealSchedule = DEFAULT_SCHEDULE
    stoch: StochasticModel = field(default_factory=calibrate_stochastic_model)
    leak: float = 0.0
    repair: str = "swap"

    def __post_init__(self):
        if self.weights.n != self.spins.n:
            raise ValueError("weight matrix and spin storage sizes differ")
        if self.repair not in REPAIR_POLICIES:
            raise ValueError(f"repair must be one of {REPAIR_POLICIES}, not {self.repair!r}")

    @property
    def crossbar_shape(self) -> tuple[int, int]:
        n = self.weights.n
        return n, n * (self.weights.bits + 1)

    @property
    def order_updates_per_sweep(self) -> int:
        return len(self.spins.optimizable_orders)

    def step_plan(self) -> tuple[np.ndarray, np.ndarray]:
        """(order, probability) for every order update of a full anneal."""
        p = self.schedule.probabilities(self.stoch)
        orders = np.asarray(self.spins.optimizable_orders, dtype=np.int64)
        if self.schedule.granularity == "sweep":
            return np.tile(orders, len(p)), np.repeat(p, len(orders))
        return np.resize(orders, len(p)), p


def order_update(state: MacroState, order: int, p: float) -> int:
    """One superpose/MAC/mask/argmax/update cycle; returns the chosen city."""
    u = superpose(state.spins, order)
    d_hat = mac_currents(state.weights, u, state.leak)
    mask = stochastic_mask(state.spins.n, p, state.rng)
    cand = candidate_set(state.spins, order, mask)
    city = argmax_select(d_hat, cand)
    if state.repair == "descent" and swap_gain(state.weights, state.spins, order, city, state.leak) < 0:
        return city
    state.spins = update_spin(state.spins, order, city)
    return city


def sweep(state: MacroState, p: float) -> MacroState:
    for order in state.spins.optimizable_orders:
        order_update(state, order, p)
    return state


@numba.njit(cache=True, nogil=True)
def _anneal_kernel(w, assign, is_path, order_seq, pvals, uniforms, d, record_every, descent):
    n = assign.shape[0]
    pos = np.empty(n, np.int64)
    for i in range(n):
        pos[assign[i]] = i
    pin_a = assign[0]
    pin_b = assign[n - 1] if is_path else -1
    steps = order_seq.shape[0]
    n_rec = steps // record_every if record_every > 0 else 0
    lengths = np.zeros(n_rec, np.int64)
    for t in range(steps):
        o = order_seq[t]
        prev = assign[o - 1]
        nxt = assign[(o + 1) % n]
        p = pvals[t]
        best = -1
        best_val = -np.inf
        for k in range(n):
            if k == prev or k == nxt or k == pin_a or k == pin_b:
                continue
            if uniforms[t, k] < p:
                v = w[k, prev] + w[k, nxt]
                if v > best_val:
                    best_val = v
                    best = k
        if best < 0:
            for k in range(n):
                if k == prev or k == nxt or k == pin_a or k == pin_b:
                    continue
                v = w[k, prev] + w[k, nxt]
                if v > best_val:
                    best_val = v
                    best = k
        cur = pos[best]
        if cur != o and descent:
            other = assign[o]
            a = assign[cur - 1]
            b = assign[(cur + 1) % n]
            gain = w[best, prev] + w[best, nxt] - w[other, prev] - w[other, nxt]
            gain += w[other, a] + w[other, b] - w[best, a] - w[best, b]
            if gain < 0:
                cur = o
        if cur != o:
            other = assign[o]
            assign[o] = best
            assign[cur] = other
            pos[best] = o
            pos[other] = cur
        if n_rec > 0 and (t + 1) % record_every == 0:
            total = 0
            for i in range(n - 1):
                total += d[assign[i], assign[i + 1]]
            if not is_path:
                total += d[assign[n - 1], assign[0]]
            lengths[(t + 1) // record_every - 1] = total
    return lengths


@dataclass
class AnnealResult:
    tour: np.ndarray
    order_updates: int
    sweeps: int
    trace: list[tuple[int, float, float, int]] | None = None


def anneal(state: MacroState, dm: DistanceMatrix | None = None) -> AnnealResult:
    """Run the full write-current ramp and read the tour out of spin storage.

    With ``dm`` given, the tour length after every schedule step is
    recorded as ``(step, write_current, p, length)`` rows.
    """
    orders, pvals = state.step_plan()
    steps = len(orders)
    uniforms = state.rng.random((steps, state.spins.n))
    w = np.asarray(effective_weights(state.weights, state.leak), dtype=np.float64)
    assign = state.spins.assign.copy()
    per = state.order_updates_per_sweep if state.schedule.granularity == "sweep" else 1
    if dm is not None:
        d = dm.d.astype(np.int64)
        record_every = per
    else:
        d = np.zeros((1, 1), np.int64)
        record_every = 0
    lengths = _anneal_kernel(
        w, assign, state.spins.mode == PATH, orders, pvals, uniforms, d, record_every, state.repair == "descent"
    )
    state.spins = SpinStorage(assign, state.spins.mode, state.spins.fixed_first, state.spins.fixed_last)
    trace = None
    if dm is not None:
        currents = state.schedule.currents()
        probs = state.stoch.probability(currents)
        trace = [(i, float(currents[i]), float(probs[i]), int(lengths[i])) for i in range(len(lengths))]
    return AnnealResult(
        tour=assign.copy(),
        order_updates=steps,
        sweeps=steps // state.order_updates_per_sweep,
        trace=trace,
    )


def anneal_reference(state: MacroState) -> np.ndarray:
    """Same ramp as :func:`anneal`, one :func:`order_update` at a time."""
    orders, pvals = state.step_plan()
    for order, p in zip(orders, pvals):
        order_update(state, int(order), float(p))
    return state.spins.assign.copy()


def macro_rng(seed: int, key=()) -> np.random.Generator:
    """Independent generator for the macro identified by ``key`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))
