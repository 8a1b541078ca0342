"""Closed-form latency and energy estimate for the macro workload of a solve.

One iteration is one order update (superpose, optimize, update).  Per-
iteration latency and energy come from circuit-level figures for a 12-city
macro at each weight precision.  Host-side phases (clustering, endpoint
fixing, merging) are taken from measured wall time, and weight mapping and
data transfer are reported as unmodeled rather than estimated.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class MacroCost:
    bits: int
    superpose_ns: int
    optimize_ns: int
    update_ns: int
    energy_per_iter_pj: float
    power_mw: float
    array_rows: int
    array_cols: int

    @property
    def iteration_ns(self) -> int:
        return self.superpose_ns + self.optimize_ns + self.update_ns


MACRO_COST_TABLE: dict[int, MacroCost] = {
    2: MacroCost(2, 3, 4, 2, 37.82, 4.202, 12, 36),
    3: MacroCost(3, 3, 4, 2, 45.3, 5.033, 12, 48),
    4: MacroCost(4, 3, 4, 2, 45.98, 5.11, 12, 60),
}

UNMODELED = "weight mapping and data transfer"


def macro_cost(bits: int) -> MacroCost:
    try:
        return MACRO_COST_TABLE[bits]
    except KeyError:
        raise ValueError(f"no cost data for {bits}-bit weights") from None


@dataclass
class LevelCost:
    level: int
    clusters: int
    batches: int
    latency_ns: float
    energy_pj: float
    order_updates: int


@dataclass
class CostReport:
    bits: int
    n_macros: int
    iteration_ns: int
    energy_per_iter_pj: float
    order_updates: int = 0
    macro_latency_ns: float = 0.0
    macro_energy_pj: float = 0.0
    levels: list[LevelCost] = field(default_factory=list)
    host_times_s: dict[str, float] = field(default_factory=dict)
    unmodeled: str = UNMODELED

    def to_dict(self, include_host: bool = True) -> dict:
        out = asdict(self)
        if not include_host:
            out.pop("host_times_s")
        return out


def estimate(trace, bits: int, n_macros: int) -> CostReport:
    """Macro latency and energy for the order updates recorded in ``trace``.

    Clusters of a level run in batches of ``n_macros``; each batch takes as
    long as its slowest cluster, bounded here by the slowest in the level.
    """
    cost = macro_cost(bits)
    if n_macros < 1:
        raise ValueError("need at least one macro")
    report = CostReport(bits, n_macros, cost.iteration_ns, cost.energy_per_iter_pj)
    for lv in trace.levels:
        ups = list(lv.order_updates)
        batches = math.ceil(len(ups) / n_macros)
        latency = batches * max(ups, default=0) * cost.iteration_ns
        total = sum(ups)
        energy = total * cost.energy_per_iter_pj
        report.levels.append(LevelCost(lv.level, len(ups), batches, latency, energy, total))
        report.order_updates += total
        report.macro_latency_ns += latency
        report.macro_energy_pj += energy
    report.host_times_s = {k: v for k, v in trace.phase_times.items() if k != "annealing"}
    return report
