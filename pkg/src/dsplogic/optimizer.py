"""Network-level DSP-count selection.

A network is a stack of layers, each applying ``n_filter`` copies of
one kernel shape. For a candidate DSP budget the per-filter stage cost
is the slower of data movement and compute; layer costs are summed,
divided by the number of kernels running in parallel, and topped up
with the worst single-filter fill time.

The cost curve over n_dsp is piecewise: within any interval where no
level's slice count changes, every term is nondecreasing in n_dsp, so
the interval's left edge dominates it. Exhaustive mode therefore scans
only those left edges ("breakpoints") and still returns the true
minimum; binary mode does ternary interval narrowing and may land on a
nearby plateau instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

from .compiler import MachineConfig, deserialize, with_n_dsp
from .costmodel import WorkloadStats, ceil_div, stage_costs, workload_from_program


@dataclass(frozen=True)
class LayerSpec:
    """Filter count plus the per-filter workload shape."""

    n_filter: int
    stats: WorkloadStats

    def __post_init__(self) -> None:
        if self.n_filter < 1:
            raise ValueError("n_filter must be >= 1")


@dataclass(frozen=True)
class NetworkSpec:
    layers: tuple[LayerSpec, ...]
    n_dsp_budget: int
    n_parallel_factor: int = 1

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("network needs at least one layer")
        if self.n_dsp_budget < 1 or self.n_parallel_factor < 1:
            raise ValueError("n_dsp_budget and n_parallel_factor must be >= 1")


@dataclass(frozen=True)
class OptimizeResult:
    n_dsp: int
    cycles: int
    mode: str


def network_cost(
    network: NetworkSpec, n_dsp: int, base_config: MachineConfig | None = None
) -> int:
    """Total cycles to run the whole network at one DSP budget."""
    if not 1 <= n_dsp <= network.n_dsp_budget:
        raise ValueError(f"n_dsp must lie in [1, {network.n_dsp_budget}]")
    config = with_n_dsp(base_config or MachineConfig(n_dsp=1), n_dsp)
    total = 0
    worst = 0
    for layer in network.layers:
        data_moves, compute = stage_costs(layer.stats, config)
        cost = max(data_moves, compute)
        total += layer.n_filter * cost
        worst = max(worst, cost)
    return ceil_div(total, network.n_parallel_factor) + worst


def _edges_for_width(width: int, limit: int) -> list[int]:
    """n_dsp values in [1, limit] where ceil(width / n_dsp) drops."""
    edges = []
    n = 1
    while n <= limit:
        edges.append(n)
        value = ceil_div(width, n)
        if value == 1:
            break
        n = (width - 1) // (value - 1) + 1
    return edges


def breakpoints(network: NetworkSpec) -> list[int]:
    """Candidate budgets: left edges of the cost curve's flat slice regions."""
    points = {1}
    for layer in network.layers:
        for width in layer.stats.gates_per_level or ():
            points.update(_edges_for_width(width, network.n_dsp_budget))
    return sorted(points)


def optimize_dsp(
    network: NetworkSpec,
    mode: str = "exhaustive",
    base_config: MachineConfig | None = None,
) -> OptimizeResult:
    """Pick the DSP budget minimizing network cost (smallest budget on ties)."""
    cache: dict[int, int] = {}

    def cost(n: int) -> int:
        if n not in cache:
            cache[n] = network_cost(network, n, base_config)
        return cache[n]

    if mode == "exhaustive":
        best = min(breakpoints(network), key=lambda n: (cost(n), n))
        return OptimizeResult(best, cost(best), mode)
    if mode == "binary":
        lo, hi = 1, network.n_dsp_budget
        while hi - lo > 2:
            third = (hi - lo) // 3
            m1 = lo + third
            m2 = hi - third
            if cost(m1) <= cost(m2):
                hi = m2 - 1
            else:
                lo = m1 + 1
        best = min(range(lo, hi + 1), key=lambda n: (cost(n), n))
        return OptimizeResult(best, cost(best), mode)
    raise ValueError(f"unknown mode {mode!r}")


def load_network_spec(text: str, program_loader: Callable[[str], str] | None = None) -> NetworkSpec:
    """Parse a network description document.

    JSON shape::

        {"n_dsp_budget": 2048, "n_parallel_factor": 1,
         "layers": [
           {"n_filter": 512, "n_fanin": 64, "n_po": 4,
            "n_input_vectors": 16, "gates_per_level": [300, 120, 40]},
           {"n_filter": 8, "program": "filter.kp.json", "n_input_vectors": 1}
         ]}

    A layer may reference a compiled program file instead of inline
    stats; ``program_loader`` maps that reference to the file's text.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"network spec is not valid JSON: {err}") from err
    if not isinstance(doc, dict) or not isinstance(doc.get("layers"), list):
        raise ValueError("network spec must be an object with a 'layers' array")
    layers = []
    for i, entry in enumerate(doc["layers"]):
        if not isinstance(entry, dict):
            raise ValueError(f"layer {i} must be an object")
        n_filter = entry.get("n_filter", 1)
        n_input_vectors = entry.get("n_input_vectors", 1)
        if "program" in entry:
            if program_loader is None:
                raise ValueError(f"layer {i} references a program but no loader was provided")
            program = deserialize(program_loader(entry["program"]))
            stats = workload_from_program(program, n_input_vectors=n_input_vectors)
        else:
            try:
                stats = WorkloadStats(
                    n_fanin=entry["n_fanin"],
                    n_po=entry["n_po"],
                    n_input_vectors=n_input_vectors,
                    n_subkernels=entry.get("n_subkernels"),
                    gates_per_level=tuple(entry["gates_per_level"])
                    if "gates_per_level" in entry
                    else None,
                )
            except (KeyError, TypeError, ValueError) as err:
                raise ValueError(f"layer {i}: {err}") from err
        layers.append(LayerSpec(n_filter=n_filter, stats=stats))
    try:
        return NetworkSpec(
            layers=tuple(layers),
            n_dsp_budget=doc.get("n_dsp_budget", 1),
            n_parallel_factor=doc.get("n_parallel_factor", 1),
        )
    except (TypeError, ValueError) as err:
        raise ValueError(str(err)) from err
