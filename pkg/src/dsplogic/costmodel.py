"""Closed-form cycle-cost model of the DSP-array machine.

All quantities are exact: rational coefficients are kept as fractions
and every reported cycle count applies a single ceiling to the final
scalar, so the summed form of the address-traffic cost agrees with its
factored form. The compute-side terms use the same shapes as the
simulator's event counters, which allows exact integer cross-checking.

Cost structure for one kernel:

* address traffic: 3 addresses per DSP slot per sub-kernel, packed
  ``addrs_per_beat`` per bus beat and spread over k-1 memory banks,
  with a further URAM-to-BRAM hop at dual-port rate;
* input + opcode traffic: input words packed ``words_per_beat`` per
  beat, opcodes ``opcodes_per_beat`` per beat, sharing one bank, summed;
* compute: per batch, one copy per input word, then per sub-kernel a
  register-load group count, the execute rounds and half-rate
  write-back, then the packed output beats.

Data movement overlaps compute across kernels (double buffering), so
m kernels cost (m + 1) times the slower of the two stages.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .compiler import KernelProgram, MachineConfig


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class WorkloadStats:
    """Shape of one kernel's workload, independent of any netlist.

    Sub-kernel count may be given directly or derived from
    ``gates_per_level`` for the DSP budget in play; supplying both is
    checked for consistency at evaluation time. ``n_input_vectors``
    counts packed full-width batches, not raw vectors.
    """

    n_fanin: int
    n_po: int
    n_input_vectors: int = 1
    m: int = 1
    n_subkernels: int | None = None
    gates_per_level: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        for label, value in [
            ("n_fanin", self.n_fanin),
            ("n_po", self.n_po),
            ("n_input_vectors", self.n_input_vectors),
        ]:
            if value < 0:
                raise ValueError(f"{label} must be nonnegative")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n_subkernels is None and self.gates_per_level is None:
            raise ValueError("need n_subkernels or gates_per_level")
        if self.n_subkernels is not None and self.n_subkernels < 0:
            raise ValueError("n_subkernels must be nonnegative")

    def resolve_subkernels(self, n_dsp: int) -> int:
        if self.gates_per_level is None:
            return self.n_subkernels  # type: ignore[return-value]
        derived = subkernels_from_levels(self.gates_per_level, n_dsp)
        if self.n_subkernels is not None and self.n_subkernels != derived:
            raise ValueError(
                f"n_subkernels={self.n_subkernels} inconsistent with "
                f"gates_per_level at n_dsp={n_dsp} (expected {derived})"
            )
        return derived


def subkernels_from_levels(gates_per_level: Sequence[int], n_dsp: int) -> int:
    """Total sub-kernels: each level is cut into ceil(width / n_dsp) slices."""
    if n_dsp < 1:
        raise ValueError("n_dsp must be >= 1")
    return sum(ceil_div(width, n_dsp) for width in gates_per_level)


@dataclass(frozen=True)
class AddrMovementCost:
    alpha: Fraction
    beta: Fraction
    n_AM_DRAM_to_URAM_opt: int
    n_AM_URAM_to_BRAM_opt: int
    n_read_addr_mem_opt: int


@dataclass(frozen=True)
class ComputeCost:
    n_BRAM_to_DSP_regs_opt: int
    n_DSP_reg_to_BRAM_opt: int
    n_loop_subkernels: int
    n_copy_mem_in: int
    n_outputs: int
    n_compute_one_CK: int
    n_compute: int


@dataclass(frozen=True)
class CostBreakdown:
    """Every intermediate of the model, for reporting and balance analysis."""

    alpha: Fraction
    beta: Fraction
    n_AM_DRAM_to_URAM_opt: int
    n_AM_URAM_to_BRAM_opt: int
    n_read_addr_mem_opt: int
    n_read_inputs_opcode_mem_opt: int
    n_data_moves_opt: int
    n_BRAM_to_DSP_regs_opt: int
    n_DSP_reg_to_BRAM_opt: int
    n_loop_subkernels: int
    n_copy_mem_in: int
    n_outputs: int
    n_compute_one_CK: int
    n_compute: int
    n_cc_opt: int

    def report_items(self) -> list[tuple[str, object]]:
        return [(name, getattr(self, name)) for name in self.__dataclass_fields__]


def addr_movement_cost(stats: WorkloadStats, config: MachineConfig) -> AddrMovementCost:
    """Cycles to stage the per-sub-kernel address tables on chip."""
    lam = config.addrs_per_beat
    k = config.k_ddr_banks
    s = stats.resolve_subkernels(config.n_dsp)
    n = config.n_dsp
    alpha = Fraction(3, lam * (k - 1))
    beta = Fraction(k + 1, 2) * alpha
    return AddrMovementCost(
        alpha=alpha,
        beta=beta,
        n_AM_DRAM_to_URAM_opt=ceil_div(3 * s * n, lam * (k - 1)),
        n_AM_URAM_to_BRAM_opt=ceil_div(3 * s * n, 2 * lam * (k - 1)),
        n_read_addr_mem_opt=ceil_div(3 * (k + 1) * s * n, 2 * lam * (k - 1)),
    )


def input_opcode_cost(stats: WorkloadStats, config: MachineConfig) -> int:
    """Cycles to stream the input vectors and the opcode tables (one bank)."""
    s = stats.resolve_subkernels(config.n_dsp)
    return ceil_div(stats.n_input_vectors * stats.n_fanin, config.words_per_beat) + ceil_div(
        s * config.n_dsp, config.opcodes_per_beat
    )


def compute_cost(stats: WorkloadStats, config: MachineConfig) -> ComputeCost:
    """Cycle count of the compute stage, term for term as the machine runs it."""
    s = stats.resolve_subkernels(config.n_dsp)
    load = ceil_div(2 * config.n_dsp, config.addrs_per_beat)
    writeback = ceil_div(load, 2)
    loop = s * (load + config.n_exe_logic_ops + writeback)
    outputs = ceil_div(stats.n_po, config.words_per_beat)
    one_ck = stats.n_fanin + loop + outputs
    return ComputeCost(
        n_BRAM_to_DSP_regs_opt=load,
        n_DSP_reg_to_BRAM_opt=writeback,
        n_loop_subkernels=loop,
        n_copy_mem_in=stats.n_fanin,
        n_outputs=outputs,
        n_compute_one_CK=one_ck,
        n_compute=stats.n_input_vectors * one_ck,
    )


def total_cost(stats: WorkloadStats, config: MachineConfig) -> CostBreakdown:
    """Assemble the full breakdown for m pipelined kernels of this shape."""
    addr = addr_movement_cost(stats, config)
    inputs_opcodes = input_opcode_cost(stats, config)
    compute = compute_cost(stats, config)
    data_moves = max(inputs_opcodes, addr.n_read_addr_mem_opt)
    return CostBreakdown(
        alpha=addr.alpha,
        beta=addr.beta,
        n_AM_DRAM_to_URAM_opt=addr.n_AM_DRAM_to_URAM_opt,
        n_AM_URAM_to_BRAM_opt=addr.n_AM_URAM_to_BRAM_opt,
        n_read_addr_mem_opt=addr.n_read_addr_mem_opt,
        n_read_inputs_opcode_mem_opt=inputs_opcodes,
        n_data_moves_opt=data_moves,
        n_BRAM_to_DSP_regs_opt=compute.n_BRAM_to_DSP_regs_opt,
        n_DSP_reg_to_BRAM_opt=compute.n_DSP_reg_to_BRAM_opt,
        n_loop_subkernels=compute.n_loop_subkernels,
        n_copy_mem_in=compute.n_copy_mem_in,
        n_outputs=compute.n_outputs,
        n_compute_one_CK=compute.n_compute_one_CK,
        n_compute=compute.n_compute,
        n_cc_opt=(stats.m + 1) * max(data_moves, compute.n_compute),
    )


def stage_costs(stats: WorkloadStats, config: MachineConfig) -> tuple[int, int]:
    """(data movement, compute) for one kernel, the two pipeline stages."""
    addr = addr_movement_cost(stats, config)
    data_moves = max(input_opcode_cost(stats, config), addr.n_read_addr_mem_opt)
    return data_moves, compute_cost(stats, config).n_compute


def sweep(
    stats: WorkloadStats, config: MachineConfig, n_dsp_values: Iterable[int]
) -> Iterator[tuple[int, int, int, int]]:
    """Rows of (n_dsp, n_data_moves, n_compute, n_cc) over a DSP budget range."""
    from .compiler import with_n_dsp

    for n_dsp in n_dsp_values:
        cfg = with_n_dsp(config, n_dsp)
        breakdown = total_cost(stats, cfg)
        yield n_dsp, breakdown.n_data_moves_opt, breakdown.n_compute, breakdown.n_cc_opt


def workload_from_program(
    program: KernelProgram, n_input_vectors: int = 1, m: int = 1
) -> WorkloadStats:
    """Workload shape of a compiled program (level widths recovered from it)."""
    return WorkloadStats(
        n_fanin=program.n_fanin,
        n_po=program.n_po,
        n_input_vectors=n_input_vectors,
        m=m,
        gates_per_level=program.gates_per_level(),
    )


def parse_workload_stats(text: str) -> WorkloadStats:
    """Parse a key=value stats file.

    Recognized keys: n_fanin, n_po, n_input_vectors, m, n_subkernels,
    gates_per_level (comma-separated). Blank lines and # comments are
    ignored.
    """
    fields: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"stats line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "gates_per_level":
                fields[key] = tuple(int(part) for part in value.split(",") if part.strip())
            elif key in ("n_fanin", "n_po", "n_input_vectors", "m", "n_subkernels"):
                fields[key] = int(value)
            else:
                raise ValueError(f"stats line {lineno}: unknown key {key!r}")
        except ValueError as err:
            raise ValueError(f"stats line {lineno}: {err}") from err
    try:
        return WorkloadStats(**fields)  # type: ignore[arg-type]
    except (TypeError, ValueError) as err:
        raise ValueError(str(err)) from err
