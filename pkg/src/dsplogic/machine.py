"""Functional simulator for the DSP-array machine.

Executes a compiled program over bit-packed words: lane j of every
buffer word carries input vector j, so one pass evaluates up to
``lane_width`` input vectors at once. Alongside the functional result
the run counts the micro events that determine its cycle cost:

* word copies filling the replicated input buffers (one per primary input),
* register-load bus groups (the 2*n_dsp input addresses of a sub-kernel,
  consumed ``addrs_per_beat`` at a time, padding included),
* execute rounds per sub-kernel,
* write-back groups (the n_dsp result addresses at the same bus width,
  halved by the dual-ported local memory),
* output beats (primary outputs packed ``words_per_beat`` per beat).

The counters are accumulated by the run loop itself so they can be
checked for exact equality against the closed-form cost model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .compiler import KernelProgram, Opcode

_UNARY = (Opcode.NOT, Opcode.BUF)


class SimulationError(Exception):
    pass


@dataclass(frozen=True)
class BatchInput:
    """Up to lane_width input vectors, one per bit lane, packed per input net."""

    words: Mapping[str, int]
    n_lanes: int

    @classmethod
    def from_assignments(cls, assignments: Sequence[Mapping[str, int]]) -> "BatchInput":
        if not assignments:
            raise SimulationError("batch must contain at least one vector")
        names = set(assignments[0])
        words = {name: 0 for name in names}
        for lane, assignment in enumerate(assignments):
            if set(assignment) != names:
                raise SimulationError("all vectors must assign the same inputs")
            for name, bit in assignment.items():
                words[name] |= (int(bit) & 1) << lane
        return cls(words, len(assignments))

    @classmethod
    def from_bits(cls, bits: Mapping[str, Sequence[int]]) -> "BatchInput":
        lengths = {len(v) for v in bits.values()}
        if len(lengths) != 1:
            raise SimulationError("all per-input bit vectors must share one length")
        (n_lanes,) = lengths
        if n_lanes == 0:
            raise SimulationError("batch must contain at least one vector")
        words = {
            name: sum((int(bit) & 1) << lane for lane, bit in enumerate(vec))
            for name, vec in bits.items()
        }
        return cls(words, n_lanes)


@dataclass
class MachineState:
    """Data buffer plus the event counters of one run."""

    buffer: list[int | None]
    n_copy_mem_in: int = 0
    n_bram_to_dsp_regs: int = 0
    n_exe: int = 0
    n_dsp_reg_to_bram: int = 0
    n_outputs: int = 0


@dataclass(frozen=True)
class SimResult:
    """Per-output lane vectors plus event-derived cycle tallies.

    The event fields are per packed batch (every batch of one program
    charges the same events); ``n_compute`` totals them over all
    batches of the run.
    """

    outputs: dict[str, tuple[int, ...]]
    n_vectors: int
    n_batches: int
    n_copy_mem_in: int
    n_bram_to_dsp_regs: int
    n_dsp_reg_to_bram: int
    n_loop_subkernels: int
    n_outputs: int
    n_compute_one_ck: int
    n_compute: int


def _word_ops(mask: int):
    return {
        Opcode.AND: lambda a, b: a & b,
        Opcode.OR: lambda a, b: a | b,
        Opcode.XOR: lambda a, b: a ^ b,
        Opcode.NAND: lambda a, b: mask ^ (a & b),
        Opcode.NOR: lambda a, b: mask ^ (a | b),
        Opcode.XNOR: lambda a, b: mask ^ a ^ b,
        Opcode.NOT: lambda a, b: mask ^ a,
        Opcode.BUF: lambda a, b: a,
    }


class _CompiledKernel:
    """Per-program execution plan: padding stripped, group sizes fixed."""

    def __init__(self, program: KernelProgram):
        config = program.config
        self.mask = (1 << config.lane_width) - 1
        self.lane_width = config.lane_width
        self.n_exe_logic_ops = config.n_exe_logic_ops
        self.buffer_size = program.buffer_size
        self.pi_slots = [(s.net, s.index) for s in program.pi_slots()]
        self.po_slots = [(s.net, s.index) for s in program.po_slots()]
        ops = _word_ops(self.mask)
        lam = config.addrs_per_beat
        self.subkernels = []
        for sk in program.subkernels:
            load_groups = len(range(0, len(sk.in_addrs), lam))
            wb_groups = len(range(0, len(sk.out_addrs), lam))
            body = [
                (sk.out_addrs[p], sk.in_addrs[2 * p], sk.in_addrs[2 * p + 1], ops[op])
                for p, op in enumerate(sk.opcodes)
                if op is not Opcode.NOP
            ]
            self.subkernels.append((load_groups, wb_groups, body))
        self.output_beats = len(range(0, len(self.po_slots), config.words_per_beat))

    def run_batch(self, words: Mapping[str, int]) -> tuple[list[int], MachineState]:
        state = MachineState(buffer=[None] * self.buffer_size)
        buf = state.buffer
        buf[0] = 0
        buf[1] = self.mask
        for name, slot in self.pi_slots:
            buf[slot] = words[name] & self.mask
            state.n_copy_mem_in += 1
        for load_groups, wb_groups, body in self.subkernels:
            state.n_bram_to_dsp_regs += load_groups
            for out, a, b, fn in body:
                buf[out] = fn(buf[a], buf[b])
            state.n_exe += self.n_exe_logic_ops
            state.n_dsp_reg_to_bram += wb_groups
        state.n_outputs = self.output_beats
        if buf[0] != 0 or buf[1] != self.mask:
            raise SimulationError("constant buffer slots were overwritten")
        out_words = []
        for _, slot in self.po_slots:
            word = buf[slot]
            if word is None:
                raise SimulationError(f"primary output slot {slot} was never written")
            out_words.append(word)
        return out_words, state


def simulate(program: KernelProgram, batch: BatchInput) -> SimResult:
    """Run one packed batch; outputs align lane-for-lane with the inputs."""
    return simulate_batches(program, [batch])


def simulate_stream(
    program: KernelProgram, vectors: Sequence[Mapping[str, int]]
) -> SimResult:
    """Pack raw input vectors into full-width batches and run them in order."""
    width = program.config.lane_width
    batches = [
        BatchInput.from_assignments(vectors[start : start + width])
        for start in range(0, len(vectors), width)
    ]
    return simulate_batches(program, batches)


def simulate_batches(program: KernelProgram, batches: Sequence[BatchInput]) -> SimResult:
    if not batches:
        raise SimulationError("nothing to simulate")
    program.validate()
    kernel = _CompiledKernel(program)
    pi_names = {name for name, _ in kernel.pi_slots}

    lanes_out: dict[str, list[int]] = {name: [] for name, _ in kernel.po_slots}
    n_vectors = 0
    per_batch: MachineState | None = None
    for batch in batches:
        if set(batch.words) != pi_names:
            raise SimulationError(
                f"batch inputs {sorted(batch.words)} do not match program inputs {sorted(pi_names)}"
            )
        if not 1 <= batch.n_lanes <= kernel.lane_width:
            raise SimulationError(
                f"batch of {batch.n_lanes} vectors exceeds the {kernel.lane_width}-lane word"
            )
        out_words, state = kernel.run_batch(batch.words)
        for (name, _), word in zip(kernel.po_slots, out_words):
            lanes_out[name].extend((word >> lane) & 1 for lane in range(batch.n_lanes))
        n_vectors += batch.n_lanes
        per_batch = state

    assert per_batch is not None
    n_loop = per_batch.n_bram_to_dsp_regs + per_batch.n_exe + per_batch.n_dsp_reg_to_bram
    one_ck = per_batch.n_copy_mem_in + n_loop + per_batch.n_outputs
    return SimResult(
        outputs={name: tuple(bits) for name, bits in lanes_out.items()},
        n_vectors=n_vectors,
        n_batches=len(batches),
        n_copy_mem_in=per_batch.n_copy_mem_in,
        n_bram_to_dsp_regs=per_batch.n_bram_to_dsp_regs,
        n_dsp_reg_to_bram=per_batch.n_dsp_reg_to_bram,
        n_loop_subkernels=n_loop,
        n_outputs=per_batch.n_outputs,
        n_compute_one_ck=one_ck,
        n_compute=len(batches) * one_ck,
    )


def pipeline_schedule(stage_costs: Sequence[tuple[int, int]]) -> int:
    """Total cycles for m kernels under two-stage double buffering.

    Each entry is (data_movement, compute) for one kernel; the pipeline
    is paced by its slowest stage, so the total is (m + 1) times the
    worst stage time seen anywhere.
    """
    if not stage_costs:
        raise ValueError("need at least one kernel")
    worst = 0
    for data_moves, compute in stage_costs:
        if data_moves < 0 or compute < 0:
            raise ValueError("stage costs must be nonnegative")
        worst = max(worst, data_moves, compute)
    return (len(stage_costs) + 1) * worst


# ---------------------------------------------------------------------------
# Vector files: one line per raw vector, 0/1 chars in declaration order.
# ---------------------------------------------------------------------------


def read_vector_lines(text: str, names: Sequence[str]) -> list[dict[str, int]]:
    vectors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if len(line) != len(names) or set(line) - {"0", "1"}:
            raise SimulationError(
                f"vector line {lineno}: expected {len(names)} chars of 0/1, got {raw!r}"
            )
        vectors.append({name: int(ch) for name, ch in zip(names, line)})
    return vectors


def format_vector_lines(result: SimResult, names: Sequence[str]) -> str:
    lines = []
    for i in range(result.n_vectors):
        lines.append("".join(str(result.outputs[name][i]) for name in names))
    return "\n".join(lines) + ("\n" if lines else "")
