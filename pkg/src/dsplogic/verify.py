"""End-to-end verification harness.

Runs a compiled program on the machine simulator and compares every
output lane against direct evaluation of the source netlist. Bulk runs
use the packed multi-assignment evaluator for speed; the scalar
evaluator defines the semantics and the two are cross-checked in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .compiler import KernelProgram, MachineConfig, compile_netlist
from .machine import simulate_stream
from .netlist import (
    GateNetlist,
    exhaustive_assignments,
    random_assignments,
    reference_eval_packed,
)

MAX_REPORTED_MISMATCHES = 20


@dataclass(frozen=True)
class Mismatch:
    vector_index: int
    output: str
    expected: int
    got: int


@dataclass(frozen=True)
class VerifyReport:
    n_vectors: int
    n_mismatches: int
    mismatches: tuple[Mismatch, ...]
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.n_mismatches == 0 and self.error is None


def verify_program(
    netlist: GateNetlist,
    program: KernelProgram,
    vectors: Sequence[Mapping[str, int]],
) -> VerifyReport:
    """Compare simulator outputs with the netlist oracle on given vectors.

    Any exception out of program validation or simulation counts as a
    failure with the message recorded, so corrupted programs are caught
    even when they cannot run at all.
    """
    if not vectors:
        raise ValueError("need at least one vector")
    n = len(vectors)
    packed_inputs = {
        name: sum((v[name] & 1) << i for i, v in enumerate(vectors))
        for name in netlist.primary_inputs
    }
    expected = reference_eval_packed(netlist, packed_inputs, n)

    try:
        result = simulate_stream(program, vectors)
    except Exception as err:  # validation or machine error: report, don't crash
        return VerifyReport(n, n, (), error=f"{type(err).__name__}: {err}")

    mismatches: list[Mismatch] = []
    n_bad = 0
    for po in netlist.primary_outputs:
        want = expected[po]
        got_bits = result.outputs[po]
        got = sum(bit << i for i, bit in enumerate(got_bits))
        diff = want ^ got
        while diff:
            low = diff & -diff
            lane = low.bit_length() - 1
            n_bad += 1
            if len(mismatches) < MAX_REPORTED_MISMATCHES:
                mismatches.append(Mismatch(lane, po, (want >> lane) & 1, (got >> lane) & 1))
            diff ^= low
    return VerifyReport(n, n_bad, tuple(mismatches))


def verify_netlist(
    netlist: GateNetlist,
    config: MachineConfig,
    exhaustive: bool = False,
    n_vectors: int = 1024,
    seed: int = 0,
) -> VerifyReport:
    """Compile then verify, exhaustively or on seeded random vectors."""
    program = compile_netlist(netlist, config)
    if exhaustive:
        vectors = list(exhaustive_assignments(netlist.primary_inputs))
    else:
        vectors = random_assignments(netlist.primary_inputs, n_vectors, seed)
    return verify_program(netlist, program, vectors)
