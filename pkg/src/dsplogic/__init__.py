"""Compiler, simulator and cost model for mapping combinational logic
netlists onto a SIMD DSP-array machine."""

from .compiler import (
    BufferSlot,
    CompileError,
    KernelProgram,
    LeveledNetlist,
    MachineConfig,
    Opcode,
    ProgramFormatError,
    ProgramValidationError,
    SubKernel,
    compile_netlist,
    deserialize,
    levelize,
    partition,
    serialize,
    with_n_dsp,
)
from .costmodel import (
    CostBreakdown,
    WorkloadStats,
    addr_movement_cost,
    compute_cost,
    input_opcode_cost,
    subkernels_from_levels,
    total_cost,
    workload_from_program,
)
from .machine import (
    BatchInput,
    SimResult,
    SimulationError,
    pipeline_schedule,
    simulate,
    simulate_stream,
)
from .netlist import (
    Gate,
    GateNetlist,
    GateOp,
    NetlistError,
    format_netlist,
    parse_netlist,
    random_netlist,
    reference_eval,
    reference_eval_packed,
)
from .optimizer import (
    LayerSpec,
    NetworkSpec,
    OptimizeResult,
    network_cost,
    optimize_dsp,
)
from .verify import VerifyReport, verify_netlist, verify_program

__all__ = [
    "BatchInput",
    "BufferSlot",
    "CompileError",
    "CostBreakdown",
    "Gate",
    "GateNetlist",
    "GateOp",
    "KernelProgram",
    "LayerSpec",
    "LeveledNetlist",
    "MachineConfig",
    "NetlistError",
    "NetworkSpec",
    "Opcode",
    "OptimizeResult",
    "ProgramFormatError",
    "ProgramValidationError",
    "SimResult",
    "SimulationError",
    "SubKernel",
    "VerifyReport",
    "WorkloadStats",
    "addr_movement_cost",
    "compile_netlist",
    "compute_cost",
    "deserialize",
    "format_netlist",
    "input_opcode_cost",
    "levelize",
    "network_cost",
    "optimize_dsp",
    "parse_netlist",
    "partition",
    "pipeline_schedule",
    "random_netlist",
    "reference_eval",
    "reference_eval_packed",
    "serialize",
    "simulate",
    "simulate_stream",
    "subkernels_from_levels",
    "total_cost",
    "verify_netlist",
    "verify_program",
    "with_n_dsp",
    "workload_from_program",
]

__version__ = "0.1.0"
