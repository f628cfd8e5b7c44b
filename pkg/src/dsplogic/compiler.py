"""Netlist-to-machine compiler.

Levelizes a gate netlist (inputs at level 0, each gate one above its
deepest operand), slices every level into sub-kernels that fit the DSP
budget, assigns one data-buffer slot per net, and emits a serialized
program of per-sub-kernel address rows and opcode rows.

Buffer convention: slot 0 holds constant all-zeros, slot 1 constant
all-ones, slots 2..2+n_fanin-1 the primary inputs in declaration order,
then one slot per gate output in declaration order. Each sub-kernel of
``k`` DSP slots carries 2k input addresses, k output addresses and k
opcodes; unused slots are padded with NOP and address 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Any, Mapping

from .netlist import Gate, GateNetlist, GateOp

KIND_CONST0 = "const0"
KIND_CONST1 = "const1"
KIND_INPUT = "primary_input"
KIND_INTERNAL = "internal"
KIND_OUTPUT = "output"

_KINDS = (KIND_CONST0, KIND_CONST1, KIND_INPUT, KIND_INTERNAL, KIND_OUTPUT)


class CompileError(Exception):
    pass


class ProgramFormatError(Exception):
    """Raised for malformed program documents."""


class ProgramValidationError(Exception):
    """Raised when a program violates a structural invariant."""


@dataclass(frozen=True)
class MachineConfig:
    """Parameters of the abstract DSP-array machine.

    The packing ratios (bus words per 512-bit beat) are derived, never
    stored: ``addrs_per_beat`` for addresses, ``words_per_beat`` for
    data words, ``opcodes_per_beat`` for opcodes. With the defaults
    they are 36, 10 and 85.
    """

    n_dsp: int
    lane_width: int = 48
    axi_width: int = 512
    addr_width: int = 14
    opcode_width: int = 6
    k_ddr_banks: int = 4
    n_exe_logic_ops: int = 1

    def __post_init__(self) -> None:
        if self.n_dsp < 1:
            raise ValueError("n_dsp must be >= 1")
        if self.lane_width < 1 or self.axi_width < 1:
            raise ValueError("widths must be positive")
        if self.opcode_width < 4:
            raise ValueError("opcode_width must be >= 4 to encode all opcodes")
        if self.k_ddr_banks < 2:
            raise ValueError("need at least 2 DDR banks (inputs/opcodes + addresses)")
        if self.n_exe_logic_ops < 1:
            raise ValueError("n_exe_logic_ops must be >= 1")
        for ratio in (self.addrs_per_beat, self.words_per_beat, self.opcodes_per_beat):
            if ratio < 1:
                raise ValueError("bus width must fit at least one word of each kind")

    @property
    def addrs_per_beat(self) -> int:
        return self.axi_width // self.addr_width

    @property
    def words_per_beat(self) -> int:
        return self.axi_width // self.lane_width

    @property
    def opcodes_per_beat(self) -> int:
        return self.axi_width // self.opcode_width


class Opcode(IntEnum):
    """Per-slot operation codes as stored in the opcode buffer."""

    NOP = 0
    AND = 1
    OR = 2
    XOR = 3
    NAND = 4
    NOR = 5
    XNOR = 6
    NOT = 7
    BUF = 8


_UNARY_OPCODES = (Opcode.NOT, Opcode.BUF)

_GATE_TO_OPCODE = {
    GateOp.AND: Opcode.AND,
    GateOp.OR: Opcode.OR,
    GateOp.XOR: Opcode.XOR,
    GateOp.NAND: Opcode.NAND,
    GateOp.NOR: Opcode.NOR,
    GateOp.XNOR: Opcode.XNOR,
    GateOp.NOT: Opcode.NOT,
    GateOp.BUF: Opcode.BUF,
}


@dataclass(frozen=True)
class LeveledNetlist:
    """Netlist plus the level of every gate (keyed by its output net)."""

    base: GateNetlist
    level: Mapping[str, int]
    depth: int
    gates_per_level: tuple[int, ...]

    def gates_at_level(self, lvl: int) -> list[Gate]:
        return [g for g in self.base.gates if self.level[g.output] == lvl]

    def level_of_net(self, net: str) -> int:
        return self.level.get(net, 0)


def levelize(netlist: GateNetlist) -> LeveledNetlist:
    """Assign each gate 1 + max operand level; primary inputs sit at 0."""
    level: dict[str, int] = {}
    for g in netlist.topological_gates():
        level[g.output] = 1 + max((level.get(net, 0) for net in g.operands), default=0)
    depth = max(level.values(), default=0)
    per_level = [0] * depth
    for lvl in level.values():
        per_level[lvl - 1] += 1
    return LeveledNetlist(netlist, level, depth, tuple(per_level))


def partition(leveled: LeveledNetlist, config: MachineConfig) -> list[tuple[int, list[Gate]]]:
    """Slice each level into declaration-order chunks of at most n_dsp gates."""
    slices: list[tuple[int, list[Gate]]] = []
    for lvl in range(1, leveled.depth + 1):
        gates = leveled.gates_at_level(lvl)
        for start in range(0, len(gates), config.n_dsp):
            slices.append((lvl, gates[start : start + config.n_dsp]))
    return slices


@dataclass(frozen=True)
class BufferSlot:
    index: int
    net: str | None
    kind: str


@dataclass(frozen=True)
class SubKernel:
    """One compute round: fixed-size address rows plus an opcode row."""

    level: int
    in_addrs: tuple[int, ...]
    out_addrs: tuple[int, ...]
    opcodes: tuple[Opcode, ...]


@dataclass(frozen=True)
class KernelProgram:
    name: str
    config: MachineConfig
    buffer_layout: tuple[BufferSlot, ...]
    subkernels: tuple[SubKernel, ...]
    n_fanin: int
    n_po: int

    @property
    def buffer_size(self) -> int:
        return len(self.buffer_layout)

    @property
    def n_subkernels(self) -> int:
        return len(self.subkernels)

    @property
    def n_subk_addresses(self) -> int:
        # two operand slots plus one result slot per DSP
        return 3 * self.config.n_dsp

    def pi_slots(self) -> list[BufferSlot]:
        return [s for s in self.buffer_layout if s.kind == KIND_INPUT]

    def po_slots(self) -> list[BufferSlot]:
        return [s for s in self.buffer_layout if s.kind == KIND_OUTPUT]

    def gates_per_level(self) -> tuple[int, ...]:
        """Non-padding op count per level, recovered from the sub-kernels."""
        depth = max((sk.level for sk in self.subkernels), default=0)
        per_level = [0] * depth
        for sk in self.subkernels:
            per_level[sk.level - 1] += sum(1 for op in sk.opcodes if op is not Opcode.NOP)
        return tuple(per_level)

    def validate(self) -> None:
        """Re-check every structural invariant of the program."""
        n = self.config.n_dsp
        size = self.buffer_size
        if size > (1 << self.config.addr_width):
            raise ProgramValidationError(
                f"buffer of {size} slots exceeds {self.config.addr_width}-bit addressing"
            )
        if size < 2:
            raise ProgramValidationError("buffer must hold the two constant slots")
        names_seen: set[str] = set()
        for i, slot in enumerate(self.buffer_layout):
            if slot.index != i:
                raise ProgramValidationError(f"buffer slot {i} carries index {slot.index}")
            if slot.kind not in _KINDS:
                raise ProgramValidationError(f"unknown slot kind {slot.kind!r}")
            expected_kind = KIND_CONST0 if i == 0 else KIND_CONST1 if i == 1 else None
            if expected_kind is not None:
                if slot.kind != expected_kind or slot.net is not None:
                    raise ProgramValidationError(f"slot {i} must be the {expected_kind} constant")
                continue
            if slot.kind in (KIND_CONST0, KIND_CONST1):
                raise ProgramValidationError(f"constant kind outside slots 0/1 at index {i}")
            if slot.net is None or slot.net in names_seen:
                raise ProgramValidationError(f"slot {i} has a missing or duplicate net name")
            names_seen.add(slot.net)
            is_pi = 2 <= i < 2 + self.n_fanin
            if is_pi != (slot.kind == KIND_INPUT):
                raise ProgramValidationError(
                    f"primary inputs must occupy slots 2..{1 + self.n_fanin} exactly (slot {i})"
                )
        if len(self.po_slots()) != self.n_po:
            raise ProgramValidationError("n_po does not match the output-kind slot count")

        gate_slots = {s.index for s in self.buffer_layout if s.kind in (KIND_INTERNAL, KIND_OUTPUT)}
        readable_level: dict[int, int] = {i: 0 for i in range(2 + self.n_fanin)}
        written: set[int] = set()
        prev_level = 1
        for t, sk in enumerate(self.subkernels):
            if sk.level < prev_level:
                raise ProgramValidationError(f"sub-kernel {t} breaks nondecreasing level order")
            prev_level = sk.level
            if len(sk.in_addrs) != 2 * n or len(sk.out_addrs) != n or len(sk.opcodes) != n:
                raise ProgramValidationError(f"sub-kernel {t} rows do not match n_dsp={n}")
            for p in range(n):
                a, b = sk.in_addrs[2 * p], sk.in_addrs[2 * p + 1]
                out = sk.out_addrs[p]
                op = sk.opcodes[p]
                if op is Opcode.NOP:
                    if a or b or out:
                        raise ProgramValidationError(
                            f"sub-kernel {t} slot {p}: NOP padding must use address 0"
                        )
                    continue
                for addr in (a, b, out):
                    if not 0 <= addr < size:
                        raise ProgramValidationError(
                            f"sub-kernel {t} slot {p}: address {addr} outside buffer"
                        )
                if op in _UNARY_OPCODES and b != 0:
                    raise ProgramValidationError(
                        f"sub-kernel {t} slot {p}: unary op must pad its second operand with 0"
                    )
                reads = (a,) if op in _UNARY_OPCODES else (a, b)
                for addr in reads:
                    lvl = readable_level.get(addr)
                    if lvl is None or lvl >= sk.level:
                        raise ProgramValidationError(
                            f"sub-kernel {t} slot {p}: reads slot {addr} not written at a lower level"
                        )
                if out not in gate_slots:
                    raise ProgramValidationError(
                        f"sub-kernel {t} slot {p}: result address {out} is not a gate slot"
                    )
                if out in written:
                    raise ProgramValidationError(
                        f"sub-kernel {t} slot {p}: slot {out} written twice"
                    )
                written.add(out)
            for p in range(n):
                if sk.opcodes[p] is not Opcode.NOP:
                    readable_level[sk.out_addrs[p]] = sk.level
        if written != gate_slots:
            missing = sorted(gate_slots - written)
            raise ProgramValidationError(f"slots never written: {missing[:5]}")

        # per level, the slice count must be exactly ceil(ops / n_dsp)
        ops_at_level: dict[int, int] = {}
        slices_at_level: dict[int, int] = {}
        for sk in self.subkernels:
            slices_at_level[sk.level] = slices_at_level.get(sk.level, 0) + 1
            ops_at_level[sk.level] = ops_at_level.get(sk.level, 0) + sum(
                1 for op in sk.opcodes if op is not Opcode.NOP
            )
        for lvl, n_slices in slices_at_level.items():
            if n_slices != -(-ops_at_level[lvl] // n):
                raise ProgramValidationError(
                    f"level {lvl}: {n_slices} sub-kernels for {ops_at_level[lvl]} ops at n_dsp={n}"
                )


def compile_netlist(netlist: GateNetlist, config: MachineConfig) -> KernelProgram:
    """Compile a validated netlist into a loadable program."""
    netlist.validate()
    pi_set = set(netlist.primary_inputs)
    for po in netlist.primary_outputs:
        if po in pi_set:
            raise CompileError(
                f"primary output {po!r} aliases a primary input; route it through a buffer gate"
            )

    po_set = set(netlist.primary_outputs)
    layout = [
        BufferSlot(0, None, KIND_CONST0),
        BufferSlot(1, None, KIND_CONST1),
    ]
    slot_of: dict[str, int] = {}
    for name in netlist.primary_inputs:
        slot_of[name] = len(layout)
        layout.append(BufferSlot(len(layout), name, KIND_INPUT))
    for g in netlist.gates:
        slot_of[g.output] = len(layout)
        kind = KIND_OUTPUT if g.output in po_set else KIND_INTERNAL
        layout.append(BufferSlot(len(layout), g.output, kind))
    if len(layout) > (1 << config.addr_width):
        raise CompileError(
            f"netlist needs {len(layout)} buffer slots; "
            f"{config.addr_width}-bit addresses cap it at {1 << config.addr_width}"
        )

    n = config.n_dsp
    subkernels = []
    for lvl, gates in partition(levelize(netlist), config):
        in_addrs = [0] * (2 * n)
        out_addrs = [0] * n
        opcodes = [Opcode.NOP] * n
        for p, g in enumerate(gates):
            if g.op is GateOp.CONST0:
                opcodes[p] = Opcode.BUF
                in_addrs[2 * p] = 0
            elif g.op is GateOp.CONST1:
                opcodes[p] = Opcode.BUF
                in_addrs[2 * p] = 1
            else:
                opcodes[p] = _GATE_TO_OPCODE[g.op]
                in_addrs[2 * p] = slot_of[g.operands[0]]
                if len(g.operands) == 2:
                    in_addrs[2 * p + 1] = slot_of[g.operands[1]]
            out_addrs[p] = slot_of[g.output]
        subkernels.append(SubKernel(lvl, tuple(in_addrs), tuple(out_addrs), tuple(opcodes)))

    program = KernelProgram(
        name=netlist.name,
        config=config,
        buffer_layout=tuple(layout),
        subkernels=tuple(subkernels),
        n_fanin=len(netlist.primary_inputs),
        n_po=len(netlist.primary_outputs),
    )
    program.validate()
    return program


# ---------------------------------------------------------------------------
# Program documents (.kp.json)
# ---------------------------------------------------------------------------

_CONFIG_KEYS = (
    "n_dsp",
    "lane_width",
    "axi_width",
    "addr_width",
    "opcode_width",
    "k_ddr_banks",
    "n_exe_logic_ops",
)
_TOP_KEYS = ("name", "config", "buffer", "subkernels", "n_fanin", "n_po")


def serialize(program: KernelProgram) -> str:
    """Canonical JSON text; stable byte-for-byte for equal programs."""
    doc = {
        "name": program.name,
        "config": {key: getattr(program.config, key) for key in _CONFIG_KEYS},
        "buffer": [
            {"index": s.index, "net": s.net, "kind": s.kind} for s in program.buffer_layout
        ],
        "subkernels": [
            {
                "level": sk.level,
                "in_addrs": list(sk.in_addrs),
                "out_addrs": list(sk.out_addrs),
                "opcodes": [op.name for op in sk.opcodes],
            }
            for sk in program.subkernels
        ],
        "n_fanin": program.n_fanin,
        "n_po": program.n_po,
    }
    return json.dumps(doc, indent=2) + "\n"


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ProgramFormatError(message)


def _int_field(obj: Mapping[str, Any], key: str, where: str) -> int:
    value = obj.get(key)
    _require(isinstance(value, int) and not isinstance(value, bool), f"{where}: {key} must be an integer")
    return value


def deserialize(text: str) -> KernelProgram:
    """Parse a program document and re-validate every invariant."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ProgramFormatError(f"not valid JSON: {err}") from err
    _require(isinstance(doc, dict), "top level must be an object")
    _require(set(doc) == set(_TOP_KEYS), f"top-level keys must be exactly {list(_TOP_KEYS)}")
    _require(isinstance(doc["name"], str), "name must be a string")

    raw_cfg = doc["config"]
    _require(isinstance(raw_cfg, dict) and set(raw_cfg) == set(_CONFIG_KEYS), "bad config block")
    try:
        config = MachineConfig(**{key: _int_field(raw_cfg, key, "config") for key in _CONFIG_KEYS})
    except ValueError as err:
        raise ProgramFormatError(f"config: {err}") from err

    _require(isinstance(doc["buffer"], list), "buffer must be an array")
    slots = []
    for entry in doc["buffer"]:
        _require(isinstance(entry, dict) and set(entry) == {"index", "net", "kind"}, "bad buffer entry")
        net = entry["net"]
        _require(net is None or isinstance(net, str), "buffer net must be a string or null")
        _require(isinstance(entry["kind"], str), "buffer kind must be a string")
        slots.append(BufferSlot(_int_field(entry, "index", "buffer"), net, entry["kind"]))

    _require(isinstance(doc["subkernels"], list), "subkernels must be an array")
    subkernels = []
    for i, entry in enumerate(doc["subkernels"]):
        where = f"subkernel {i}"
        _require(
            isinstance(entry, dict) and set(entry) == {"level", "in_addrs", "out_addrs", "opcodes"},
            f"{where}: bad keys",
        )
        for key in ("in_addrs", "out_addrs"):
            _require(
                isinstance(entry[key], list)
                and all(isinstance(v, int) and not isinstance(v, bool) for v in entry[key]),
                f"{where}: {key} must be an integer array",
            )
        _require(isinstance(entry["opcodes"], list), f"{where}: opcodes must be an array")
        ops = []
        for name in entry["opcodes"]:
            _require(isinstance(name, str) and name in Opcode.__members__, f"{where}: unknown opcode {name!r}")
            ops.append(Opcode[name])
        subkernels.append(
            SubKernel(
                _int_field(entry, "level", where),
                tuple(entry["in_addrs"]),
                tuple(entry["out_addrs"]),
                tuple(ops),
            )
        )

    program = KernelProgram(
        name=doc["name"],
        config=config,
        buffer_layout=tuple(slots),
        subkernels=tuple(subkernels),
        n_fanin=_int_field(doc, "n_fanin", "top level"),
        n_po=_int_field(doc, "n_po", "top level"),
    )
    program.validate()
    return program


def with_n_dsp(config: MachineConfig, n_dsp: int) -> MachineConfig:
    """Same machine with a different DSP budget."""
    return replace(config, n_dsp=n_dsp)
