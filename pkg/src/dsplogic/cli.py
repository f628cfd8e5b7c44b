"""Command-line driver.

Subcommands: compile, verify, simulate, cost, optimize, gen. Exit
codes: 0 ok, 1 usage error, 2 netlist parse error, 3 compile or
program-file error, 4 verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import costmodel, optimizer
from .compiler import (
    CompileError,
    MachineConfig,
    ProgramFormatError,
    ProgramValidationError,
    compile_netlist,
    deserialize,
    levelize,
    serialize,
    with_n_dsp,
)
from .machine import (
    SimulationError,
    format_vector_lines,
    read_vector_lines,
    simulate_stream,
)
from .netlist import NetlistError, format_netlist, parse_netlist, random_netlist
from .verify import verify_netlist

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_COMPILE = 3
EXIT_MISMATCH = 4

EXHAUSTIVE_PI_LIMIT = 20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UsageError(message)


@dataclass
class RunManifest:
    """Everything needed to reproduce a run."""

    command: str
    inputs: list[str] = field(default_factory=list)
    overrides: dict[str, object] = field(default_factory=dict)
    seed: int | None = None
    artifacts: list[str] = field(default_factory=list)
    exit_status: int = 0

    def dump(self, out) -> None:
        print(f"manifest.command: {self.command}", file=out)
        print(f"manifest.inputs: {' '.join(self.inputs) or '-'}", file=out)
        for key, value in sorted(self.overrides.items()):
            print(f"manifest.config.{key}: {value}", file=out)
        if self.seed is not None:
            print(f"manifest.seed: {self.seed}", file=out)
        print(f"manifest.artifacts: {' '.join(self.artifacts) or '-'}", file=out)
        print(f"manifest.exit_status: {self.exit_status}", file=out)


_CONFIG_FLAGS = {
    "n_dsp": ("--n-dsp", 1024, "number of DSP slots"),
    "lane_width": ("--lane-width", 48, "SIMD lanes per data word"),
    "axi_width": ("--axi-width", 512, "bus beat width in bits"),
    "addr_width": ("--addr-width", 14, "address width in bits"),
    "opcode_width": ("--opcode-width", 6, "opcode width in bits"),
    "k_ddr_banks": ("--ddr-banks", 4, "external memory banks"),
    "n_exe_logic_ops": ("--exe-cycles", 1, "execute cycles per sub-kernel"),
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for dest, (flag, default, help_text) in _CONFIG_FLAGS.items():
        parser.add_argument(flag, dest=dest, type=int, default=default, help=help_text)


def _config_from_args(args: argparse.Namespace) -> MachineConfig:
    try:
        return MachineConfig(**{dest: getattr(args, dest) for dest in _CONFIG_FLAGS})
    except ValueError as err:
        raise UsageError(str(err)) from err


def _config_overrides(args: argparse.Namespace) -> dict[str, object]:
    return {
        dest: getattr(args, dest)
        for dest, (_, default, _) in _CONFIG_FLAGS.items()
        if getattr(args, dest, default) != default
    }


def _parse_sweep(spec: str) -> range:
    m = re.fullmatch(r"(\d+)\.\.(\d+)", spec)
    if not m:
        raise UsageError(f"bad sweep range {spec!r}, expected A..B")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo < 1 or hi < lo:
        raise UsageError(f"bad sweep range {spec!r}")
    return range(lo, hi + 1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dsplogic", description=__doc__)
    parser.add_argument("--manifest", action="store_true", help="print the run manifest")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a netlist to a program file")
    p.add_argument("netlist", help="netlist source (.v)")
    p.add_argument("--out", help="program path (default: netlist name + .kp.json)")
    _add_config_flags(p)

    p = sub.add_parser("verify", help="compile, simulate and compare with the oracle")
    p.add_argument("netlist")
    p.add_argument("--exhaustive", action="store_true", help="all input assignments")
    p.add_argument("--vectors", type=int, default=1024, help="random vector count")
    p.add_argument("--seed", type=int, default=0)
    _add_config_flags(p)

    p = sub.add_parser("simulate", help="run a program file on an input vector file")
    p.add_argument("program", help="compiled program (.kp.json)")
    p.add_argument("vectors", help="text file, one 0/1 vector per line")
    p.add_argument("--out", help="write output vectors here")

    p = sub.add_parser("cost", help="cycle-cost report for a program or stats file")
    p.add_argument("input", help="program (.kp.json) or key=value stats file")
    p.add_argument("--m", type=int, help="pipelined kernel count (default 1 or stats file value)")
    p.add_argument("--input-vectors", type=int, help="packed input batches (default 1 or stats file value)")
    p.add_argument("--sweep", help="emit CSV rows for n_dsp in A..B")
    p.add_argument("--out", help="CSV path for --sweep (default stdout)")
    _add_config_flags(p)

    p = sub.add_parser("optimize", help="pick the DSP budget for a network spec")
    p.add_argument("spec", help="network spec (JSON)")
    p.add_argument("--mode", choices=["exhaustive", "binary", "both"], default="exhaustive")
    p.add_argument("--out", help="CSV of the scanned (n_dsp, cycles) points")
    _add_config_flags(p)

    p = sub.add_parser("gen", help="generate a seeded random test netlist")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pis", type=int, default=8)
    p.add_argument("--gates", type=int, default=64)
    p.add_argument("--pos", type=int, default=2)
    p.add_argument("--out", help="netlist path (default stdout)")

    return parser


def _cmd_compile(args, manifest: RunManifest, out) -> int:
    source = Path(args.netlist).read_text()
    netlist = parse_netlist(source)
    config = _config_from_args(args)
    program = compile_netlist(netlist, config)
    target = Path(args.out) if args.out else Path(args.netlist).with_suffix(".kp.json")
    target.write_text(serialize(program))
    manifest.artifacts.append(str(target))
    print(f"program: {program.name}", file=out)
    print(f"n_subkernels: {program.n_subkernels}", file=out)
    print(f"depth: {levelize(netlist).depth}", file=out)
    print(f"buffer_size: {program.buffer_size}", file=out)
    print(f"wrote: {target}", file=out)
    return EXIT_OK


def _cmd_verify(args, manifest: RunManifest, out) -> int:
    netlist = parse_netlist(Path(args.netlist).read_text())
    if args.exhaustive and len(netlist.primary_inputs) > EXHAUSTIVE_PI_LIMIT:
        raise UsageError(
            f"exhaustive mode is capped at {EXHAUSTIVE_PI_LIMIT} inputs; use --vectors"
        )
    if args.vectors < 1:
        raise UsageError("--vectors must be >= 1")
    manifest.seed = args.seed
    report = verify_netlist(
        netlist,
        _config_from_args(args),
        exhaustive=args.exhaustive,
        n_vectors=args.vectors,
        seed=args.seed,
    )
    print(f"netlist: {netlist.name}", file=out)
    print(f"mode: {'exhaustive' if args.exhaustive else 'random'}", file=out)
    print(f"vectors: {report.n_vectors}", file=out)
    if report.error:
        print(f"error: {report.error}", file=out)
    for mm in report.mismatches:
        print(
            f"mismatch: vector={mm.vector_index} output={mm.output} "
            f"expected={mm.expected} got={mm.got}",
            file=out,
        )
    good = report.n_vectors - report.n_mismatches
    status = "PASS" if report.passed else "FAIL"
    print(f"result: {status} ({good}/{report.n_vectors})", file=out)
    return EXIT_OK if report.passed else EXIT_MISMATCH


def _cmd_simulate(args, manifest: RunManifest, out) -> int:
    program = deserialize(Path(args.program).read_text())
    pi_names = [slot.net for slot in program.pi_slots()]
    po_names = [slot.net for slot in program.po_slots()]
    vectors = read_vector_lines(Path(args.vectors).read_text(), pi_names)
    if not vectors:
        raise UsageError("vector file holds no vectors")
    result = simulate_stream(program, vectors)
    text = format_vector_lines(result, po_names)
    if args.out:
        Path(args.out).write_text(text)
        manifest.artifacts.append(args.out)
        print(f"wrote: {args.out}", file=out)
    else:
        out.write(text)
    print(f"n_vectors: {result.n_vectors}", file=out)
    print(f"n_batches: {result.n_batches}", file=out)
    print(f"n_copy_mem_in: {result.n_copy_mem_in}", file=out)
    print(f"n_loop_subkernels: {result.n_loop_subkernels}", file=out)
    print(f"n_outputs: {result.n_outputs}", file=out)
    print(f"n_compute_one_CK: {result.n_compute_one_ck}", file=out)
    print(f"n_compute: {result.n_compute}", file=out)
    return EXIT_OK


def _cmd_cost(args, manifest: RunManifest, out) -> int:
    if args.m is not None and args.m < 1:
        raise UsageError("--m must be >= 1")
    if args.input_vectors is not None and args.input_vectors < 0:
        raise UsageError("--input-vectors must be >= 0")
    config = _config_from_args(args)
    if args.input.endswith(".kp.json"):
        program = deserialize(Path(args.input).read_text())
        stats = costmodel.workload_from_program(
            program,
            n_input_vectors=args.input_vectors if args.input_vectors is not None else 1,
            m=args.m if args.m is not None else 1,
        )
    else:
        parsed = costmodel.parse_workload_stats(Path(args.input).read_text())
        try:
            stats = costmodel.WorkloadStats(
                n_fanin=parsed.n_fanin,
                n_po=parsed.n_po,
                n_input_vectors=args.input_vectors
                if args.input_vectors is not None
                else parsed.n_input_vectors,
                m=args.m if args.m is not None else parsed.m,
                n_subkernels=parsed.n_subkernels,
                gates_per_level=parsed.gates_per_level,
            )
        except ValueError as err:
            raise UsageError(str(err)) from err

    breakdown = costmodel.total_cost(stats, config)
    for key, value in breakdown.report_items():
        print(f"{key}: {value}", file=out)

    if args.sweep:
        rows = costmodel.sweep(stats, config, _parse_sweep(args.sweep))
        if args.out:
            with open(args.out, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["n_dsp", "n_data_moves", "n_compute", "n_cc"])
                writer.writerows(rows)
            manifest.artifacts.append(args.out)
            print(f"wrote: {args.out}", file=out)
        else:
            print("n_dsp,n_data_moves,n_compute,n_cc", file=out)
            for row in rows:
                print(",".join(str(v) for v in row), file=out)
    return EXIT_OK


def _cmd_optimize(args, manifest: RunManifest, out) -> int:
    spec_path = Path(args.spec)
    loader = lambda ref: (spec_path.parent / ref).read_text()
    try:
        network = optimizer.load_network_spec(spec_path.read_text(), program_loader=loader)
    except ValueError as err:
        raise UsageError(str(err)) from err
    config = _config_from_args(args) if hasattr(args, "n_dsp") else None

    results = {}
    modes = ["exhaustive", "binary"] if args.mode == "both" else [args.mode]
    for mode in modes:
        results[mode] = optimizer.optimize_dsp(network, mode=mode, base_config=config)
    primary = results[modes[0]]
    print(f"mode: {args.mode}", file=out)
    print(f"n_dsp: {primary.n_dsp}", file=out)
    print(f"cycles: {primary.cycles}", file=out)
    if args.mode == "both":
        binary = results["binary"]
        print(f"binary_n_dsp: {binary.n_dsp}", file=out)
        print(f"binary_cycles: {binary.cycles}", file=out)
        print(f"binary_gap: {binary.cycles - results['exhaustive'].cycles}", file=out)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n_dsp", "cycles"])
            for point in optimizer.breakpoints(network):
                writer.writerow([point, optimizer.network_cost(network, point, config)])
        manifest.artifacts.append(args.out)
        print(f"wrote: {args.out}", file=out)
    return EXIT_OK


def _cmd_gen(args, manifest: RunManifest, out) -> int:
    try:
        netlist = random_netlist(args.seed, args.pis, args.gates, args.pos)
    except ValueError as err:
        raise UsageError(str(err)) from err
    manifest.seed = args.seed
    text = format_netlist(netlist)
    if args.out:
        Path(args.out).write_text(text)
        manifest.artifacts.append(args.out)
        print(f"wrote: {args.out}", file=out)
        print(f"gates: {netlist.n_gates}", file=out)
    else:
        out.write(text)
    return EXIT_OK


_COMMANDS = {
    "compile": _cmd_compile,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
    "cost": _cmd_cost,
    "optimize": _cmd_optimize,
    "gen": _cmd_gen,
}


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE

    manifest = RunManifest(command=args.command)
    for attr in ("netlist", "program", "vectors", "input", "spec"):
        value = getattr(args, attr, None)
        if isinstance(value, str):
            manifest.inputs.append(value)
    manifest.overrides = _config_overrides(args)

    try:
        status = _COMMANDS[args.command](args, manifest, out)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        status = EXIT_USAGE
    except NetlistError as err:
        print(f"parse error: {err}", file=sys.stderr)
        status = EXIT_PARSE
    except (CompileError, ProgramFormatError, ProgramValidationError, SimulationError) as err:
        print(f"error: {err}", file=sys.stderr)
        status = EXIT_COMPILE
    except OSError as err:
        print(f"usage error: {err}", file=sys.stderr)
        status = EXIT_USAGE

    manifest.exit_status = status
    if getattr(args, "manifest", False):
        manifest.dump(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
