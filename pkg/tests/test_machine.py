import dataclasses

import pytest

from dsplogic.compiler import MachineConfig, compile_netlist
from dsplogic.machine import (
    BatchInput,
    SimulationError,
    format_vector_lines,
    pipeline_schedule,
    read_vector_lines,
    simulate,
    simulate_stream,
)
from dsplogic.netlist import (
    exhaustive_assignments,
    random_assignments,
    random_netlist,
    reference_eval,
)


class TestFunctional:
    def test_g1_exhaustive_is_and4_truth_table(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2))
        vectors = list(exhaustive_assignments(g1.primary_inputs))
        batch = BatchInput.from_assignments(vectors)
        result = simulate(prog, batch)
        expect = tuple(v["a"] & v["b"] & v["c"] & v["d"] for v in vectors)
        assert result.outputs["out"] == expect

    def test_g1_single_lane(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2))
        result = simulate(prog, BatchInput.from_assignments([{"a": 1, "b": 1, "c": 1, "d": 1}]))
        assert result.outputs["out"] == (1,)

    def test_g2_exhaustive_matches_oracle(self, g2):
        prog = compile_netlist(g2, MachineConfig(n_dsp=2))
        vectors = list(exhaustive_assignments(g2.primary_inputs))
        result = simulate(prog, BatchInput.from_assignments(vectors))
        for i, v in enumerate(vectors):
            assert result.outputs["out"][i] == reference_eval(g2, v)["out"]

    def test_lane_independence(self):
        n = random_netlist(11, 5, 60, 3)
        prog = compile_netlist(n, MachineConfig(n_dsp=7))
        vectors = random_assignments(n.primary_inputs, 48, seed=2)
        packed = simulate(prog, BatchInput.from_assignments(vectors))
        for i, v in enumerate(vectors):
            alone = simulate(prog, BatchInput.from_assignments([v]))
            for po in n.primary_outputs:
                assert alone.outputs[po] == (packed.outputs[po][i],)

    def test_outputs_invariant_under_n_dsp(self):
        n = random_netlist(21, 6, 150, 4)
        vectors = random_assignments(n.primary_inputs, 64, seed=3)
        reference = None
        for n_dsp in (1, 2, 7, 48, 1000):
            prog = compile_netlist(n, MachineConfig(n_dsp=n_dsp))
            outputs = simulate_stream(prog, vectors).outputs
            if reference is None:
                reference = outputs
            else:
                assert outputs == reference

    def test_stream_matches_scalar_oracle(self):
        n = random_netlist(31, 8, 50, 2)
        prog = compile_netlist(n, MachineConfig(n_dsp=5))
        vectors = random_assignments(n.primary_inputs, 200, seed=4)
        result = simulate_stream(prog, vectors)
        for i, v in enumerate(vectors):
            golden = reference_eval(n, v)
            for po in n.primary_outputs:
                assert result.outputs[po][i] == golden[po]

    def test_nand_nor_xnor_not_buf_lanes(self):
        src_ops = {
            "NAND": lambda a, b: 1 - (a & b),
            "NOR": lambda a, b: 1 - (a | b),
            "XNOR": lambda a, b: 1 - (a ^ b),
        }
        from dsplogic.netlist import parse_netlist

        n = parse_netlist(
            "module t(a,b,y1,y2,y3,y4,y5); input a, b; output y1, y2, y3, y4, y5;"
            " assign y1 = ~(a & b); assign y2 = ~(a | b); assign y3 = ~(a ^ b);"
            " assign y4 = ~a; assign y5 = b; endmodule"
        )
        prog = compile_netlist(n, MachineConfig(n_dsp=8))
        vectors = list(exhaustive_assignments(("a", "b")))
        result = simulate_stream(prog, vectors)
        for i, v in enumerate(vectors):
            assert result.outputs["y1"][i] == src_ops["NAND"](v["a"], v["b"])
            assert result.outputs["y2"][i] == src_ops["NOR"](v["a"], v["b"])
            assert result.outputs["y3"][i] == src_ops["XNOR"](v["a"], v["b"])
            assert result.outputs["y4"][i] == 1 - v["a"]
            assert result.outputs["y5"][i] == v["b"]


class TestEvents:
    def test_g1_hand_traced_counts(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2))
        result = simulate(prog, BatchInput.from_assignments([{"a": 1, "b": 1, "c": 1, "d": 1}]))
        assert result.n_copy_mem_in == 4
        # two sub-kernels, each: 1 load group (4 addrs / 36), 1 execute, 1 write-back group
        assert result.n_bram_to_dsp_regs == 2
        assert result.n_dsp_reg_to_bram == 2
        assert result.n_loop_subkernels == 6
        assert result.n_outputs == 1
        assert result.n_compute_one_ck == 11
        assert result.n_compute == 11

    def test_group_accounting_is_positional(self, g1):
        # padding counts toward bus groups: rows are sized by n_dsp, not by real ops
        prog = compile_netlist(g1, MachineConfig(n_dsp=1000))
        result = simulate(prog, BatchInput.from_assignments([{"a": 0, "b": 0, "c": 0, "d": 0}]))
        assert result.n_bram_to_dsp_regs == 2 * 56  # ceil(2000/36) per sub-kernel
        assert result.n_dsp_reg_to_bram == 2 * 28
        assert result.n_loop_subkernels == 2 * (56 + 1 + 28)

    def test_execute_cycles_config(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2, n_exe_logic_ops=3))
        result = simulate(prog, BatchInput.from_assignments([{"a": 0, "b": 0, "c": 0, "d": 0}]))
        assert result.n_loop_subkernels == 2 * (1 + 3 + 1)

    def test_compute_scales_with_batches(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2))
        vectors = random_assignments(g1.primary_inputs, 96, seed=0)
        result = simulate_stream(prog, vectors)
        assert result.n_batches == 2
        assert result.n_compute == 2 * result.n_compute_one_ck
        assert result.n_compute_one_ck == 11

    def test_output_beats_pack_by_word_ratio(self):
        n = random_netlist(41, 4, 30, 12)
        prog = compile_netlist(n, MachineConfig(n_dsp=30))
        result = simulate_stream(prog, random_assignments(n.primary_inputs, 3, seed=1))
        assert result.n_outputs == 2  # ceil(12 / 10)


class TestStreamPacking:
    def test_96_vectors_two_batches(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2))
        vectors = random_assignments(g1.primary_inputs, 96, seed=9)
        result = simulate_stream(prog, vectors)
        assert result.n_batches == 2
        assert result.n_vectors == 96
        # order preserved across the batch boundary
        for i, v in enumerate(vectors):
            assert result.outputs["out"][i] == v["a"] & v["b"] & v["c"] & v["d"]

    def test_single_vector_single_batch(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2))
        stream = simulate_stream(prog, [{"a": 1, "b": 0, "c": 1, "d": 1}])
        single = simulate(prog, BatchInput.from_assignments([{"a": 1, "b": 0, "c": 1, "d": 1}]))
        assert stream == single

    def test_narrow_lane_width(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2, lane_width=8, axi_width=64))
        vectors = random_assignments(g1.primary_inputs, 20, seed=5)
        result = simulate_stream(prog, vectors)
        assert result.n_batches == 3
        for i, v in enumerate(vectors):
            assert result.outputs["out"][i] == v["a"] & v["b"] & v["c"] & v["d"]


class TestErrors:
    def test_pi_mismatch(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2))
        with pytest.raises(SimulationError):
            simulate(prog, BatchInput.from_assignments([{"a": 1, "b": 1, "c": 1, "x": 1}]))

    def test_lane_overflow(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2))
        vectors = random_assignments(g1.primary_inputs, 49, seed=0)
        with pytest.raises(SimulationError):
            simulate(prog, BatchInput.from_assignments(vectors))

    def test_empty_stream(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2))
        with pytest.raises(SimulationError):
            simulate_stream(prog, [])

    def test_corrupted_program_rejected_before_running(self, g1):
        prog = compile_netlist(g1, MachineConfig(n_dsp=2))
        bad_sk = dataclasses.replace(prog.subkernels[0], out_addrs=(0, 7))
        bad = dataclasses.replace(prog, subkernels=(bad_sk, prog.subkernels[1]))
        with pytest.raises(Exception):
            simulate_stream(bad, [{"a": 1, "b": 1, "c": 1, "d": 1}])

    def test_ragged_batch_rejected(self):
        with pytest.raises(SimulationError):
            BatchInput.from_bits({"a": (1, 0), "b": (1,)})


class TestPipelineSchedule:
    def test_single_kernel(self):
        assert pipeline_schedule([(10, 6)]) == 20

    def test_uniform_kernels(self):
        assert pipeline_schedule([(5, 7)] * 3) == 28

    def test_worst_stage_dominates(self):
        assert pipeline_schedule([(4, 3), (9, 3)]) == 27

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            pipeline_schedule([])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            pipeline_schedule([(-1, 3)])


class TestVectorFiles:
    def test_read_write_round_trip(self, g2):
        prog = compile_netlist(g2, MachineConfig(n_dsp=2))
        text = "0101\n1111\n0000\n"
        vectors = read_vector_lines(text, list(g2.primary_inputs))
        assert vectors[0] == {"a": 0, "b": 1, "c": 0, "d": 1}
        result = simulate_stream(prog, vectors)
        out_text = format_vector_lines(result, list(g2.primary_outputs))
        assert out_text.splitlines() == [
            str(reference_eval(g2, v)["out"]) for v in vectors
        ]

    def test_rejects_bad_line(self):
        with pytest.raises(SimulationError):
            read_vector_lines("01\n013\n", ["a", "b"])

    def test_skips_blank_lines(self):
        assert len(read_vector_lines("01\n\n10\n", ["a", "b"])) == 2
