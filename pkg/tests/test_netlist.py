import random

import pytest

from dsplogic.netlist import (
    CycleError,
    Gate,
    GateNetlist,
    GateOp,
    MultiplyDrivenError,
    NetlistSyntaxError,
    UndeclaredNetError,
    UndrivenNetError,
    UnsupportedExpressionError,
    exhaustive_assignments,
    format_netlist,
    parse_netlist,
    random_assignments,
    random_netlist,
    reference_eval,
    reference_eval_packed,
)



class TestParse:
    def test_g1_structure(self, g1):
        assert g1.name == "g1"
        assert g1.primary_inputs == ("a", "b", "c", "d")
        assert g1.primary_outputs == ("out",)
        assert len(g1.gates) == 3
        assert all(g.op is GateOp.AND for g in g1.gates)
        assert g1.gates[0] == Gate("w1", GateOp.AND, ("a", "b"))

    def test_identity_assign_becomes_buffer(self):
        n = parse_netlist("module t(a,y); input a; output y; assign y = a; endmodule")
        assert n.gates == (Gate("y", GateOp.BUF, ("a",)),)

    def test_g2_structure(self, g2):
        assert len(g2.gates) == 7
        ops = [g.op for g in g2.gates]
        assert ops == [
            GateOp.XOR,
            GateOp.XOR,
            GateOp.XOR,
            GateOp.OR,
            GateOp.XOR,
            GateOp.AND,
            GateOp.AND,
        ]

    def test_g2_matches_direct_formula(self, g2):
        # independent oracle: evaluate the boolean expression directly
        for v in exhaustive_assignments(g2.primary_inputs):
            a, b, c, d = v["a"], v["b"], v["c"], v["d"]
            expect = ((b ^ c) ^ (d ^ a)) & ((b ^ a) & (d | c))
            assert reference_eval(g2, v)["out"] == expect

    def test_all_expression_shapes(self):
        n = parse_netlist(
            """
            module shapes (a, b, y1, y2, y3, y4, y5, y6, y7, y8, y9);
            input a, b;
            output y1, y2, y3, y4, y5, y6, y7, y8, y9;
            assign y1 = a & b;
            assign y2 = a | b;
            assign y3 = a ^ b;
            assign y4 = ~(a & b);
            assign y5 = ~(a | b);
            assign y6 = ~(a ^ b);
            assign y7 = ~a;
            assign y8 = a;
            assign y9 = 1'b1;
            endmodule
            """
        )
        assert [g.op for g in n.gates] == [
            GateOp.AND,
            GateOp.OR,
            GateOp.XOR,
            GateOp.NAND,
            GateOp.NOR,
            GateOp.XNOR,
            GateOp.NOT,
            GateOp.BUF,
            GateOp.CONST1,
        ]

    def test_comments_ignored(self):
        n = parse_netlist(
            "// header\nmodule t(a,y); // ports\ninput a; output y;\nassign y = ~a; // invert\nendmodule\n"
        )
        assert n.gates[0].op is GateOp.NOT


class TestParseErrors:
    def test_syntax_error_has_position(self):
        with pytest.raises(NetlistSyntaxError) as info:
            parse_netlist("module t(a,y);\ninput a; output y;\nassign y = a\nendmodule")
        assert info.value.line == 4  # the semicolon is missing before 'endmodule'

    def test_unexpected_character(self):
        with pytest.raises(NetlistSyntaxError) as info:
            parse_netlist("module t(a,y); input a; output y; assign y = a + a; endmodule")
        assert info.value.line == 1

    def test_cycle(self):
        src = """
        module t(a, y);
        input a; output y; wire p, q;
        assign p = q & a;
        assign q = p & a;
        assign y = p & q;
        endmodule
        """
        with pytest.raises(CycleError):
            parse_netlist(src)

    def test_multiply_driven(self):
        src = "module t(a,y); input a; output y; assign y = a; assign y = ~a; endmodule"
        with pytest.raises(MultiplyDrivenError):
            parse_netlist(src)

    def test_assign_to_input(self):
        src = "module t(a,y); input a; output y; assign a = 1'b0; assign y = a; endmodule"
        with pytest.raises(MultiplyDrivenError):
            parse_netlist(src)

    def test_undeclared_operand(self):
        src = "module t(a,y); input a; output y; assign y = a & zz; endmodule"
        with pytest.raises(UndeclaredNetError) as info:
            parse_netlist(src)
        assert "zz" in str(info.value)

    def test_undriven_wire(self):
        src = "module t(a,y); input a; output y; wire w; assign y = a; endmodule"
        with pytest.raises(UndrivenNetError):
            parse_netlist(src)

    def test_undriven_output(self):
        src = "module t(a,y); input a; output y; endmodule"
        with pytest.raises(UndrivenNetError):
            parse_netlist(src)

    def test_three_operand_expression_rejected(self):
        src = "module t(a,y); input a; output y; assign y = a & a & a; endmodule"
        with pytest.raises(UnsupportedExpressionError):
            parse_netlist(src)

    def test_mixed_negation_rejected(self):
        src = "module t(a,y); input a; output y; assign y = ~a & a; endmodule"
        with pytest.raises(UnsupportedExpressionError):
            parse_netlist(src)

    def test_empty_file_is_syntax_error(self):
        with pytest.raises(NetlistSyntaxError):
            parse_netlist("")

    def test_wire_in_port_list_rejected(self):
        src = "module t(a,w,y); input a; output y; wire w; assign w = a; assign y = w; endmodule"
        with pytest.raises(NetlistSyntaxError):
            parse_netlist(src)

    def test_undeclared_port(self):
        src = "module t(a,b,y); input a; output y; assign y = a; endmodule"
        with pytest.raises(UndeclaredNetError):
            parse_netlist(src)


class TestRoundTrip:
    def test_g1_and_g2(self, g1, g2):
        for n in (g1, g2):
            assert parse_netlist(format_netlist(n)) == n

    def test_random_netlists(self):
        for seed in range(60):
            n = random_netlist(seed, 1 + seed % 7, 1 + seed, 1 + seed % 3)
            assert parse_netlist(format_netlist(n)) == n

    def test_constants_round_trip(self):
        src = "module t(a,y); input a; output y; wire k; assign k = 1'b0; assign y = a ^ k; endmodule"
        n = parse_netlist(src)
        assert n.gates[0].op is GateOp.CONST0
        assert parse_netlist(format_netlist(n)) == n


class TestReferenceEval:
    def test_g1_all_ones(self, g1):
        assert reference_eval(g1, {"a": 1, "b": 1, "c": 1, "d": 1})["out"] == 1

    def test_g1_single_zero(self, g1):
        assert reference_eval(g1, {"a": 0, "b": 1, "c": 1, "d": 1})["out"] == 0

    def test_g1_exhaustive_truth_table(self, g1):
        for v in exhaustive_assignments(g1.primary_inputs):
            expect = v["a"] & v["b"] & v["c"] & v["d"]
            assert reference_eval(g1, v)["out"] == expect

    def test_rejects_incomplete_assignment(self, g1):
        with pytest.raises(ValueError):
            reference_eval(g1, {"a": 1, "b": 1, "c": 1})

    def test_deterministic(self, g2):
        v = {"a": 1, "b": 0, "c": 1, "d": 0}
        assert reference_eval(g2, v) == reference_eval(g2, v)

    def test_gate_local_semantics(self):
        # every gate's value equals its operator applied to its operand values
        local = {
            GateOp.AND: lambda a, b: a and b,
            GateOp.OR: lambda a, b: a or b,
            GateOp.XOR: lambda a, b: a != b,
            GateOp.NAND: lambda a, b: not (a and b),
            GateOp.NOR: lambda a, b: not (a or b),
            GateOp.XNOR: lambda a, b: a == b,
            GateOp.NOT: lambda a, b: not a,
            GateOp.BUF: lambda a, b: a,
        }
        for seed in range(30):
            n = random_netlist(seed, 5, 40, 2)
            for v in random_assignments(n.primary_inputs, 8, seed):
                values = reference_eval(n, v)
                for g in n.gates:
                    a = values[g.operands[0]]
                    b = values[g.operands[1]] if len(g.operands) == 2 else 0
                    assert values[g.output] == int(local[g.op](a, b))

    def test_packed_agrees_with_scalar(self):
        for seed in range(20):
            n = random_netlist(seed, 6, 60, 3)
            vectors = random_assignments(n.primary_inputs, 37, seed + 1)
            words = {
                name: sum((v[name] & 1) << i for i, v in enumerate(vectors))
                for name in n.primary_inputs
            }
            packed = reference_eval_packed(n, words, len(vectors))
            for i, v in enumerate(vectors):
                scalar = reference_eval(n, v)
                for net in scalar:
                    assert (packed[net] >> i) & 1 == scalar[net]


class TestRandomNetlist:
    def test_deterministic(self):
        assert random_netlist(7, 4, 10, 2) == random_netlist(7, 4, 10, 2)

    def test_seed_changes_output(self):
        assert random_netlist(7, 4, 10, 2) != random_netlist(8, 4, 10, 2)

    def test_degenerate_single_gate(self):
        for seed in range(20):
            n = random_netlist(seed, 1, 1, 1)
            assert len(n.gates) == 1
            g = n.gates[0]
            assert set(g.operands) == {n.primary_inputs[0]}

    def test_valid_over_many_seeds(self):
        rng = random.Random(123)
        for seed in range(300):
            n_gates = rng.randint(1, 80)
            n = random_netlist(seed, rng.randint(1, 12), n_gates, rng.randint(1, min(4, n_gates)))
            n.validate()

    def test_all_ops_reachable(self):
        seen = set()
        for seed in range(40):
            seen.update(g.op for g in random_netlist(seed, 4, 30, 1).gates)
        assert seen == {
            GateOp.AND,
            GateOp.OR,
            GateOp.XOR,
            GateOp.NAND,
            GateOp.NOR,
            GateOp.XNOR,
            GateOp.NOT,
            GateOp.BUF,
        }

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            random_netlist(0, 0, 1, 1)
        with pytest.raises(ValueError):
            random_netlist(0, 1, 1, 2)


class TestValidate:
    def test_hand_built_cycle(self):
        n = GateNetlist(
            "loop",
            ("a",),
            ("y",),
            (
                Gate("p", GateOp.AND, ("q", "a")),
                Gate("q", GateOp.AND, ("p", "a")),
                Gate("y", GateOp.OR, ("p", "q")),
            ),
        )
        with pytest.raises(CycleError):
            n.validate()

    def test_arity_mismatch(self):
        n = GateNetlist("t", ("a",), ("y",), (Gate("y", GateOp.AND, ("a",)),))
        with pytest.raises(Exception):
            n.validate()

    def test_forward_reference_is_fine(self):
        # declaration order need not be topological
        n = GateNetlist(
            "fwd",
            ("a",),
            ("y",),
            (Gate("y", GateOp.NOT, ("w",)), Gate("w", GateOp.BUF, ("a",))),
        )
        n.validate()
        assert reference_eval(n, {"a": 1})["y"] == 0

    def test_po_aliasing_pi_is_valid_netlist(self):
        n = GateNetlist("alias", ("a",), ("a",), (Gate("w", GateOp.BUF, ("a",)),))
        n.validate()
        assert reference_eval(n, {"a": 1})["a"] == 1
