import pytest

from dsplogic import parse_netlist

# 4-input AND built from three 2-input ANDs; two levels of two/one gates.
G1_SRC = """\
// example 1: out = a & b & c & d
module g1 (a, b, c, d, out);
input a, b, c, d;
output out;
wire w1, w2;
assign w1 = a & b;
assign w2 = c & d;
assign out = w1 & w2;
endmodule
"""

# 7-gate, 3-level mix of XOR/OR/AND over 4 inputs.
G2_SRC = """\
module g2 (a, b, c, d, out);
input a, b, c, d;
output out;
wire w1, w2, w3, w4, w5, w6;
assign w1 = b ^ c;
assign w2 = b ^ a;
assign w3 = d ^ a;
assign w4 = d | c;
assign w5 = w1 ^ w3;
assign w6 = w2 & w4;
assign out = w6 & w5;
endmodule
"""


@pytest.fixture(scope="session")
def g1():
    return parse_netlist(G1_SRC)


@pytest.fixture(scope="session")
def g2():
    return parse_netlist(G2_SRC)
