"""Reference values produced by ``oracle.py`` (independent of the package)."""

H_ONE_THIRD = 0.9182958340544896  # h(1/3), 30-digit mpmath
W4_LHS = 0.75
W4_PAIR = 0.25
W3_PAIR = 4 / 9
W3_TAU_A = 0.6666666666666669
W3_E_A = 0.6666666666666666
W3_EOF = 0.5500477595827574
GHZ3_TAU_A = 1.0
GHZ3_E_A = 1.0
SEP_PAIR_TAU_A = 1.0
MIXED_TAU_A = 1.0
