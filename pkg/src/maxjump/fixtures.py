"""Built-in example systems."""

import math
from fractions import Fraction

import numpy as np

from .markov import JumpSystem, validate_chain
from .semiring import MAX_PLUS, MAX_PRODUCT, SemiringMatrix

NEG = -math.inf

# Deterministic 2x2 example and its certificate.
EXAMPLE1_A = [[Fraction(2, 3), 2], [Fraction(1, 3), Fraction(3, 4)]]
EXAMPLE1_P = [2, 5]

# Ratio-dependent example: max-plus parameters, gamma, and the exponentiated form.
NONLINEAR_GAMMA = 5.0
NONLINEAR_MAXPLUS = {"a11": 1.5686, "a22": 1.5686, "a12": 1.7918, "a21": 1.3350}
NONLINEAR_A = [[0.96, 1.2], [0.76, 0.96]]
NONLINEAR_DELTA = -0.15
NONLINEAR_P = [1.0, 1.25]
NONLINEAR_BOX = (1.0, 0.8)

# Two-mode max-product jump system.
MJ_A = [[[1.05, 1.5], [0.4, 0.3]], [[0.5, 0.4], [0.7, 0.3]]]
MJ_CHAIN = [[0.3, 0.7], [0.4, 0.6]]
MJ_P = [[4.0, 6.0], [3.0, 2.0]]

# Three-machine production line, processing times s1, s2, s3.
S1, S2, S3 = 1.0, 2.0, 1.0
PRODUCTION_A = [
    [[S1, NEG, NEG], [2 * S1, S2, NEG], [2 * S1 + S2, 2 * S2, S3]],
    [[S1, 2 * S2, NEG], [NEG, S2, NEG], [2 * S1, S1 + 2 * S2, S3]],
]
PRODUCTION_B = [[[0.0], [S2], [S1 + S2]], [[S2], [0.0], [S1 + S2]]]
PRODUCTION_C = [[NEG, NEG, S3]]
PRODUCTION_CHAIN = [[0.8, 0.2], [0.2, 0.8]]
PRODUCTION_T = 2.5
PRODUCTION_P = [[12.0, 12.0, 1.0], [3.0, 32.0, 1.0]]
PRODUCTION_A_PRIME = [
    [[0.2231, 0.0, 0.0], [0.6065, 0.6065, 0.0], [4.4817, 4.4817, 0.2231]],
    [[0.2231, 4.4817, 0.0], [0.0, 0.6065, 0.0], [0.6065, 12.1825, 0.2231]],
]

# Two modes, both expanding alone; the chain always leaves mode 1.
# No one-step certificate exists (best max delta ~1.114) but a two-step
# one does (best ~0.841).
KSTEP_A = [[[0.0, 0.0], [0.0, 1.2]], [[0.5, 1.2], [1.5, 0.0]]]
KSTEP_CHAIN = [[0.0, 1.0], [0.8, 0.2]]


def example1():
    return SemiringMatrix(EXAMPLE1_A, MAX_PRODUCT)


def nonlinear_linearized():
    return SemiringMatrix(NONLINEAR_A, MAX_PRODUCT)


def mj_example():
    return JumpSystem(MJ_A, algebra=MAX_PRODUCT), validate_chain(MJ_CHAIN)


def production(with_io=True):
    if with_io:
        sys = JumpSystem(PRODUCTION_A, PRODUCTION_B, PRODUCTION_C, algebra=MAX_PLUS)
    else:
        sys = JumpSystem(PRODUCTION_A, algebra=MAX_PLUS)
    return sys, validate_chain(PRODUCTION_CHAIN)


def kstep_example():
    return JumpSystem(KSTEP_A, algebra=MAX_PRODUCT), validate_chain(KSTEP_CHAIN)


def identity_system(n=2):
    return JumpSystem([np.eye(n)], algebra=MAX_PRODUCT), validate_chain([[1.0]])


BUILTIN = {
    "example1": lambda: (JumpSystem([example1().to_float()], algebra=MAX_PRODUCT), validate_chain([[1.0]])),
    "nonlinear": lambda: (JumpSystem([NONLINEAR_A], algebra=MAX_PRODUCT), validate_chain([[1.0]])),
    "mjexample": mj_example,
    "production": production,
    "kstep": kstep_example,
}
