import math

import numpy as np

from weaklight import PolarizationState, SelectionPair


def random_state(rng):
    v = rng.normal(size=4)
    z1 = complex(v[0], v[1])
    z2 = complex(v[2], v[3])
    norm = math.sqrt(abs(z1) ** 2 + abs(z2) ** 2)
    return PolarizationState(z1 / norm, z2 / norm)


def random_pair(rng):
    return SelectionPair(random_state(rng), random_state(rng))


def op_matrix(op):
    return np.array([[op.m11, op.m12], [op.m21, op.m22]])


def max_entry_diff(op, matrix):
    return float(np.max(np.abs(op_matrix(op) - np.asarray(matrix))))
