"""Toy state spaces for exercising the engine without districting plans."""

import numpy as np


class PathWalk:
    """Random walk on 0..top, +/-1 per step, reflecting at both ends."""

    def __init__(self, top):
        self.top = top

    def __call__(self, state, b, rng):
        out = []
        for _ in range(b):
            if state == 0:
                state = 1
            elif state == self.top:
                state = self.top - 1
            else:
                state += 1 if rng.random() < 0.5 else -1
            out.append(state)
        return out


def trap_scores(b):
    """Scores that strand the walk at 0: f(0)=b+1, f(i)=b+1-i, f(b+2)=b+2."""

    def f(i):
        if i == 0:
            return (float(b + 1),)
        if i == b + 2:
            return (float(b + 2),)
        return (float(b + 1 - i),)

    return f


class UniformJump:
    """Every step jumps to a uniformly random state in 0..size-1."""

    def __init__(self, size):
        self.size = size

    def __call__(self, state, b, rng):
        return [int(rng.integers(self.size)) for _ in range(b)]


def table_scores(table):
    table = np.asarray(table, dtype=float)

    def f(i):
        return tuple(float(x) for x in table[i])

    return f
