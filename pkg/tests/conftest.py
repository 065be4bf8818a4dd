"""Shared brute-force oracles, independent of the engines under test."""

import itertools

import numpy as np
import pytest

from fqmatroid.fqlinalg import make_field


def brute_rank(field, cols):
    """Rank by textbook elimination using only FieldSpec arithmetic."""
    basis = []
    for col in cols:
        v = list(col)
        for b in basis:
            lead = next(i for i, x in enumerate(b) if x)
            if v[lead]:
                f = field.mul(v[lead], field.inv(b[lead]))
                v = [field.sub(x, field.mul(f, y)) for x, y in zip(v, b)]
        if any(v):
            basis.append(v)
    return len(basis)


def all_matrices(q, n, m):
    """Every n x m column tuple over F_q, as tuples of columns."""
    cols = list(itertools.product(range(q), repeat=n))
    return itertools.product(cols, repeat=m)


def random_cols(q, n, m, rng):
    return [tuple(int(x) for x in rng.integers(0, q, size=n)) for _ in range(m)]


def field_tables(field):
    """Dense (q, q) add/mul tables for vectorized axiom sweeps."""
    q = field.q
    add = np.empty((q, q), dtype=np.int64)
    mul = np.empty((q, q), dtype=np.int64)
    for a in range(q):
        for b in range(q):
            add[a, b] = field.add(a, b)
            mul[a, b] = field.mul(a, b)
    return add, mul


def axiom_violations(field):
    """Count of field-axiom failures over all pairs/triples (0 for a field)."""
    q = field.q
    add, mul = field_tables(field)
    e = np.arange(q)
    bad = 0
    bad += int((add != add.T).sum()) + int((mul != mul.T).sum())
    bad += int((add[0] != e).sum()) + int((mul[1] != e).sum())
    bad += int((mul[0] != 0).sum())
    # every element has an additive inverse, every nonzero a multiplicative one
    bad += int((np.sort(add, axis=1) != e).sum())  # rows are permutations
    bad += int((np.sort(mul[1:, 1:], axis=1) != e[1:]).sum())
    a = e[:, None, None]
    b = e[None, :, None]
    c = e[None, None, :]
    bad += int((add[add[a, b], c] != add[a, add[b, c]]).sum())
    bad += int((mul[mul[a, b], c] != mul[a, mul[b, c]]).sum())
    bad += int((mul[a, add[b, c]] != add[mul[a, b], mul[a, c]]).sum())
    return bad


@pytest.fixture
def f2():
    return make_field(2)


@pytest.fixture
def f3():
    return make_field(3)


@pytest.fixture
def f4():
    return make_field(4)
