"""Finite groups given by multiplication tables."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np


class InvalidGroupTable(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Group with elements ``0..n-1`` and ``table[a, b] = a * b``."""

    table: np.ndarray
    name: str = "group"
    labels: tuple = field(default=())

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        object.__setattr__(self, "table", t)
        n = t.shape[0] if t.ndim == 2 else 0
        if t.ndim != 2 or t.shape != (n, n) or n == 0:
            raise InvalidGroupTable("multiplication table must be a nonempty square array")
        expected = np.arange(n)
        if np.any(t < 0) or np.any(t >= n):
            raise InvalidGroupTable("table entries must be element indices")
        if not all(np.array_equal(np.sort(row), expected) for row in t):
            raise InvalidGroupTable("rows are not permutations (not a Latin square)")
        if not all(np.array_equal(np.sort(col), expected) for col in t.T):
            raise InvalidGroupTable("columns are not permutations (not a Latin square)")
        if n <= 128:
            # (ab)c == a(bc) for all a, b, c
            lhs = t[t[:, :, None], np.arange(n)[None, None, :]]
            rhs = t[np.arange(n)[:, None, None], t[None, :, :]]
            if not np.array_equal(lhs, rhs):
                raise InvalidGroupTable("multiplication is not associative")
        if self.identity is None:
            raise InvalidGroupTable("no identity element")

    @property
    def order(self):
        return self.table.shape[0]

    @property
    def identity(self):
        n = self.order
        for e in range(n):
            if np.array_equal(self.table[e], np.arange(n)):
                return e
        return None

    def inverse(self, a):
        return int(np.nonzero(self.table[a] == self.identity)[0][0])


def cyclic(n):
    if n < 1:
        raise ValueError("cyclic group order must be positive")
    idx = np.arange(n)
    return FiniteGroup((idx[:, None] + idx[None, :]) % n, name=f"cyclic-{n}")


def dihedral(n):
    """Symmetries of the regular ``n``-gon; element ``a + n b`` is ``r^a s^b``."""
    if n < 2:
        raise ValueError("dihedral group needs n >= 2")
    size = 2 * n
    table = np.empty((size, size), dtype=np.int64)
    for x in range(size):
        a, b = x % n, x // n
        for y in range(size):
            c, d = y % n, y // n
            table[x, y] = (a + (-1) ** b * c) % n + n * ((b + d) % 2)
    return FiniteGroup(table, name=f"dihedral-{n}")


def symmetric_group(k=4):
    perms = list(itertools.permutations(range(k)))
    index = {p: i for i, p in enumerate(perms)}
    size = len(perms)
    table = np.empty((size, size), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            # (p q)(x) = p(q(x))
            table[i, j] = index[tuple(p[q[x]] for x in range(k))]
    return FiniteGroup(table, name=f"symmetric-{k}", labels=tuple(perms))


def default_generators(group):
    """Symmetric generating sets used by the named presets."""
    name = group.name
    if name.startswith("cyclic-"):
        n = group.order
        return sorted({1 % n, (n - 1) % n})
    if name.startswith("dihedral-"):
        n = group.order // 2
        return sorted({1 % n, (n - 1) % n, n})
    if name.startswith("symmetric-"):
        k = len(group.labels[0])
        gens = []
        for i in range(k - 1):
            p = list(range(k))
            p[i], p[i + 1] = p[i + 1], p[i]
            gens.append(group.labels.index(tuple(p)))
        return sorted(gens)
    raise ValueError(f"no default generators for {name!r}")


def preset(name, order=None):
    if name == "cyclic":
        return cyclic(int(order))
    if name == "dihedral":
        return dihedral(int(order))
    if name in ("symmetric-group-4", "s4", "symmetric"):
        return symmetric_group(4 if order is None else int(order))
    raise ValueError(f"unknown group preset {name!r}")


def read_table_csv(path):
    with open(path, newline="") as fh:
        rows = [[int(v) for v in row] for row in csv.reader(fh) if row]
    return FiniteGroup(np.array(rows), name=f"table:{path}")
