"""Exact rational sparse matrices (dictionary of keys)."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

import numpy as np
import scipy.sparse as sp


class RationalMatrix:
    """Sparse matrix with exact Fraction (or int) entries."""

    __slots__ = ("shape", "data")

    def __init__(self, shape, data=None):
        self.shape = (int(shape[0]), int(shape[1]))
        self.data = {} if data is None else {k: v for k, v in data.items() if v != 0}

    @classmethod
    def from_dense(cls, rows) -> "RationalMatrix":
        n = len(rows)
        m = len(rows[0]) if n else 0
        data = {}
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                if v != 0:
                    data[(i, j)] = Fraction(v)
        return cls((n, m), data)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls((n, n), {(i, i): Fraction(1) for i in range(n)})

    @property
    def nnz(self) -> int:
        return len(self.data)

    def __getitem__(self, key):
        return self.data.get(key, Fraction(0))

    def add(self, i: int, j: int, v) -> None:
        if v == 0:
            return
        s = self.data.get((i, j), 0) + v
        if s == 0:
            self.data.pop((i, j), None)
        else:
            self.data[(i, j)] = s

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix((self.shape[1], self.shape[0]), {(j, i): v for (i, j), v in self.data.items()})

    @property
    def T(self) -> "RationalMatrix":
        return self.transpose()

    def is_symmetric(self) -> bool:
        return self.shape[0] == self.shape[1] and all(
            self.data.get((j, i), 0) == v for (i, j), v in self.data.items()
        )

    def scaled(self, s) -> "RationalMatrix":
        s = Fraction(s)
        return RationalMatrix(self.shape, {k: v * s for k, v in self.data.items()})

    def __mul__(self, s):
        return self.scaled(s)

    __rmul__ = __mul__

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        out = RationalMatrix(self.shape, self.data)
        for (i, j), v in other.data.items():
            out.add(i, j, v)
        return out

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self + other.scaled(-1)

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalMatrix) and self.shape == other.shape and self.data == other.data

    def rows(self) -> dict:
        out = defaultdict(dict)
        for (i, j), v in self.data.items():
            out[i][j] = v
        return out

    def cols(self) -> dict:
        out = defaultdict(dict)
        for (i, j), v in self.data.items():
            out[j][i] = v
        return out

    def matmul(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape[1] != other.shape[0]:
            raise ValueError("shape mismatch")
        orow = other.rows()
        acc: dict = defaultdict(Fraction)
        for (i, k), v in self.data.items():
            r = orow.get(k)
            if r:
                for j, w in r.items():
                    acc[(i, j)] += v * w
        return RationalMatrix((self.shape[0], other.shape[1]), acc)

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            return self.matmul(other)
        return self.matvec(other)

    def congruence(self, z: "RationalMatrix") -> "RationalMatrix":
        """Exact Z^T A Z."""
        return z.transpose().matmul(self.matmul(z))

    def matvec(self, v) -> list:
        out = [Fraction(0)] * self.shape[0]
        for (i, j), a in self.data.items():
            if v[j]:
                out[i] += a * v[j]
        return out

    def quad(self, v, w=None):
        """Exact v^T A w (w defaults to v)."""
        w = v if w is None else w
        s = Fraction(0)
        for (i, j), a in self.data.items():
            if v[i] and w[j]:
                s += a * v[i] * w[j]
        return s

    def to_dense(self) -> list:
        out = [[Fraction(0)] * self.shape[1] for _ in range(self.shape[0])]
        for (i, j), v in self.data.items():
            out[i][j] = v
        return out

    def to_scipy(self) -> sp.csr_matrix:
        if not self.data:
            return sp.csr_matrix(self.shape)
        keys = list(self.data.keys())
        r = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
        c = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
        v = np.fromiter((float(self.data[k]) for k in keys), dtype=float, count=len(keys))
        return sp.csr_matrix((v, (r, c)), shape=self.shape)

    def to_numpy(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def __repr__(self) -> str:
        return f"RationalMatrix(shape={self.shape}, nnz={self.nnz})"


def rref_nullspace(rows: list, n: int) -> tuple[list, int]:
    """Exact null-space basis (as column lists) of the constraint rows.

    Returns ``(basis, rank)`` where ``basis`` is a list of length-``n`` vectors.
    """
    mat = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    pivot_set = set(pivots)
    basis = []
    for free in range(n):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * n
        v[free] = Fraction(1)
        for row, pc in enumerate(pivots):
            v[pc] = -mat[row][free]
        basis.append(v)
    return basis, len(pivots)


def exact_rank(rows: list) -> int:
    if not rows:
        return 0
    return rref_nullspace(rows, len(rows[0]))[1]


def columns_to_matrix(cols: list, n: int) -> RationalMatrix:
    data = {}
    for j, col in enumerate(cols):
        for i, v in enumerate(col):
            if v != 0:
                data[(i, j)] = Fraction(v)
    return RationalMatrix((n, len(cols)), data)
