"""Cartan data, lattices, cocycle signs and weight shifts for a pair (m, n)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence


class RootDataError(ValueError):
    pass


def _det(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant by Gaussian elimination over the rationals."""
    a = [[Fraction(x) for x in row] for row in matrix]
    size = len(a)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, size):
            f = a[r][col] / a[col][col]
            if f:
                for k in range(col, size):
                    a[r][k] -= f * a[col][k]
    return det


def _inverse(matrix: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    size = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(size)]
         for i, row in enumerate(matrix)]
    for col in range(size):
        pivot = next(r for r in range(col, size) if a[r][col] != 0)
        a[col], a[pivot] = a[pivot], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(size):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[size:] for row in a]


@dataclass(frozen=True)
class WeightVector:
    """Integer combination of the alpha-bar_i (i in I), the c_j and the Lambda-bar_i.

    ``alpha[i-1]`` is the multiplicity of alpha-bar_i, ``c[j-m]`` that of c_j and
    ``wt[i-1]`` that of Lambda-bar_i.
    """

    m: int
    n: int
    alpha: tuple[int, ...]
    c: tuple[int, ...]
    wt: tuple[int, ...]

    def __add__(self, other: "WeightVector") -> "WeightVector":
        _same_shape(self, other)
        return WeightVector(self.m, self.n,
                            tuple(a + b for a, b in zip(self.alpha, other.alpha)),
                            tuple(a + b for a, b in zip(self.c, other.c)),
                            tuple(a + b for a, b in zip(self.wt, other.wt)))

    def __neg__(self) -> "WeightVector":
        return self.scale(-1)

    def __sub__(self, other: "WeightVector") -> "WeightVector":
        return self + (-other)

    def scale(self, k: int) -> "WeightVector":
        return WeightVector(self.m, self.n, tuple(k * a for a in self.alpha),
                            tuple(k * a for a in self.c), tuple(k * a for a in self.wt))

    @property
    def parity(self) -> int:
        return self.alpha[self.m - 1] % 2

    @property
    def lattice_coords(self) -> tuple[int, ...]:
        """Coordinates in Q = Q_{m|n} + Q_c (alpha part followed by c part)."""
        return self.alpha + self.c


def _same_shape(x: WeightVector, y: WeightVector) -> None:
    if (x.m, x.n) != (y.m, y.n):
        raise RootDataError(f"weights belong to different data: {(x.m, x.n)} vs {(y.m, y.n)}")


@dataclass(frozen=True)
class WeightSpec:
    """Highest weight label: ``Lambda_i`` with i not in {0, m}, or ``(1-a)Lambda_0 + a Lambda_m``."""

    kind: str  # "fundamental" or "mixed"
    value: int

    @classmethod
    def fundamental(cls, i: int) -> "WeightSpec":
        return cls("fundamental", i)

    @classmethod
    def mixed(cls, a: int) -> "WeightSpec":
        if not isinstance(a, int):
            raise RootDataError(f"a must be an integer, got {a!r}")
        return cls("mixed", a)

    @classmethod
    def parse(cls, token: str, m: int | None = None) -> "WeightSpec":
        """Parse ``L0``, ``L<i>`` or ``aLm:<int>``; ``L<m>`` is read as a = 1."""
        token = token.strip()
        hit = re.fullmatch(r"aLm:(-?\d+)", token)
        if hit:
            return cls.mixed(int(hit.group(1)))
        hit = re.fullmatch(r"L(\d+)", token)
        if hit:
            i = int(hit.group(1))
            if i == 0:
                return cls.mixed(0)
            if m is not None and i == m:
                return cls.mixed(1)
            return cls.fundamental(i)
        raise RootDataError(f"unparseable weight token {token!r} (expected L0, L<i> or aLm:<int>)")

    @property
    def token(self) -> str:
        if self.kind == "mixed":
            return "L0" if self.value == 0 else f"aLm:{self.value}"
        return f"L{self.value}"


class RootDatum:
    """All combinatorial data attached to (m, n) with the standard parity."""

    def __init__(self, m: int, n: int):
        if not (isinstance(m, int) and isinstance(n, int)) or m < 1 or n < 1:
            raise RootDataError(f"m and n must be positive integers, got {(m, n)}")
        if m == n:
            raise RootDataError("m = n is excluded")
        self.m, self.n = m, n
        self.size = m + n
        self.N = m + n - 1
        self.nodes = tuple(range(self.size))
        self.I = tuple(range(1, self.size))
        self.plus = tuple(range(1, m))
        self.minus = tuple(range(m + 1, self.size))
        self.odd = (0, m)
        self.c_indices = tuple(range(m, self.size))
        self.A_hat = self._build_cartan()
        self.M_hat = self._build_skew()
        self.A = tuple(row[1:] for row in self.A_hat[1:])
        self.parity = tuple(int(i in self.odd) for i in self.nodes)

    def _build_cartan(self):
        m, size = self.m, self.size
        a = [[0] * size for _ in range(size)]
        for i in range(size):
            a[i][i] = 2 if i in self.plus else (-2 if i in self.minus else 0)
        for i in range(size):
            j = (i + 1) % size
            value = -1 if i < m else 1
            a[i][j] += value
            a[j][i] += value
        return tuple(tuple(r) for r in a)

    def _build_skew(self):
        m, size = self.m, self.size
        mm = [[0] * size for _ in range(size)]
        for i in range(1, m + 1):
            mm[i - 1][i] = -1
            mm[i][i - 1] = 1
        for j in list(self.minus) + [0]:
            mm[(j - 1) % size][j] = 1
            mm[j][(j - 1) % size] = -1
        return tuple(tuple(r) for r in mm)

    def __repr__(self) -> str:
        return f"RootDatum(m={self.m}, n={self.n})"

    def __eq__(self, other) -> bool:
        return isinstance(other, RootDatum) and (self.m, self.n) == (other.m, other.n)

    def __hash__(self) -> int:
        return hash((self.m, self.n))

    def check_index(self, i: int) -> None:
        if i not in self.nodes:
            raise RootDataError(f"index {i} outside 0..{self.N}")

    # determinants ------------------------------------------------------
    @cached_property
    def det_A(self) -> int:
        return int(_det(self.A))

    @cached_property
    def det_A_hat(self) -> int:
        return int(_det(self.A_hat))

    @cached_property
    def A_inverse(self) -> list[list[Fraction]]:
        return _inverse(self.A)

    # weights ------------------------------------------------------------
    def zero(self) -> WeightVector:
        return WeightVector(self.m, self.n, (0,) * self.N, (0,) * self.n, (0,) * self.N)

    def simple_root(self, i: int) -> WeightVector:
        """alpha-bar_i; for i = 0 this is minus the sum of the others."""
        self.check_index(i)
        alpha = tuple(-1 for _ in self.I) if i == 0 else tuple(int(k == i) for k in self.I)
        return WeightVector(self.m, self.n, alpha, (0,) * self.n, (0,) * self.N)

    def c_vector(self, j: int) -> WeightVector:
        if j not in self.c_indices:
            raise RootDataError(f"c_{j} undefined: index must lie in {self.c_indices}")
        return WeightVector(self.m, self.n, (0,) * self.N,
                            tuple(int(k == j) for k in self.c_indices), (0,) * self.N)

    def fundamental_weight(self, i: int) -> WeightVector:
        if i not in self.I:
            raise RootDataError(f"Lambda-bar_{i} undefined")
        return WeightVector(self.m, self.n, (0,) * self.N, (0,) * self.n,
                            tuple(int(k == i) for k in self.I))

    def weight(self, alpha: Sequence[int] = (), c: Sequence[int] = (), wt: Sequence[int] = ()) -> WeightVector:
        alpha = tuple(alpha) or (0,) * self.N
        c = tuple(c) or (0,) * self.n
        wt = tuple(wt) or (0,) * self.N
        if len(alpha) != self.N or len(c) != self.n or len(wt) != self.N:
            raise RootDataError("weight vector has the wrong length")
        return WeightVector(self.m, self.n, alpha, c, wt)

    def pairing(self, x: WeightVector, y: WeightVector):
        """Symmetric bilinear form; an int whenever the value is integral."""
        for v in (x, y):
            if (v.m, v.n) != (self.m, self.n):
                raise RootDataError("weight vector belongs to a different (m, n)")
        A, N = self.A, self.N
        total = Fraction(0)
        for i in range(N):
            if x.alpha[i]:
                total += x.alpha[i] * (sum(A[i][j] * y.alpha[j] for j in range(N)) + y.wt[i])
            if x.wt[i]:
                total += x.wt[i] * y.alpha[i]
                if any(y.wt):
                    total += x.wt[i] * sum(self.A_inverse[i][j] * y.wt[j] for j in range(N))
        total += sum(a * b for a, b in zip(x.c, y.c))
        return int(total) if total.denominator == 1 else total

    def in_q_tilde(self, x: WeightVector) -> bool:
        """Membership in the sublattice generated by alpha_i, alpha_m + c_m, alpha_j + c_j - c_{j-1}."""
        if any(x.wt):
            return False
        a = x.alpha
        expect = tuple(a[j - 1] - (a[j] if j < self.N else 0) for j in self.c_indices)
        return x.c == expect

    def q_tilde_point(self, coords: Sequence[int]) -> WeightVector:
        """Point of Q-tilde with the given generator coordinates."""
        coords = tuple(coords)
        c = tuple(coords[j - 1] - (coords[j] if j < self.N else 0) for j in self.c_indices)
        return WeightVector(self.m, self.n, coords, c, (0,) * self.N)

    def tilde_weight(self, spec: WeightSpec) -> WeightVector:
        if spec.kind == "fundamental":
            i = spec.value
            if i not in self.I or i in self.odd:
                raise RootDataError(f"Lambda_{i}: index must lie in I without {{0, m}}")
            base = self.fundamental_weight(i)
            if i in self.plus:
                return base
            return base - _sum_c(self, range(i, self.size))
        if spec.kind == "mixed":
            a = spec.value
            if not isinstance(a, int):
                raise RootDataError("a must be an integer")
            return (self.fundamental_weight(self.m) - _sum_c(self, range(self.m, self.size))).scale(a)
        raise RootDataError(f"unknown weight kind {spec.kind!r}")

    # cocycle -------------------------------------------------------------
    def epsilon(self, i: int, j: int) -> int:
        self.check_index(i)
        self.check_index(j)
        signed = set(self.plus) | {self.m}
        if i in signed and j in signed and i > j:
            return -1 if self.A_hat[i][j] % 2 else 1
        if i == 0 and j in (1, self.m):
            return -1 if (1 + int(self.m == 1)) % 2 else 1
        return 1

    @cached_property
    def braid_table(self) -> tuple[tuple[int, ...], ...]:
        """sigma(k, l) = eps(k, l) eps(l, k): the swap sign of e^{alpha_k} and e^{alpha_l}."""
        return tuple(tuple(self.epsilon(k, l) * self.epsilon(l, k) for l in self.nodes) for k in self.nodes)

    def epsilon_form(self, x: Sequence[int], y: Sequence[int]) -> int:
        """Bimultiplicative extension over alpha coordinates (indices 1..N)."""
        odd = 0
        for i, a in zip(self.I, x):
            if a:
                for j, b in zip(self.I, y):
                    if b and self.epsilon(i, j) == -1:
                        odd += a * b
        return -1 if odd % 2 else 1

    def reorder_sign(self, x: Sequence[int], y: Sequence[int]) -> int:
        """Sign with e^x e^y = sign * e^{x+y} for ordered-product basis elements."""
        table = self.braid_table
        odd = 0
        N = self.N
        for k in range(N):
            if x[k]:
                for l in range(k):
                    if y[l] and table[k + 1][l + 1] == -1:
                        odd += x[k] * y[l]
        return -1 if odd % 2 else 1


def _sum_c(datum: RootDatum, indices) -> WeightVector:
    total = datum.zero()
    for j in indices:
        total = total + datum.c_vector(j)
    return total


@lru_cache(maxsize=None)
def build_root_datum(m: int, n: int) -> RootDatum:
    return RootDatum(m, n)


@dataclass
class SymmetryReport:
    m: int
    n: int
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def check_diagram_symmetries(m: int, n: int) -> SymmetryReport:
    """Index-level compatibilities behind the diagram flip and the (m|n) <-> (n|m) swap."""
    rd = build_root_datum(m, n)
    dual = build_root_datum(n, m)
    size = rd.size
    flip = [(m - i) % size for i in rd.nodes]
    neg = [(-i) % size for i in rd.nodes]
    pairs = [(i, j) for i in rd.nodes for j in rd.nodes]
    rep = SymmetryReport(m, n)
    rep.checks["flip_cartan"] = all(rd.A_hat[flip[i]][flip[j]] == rd.A_hat[i][j] for i, j in pairs)
    rep.checks["flip_skew_sign"] = all(rd.M_hat[flip[i]][flip[j]] == -rd.M_hat[i][j] for i, j in pairs)
    rep.checks["swap_cartan"] = all(dual.A_hat[neg[i]][neg[j]] == -rd.A_hat[i][j] for i, j in pairs)
    rep.checks["swap_skew"] = all(dual.M_hat[neg[i]][neg[j]] == rd.M_hat[i][j] for i, j in pairs)
    rep.checks["cartan_symmetric"] = all(rd.A_hat[i][j] == rd.A_hat[j][i] for i, j in pairs)
    rep.checks["skew_antisymmetric"] = all(rd.M_hat[i][j] == -rd.M_hat[j][i] for i, j in pairs)
    rep.checks["rows_sum_zero"] = all(sum(row) == 0 for row in rd.A_hat)
    rep.checks["det_hat_zero"] = rd.det_A_hat == 0
    rep.checks["abs_det_A"] = abs(rd.det_A) == abs(m - n)
    return rep
