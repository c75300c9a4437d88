"""Heisenberg oscillators and the lattice Fock spaces F_Lambda.

A basis vector is a pair ``(mono, lat)``:

* ``mono`` is a sorted tuple of ``(osc, r)`` with ``r > 0``, standing for the
  creation mode of oscillator ``osc`` at level ``-r``.  Oscillators ``0..N``
  are the ``H_i`` (one per node), ``N+1..N+n`` are ``c_m..c_N``.
* ``lat`` is the lattice point in Q coordinates: the alpha-bar part followed
  by the c part.  The weight shift Lambda-tilde is implicit.

Vectors are plain ``dict`` objects mapping basis keys to nonzero Scalars.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .rootdata import RootDatum, RootDataError, WeightSpec, WeightVector, build_root_datum
from .scalar import ONE, Scalar, d_half, q_pow, qint

Basis = tuple  # (mono, lat)
Vector = dict  # Basis -> Scalar


class FockError(ValueError):
    pass


@dataclass(frozen=True)
class HeisenbergMode:
    kind: str  # "H" or "c"
    index: int
    level: int


def add_into(target: Vector, source: Mapping, coeff: Scalar | None = None) -> None:
    """target += coeff * source, dropping cancelled entries."""
    for key, val in source.items():
        if coeff is not None:
            val = val * coeff
        old = target.get(key)
        if old is None:
            if not val.is_zero():
                target[key] = val
        else:
            new = old + val
            if new.is_zero():
                del target[key]
            else:
                target[key] = new


def combine(*pairs) -> Vector:
    """Linear combination of (coeff, vector) pairs."""
    out: Vector = {}
    for coeff, vec in pairs:
        add_into(out, vec, coeff)
    return out


def merge_mono(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


class FockModule:
    """The space F_Lambda (and its ambient lattice extension) for fixed (m, n, Lambda)."""

    def __init__(self, datum: RootDatum | tuple[int, int], spec: WeightSpec | str = "L0"):
        if isinstance(datum, tuple):
            datum = build_root_datum(*datum)
        if isinstance(spec, str):
            spec = WeightSpec.parse(spec, datum.m)
        self.datum = datum
        self.spec = spec
        self.lam = datum.tilde_weight(spec)
        rd = datum
        self.N = rd.N
        self.n_osc = rd.size + rd.n
        self.lam_alpha = tuple(rd.pairing(rd.simple_root(i), self.lam) for i in rd.nodes)
        self.lam_c = tuple(rd.pairing(rd.c_vector(j), self.lam) for j in rd.c_indices)
        self._comm_cache: dict = {}

    # oscillator bookkeeping -------------------------------------------
    def osc_of(self, kind: str, index: int) -> int:
        if kind == "H":
            self.datum.check_index(index)
            return index
        if kind == "c":
            if index not in self.datum.c_indices:
                raise FockError(f"c_{index} undefined")
            return self.datum.size + index - self.datum.m
        raise FockError(f"unknown oscillator kind {kind!r}")

    def osc_label(self, osc: int) -> tuple[str, int]:
        if osc < self.datum.size:
            return "H", osc
        return "c", osc - self.datum.size + self.datum.m

    def comm(self, r: int, a: int, b: int) -> Scalar:
        """[X_{a,r}, X_{b,-r}] for r > 0."""
        key = (r, a, b)
        val = self._comm_cache.get(key)
        if val is None:
            val = self._comm_cache[key] = self._commutator(r, a, b)
        return val

    def _commutator(self, r: int, a: int, b: int) -> Scalar:
        size = self.datum.size
        if a < size and b < size:
            A = self.datum.A_hat[a][b]
            if A == 0:
                return Scalar.from_number(0)
            M = self.datum.M_hat[a][b]
            return qint(r * A) * qint(r) * d_half(-2 * r * M) / r
        if a >= size and b >= size:
            return qint(r) ** 2 / r if a == b else Scalar.from_number(0)
        return Scalar.from_number(0)

    # pairings with alpha + Lambda-tilde ----------------------------------
    def pair_alpha(self, i: int, lat: tuple) -> int:
        row = self.datum.A_hat[i]
        return sum(row[l + 1] * lat[l] for l in range(self.N) if lat[l]) + self.lam_alpha[i]

    def pair_c(self, j: int, lat: tuple) -> int:
        k = j - self.datum.m
        return lat[self.N + k] + self.lam_c[k]

    def d_exponent(self, i: int, lat: tuple) -> int:
        """Twice the exponent of d in the zero-mode factor of z^{H_{i,0}}."""
        A, M = self.datum.A_hat[i], self.datum.M_hat[i]
        return sum(lat[l - 1] * A[l] * M[l] for l in self.datum.I if lat[l - 1])

    def full_weight(self, lat: tuple) -> WeightVector:
        rd = self.datum
        return rd.weight(lat[: self.N], lat[self.N:]) + self.lam

    def energy(self, basis: Basis) -> Fraction:
        """Creation level plus 1/2<l,l> + 1/2 sum_j <c_j,l> with l = alpha + Lambda-tilde.

        Every current mode X_k lowers this by exactly k.
        """
        mono, lat = basis
        lam = self.full_weight(lat)
        quad = Fraction(self.datum.pairing(lam, lam))
        lin = sum(Fraction(self.pair_c(j, lat)) for j in self.datum.c_indices)
        return sum(r for _, r in mono) + quad / 2 + lin / 2

    # vectors ---------------------------------------------------------
    def vacuum(self, lat: tuple | WeightVector | None = None) -> Vector:
        return {((), self.lattice_tuple(lat)): ONE}

    def lattice_tuple(self, lat) -> tuple:
        if lat is None:
            return (0,) * (self.N + self.datum.n)
        if isinstance(lat, WeightVector):
            if any(lat.wt):
                raise FockError("lattice points carry no fundamental-weight part")
            return lat.lattice_coords
        lat = tuple(lat)
        if len(lat) == self.N:
            return self.datum.q_tilde_point(lat).lattice_coords
        if len(lat) != self.N + self.datum.n:
            raise FockError("lattice tuple has the wrong length")
        return lat

    def basis_vector(self, modes: Iterable[HeisenbergMode], lat=None) -> Vector:
        mono = []
        for md in modes:
            if md.level >= 0:
                raise FockError("creation modes have negative level")
            mono.append((self.osc_of(md.kind, md.index), -md.level))
        return {(tuple(sorted(mono)), self.lattice_tuple(lat)): ONE}

    def parity(self, basis: Basis) -> int:
        return basis[1][self.datum.m - 1] % 2

    def vector_parity(self, vec: Mapping) -> int | None:
        """Common parity of all terms, or None for mixed vectors."""
        ps = {self.parity(b) for b in vec}
        return ps.pop() if len(ps) == 1 else (0 if not ps else None)

    # operators ---------------------------------------------------------
    def apply_heisenberg(self, mode: HeisenbergMode, vec: Mapping) -> Vector:
        if mode.level == 0:
            raise FockError("zero modes are separate operators")
        osc = self.osc_of(mode.kind, mode.index)
        out: Vector = {}
        if mode.level < 0:
            r = -mode.level
            for (mono, lat), val in vec.items():
                add_into(out, {(merge_mono(mono, ((osc, r),)), lat): val})
            return out
        r = mode.level
        for (mono, lat), val in vec.items():
            seen = set()
            for pos, (o, s) in enumerate(mono):
                if s != r or (o, s) in seen:
                    continue
                seen.add((o, s))
                g = self.comm(r, osc, o)
                if g.is_zero():
                    continue
                mult = mono.count((o, s))
                rest = mono[:pos] + mono[pos + 1:]
                add_into(out, {(rest, lat): val * g * mult})
        return out

    def apply_lattice(self, beta: WeightVector, vec: Mapping) -> Vector:
        if not self.datum.in_q_tilde(beta):
            raise FockError("lattice shift must lie in Q-tilde")
        return self.shift_lattice(beta.alpha, beta.c, 1, vec)

    def shift_lattice(self, alpha: tuple, c: tuple, extra_sign: int, vec: Mapping) -> Vector:
        """Left multiplication by extra_sign * e^{(alpha, c)} in the ordered-product basis."""
        out: Vector = {}
        N = self.N
        for (mono, lat), val in vec.items():
            sign = extra_sign * self.datum.reorder_sign(alpha, lat[:N])
            new = tuple(a + b for a, b in zip(lat, alpha + c))
            out[(mono, new)] = val if sign == 1 else -val
        return out

    def apply_zero_mode(self, kind: str, index: int, sign: int, vec: Mapping) -> dict[int, Vector]:
        """``kind`` is "zH" (z^{+-H_{i,0}}), "qa" (q^{+-alpha_{i,0}}) or "zc" (z^{+-c_{j,0}})."""
        if sign not in (1, -1):
            raise FockError("sign must be +1 or -1")
        out: dict[int, Vector] = {}
        for basis, val in vec.items():
            lat = basis[1]
            if kind == "zH":
                e = sign * self.pair_alpha(index, lat)
                val = val * d_half(sign * self.d_exponent(index, lat))
            elif kind == "qa":
                e = 0
                val = val * q_pow(sign * self.pair_alpha(index, lat))
            elif kind == "zc":
                e = sign * self.pair_c(index, lat)
            else:
                raise FockError(f"unknown zero mode {kind!r}")
            add_into(out.setdefault(e, {}), {basis: val})
        return {e: v for e, v in out.items() if v}

    # test sets ---------------------------------------------------------
    def creation_monomials(self, degree: int) -> list[tuple]:
        return creation_monomials(self.n_osc, degree)

    def lattice_ball(self, radius: int) -> list[tuple]:
        return [self.datum.q_tilde_point(p).lattice_coords
                for p in itertools.product(range(-radius, radius + 1), repeat=self.N)]

    def test_basis(self, degree: int, radius: int) -> list[Basis]:
        return [(mono, lat) for lat in self.lattice_ball(radius) for mono in self.creation_monomials(degree)]

    def describe(self, basis: Basis) -> str:
        mono, lat = basis
        parts = []
        for osc, r in mono:
            kind, idx = self.osc_label(osc)
            parts.append(f"{kind}_{idx},{-r}")
        return f"[{' '.join(parts) or 'v0'}] e^{list(lat)}"


@lru_cache(maxsize=None)
def creation_monomials(n_osc: int, degree: int) -> list[tuple]:
    """All creation monomials with total level at most ``degree``."""
    out: list[tuple] = []

    def extend(prefix: list, budget: int, start: tuple):
        out.append(tuple(prefix))
        for osc in range(n_osc):
            for r in range(1, budget + 1):
                if (osc, r) < start:
                    continue
                prefix.append((osc, r))
                extend(prefix, budget - r, (osc, r))
                prefix.pop()

    extend([], degree, (0, 0))
    return out


def iter_terms(vec: Mapping) -> Iterator[tuple[Basis, Scalar]]:
    return iter(sorted(vec.items(), key=lambda kv: repr(kv[0])))
