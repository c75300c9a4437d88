"""Vertex operators, the currents E_i, F_i, K_i^+- and their exact modes.

A current is a product of atoms (``Gamma``, ``Cfield``, ``Kfield``) times a
scalar.  :func:`expand_current` resolves every q-difference wrapper through
its defining q-shift formula, so the current becomes a short sum of pure
normal-ordered vertex operators (:class:`VertexTerm`).  Mode extraction then
works one basis vector at a time:

1. zero modes and lattice factors fix a z-power, a scalar and the new lattice point;
2. the annihilation exponential acts as the translation x -> x + kappa * z^-r on
   each creation variable (the commutators are central);
3. the creation exponential contributes its z^n component, with n chosen so
   that the total power is z^-k.
"""

from __future__ import annotations

import time

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Mapping, Sequence

from .fock import Basis, FockModule, Vector, add_into, merge_mono
from .rootdata import RootDatum, RootDataError
from .scalar import ONE, ZERO, Q, Scalar, d_pow, q_pow, qint


class VertexError(ValueError):
    pass


# atoms -------------------------------------------------------------------

@dataclass(frozen=True)
class Gamma:
    """Gamma^+_i(scale*z) for sign=+1, Gamma^-_i(scale*z) for sign=-1."""

    sign: int
    index: int


@dataclass(frozen=True)
class Cfield:
    """C^{sign}_j(scale*z), optionally under the q-difference operator."""

    sign: int
    index: int
    scale: Scalar = ONE
    derivative: bool = False


@dataclass(frozen=True)
class Kfield:
    """K^{sign}_i(z)."""

    sign: int
    index: int


@dataclass(frozen=True)
class CurrentSpec:
    name: str
    parity: int
    prefactor: Scalar
    atoms: tuple

    def __str__(self) -> str:
        return self.name


CONVENTIONS = ("corrected", "literal")


def assemble_current(role: str, index: int, datum: RootDatum, convention: str = "corrected") -> CurrentSpec:
    """The operators of the level-(1,0) free field realisation.

    ``role`` is "E", "F", "K+" or "K-".  Under the default "corrected"
    convention F_i carries an extra factor -1 for i in I^- and i = 0: with the
    q-difference derivative sitting on the E side, [E_i(z), F_i(w)] otherwise
    comes out as minus the K-term.  "literal" keeps the printed formulas.
    """
    if convention not in CONVENTIONS:
        raise VertexError(f"unknown convention {convention!r}")
    datum.check_index(index)
    m, n, N = datum.m, datum.n, datum.N
    i = index
    parity = datum.parity[i] if role in ("E", "F") else 0
    name = f"{role}_{i}"
    if role in ("K+", "K-"):
        return CurrentSpec(name, 0, ONE, (Kfield(1 if role == "K+" else -1, i),))
    if role not in ("E", "F"):
        raise VertexError(f"unknown role {role!r}")
    e = role == "E"
    if i in datum.plus:
        return CurrentSpec(name, parity, ONE, (Gamma(1 if e else -1, i),))
    if i == m:
        s = d_pow(m)
        if e:
            return CurrentSpec(name, parity, s, (Gamma(1, m), Cfield(1, m, s)))
        return CurrentSpec(name, parity, ONE, (Gamma(-1, m), Cfield(-1, m, s, True)))
    if i in datum.minus:
        s = d_pow(2 * m - i)
        if e:
            return CurrentSpec(name, parity, s, (Gamma(1, i), Cfield(1, i, s), Cfield(-1, i - 1, s, True)))
        pre = -s if convention == "corrected" else s
        return CurrentSpec(name, parity, pre, (Gamma(-1, i), Cfield(1, i - 1, s), Cfield(-1, i, s, True)))
    s = d_pow(m - n)
    if e:
        return CurrentSpec(name, parity, ONE, (Gamma(1, 0), Cfield(-1, N, s, True)))
    pre = -s if convention == "corrected" else s
    return CurrentSpec(name, parity, pre, (Gamma(-1, 0), Cfield(1, N, s)))


# pure vertex operators ---------------------------------------------------

@dataclass(frozen=True)
class HalfCurrent:
    """A family contributing ``sign * scale^r * (1/[r] or weight)`` at level r."""

    osc: int
    sign: int
    scale: Scalar
    kind: str  # "vertex" (divide by [r]) or "k" (times (q - q^-1))


@lru_cache(maxsize=None)
def _half_coeff(h: HalfCurrent, r: int) -> Scalar:
    base = h.scale ** r
    if h.kind == "vertex":
        base = base / qint(r)
    else:
        base = base * (Q - Q.inverse())
    return base if h.sign == 1 else -base


@dataclass(frozen=True)
class VertexTerm:
    """prefactor * z^zpow * exp(creation) * exp(annihilation) * zero-mode atoms.

    ``zero`` atoms are listed left to right and applied right to left:
    ("zH", i, sign), ("zc", j, sign, scale), ("qa", i, sign),
    ("lat", alpha, c, extra_sign).
    """

    prefactor: Scalar
    zpow: int
    creation: tuple  # HalfCurrent, coefficient of z^{+r}
    annihilation: tuple  # HalfCurrent, coefficient of z^{-r}
    zero: tuple

    def times(self, other: "VertexTerm") -> "VertexTerm":
        return VertexTerm(self.prefactor * other.prefactor, self.zpow + other.zpow,
                          self.creation + other.creation, self.annihilation + other.annihilation,
                          self.zero + other.zero)


def _gamma_term(g: Gamma, datum: RootDatum) -> VertexTerm:
    i = g.index
    alpha = datum.simple_root(i).alpha
    c0 = (0,) * datum.n
    q_inv = Q.inverse()
    if g.sign == 1:
        return VertexTerm(ONE, 1, (HalfCurrent(i, 1, q_inv, "vertex"),), (HalfCurrent(i, -1, ONE, "vertex"),),
                          (("lat", alpha, c0, 1), ("zH", i, 1)))
    neg = tuple(-a for a in alpha)
    extra = datum.reorder_sign(alpha, neg)  # e^{-alpha} is the inverse of e^{alpha}
    return VertexTerm(ONE, 1, (HalfCurrent(i, -1, ONE, "vertex"),), (HalfCurrent(i, 1, Q, "vertex"),),
                      (("lat", neg, c0, extra), ("zH", i, -1)))


def _c_term(sign: int, j: int, scale: Scalar, datum: RootDatum) -> VertexTerm:
    osc = datum.size + j - datum.m
    c = tuple(sign * int(k == j) for k in datum.c_indices)
    alpha = (0,) * datum.N
    return VertexTerm(ONE, 0, (HalfCurrent(osc, sign, scale, "vertex"),),
                      (HalfCurrent(osc, -sign, scale.inverse(), "vertex"),),
                      (("lat", alpha, c, 1), ("zc", j, sign, scale)))


def _k_term(k: Kfield) -> VertexTerm:
    if k.sign == 1:
        return VertexTerm(ONE, 0, (), (HalfCurrent(k.index, 1, ONE, "k"),), (("qa", k.index, 1),))
    return VertexTerm(ONE, 0, (HalfCurrent(k.index, -1, ONE, "k"),), (), (("qa", k.index, -1),))


def expand_current(spec: CurrentSpec, datum: RootDatum) -> tuple[VertexTerm, ...]:
    """Sum of pure vertex operators equal to the current."""
    terms = [VertexTerm(spec.prefactor, 0, (), (), ())]
    q_minus = Q - Q.inverse()
    for atom in spec.atoms:
        if isinstance(atom, Gamma):
            pieces = [_gamma_term(atom, datum)]
        elif isinstance(atom, Kfield):
            pieces = [_k_term(atom)]
        elif isinstance(atom, Cfield):
            if atom.derivative:
                up = _c_term(atom.sign, atom.index, atom.scale * Q, datum)
                down = _c_term(atom.sign, atom.index, atom.scale * Q.inverse(), datum)
                pieces = [VertexTerm(q_minus.inverse(), -1, (), (), ()).times(up),
                          VertexTerm(-q_minus.inverse(), -1, (), (), ()).times(down)]
            else:
                pieces = [_c_term(atom.sign, atom.index, atom.scale, datum)]
        else:
            raise VertexError(f"unknown atom {atom!r}")
        terms = [t.times(p) for t in terms for p in pieces]
    return tuple(terms)


# mode extraction ---------------------------------------------------------

class _TermState:
    """Per-module caches for one vertex term."""

    def __init__(self, term: VertexTerm, module: FockModule):
        self.term = term
        self.module = module
        self.kappa: dict = {}
        self.series: list[dict] = [{(): ONE}]
        self.zero_cache: dict = {}

    def translation(self, r: int, osc: int) -> Scalar:
        key = (r, osc)
        val = self.kappa.get(key)
        if val is None:
            val = ZERO
            for h in self.term.annihilation:
                g = self.module.comm(r, h.osc, osc)
                if not g.is_zero():
                    val = val + _half_coeff(h, r) * g
            self.kappa[key] = val
        return val

    def creation_component(self, n: int) -> dict:
        """[z^n] exp(sum_r z^r L_r) as {mono: Scalar}."""
        while len(self.series) <= n:
            k = len(self.series)
            acc: dict = {}
            for r in range(1, k + 1):
                prev = self.series[k - r]
                if not prev:
                    continue
                for h in self.term.creation:
                    coeff = _half_coeff(h, r) * r
                    var = ((h.osc, r),)
                    for mono, val in prev.items():
                        add_into(acc, {merge_mono(mono, var): val * coeff})
            inv = Scalar.from_number(1) / k
            self.series.append({mono: val * inv for mono, val in acc.items()})
        return self.series[n]

    def zero_part(self, lat: tuple):
        hit = self.zero_cache.get(lat)
        if hit is None:
            hit = self.zero_cache[lat] = self._zero_part(lat)
        return hit

    def _zero_part(self, lat: tuple):
        mod = self.module
        e = 0
        val = self.term.prefactor
        sign = 1
        for atom in reversed(self.term.zero):
            kind = atom[0]
            if kind == "zH":
                _, i, s = atom
                e += s * mod.pair_alpha(i, lat)
                dexp = mod.d_exponent(i, lat)
                if dexp:
                    val = val * Scalar.monomial(ev=s * dexp)
            elif kind == "zc":
                _, j, s, scale = atom
                p = s * mod.pair_c(j, lat)
                e += p
                if p:
                    val = val * scale ** p
            elif kind == "qa":
                _, i, s = atom
                p = s * mod.pair_alpha(i, lat)
                if p:
                    val = val * q_pow(p)
            elif kind == "lat":
                _, alpha, c, extra = atom
                sign *= extra * mod.datum.reorder_sign(alpha, lat[: mod.N])
                lat = tuple(a + b for a, b in zip(lat, alpha + c))
            else:
                raise VertexError(f"unknown zero atom {kind!r}")
        return e + self.term.zpow, (val if sign == 1 else -val), lat

    def annihilate(self, mono: tuple) -> list[tuple[int, tuple, Scalar]]:
        """Expand prod (x_f + z^{-r_f} kappa_f) into (t, remaining mono, coeff)."""
        groups: dict = {}
        for f in mono:
            groups[f] = groups.get(f, 0) + 1
        partial = [(0, (), ONE)]
        for (osc, r), mult in groups.items():
            kap = self.translation(r, osc)
            nxt = []
            for t, rest, val in partial:
                for j in range(mult + 1):
                    if j and kap.is_zero():
                        break
                    coeff = val * comb(mult, j) * kap ** j if j else val
                    keep = ((osc, r),) * (mult - j)
                    nxt.append((t + r * j, rest + keep, coeff))
            partial = nxt
        return [(t, tuple(sorted(rest)), val) for t, rest, val in partial]

    def apply_basis(self, k: int, basis: Basis) -> Vector:
        mono, lat = basis
        e, val, new_lat = self.zero_part(lat)
        out: Vector = {}
        for t, rest, coeff in self.annihilate(mono):
            n = -k - e + t
            if n < 0:
                continue
            comp = self.creation_component(n)
            base = coeff * val
            for cmono, cval in comp.items():
                add_into(out, {(merge_mono(rest, cmono), new_lat): base * cval})
        return out


class BudgetExpired(Exception):
    """Raised inside a long computation once the engine's deadline has passed."""


class ModeEngine:
    """Applies current modes to vectors of one Fock module, with a basis-level cache.

    When ``deadline`` (a time.monotonic value) is set, apply_mode raises BudgetExpired
    once it has passed, so one huge vector cannot hold a budgeted run hostage.
    """

    def __init__(self, module: FockModule):
        self.module = module
        self.datum = module.datum
        self._states: dict = {}
        self._cache: dict = {}
        self.applications = 0
        self.deadline: float | None = None

    def current(self, role: str, index: int) -> CurrentSpec:
        return assemble_current(role, index, self.datum)

    def _term_states(self, spec: CurrentSpec) -> list[_TermState]:
        states = self._states.get(spec)
        if states is None:
            states = self._states[spec] = [_TermState(t, self.module) for t in expand_current(spec, self.datum)]
        return states

    def apply_basis(self, spec: CurrentSpec, k: int, basis: Basis) -> Vector:
        key = (spec, k, basis)
        hit = self._cache.get(key)
        if hit is None:
            self.applications += 1
            hit = {}
            for st in self._term_states(spec):
                add_into(hit, st.apply_basis(k, basis))
            self._cache[key] = hit
        return hit

    def apply_mode(self, spec: CurrentSpec, k: int, vec: Mapping) -> Vector:
        out: Vector = {}
        for basis, val in vec.items():
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise BudgetExpired
            add_into(out, self.apply_basis(spec, k, basis), val)
        return out

    def clear_cache(self) -> None:
        self._cache.clear()


def apply_mode(spec: CurrentSpec, k: int, vec: Mapping, module: FockModule) -> Vector:
    """One-shot mode application (builds a throwaway engine)."""
    return ModeEngine(module).apply_mode(spec, k, vec)
