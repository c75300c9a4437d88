"""Mode-space verification of the defining relations on truncated Fock modules.

Every relation is turned into a family of operator identities indexed by the
coefficient multi-index ``a`` (the coefficient of z_1^{-a_1} ... z_t^{-a_t}).
Each identity is a list of ``(Scalar, word)`` pairs, a word being a tuple of
operators written left to right.  The residual of an identity on a test
vector is computed exactly; a relation passes when every residual is the zero
Scalar.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .fock import Basis, FockModule, Vector, add_into
from .rootdata import RootDatum, WeightSpec, build_root_datum
from .scalar import ONE, ZERO, Q, Scalar, d_pow, q_pow, qint
from .vertex import BudgetExpired, Cfield, CurrentSpec, ModeEngine, assemble_current


class RelationError(ValueError):
    pass


# operators -----------------------------------------------------------------
# ("cur", spec, k)   mode k of a current
# ("K0", i, s)       K_i^s
# ("H", i, r)        Heisenberg mode H_{i,r}


def apply_op(engine: ModeEngine, op: tuple, vec: Mapping) -> Vector:
    kind = op[0]
    if kind == "cur":
        return engine.apply_mode(op[1], op[2], vec)
    module = engine.module
    if kind == "K0":
        _, i, s = op
        out: Vector = {}
        for basis, val in vec.items():
            p = s * module.pair_alpha(i, basis[1])
            out[basis] = val * q_pow(p) if p else val
        return out
    if kind == "H":
        from .fock import HeisenbergMode
        return module.apply_heisenberg(HeisenbergMode("H", op[1], op[2]), vec)
    raise RelationError(f"unknown operator {op!r}")


def op_label(op: tuple) -> str:
    if op[0] == "cur":
        return f"{op[1].name}[{op[2]}]"
    if op[0] == "K0":
        return f"K_{op[1]}^{op[2]}"
    return f"H_{op[1]},{op[2]}"


# symbolic products of currents -------------------------------------------

@dataclass(frozen=True)
class Slot:
    """A current evaluated at scale * z_var."""

    spec: CurrentSpec
    var: int
    scale: Scalar = ONE


@dataclass(frozen=True)
class Product:
    """coeff * (prod_t z_t^{poly exponent}) * slot_1 ... slot_l."""

    coeff: Scalar
    shift: tuple  # exponent of each variable
    slots: tuple

    @property
    def parity(self) -> int:
        return sum(s.spec.parity for s in self.slots) % 2


def product(slots: Sequence[Slot], nvars: int, coeff: Scalar = ONE, shift: Sequence[int] | None = None) -> Product:
    return Product(coeff, tuple(shift) if shift else (0,) * nvars, tuple(slots))


def mul(x: Sequence[Product], y: Sequence[Product]) -> list[Product]:
    return [Product(a.coeff * b.coeff, tuple(s + t for s, t in zip(a.shift, b.shift)), a.slots + b.slots)
            for a in x for b in y]


def bracket(x: Sequence[Product], y: Sequence[Product], a: Scalar = ONE) -> list[Product]:
    """[X, Y]_a = XY - (-1)^{|X||Y|} a YX for homogeneous X, Y."""
    px = _parity(x)
    py = _parity(y)
    sign = -1 if (px and py) else 1
    out = mul(x, y)
    out += [Product(-sign * a * t.coeff, t.shift, t.slots) for t in mul(y, x)]
    return out


def _parity(expr: Sequence[Product]) -> int:
    ps = {t.parity for t in expr}
    if len(ps) != 1:
        raise RelationError("bracket of inhomogeneous expressions")
    return ps.pop()


def swap_vars(expr: Sequence[Product], i: int, j: int) -> list[Product]:
    def sw(v):
        return j if v == i else (i if v == j else v)

    out = []
    for t in expr:
        shift = list(t.shift)
        shift[i], shift[j] = shift[j], shift[i]
        out.append(Product(t.coeff, tuple(shift), tuple(Slot(s.spec, sw(s.var), s.scale) for s in t.slots)))
    return out


def extract(expr: Sequence[Product], a: Sequence[int]) -> list[tuple[Scalar, tuple]]:
    """Coefficient of prod z_t^{-a_t} as (coeff, word) pairs."""
    out: dict = {}
    for t in expr:
        coeff = t.coeff
        word = []
        used = set()
        for s in t.slots:
            k = a[s.var] + t.shift[s.var]
            used.add(s.var)
            if not s.scale == ONE and k:
                coeff = coeff * s.scale ** (-k)
            word.append(("cur", s.spec, k))
        if any(a[v] + t.shift[v] for v in range(len(a)) if v not in used):
            continue
        key = tuple(word)
        out[key] = out.get(key, ZERO) + coeff
    return [(c, w) for w, c in out.items() if not c.is_zero()]


# relation catalogue ------------------------------------------------------

@dataclass(frozen=True)
class RelationID:
    name: str
    indices: tuple = ()

    def __str__(self) -> str:
        return f"{self.name}{self.indices}" if self.indices else self.name


RELATION_NAMES = ("CK", "KK1", "KK2", "KE", "KF", "EF", "EE0", "EEquad", "FF0", "FFquad",
                  "Serre1", "Serre2", "Serre3", "Serre4", "Serre5", "Serre6", "Serre7", "Serre8",
                  "HE", "HF", "HH")


@dataclass
class RelationInstance:
    rid: RelationID
    nvars: int
    identities: Callable[[tuple], list[list[tuple[Scalar, tuple]]]]
    window: Callable[[int], Iterable[tuple]] | None = None
    # variable pairs under which the relation is symmetrised; the coefficient
    # identity at a swapped multi-index is literally the same, so only a <= b is kept
    symmetric: tuple = ()

    def multi_indices(self, W: int) -> Iterable[tuple]:
        if self.window is not None:
            return self.window(W)
        box = itertools.product(range(-W, W + 1), repeat=self.nvars)
        return [a for a in box if all(a[i] <= a[j] for i, j in self.symmetric)]


_CONVENTION = {"value": "corrected"}


def _cur(datum, role, i):
    return assemble_current(role, i, datum, _CONVENTION["value"])


def _from_expr(expr: list[Product]):
    return lambda a: [extract(expr, a)]


def _quadratic(datum, role, i, j) -> RelationInstance:
    """(d^M z - q^{+-A} w) X_i(z) X_j(w) - (-1)^{|i||j|}(d^M q^{+-A} z - w) X_j(w) X_i(z)."""
    A = datum.A_hat[i][j]
    M = datum.M_hat[i][j]
    sA = A if role == "E" else -A
    xi, xj = _cur(datum, role, i), _cur(datum, role, j)
    dM, qA = d_pow(M), q_pow(sA)
    sign = -1 if datum.parity[i] and datum.parity[j] else 1
    lhs = [product([Slot(xi, 0), Slot(xj, 1)], 2, dM, (1, 0)),
           product([Slot(xi, 0), Slot(xj, 1)], 2, -qA, (0, 1))]
    rhs = [product([Slot(xj, 1), Slot(xi, 0)], 2, dM * qA, (1, 0)),
           product([Slot(xj, 1), Slot(xi, 0)], 2, -ONE, (0, 1))]
    expr = lhs + [Product(-sign * t.coeff, t.shift, t.slots) for t in rhs]
    return RelationInstance(RelationID("EEquad" if role == "E" else "FFquad", (i, j)), 2, _from_expr(expr))


def _vanishing(datum, role, i, j) -> RelationInstance:
    xi, xj = _cur(datum, role, i), _cur(datum, role, j)
    expr = bracket([product([Slot(xi, 0)], 2)], [product([Slot(xj, 1)], 2)])
    return RelationInstance(RelationID("EE0" if role == "E" else "FF0", (i, j)), 2, _from_expr(expr))


def _kx(datum, role, sgn, i, j) -> RelationInstance:
    """K-E / K-F relations with denominators cleared."""
    A = datum.A_hat[i][j]
    M = datum.M_hat[i][j]
    sA = A if role == "E" else -A
    k = _cur(datum, "K+" if sgn == 1 else "K-", i)
    x = _cur(datum, role, j)
    if role == "E":
        scale = Q.inverse() if sgn == 1 else ONE
    else:
        scale = ONE if sgn == 1 else Q.inverse()
    dM, qA = d_pow(M), q_pow(sA)
    expr = [product([Slot(k, 0, scale), Slot(x, 1)], 2, dM, (1, 0)),
            product([Slot(k, 0, scale), Slot(x, 1)], 2, -qA, (0, 1)),
            product([Slot(x, 1), Slot(k, 0, scale)], 2, -dM * qA, (1, 0)),
            product([Slot(x, 1), Slot(k, 0, scale)], 2, ONE, (0, 1))]
    name = "KE" if role == "E" else "KF"
    return RelationInstance(RelationID(name, (i, j, "+" if sgn == 1 else "-")), 2, _from_expr(expr))


def _kk1(datum, sgn, i, j) -> RelationInstance:
    role = "K+" if sgn == 1 else "K-"
    ki, kj = _cur(datum, role, i), _cur(datum, role, j)
    expr = bracket([product([Slot(ki, 0)], 2)], [product([Slot(kj, 1)], 2)])
    return RelationInstance(RelationID("KK1", (i, j, "+" if sgn == 1 else "-")), 2, _from_expr(expr))


def _kk2(datum, i, j) -> RelationInstance:
    """(d^M C^-1 z - q^A w)(d^M q^A C z - w) K^-_i(z)K^+_j(w) = (d^M q^A C^-1 z - w)(d^M C z - q^A w) K^+_j(w)K^-_i(z)."""
    A = datum.A_hat[i][j]
    M = datum.M_hat[i][j]
    km, kp = _cur(datum, "K-", i), _cur(datum, "K+", j)
    dM, qA, c = d_pow(M), q_pow(A), Q
    ci = c.inverse()
    lhs_poly = _poly_mul({(1, 0): dM * ci, (0, 1): -qA}, {(1, 0): dM * qA * c, (0, 1): -ONE})
    rhs_poly = _poly_mul({(1, 0): dM * qA * ci, (0, 1): -ONE}, {(1, 0): dM * c, (0, 1): -qA})
    expr = [product([Slot(km, 0), Slot(kp, 1)], 2, co, e) for e, co in lhs_poly.items()]
    expr += [product([Slot(kp, 1), Slot(km, 0)], 2, -co, e) for e, co in rhs_poly.items()]
    return RelationInstance(RelationID("KK2", (i, j)), 2, _from_expr(expr))


def _poly_mul(x: dict, y: dict) -> dict:
    out: dict = {}
    for e1, c1 in x.items():
        for e2, c2 in y.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, ZERO) + c1 * c2
    return {e: c for e, c in out.items() if not c.is_zero()}


def _ef(datum, i, j) -> RelationInstance:
    e, f = _cur(datum, "E", i), _cur(datum, "F", j)
    sign = -1 if datum.parity[i] and datum.parity[j] else 1
    kp, km = _cur(datum, "K+", i), _cur(datum, "K-", i)
    inv = (Q - Q.inverse()).inverse()

    def identities(a):
        x, y = a
        terms = [(ONE, (("cur", e, x), ("cur", f, y))),
                 (Scalar.from_number(-sign), (("cur", f, y), ("cur", e, x)))]
        if i == j:
            terms.append((-inv * q_pow(x), (("cur", kp, x + y),)))
            terms.append((inv * q_pow(y), (("cur", km, x + y),)))
        return [terms]

    return RelationInstance(RelationID("EF", (i, j)), 2, identities)


def _ck(datum, i, j, part) -> RelationInstance:
    A = datum.A_hat[i][j]
    if part == "KK":
        def identities(a):
            return [[(ONE, (("K0", i, 1), ("K0", j, 1))), (-ONE, (("K0", j, 1), ("K0", i, 1)))]]
        return RelationInstance(RelationID("CK", (i, j, "KK")), 0, identities, window=lambda W: [()])
    x = _cur(datum, part, j)
    factor = q_pow(A if part == "E" else -A)

    def identities(a):
        (k,) = a
        return [[(ONE, (("K0", i, 1), ("cur", x, k), ("K0", i, -1))), (-factor, (("cur", x, k),))]]

    return RelationInstance(RelationID("CK", (i, j, part)), 1, identities)


def _hx(datum, role, i, j) -> RelationInstance:
    A = datum.A_hat[i][j]
    M = datum.M_hat[i][j]
    x = _cur(datum, role, j)

    def identities(a):
        r, k = a
        if r == 0:
            return []
        if role == "E":
            coeff = qint(r * A) / r * d_pow(-r * M) * q_pow(-(r + abs(r)) // 2)
        else:
            coeff = -qint(r * A) / r * d_pow(-r * M) * q_pow(-(r - abs(r)) // 2)
        return [[(ONE, (("H", i, r), ("cur", x, k))), (-ONE, (("cur", x, k), ("H", i, r))),
                 (-coeff, (("cur", x, k + r),))]]

    return RelationInstance(RelationID("HE" if role == "E" else "HF", (i, j)), 2, identities)


def _hh(datum, i, j) -> RelationInstance:
    A = datum.A_hat[i][j]
    M = datum.M_hat[i][j]

    def identities(a):
        r, s = a
        if r == 0 or s == 0:
            return []
        terms = [(ONE, (("H", i, r), ("H", j, s))), (-ONE, (("H", j, s), ("H", i, r)))]
        if r + s == 0:
            terms.append((-(qint(r * A) * qint(r) / r * d_pow(-r * M)), ()))
        return [terms]

    return RelationInstance(RelationID("HH", (i, j)), 2, identities)


def _serre_cubic(datum, role, i, j) -> RelationInstance:
    """Sym_{z1,z2} [X_i(z1), [X_i(z2), X_j(w)]_q]_{q^-1}; variables (z1, z2, w)."""
    xi, xj = _cur(datum, role, i), _cur(datum, role, j)
    z1, z2, w = ([product([Slot(xi, 0)], 3)], [product([Slot(xi, 1)], 3)], [product([Slot(xj, 2)], 3)])
    expr = bracket(z1, bracket(z2, w, Q), Q.inverse())
    expr = expr + swap_vars(expr, 0, 1)
    name = "Serre1" if role == "E" else "Serre2"
    return RelationInstance(RelationID(name, (i, j)), 3, _from_expr(expr), symmetric=((0, 1),))


def _serre_quartic(datum, role, i) -> RelationInstance:
    """Sym_{z1,z2}[X_i(z1),[X_{i+1}(w1),[X_i(z2),X_{i-1}(w2)]_q]_{q^-1}]; vars (z1, z2, w1, w2)."""
    size = datum.size
    xi = _cur(datum, role, i)
    xp = _cur(datum, role, (i + 1) % size)
    xm = _cur(datum, role, (i - 1) % size)
    s = lambda spec, v: [product([Slot(spec, v)], 4)]
    expr = bracket(s(xi, 0), bracket(s(xp, 2), bracket(s(xi, 1), s(xm, 3), Q), Q.inverse()))
    expr = expr + swap_vars(expr, 0, 1)
    name = "Serre3" if role == "E" else "Serre4"
    return RelationInstance(RelationID(name, (i,)), 4, _from_expr(expr), symmetric=((0, 1),))


def _serre_quintic(datum, role, a_node, b_node, y_node, name) -> RelationInstance:
    """LHS - RHS of the quintic relations; vars (z1, z2, w1, w2, y)."""
    xa, xb, xy = (_cur(datum, role, a_node), _cur(datum, role, b_node), _cur(datum, role, y_node))
    s = lambda spec, v: [product([Slot(spec, v)], 5)]
    z1, z2, w1, w2, y = 0, 1, 2, 3, 4
    lhs = bracket(s(xa, z1), bracket(s(xb, w1), bracket(s(xa, z2), bracket(s(xb, w2), s(xy, y), Q))), Q.inverse())
    rhs = bracket(s(xb, w1), bracket(s(xa, z1), bracket(s(xb, w2), bracket(s(xa, z2), s(xy, y), Q))), Q.inverse())
    expr = lhs + [Product(-t.coeff, t.shift, t.slots) for t in rhs]
    expr = expr + swap_vars(expr, z1, z2)
    expr = expr + swap_vars(expr, w1, w2)
    return RelationInstance(RelationID(name, ()), 5, _from_expr(expr), symmetric=((0, 1), (2, 3)))


def applicable_relations(datum: RootDatum, names: Iterable[str] | None = None,
                         convention: str = "corrected") -> list[RelationInstance]:
    """Every applicable relation instance, optionally filtered by relation name."""
    _CONVENTION["value"] = convention
    try:
        return _build_relations(datum, names)
    finally:
        _CONVENTION["value"] = "corrected"


def _build_relations(datum: RootDatum, names: Iterable[str] | None) -> list[RelationInstance]:
    wanted = set(names) if names else set(RELATION_NAMES)
    unknown = wanted - set(RELATION_NAMES)
    if unknown:
        raise RelationError(f"unknown relation ids: {sorted(unknown)}")
    nodes = datum.nodes
    size = datum.size
    out: list[RelationInstance] = []
    pairs = [(i, j) for i in nodes for j in nodes]
    if "CK" in wanted:
        out += [_ck(datum, i, j, part) for i, j in pairs for part in ("KK", "E", "F")]
    if "KK1" in wanted:
        out += [_kk1(datum, s, i, j) for i, j in pairs for s in (1, -1)]
    if "KK2" in wanted:
        out += [_kk2(datum, i, j) for i, j in pairs]
    if "KE" in wanted:
        out += [_kx(datum, "E", s, i, j) for i, j in pairs for s in (1, -1)]
    if "KF" in wanted:
        out += [_kx(datum, "F", s, i, j) for i, j in pairs for s in (1, -1)]
    if "EF" in wanted:
        out += [_ef(datum, i, j) for i, j in pairs]
    for role, zero_name, quad_name in (("E", "EE0", "EEquad"), ("F", "FF0", "FFquad")):
        if zero_name in wanted:
            out += [_vanishing(datum, role, i, j) for i, j in pairs if datum.A_hat[i][j] == 0]
        if quad_name in wanted:
            out += [_quadratic(datum, role, i, j) for i, j in pairs if datum.A_hat[i][j] != 0]
    for role, name in (("E", "Serre1"), ("F", "Serre2")):
        if name in wanted:
            for i in nodes:
                if i in datum.odd:
                    continue
                for j in sorted({(i + 1) % size, (i - 1) % size}):
                    out.append(_serre_cubic(datum, role, i, j))
    if datum.m * datum.n != 2:
        for role, name in (("E", "Serre3"), ("F", "Serre4")):
            if name in wanted:
                out += [_serre_quartic(datum, role, i) for i in datum.odd]
    if (datum.m, datum.n) == (2, 1):
        if "Serre5" in wanted:
            out.append(_serre_quintic(datum, "E", 0, 2, 1, "Serre5"))
        if "Serre6" in wanted:
            out.append(_serre_quintic(datum, "F", 0, 2, 1, "Serre6"))
    if (datum.m, datum.n) == (1, 2):
        if "Serre7" in wanted:
            out.append(_serre_quintic(datum, "E", 0, 1, 2, "Serre7"))
        if "Serre8" in wanted:
            out.append(_serre_quintic(datum, "F", 0, 1, 2, "Serre8"))
    if "HE" in wanted:
        out += [_hx(datum, "E", i, j) for i, j in pairs]
    if "HF" in wanted:
        out += [_hx(datum, "F", i, j) for i, j in pairs]
    if "HH" in wanted:
        out += [_hh(datum, i, j) for i, j in pairs]
    return out


def relation_instance(rid: RelationID, datum: RootDatum) -> RelationInstance:
    for inst in applicable_relations(datum, [rid.name]):
        if inst.rid == rid:
            return inst
    raise RelationError(f"relation {rid} is not applicable to (m,n)=({datum.m},{datum.n})")


# verification --------------------------------------------------------------

@dataclass
class Residual:
    multi_index: tuple
    test_vector: str
    terms: dict  # description -> canonical Scalar string


@dataclass
class RelationReport:
    rid: RelationID
    m: int
    n: int
    weight: str
    D: int
    B: int
    W: int
    status: str = "pass"  # pass | fail | incomplete
    residuals: list = field(default_factory=list)
    vectors_checked: int = 0
    identities_checked: int = 0
    elapsed: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"id": str(self.rid),
                "params": {"m": self.m, "n": self.n, "weight": self.weight, "D": self.D, "B": self.B, "W": self.W},
                "status": self.status,
                "residuals": [{"multi_index": list(r.multi_index), "test_vector": r.test_vector, "terms": r.terms}
                              for r in self.residuals],
                "vectors_checked": self.vectors_checked,
                "identities_checked": self.identities_checked,
                "time_ms": round(self.elapsed * 1000, 3),
                "note": self.note}


class OpTable:
    """Interns operators as small integers so that words hash cheaply."""

    def __init__(self):
        self.ids: dict = {}
        self.ops: list = []

    def intern(self, op: tuple) -> int:
        idx = self.ids.get(op)
        if idx is None:
            idx = self.ids[op] = len(self.ops)
            self.ops.append(op)
        return idx

    def word(self, word: tuple) -> tuple:
        return tuple(self.intern(op) for op in word)


class WordEvaluator:
    """Applies words to one basis vector, sharing suffixes.

    Words are tuples of operators, or of interned ids when ``table`` is given.
    With a deadline, BudgetExpired is raised between operator applications once it passes.
    """

    def __init__(self, engine: ModeEngine, basis: Basis, table: OpTable | None = None,
                 deadline: float | None = None):
        self.engine = engine
        self.table = table
        self.deadline = deadline
        self.memo: dict = {(): {basis: ONE}}

    def __call__(self, word: tuple) -> Vector:
        hit = self.memo.get(word)
        if hit is not None:
            return hit
        rest = self(word[1:])
        if rest:
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise BudgetExpired
            op = self.table.ops[word[0]] if self.table is not None else word[0]
            out = apply_op(self.engine, op, rest)
        else:
            out = {}
        self.memo[word] = out
        return out


def residual(engine: ModeEngine, evaluator: WordEvaluator, identity: list) -> Vector:
    out: Vector = {}
    for coeff, word in identity:
        vec = evaluator(word)
        if vec:
            add_into(out, vec, coeff)
    return out


def prepare(inst: RelationInstance, W: int, table: OpTable,
            deadline: float | None = None) -> list[tuple[tuple, list]] | None:
    """All (multi-index, identity) pairs of an instance with interned words; None if the deadline passes."""
    out = []
    for count, a in enumerate(inst.multi_indices(W)):
        if deadline is not None and count % 64 == 0 and time.monotonic() > deadline:
            return None
        for identity in inst.identities(a):
            if identity:
                out.append((tuple(a), [(c, table.word(w)) for c, w in identity]))
    return out


def coverage_order(basis_list: Sequence[Basis]) -> list[Basis]:
    """Low creation level and small lattice norm first, so a budgeted run sees varied vectors early."""
    def key(item):
        pos, (mono, lat) = item
        return (sum(r for _, r in mono), sum(abs(x) for x in lat), pos)
    return [b for _, b in sorted(enumerate(basis_list), key=key)]


def verify_relations(instances: Sequence[RelationInstance], module: FockModule, D: int, B: int, W: int,
                     engine: ModeEngine | None = None, deadline: float | None = None,
                     max_residuals: int = 5, test_basis: Sequence[Basis] | None = None,
                     cache_limit: int = 300_000) -> list[RelationReport]:
    """Check every instance on every test vector; vectors are the outer loop so suffixes are shared."""
    engine = engine or ModeEngine(module)
    rd = module.datum
    reports = [RelationReport(inst.rid, rd.m, rd.n, module.spec.token, D, B, W) for inst in instances]
    table = OpTable()
    prepared: list = [None] * len(instances)
    basis_list = list(test_basis) if test_basis is not None else coverage_order(module.test_basis(D, B))
    expired = False
    engine.deadline = deadline
    for basis in basis_list:
        if expired or (deadline is not None and time.monotonic() > deadline):
            break
        ev = WordEvaluator(engine, basis, table, deadline)
        for idx, rep in enumerate(reports):
            t0 = time.perf_counter()
            if prepared[idx] is None:
                prepared[idx] = prepare(instances[idx], W, table, deadline)
                if prepared[idx] is None:
                    expired = True
                    break
            for count, (a, identity) in enumerate(prepared[idx]):
                # a single vector of a quintic relation can take minutes, so the budget is polled here too
                if deadline is not None and count % 32 == 0 and time.monotonic() > deadline:
                    expired = True
                    break
                try:
                    res = residual(engine, ev, identity)
                except BudgetExpired:
                    expired = True
                    break
                rep.identities_checked += 1
                if res:
                    rep.status = "fail"
                    if len(rep.residuals) < max_residuals:
                        rep.residuals.append(Residual(a, module.describe(basis),
                                                      {module.describe(b): v.canonical_str()
                                                       for b, v in res.items()}))
            rep.elapsed += time.perf_counter() - t0
            if expired:
                break
            rep.vectors_checked += 1
        if len(engine._cache) > cache_limit:
            engine.clear_cache()
    engine.deadline = None
    for rep in reports:
        if rep.vectors_checked < len(basis_list) and rep.status == "pass":
            rep.status = "incomplete"
            rep.note = f"time budget exhausted after {rep.vectors_checked} of {len(basis_list)} test vectors"
    return reports


def verify_relation(rid: RelationID, datum: RootDatum, spec: WeightSpec | str, D: int, B: int, W: int,
                    budget: float | None = None) -> RelationReport:
    module = FockModule(datum, spec)
    inst = relation_instance(rid, datum)
    deadline = None if budget is None else time.monotonic() + budget
    return verify_relations([inst], module, D, B, W, deadline=deadline)[0]


# level, grading, screening ------------------------------------------------

@dataclass
class CheckReport:
    id: str
    params: dict
    status: str = "pass"
    residuals: list = field(default_factory=list)
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def fail(self, record) -> None:
        self.status = "fail"
        if len(self.residuals) < 5:
            self.residuals.append(record)

    def to_dict(self) -> dict:
        return {"id": self.id, "params": self.params, "status": self.status,
                "residuals": self.residuals, "time_ms": round(self.elapsed * 1000, 3), "details": self.details}


def verify_level(module: FockModule, D: int, B: int, test_basis: Sequence[Basis] | None = None) -> CheckReport:
    """C acts as q by construction; K = prod_i K_i acts as the identity."""
    rd = module.datum
    rep = CheckReport("level", {"m": rd.m, "n": rd.n, "weight": module.spec.token, "D": D, "B": B})
    t0 = time.perf_counter()
    rep.details["C"] = Q.canonical_str()
    for basis in (test_basis if test_basis is not None else module.test_basis(D, B)):
        exponent = sum(module.pair_alpha(i, basis[1]) for i in rd.nodes)
        if exponent != 0:
            rep.fail({"test_vector": module.describe(basis), "K_exponent": exponent})
    rep.elapsed = time.perf_counter() - t0
    return rep


def _current_roles(datum):
    return [(role, i) for role in ("E", "F") for i in datum.nodes]


def verify_admissibility(module: FockModule, D: int, B: int, W: int, engine: ModeEngine | None = None,
                         extra: int = 3, deadline: float | None = None,
                         test_basis: Sequence[Basis] | None = None) -> CheckReport:
    """For each test vector find N_v (largest k with X_k v != 0 over all currents) and check
    N_v <= D + W + 2; also check that X_k lowers the energy grading by exactly k."""
    engine = engine or ModeEngine(module)
    rd = module.datum
    bound = D + W + 2
    rep = CheckReport("admissibility", {"m": rd.m, "n": rd.n, "weight": module.spec.token, "D": D, "B": B, "W": W})
    t0 = time.perf_counter()
    worst = None
    checked = 0
    basis_list = list(test_basis) if test_basis is not None else coverage_order(module.test_basis(D, B))
    for basis in basis_list:
        if deadline is not None and time.monotonic() > deadline:
            break
        h0 = module.energy(basis)
        n_v = None
        for role, i in _current_roles(rd):
            spec = assemble_current(role, i, rd)
            for k in range(bound + extra, -W - 1, -1):
                out = engine.apply_basis(spec, k, basis)
                if not out:
                    continue
                if n_v is None or k > n_v:
                    n_v = k
                for b in out:
                    if module.energy(b) != h0 - k:
                        rep.fail({"test_vector": module.describe(basis), "operator": f"{spec.name}[{k}]",
                                  "output": module.describe(b), "energy_in": str(h0), "energy_out": str(module.energy(b))})
        if n_v is not None and n_v > bound:
            rep.fail({"test_vector": module.describe(basis), "N_v": n_v, "bound": bound})
        if n_v is not None and (worst is None or n_v > worst):
            worst = n_v
        checked += 1
    rep.details = {"max_N_v": worst, "bound": bound, "vectors_checked": checked, "vectors_total": len(basis_list)}
    if checked < len(basis_list) and rep.status == "pass":
        rep.status = "incomplete"
    rep.elapsed = time.perf_counter() - t0
    return rep


def screening_operator(which: str, i: int, datum: RootDatum) -> tuple:
    """xi_i = Res z^-1 C^-_i(z) = C^-_{i,0};  eta_i = Res C^+_i(z) = C^+_{i,1}."""
    if i not in datum.c_indices:
        raise RelationError(f"screening index {i} outside {datum.c_indices}")
    if which == "xi":
        return ("cur", CurrentSpec(f"xi_{i}", 1, ONE, (Cfield(-1, i),)), 0)
    if which == "eta":
        return ("cur", CurrentSpec(f"eta_{i}", 1, ONE, (Cfield(1, i),)), 1)
    raise RelationError(f"unknown screening operator {which!r}")


def c_number(spec: CurrentSpec, j: int) -> int:
    """How many C-factors with index j occur in a current."""
    return sum(1 for atom in spec.atoms if isinstance(atom, Cfield) and atom.index == j)


def verify_screening(module: FockModule, D: int, B: int, W: int, engine: ModeEngine | None = None,
                     deadline: float | None = None) -> list[CheckReport]:
    engine = engine or ModeEngine(module)
    rd = module.datum
    params = {"m": rd.m, "n": rd.n, "weight": module.spec.token, "D": D, "B": B, "W": W}
    reps = {name: CheckReport(f"screening:{name}", dict(params)) for name in
            ("xi_eta", "xi_xi", "eta_eta", "eta_currents", "eta_heisenberg")}
    t0 = time.perf_counter()
    idx = rd.c_indices
    xi = {i: screening_operator("xi", i, rd) for i in idx}
    eta = {i: screening_operator("eta", i, rd) for i in idx}
    basis_list = module.test_basis(D, B)
    done = 0
    for basis in basis_list:
        if deadline is not None and time.monotonic() > deadline:
            break
        ev = WordEvaluator(engine, basis)
        for i in idx:
            for j in idx:
                # same index: anticommutator; different indices: the C-systems commute
                sgn = ONE if i == j else -ONE
                for name, x, y, target in (("xi_eta", xi[i], eta[j], ONE if i == j else ZERO),
                                           ("xi_xi", xi[i], xi[j], ZERO),
                                           ("eta_eta", eta[i], eta[j], ZERO)):
                    ident = [(ONE, (x, y)), (sgn, (y, x))]
                    if not target.is_zero():
                        ident.append((-target, ()))
                    res = residual(engine, ev, ident)
                    if res:
                        reps[name].fail({"pair": [i, j], "test_vector": module.describe(basis),
                                         "terms": {module.describe(b): v.canonical_str() for b, v in res.items()}})
            for role, j in _current_roles(rd):
                spec = assemble_current(role, j, rd)
                sgn = -ONE if c_number(spec, i) % 2 == 0 else ONE
                for k in range(-W, W + 1):
                    res = residual(engine, ev, [(ONE, (eta[i], ("cur", spec, k))), (sgn, (("cur", spec, k), eta[i]))])
                    if res:
                        reps["eta_currents"].fail({"eta": i, "operator": f"{spec.name}[{k}]",
                                                   "test_vector": module.describe(basis)})
            for j in rd.nodes:
                for r in range(-W, W + 1):
                    if r == 0:
                        continue
                    res = residual(engine, ev, [(ONE, (eta[i], ("H", j, r))), (-ONE, (("H", j, r), eta[i]))])
                    if res:
                        reps["eta_heisenberg"].fail({"eta": i, "operator": f"H_{j},{r}",
                                                     "test_vector": module.describe(basis)})
        done += 1
    elapsed = time.perf_counter() - t0
    for rep in reps.values():
        rep.elapsed = elapsed
        rep.details = {"vectors_checked": done, "vectors_total": len(basis_list)}
        if done < len(basis_list) and rep.status == "pass":
            rep.status = "incomplete"
    return list(reps.values())
