"""Acceptance suite: one PASS/FAIL line per criterion, printed uncaptured.

The relation suite (criterion 5) and the grading check (criterion 9) run under
wall-clock budgets. A run that does not reach every test vector in time is
reported as FAIL with its coverage; budgets can be raised with
QTOROIDAL_RELATION_BUDGET and QTOROIDAL_GRADING_BUDGET (seconds, whole criterion).
"""

import os
import time

import pytest

from qtoroidal import coefficients as co
from qtoroidal.contractions import current_poles, verify_all_contractions
from qtoroidal.fock import FockModule
from qtoroidal.relations import (applicable_relations, coverage_order, verify_admissibility, verify_level,
                                 verify_relations, verify_screening)
from qtoroidal.rootdata import WeightSpec, build_root_datum, check_diagram_symmetries
from qtoroidal.scalar import Q1

RELATION_BUDGET = float(os.environ.get("QTOROIDAL_RELATION_BUDGET", 600))
GRADING_BUDGET = float(os.environ.get("QTOROIDAL_GRADING_BUDGET", 180))
D, B, W = 3, 1, 3


def _plan():
    """(m, n, weight) triples of the relation plan; weights that coincide for m = 1 appear once."""
    out = []
    for m, n in [(2, 1), (1, 2), (3, 1), (2, 3)]:
        seen = set()
        for token in ("L0", "L1", "aLm:1"):
            spec = WeightSpec.parse(token, m)
            if spec not in seen:
                seen.add(spec)
                out.append((m, n, token))
    return out


PLAN = _plan()


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail
    return emit


def test_criterion_1_cartan(verdict):
    t0 = time.perf_counter()
    bad = []
    cases = [(m, n) for m in range(1, 7) for n in range(1, 7) if m != n and m + n <= 7]
    for m, n in cases:
        rd = build_root_datum(m, n)
        nodes = rd.nodes
        ok = (all(rd.A_hat[i][j] == rd.A_hat[j][i] for i in nodes for j in nodes)
              and all(rd.M_hat[i][j] == -rd.M_hat[j][i] for i in nodes for j in nodes)
              and rd.det_A_hat == 0 and abs(rd.det_A) == abs(m - n)
              and check_diagram_symmetries(m, n).ok)
        if not ok:
            bad.append((m, n))
    elapsed = time.perf_counter() - t0
    verdict(1, not bad and elapsed < 1, f"{len(cases)} cases, failures {bad}, {elapsed:.2f} s")


def test_criterion_2_toroidal_det(verdict):
    t0 = time.perf_counter()
    signs, bad = {}, []
    for m, n in [(2, 1), (1, 2), (3, 1), (3, 2)]:
        for r in (1, 2, 3):
            rep = co.toroidal_det(r, build_root_datum(m, n))
            signs[(m, n, r)] = rep.sign
            if not rep.ok:
                bad.append((m, n, r))
    elapsed = time.perf_counter() - t0
    verdict(2, not bad and elapsed < 10, f"recorded signs {sorted(set(signs.values()))}, failures {bad}, "
            f"{elapsed:.2f} s")


def test_criterion_3_gamma_beta(verdict):
    t0 = time.perf_counter()
    bad = []
    for m, n in [(2, 1), (1, 2), (3, 1), (3, 2), (2, 3)]:
        rd = build_root_datum(m, n)
        for r in (-3, -2, -1, 1, 2, 3):
            if not all(x.is_zero() for x in co.gamma_residuals(r, rd) + co.beta_residuals(r, rd)):
                bad.append(("residual", m, n, r))
        for r in (1, 2, 3):
            want = co.heisenberg_normalisation(r, rd)
            if co.commutator(co.solve_gamma(r, rd), co.solve_gamma(-r, rd), rd) != want:
                bad.append(("Hver", m, n, r))
            if co.commutator(co.h_combo(r, rd), co.h_combo(-r, rd), rd) != want:
                bad.append(("h", m, n, r))
    elapsed = time.perf_counter() - t0
    verdict(3, not bad and elapsed < 10, f"failures {bad}, {elapsed:.2f} s")


def test_criterion_4_contractions(verdict):
    t0 = time.perf_counter()
    bad, count = [], 0
    for m, n in [(2, 1), (1, 2), (2, 3)]:
        checks = verify_all_contractions(build_root_datum(m, n), R=8)
        count += len(checks)
        bad += [(m, n, c.x, c.y) for c in checks if not c.ok]
    poles = current_poles("E", 0, "E", 1, build_root_datum(2, 1))
    pole_ok = any((loc - Q1).is_zero() and order > 0 for loc, order in poles)
    elapsed = time.perf_counter() - t0
    verdict(4, not bad and pole_ok and elapsed < 30,
            f"{count} pairs at R=8, failures {bad[:5]}, pole at q1 w: {pole_ok}, {elapsed:.2f} s")


@pytest.fixture(scope="module")
def relation_run():
    per_module = RELATION_BUDGET / len(PLAN)
    t0 = time.perf_counter()
    results = []
    for m, n, weight in PLAN:
        rd = build_root_datum(m, n)
        module = FockModule(rd, weight)
        reps = verify_relations(applicable_relations(rd), module, D, B, W,
                                deadline=time.monotonic() + per_module)
        results.append(((m, n, weight), module, reps))
    return results, time.perf_counter() - t0


def test_criterion_5_relations(verdict, relation_run):
    results, elapsed = relation_run
    lines, failed, incomplete = [], [], []
    for (m, n, weight), module, reps in results:
        total = len(module.test_basis(D, B))
        covered = min(r.vectors_checked for r in reps)
        started = sum(r.vectors_checked > 0 for r in reps)
        identities = sum(r.identities_checked for r in reps)
        failed += [f"{r.rid}@({m},{n}){weight}" for r in reps if r.status == "fail"]
        incomplete += [r for r in reps if r.status == "incomplete"]
        lines.append(f"({m},{n}) {weight}: all {len(reps)} relations on {covered}/{total} vectors, "
                     f"{started} on at least one, {identities} coefficient identities")
    ok = not failed and not incomplete and elapsed < 600
    detail = (f"{'; '.join(lines)}; failures {failed[:5]}; {len(incomplete)} relation runs incomplete; "
              f"{elapsed:.0f} s")
    verdict(5, ok, detail)


def test_criterion_6_level(verdict):
    bad, count = [], 0
    for m, n, weight in PLAN:
        module = FockModule((m, n), weight)
        rep = verify_level(module, D, B)
        count += len(module.test_basis(D, B))
        if not rep.passed:
            bad.append((m, n, weight, rep.residuals[:1]))
    verdict(6, not bad, f"C = q, K = 1 on {count} test vectors, failures {bad}")


def test_criterion_7_screening(verdict):
    t0 = time.perf_counter()
    bad, lines = [], []
    # truncations sized for the two-minute target on one core
    for (m, n), (d, b, w) in [((2, 1), (2, 1, 2)), ((2, 3), (1, 1, 2))]:
        for weight in ("L0", "L1"):
            reps = verify_screening(FockModule((m, n), weight), d, b, w)
            bad += [(m, n, weight, r.id, r.status) for r in reps if not r.passed]
            lines.append(f"({m},{n}) {weight} D={d} B={b} W={w}")
    elapsed = time.perf_counter() - t0
    verdict(7, not bad and elapsed < 120, f"{'; '.join(lines)}; failures {bad}; {elapsed:.0f} s")


def test_criterion_8_coefficient_layer(verdict):
    t0 = time.perf_counter()
    bad = []
    for m, n in [(2, 1), (3, 2)]:
        rd = build_root_datum(m, n)
        for r in [s * k for k in range(1, 6) for s in (1, -1)]:
            if not co.verify_htilde0(r, rd).is_zero():
                bad.append(("htilde0", m, n, r))
        for name in co.K0_IDS:
            if not co.verify_exp_identity(name, 5, rd).ok:
                bad.append((name, m, n))
        for name in co.CONT_IDS:
            for sign in (1, -1):
                if not co.verify_exp_identity(name, 8, rd, sign=sign).ok:
                    bad.append((name, m, n, sign))
    elapsed = time.perf_counter() - t0
    verdict(8, not bad and elapsed < 60,
            f"failures {bad}; cont identities compared at c^2 = q3^(m-n); {elapsed:.1f} s")


def test_criterion_9_grading(verdict):
    per_module = GRADING_BUDGET / len(PLAN)
    bad, lines, incomplete = [], [], 0
    for m, n, weight in PLAN:
        module = FockModule((m, n), weight)
        basis = coverage_order(module.test_basis(D, B))
        rep = verify_admissibility(module, D, B, W, deadline=time.monotonic() + per_module, test_basis=basis)
        if rep.status == "fail":
            bad.append((m, n, weight, rep.residuals[:1]))
        incomplete += rep.status == "incomplete"
        lines.append(f"({m},{n}) {weight}: {rep.details['vectors_checked']}/{len(basis)} vectors, "
                     f"max N_v {rep.details['max_N_v']}")
    verdict(9, not bad and not incomplete,
            f"bound D+W+2 = {D + W + 2}; {'; '.join(lines)}; failures {bad}; {incomplete} runs incomplete")
