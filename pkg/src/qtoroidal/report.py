"""Suite configuration, check orchestration and the JSON report."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Mapping

from . import coefficients as co
from .contractions import (EQUATIONS, all_primitive_pairs, current_poles, equation_of, verify_contraction,
                           verify_vacuum_products)
from .fock import FockModule
from .relations import (RELATION_NAMES, CheckReport, RelationReport, applicable_relations, coverage_order,
                        verify_admissibility, verify_level, verify_relations, verify_screening)
from .rootdata import RootDataError, WeightSpec, build_root_datum, check_diagram_symmetries
from .scalar import Q1
from .vertex import CONVENTIONS, ModeEngine

COMMANDS = ("cartan", "contractions", "verify", "screenings", "coeffs")


class ConfigError(ValueError):
    pass


@dataclass
class SuiteConfig:
    m: int = 2
    n: int = 1
    weight: str = "L0"
    degree: int = 1
    ball: int = 1
    window: int = 1
    order: int = 8
    rmax: int = 5
    suite: str = "all"
    jobs: int = 1
    out: str | None = None
    budget: float | None = None
    convention: str = "corrected"

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "SuiteConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if raw is None:
                continue
            kwargs[key] = _coerce(key, raw)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def relation_names(self) -> tuple[str, ...] | None:
        if self.suite == "all":
            return None
        return tuple(s.strip() for s in self.suite.split(",") if s.strip())

    def validate(self) -> None:
        try:
            rd = build_root_datum(self.m, self.n)
            rd.tilde_weight(WeightSpec.parse(self.weight, self.m))
        except (RootDataError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        for name in ("degree", "ball", "window", "order", "rmax"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.order < 1 or self.rmax < 1:
            raise ConfigError("order and rmax must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.budget is not None and self.budget <= 0:
            raise ConfigError("budget must be positive")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"convention must be one of {CONVENTIONS}")
        names = self.relation_names()
        if names is not None:
            bad = [x for x in names if x not in RELATION_NAMES]
            if bad:
                raise ConfigError(f"unknown relation names {bad}")


_INTS = {"m", "n", "degree", "ball", "window", "order", "rmax", "jobs"}


def _coerce(key: str, raw):
    if key in _INTS:
        try:
            return int(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be an integer, got {raw!r}") from exc
    if key == "budget":
        try:
            return float(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"budget must be a number, got {raw!r}") from exc
    return str(raw)


def read_config_file(path: str | Path) -> dict[str, str]:
    """key = value lines; blank lines and '#' comments are ignored."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


# individual suites ---------------------------------------------------------

def _check(cid: str, params: dict, ok: bool, residuals=(), elapsed: float = 0.0, details=None,
           status: str | None = None) -> dict:
    return {"id": cid, "params": params, "status": status or ("pass" if ok else "fail"),
            "residuals": list(residuals), "time_ms": round(elapsed * 1000, 3), "details": details or {}}


def cartan_checks(m: int, n: int) -> list[dict]:
    t0 = time.perf_counter()
    rep = check_diagram_symmetries(m, n)
    rd = build_root_datum(m, n)
    details = {"det_A": rd.det_A, "det_A_hat": rd.det_A_hat, "A_hat": [list(r) for r in rd.A_hat],
               "M_hat": [list(r) for r in rd.M_hat]}
    failed = [k for k, v in rep.checks.items() if not v]
    return [_check("cartan", {"m": m, "n": n}, rep.ok, [{"failed": failed}] if failed else [],
                   time.perf_counter() - t0, details | {"checks": rep.checks})]


def contraction_checks(m: int, n: int, order: int) -> list[dict]:
    rd = build_root_datum(m, n)
    module = FockModule(rd, "L0")
    out = []
    groups: dict[str, list] = {eq: [] for eq in EQUATIONS}
    for x, y in all_primitive_pairs(rd):
        groups[equation_of(x, y)].append((x, y))
    for eq, pairs in groups.items():
        t0 = time.perf_counter()
        failures = []
        for x, y in pairs:
            chk = verify_contraction(x, y, rd, order, module)
            if not chk.ok:
                failures.append(chk.to_dict())
        out.append(_check(f"contraction:{eq}", {"m": m, "n": n, "order": order}, not failures, failures[:5],
                          time.perf_counter() - t0, {"pairs": len(pairs)}))
    t0 = time.perf_counter()
    poles = current_poles("E", 0, "E", 1, rd)
    ok = any((loc - Q1).is_zero() for loc, _ in poles)
    out.append(_check("contraction:pole-E0E1", {"m": m, "n": n}, ok, [] if ok else [{"poles": [
        [loc.canonical_str(), k] for loc, k in poles]}], time.perf_counter() - t0,
        {"poles": [[loc.canonical_str(), k] for loc, k in poles], "expected": Q1.canonical_str()}))
    t0 = time.perf_counter()
    products = verify_vacuum_products(rd, order)
    failures = [c.to_dict() for c in products if not c.ok]
    out.append(_check("contraction:vacuum-product", {"m": m, "n": n, "order": order}, not failures, failures[:5],
                      time.perf_counter() - t0, {"pairs": len(products)}))
    return out


def _relation_worker(args) -> tuple[list[RelationReport], list[CheckReport]]:
    m, n, weight, names, convention, D, B, W, basis, seconds, extras = args
    rd = build_root_datum(m, n)
    module = FockModule(rd, weight)
    engine = ModeEngine(module)
    instances = applicable_relations(rd, names, convention=convention)
    # the grading checks are cheap next to the relations; give them a tenth of the budget
    share = None if seconds is None else 0.9 * seconds
    deadline = None if share is None else time.monotonic() + share
    reps = verify_relations(instances, module, D, B, W, engine=engine, deadline=deadline, test_basis=basis)
    checks = []
    if extras:
        checks.append(verify_level(module, D, B, test_basis=basis))
        deadline = None if seconds is None else time.monotonic() + seconds - share
        checks.append(verify_admissibility(module, D, B, W, engine=engine, deadline=deadline, test_basis=basis))
    return reps, checks


def _merge_relation_reports(parts: list[list[RelationReport]], total: int) -> list[RelationReport]:
    merged = []
    for reps in zip(*parts):
        base = reps[0]
        out = RelationReport(base.rid, base.m, base.n, base.weight, base.D, base.B, base.W)
        for r in reps:
            out.vectors_checked += r.vectors_checked
            out.identities_checked += r.identities_checked
            out.elapsed += r.elapsed
            out.residuals.extend(r.residuals)
        out.residuals = out.residuals[:5]
        if any(r.status == "fail" for r in reps):
            out.status = "fail"
        elif out.vectors_checked < total:
            out.status = "incomplete"
            out.note = f"time budget exhausted after {out.vectors_checked} of {total} test vectors"
        merged.append(out)
    return merged


def relation_checks(cfg: SuiteConfig, names: Iterable[str] | None = None, extras: bool = True) -> list[dict]:
    """The relation suite on one module, split over ``cfg.jobs`` worker processes."""
    rd = build_root_datum(cfg.m, cfg.n)
    module = FockModule(rd, cfg.weight)
    basis = coverage_order(module.test_basis(cfg.degree, cfg.ball))
    names = tuple(names) if names is not None else cfg.relation_names()
    jobs = max(1, min(cfg.jobs, len(basis)))
    chunks = [basis[k::jobs] for k in range(jobs)]
    tasks = [(cfg.m, cfg.n, cfg.weight, names, cfg.convention, cfg.degree, cfg.ball, cfg.window, chunk,
              cfg.budget, extras) for chunk in chunks]
    if jobs == 1:
        results = [_relation_worker(tasks[0])]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_relation_worker, tasks))
    reps = _merge_relation_reports([r for r, _ in results], len(basis))
    out = [r.to_dict() for r in reps]
    if extras:
        for k in range(len(results[0][1])):
            out.append(_merge_checks([res[1][k] for res in results], len(basis)).to_dict())
    return out


def _merge_checks(parts: list[CheckReport], total: int) -> CheckReport:
    base = parts[0]
    out = CheckReport(base.id, dict(base.params))
    for p in parts:
        out.residuals.extend(p.residuals)
        out.elapsed += p.elapsed
    out.residuals = out.residuals[:5]
    statuses = {p.status for p in parts}
    out.status = "fail" if "fail" in statuses else ("incomplete" if "incomplete" in statuses else "pass")
    if base.id == "admissibility":
        checked = sum(p.details.get("vectors_checked", 0) for p in parts)
        worst = [p.details["max_N_v"] for p in parts if p.details.get("max_N_v") is not None]
        out.details = {"max_N_v": max(worst) if worst else None, "bound": base.details.get("bound"),
                       "vectors_checked": checked, "vectors_total": total}
    else:
        out.details = dict(base.details)
    return out


def screening_checks(cfg: SuiteConfig) -> list[dict]:
    rd = build_root_datum(cfg.m, cfg.n)
    module = FockModule(rd, cfg.weight)
    deadline = None if cfg.budget is None else time.monotonic() + cfg.budget
    return [r.to_dict() for r in verify_screening(module, cfg.degree, cfg.ball, cfg.window, deadline=deadline)]


def _levels(rmax: int) -> list[int]:
    return [s * r for r in range(1, rmax + 1) for s in (1, -1)]


def coefficient_checks(m: int, n: int, rmax: int, order: int) -> list[dict]:
    rd = build_root_datum(m, n)
    out = []

    def run(cid, params, fn):
        t0 = time.perf_counter()
        ok, residuals, details = fn()
        out.append(_check(cid, params, ok, residuals, time.perf_counter() - t0, details))

    base = {"m": m, "n": n, "rmax": rmax}

    def det():
        signs, bad = {}, []
        for r in range(1, rmax + 1):
            rep = co.toroidal_det(r, rd)
            signs[r] = rep.sign
            if not rep.ok:
                bad.append({"r": r, "value": rep.value.canonical_str(), "closed_form": rep.closed_form.canonical_str()})
        return not bad, bad, {"sign": signs}
    run("coeffs:toroidal-det", base, det)

    def det_inv():
        bad = [{"r": r} for r in _levels(rmax) if not co.det_inversion_check(r, rd)]
        return not bad, bad, {}
    run("coeffs:det-d-inversion", base, det_inv)

    def gamma():
        bad = [{"r": r, "j": j, "residual": x.canonical_str()}
               for r in _levels(rmax) for j, x in zip(rd.I, co.gamma_residuals(r, rd)) if not x.is_zero()]
        return not bad, bad[:5], {}
    run("coeffs:gamma-system", base, gamma)

    def beta():
        bad = [{"r": r, "j": j, "residual": x.canonical_str()}
               for r in _levels(rmax) for j, x in zip(rd.I, co.beta_residuals(r, rd)) if not x.is_zero()]
        return not bad, bad[:5], {}
    run("coeffs:beta-system", base, beta)

    def norm(build, label):
        def fn():
            bad = []
            for r in range(1, rmax + 1):
                got = co.commutator(build(r, rd), build(-r, rd), rd)
                want = co.heisenberg_normalisation(r, rd)
                if not (got - want).is_zero():
                    bad.append({"r": r, "commutator": got.canonical_str(), "expected": want.canonical_str()})
            return not bad, bad, {}
        run(f"coeffs:{label}-normalisation", base, fn)
    norm(co.solve_gamma, "Hver")
    norm(co.h_combo, "h")

    def h_central():
        bad = []
        for r in _levels(rmax):
            for j in rd.I:
                for s in _levels(rmax):
                    val = co.commutator(co.h_combo(r, rd), co.HLinearCombo.symbol(("h", j, s)), rd)
                    if not val.is_zero():
                        bad.append({"r": r, "j": j, "s": s, "commutator": val.canonical_str()})
        return not bad, bad[:5], {}
    run("coeffs:h-commutes-with-sl", base, h_central)

    def htilde():
        bad = []
        for r in _levels(rmax):
            diff = co.verify_htilde0(r, rd)
            if not diff.is_zero():
                bad.append({"r": r, "difference": diff.render()})
        return not bad, bad, {}
    run("coeffs:v-htilde0", base, htilde)

    for name in co.EXP_IDS:
        t0 = time.perf_counter()
        R = rmax if name in co.K0_IDS else order
        rep = co.verify_exp_identity(name, R, rd)
        out.append(_check(f"coeffs:{name}", {"m": m, "n": n, "order": R}, rep.ok,
                          [rep.first_failure] if rep.first_failure else [], time.perf_counter() - t0,
                          rep.details))
    return out


# orchestration ---------------------------------------------------------------

def run_command(command: str, cfg: SuiteConfig) -> list[dict]:
    if command == "cartan":
        return cartan_checks(cfg.m, cfg.n)
    if command == "contractions":
        return contraction_checks(cfg.m, cfg.n, cfg.order)
    if command == "verify":
        return relation_checks(cfg)
    if command == "screenings":
        return screening_checks(cfg)
    if command == "coeffs":
        return coefficient_checks(cfg.m, cfg.n, cfg.rmax, cfg.order)
    raise ConfigError(f"unknown command {command!r}")


def summarize(checks: list[dict]) -> dict:
    counts = {"pass": 0, "fail": 0, "incomplete": 0}
    for c in checks:
        counts[c["status"]] = counts.get(c["status"], 0) + 1
    status = "pass" if counts["fail"] == 0 and counts["incomplete"] == 0 else (
        "fail" if counts["fail"] else "incomplete")
    return {"total": len(checks), **counts, "status": status}


def run_suite(cfg: SuiteConfig, commands: Iterable[str]) -> dict:
    checks = []
    for command in commands:
        checks.extend(run_command(command, cfg))
    return {"config": asdict(cfg), "checks": checks, "summary": summarize(checks)}


def write_report(report: dict, path: str | Path | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=False)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n")


def exit_status(report: dict) -> int:
    """0 when every check passed; incomplete checks count as failures."""
    return 0 if report["summary"]["status"] == "pass" else 1
