"""Execute scenarios and render their reports."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .checks import Check
from .darwinism import (
    CORRELATION_TOL,
    branch_decomposition,
    correlation_check,
    phase_equivalent,
)
from .errors import ScenarioError, ValidationError
from .games import (
    BRACKET_TOL,
    GAME_TOL,
    Game,
    MixedGameSpec,
    PayoffFunction,
    RationalWeights,
    game_value,
    stage1_value,
    stage2_value,
    stage3_value,
    stage4_value,
)
from .games.axioms import verify_rationality_axioms
from .measurement import (
    Multiplicities,
    Permutation,
    coarse_measurement_unitary,
    measurement_unitary,
    permutation_unitary,
    record_support,
    sequential_measurement,
    uniform_ready,
)
from .operators import (
    ALGEBRA_TOL,
    CompositeSpace,
    HeisenbergState,
    MatrixUnitFamily,
    Observable,
    ProjectorFamily,
    dagger,
    express_in_family,
    frob,
    joint_observable,
    make_matrix_units,
    spectral_decompose,
)
from .sampling import fourier_matrix, random_hermitian, random_observable, random_phases, random_unitary, rng_from
from .scenario import Scenario

WITNESS_THRESHOLD = 1e-3


@dataclass(frozen=True)
class RunReport:
    """Checks executed for one scenario, in execution order, each exactly once."""

    name: str
    kind: str
    checks: tuple
    details: tuple = ()
    elapsed: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple:
        return tuple(c for c in self.checks if not c.passed)


class _Collector:
    def __init__(self):
        self.checks: list = []
        self.details: list = []

    def add(self, check: Check) -> None:
        if any(c.name == check.name for c in self.checks):
            raise RuntimeError(f"check {check.name!r} recorded twice")
        self.checks.append(check)

    def extend(self, checks, prefix: str = "") -> None:
        for c in checks:
            self.add(replace(c, name=prefix + c.name))

    def note(self, line: str) -> None:
        self.details.append(line)


def _spectrum(s: Scenario, n: int) -> tuple:
    return s.spectrum if s.spectrum is not None else tuple(float(a) for a in range(n))


def _phases(s: Scenario, shape, rng):
    return None if s.phases == "zero" else random_phases(shape, rng)


# ------------------------------------------------------------ algebra

def _run_algebra(s: Scenario, tol: float, out: _Collector) -> None:
    rng = rng_from(s.seed)
    n, trials = s.n, s.trials or 20
    proj = units_res = recon = change = 0.0
    for _ in range(trials):
        h = random_hermitian(n, rng)
        obs = spectral_decompose(h)
        proj = max(proj, max(obs.family.residuals().values()))
        units = make_matrix_units(obs.family)
        units_res = max(units_res, units.algebra_residual())
        recon = max(recon, frob(obs.matrix - h))
        other = random_observable(n, rng)
        beta = express_in_family(other, units)
        change = max(change, max(frob(a - b) for a, b in zip(beta.reconstruct(units), other.projectors)))
    out.add(Check.residual("projector-algebra", proj, tol))
    out.add(Check.residual("matrix-unit-algebra", units_res, tol))
    out.add(Check.residual("spectral-reconstruction", recon, tol))
    out.add(Check.residual("change-of-family", change, tol))
    out.note(f"N = {n}, {trials} seeded random bases (seed {s.seed})")


# ------------------------------------------------------------ motions

def _run_permutation(s: Scenario, tol: float, out: _Collector) -> None:
    rng = rng_from(s.seed)
    n = s.n
    obs = Observable.from_basis(_spectrum(s, n), random_unitary(n, rng))
    units = make_matrix_units(obs.family)
    pi = Permutation(s.permutation) if s.permutation is not None else Permutation.cyclic(n)
    phases = _phases(s, (n,), rng)
    u = permutation_unitary(units, pi, phases)
    u0 = permutation_unitary(units, pi)
    evolved = obs.evolve(u)
    expected = sum(a * obs.family[pi(k)] for k, a in enumerate(obs.values))
    out.add(Check.residual("unitarity", u.residual(), tol))
    out.add(Check.residual("eigenvalues-permuted", frob(evolved.matrix - expected), tol))
    out.add(Check.residual("phase-independent-relabeling", frob(evolved.matrix - obs.evolve(u0).matrix), tol))
    structure = branch_decomposition(u, obs)
    ref = np.zeros(n) if phases is None else np.mod(phases, 2 * np.pi)
    dphi = np.abs(np.angle(np.exp(1j * (structure.phases - ref))))
    out.add(Check.flag("round-trip-permutation", structure.permutation == pi))
    out.add(Check.residual("round-trip-phases", float(dphi.max()), tol))
    if phases is not None and n > 1:
        c = random_observable(n, rng)
        shift = frob(c.evolve(u).matrix - c.evolve(u0).matrix)
        out.add(Check.exceeds("phases-move-noncommuting", shift, WITNESS_THRESHOLD))
    out.note(f"permutation {list(pi.mapping)}")


def _measure_setup(s: Scenario, rng):
    n = s.n
    space = CompositeSpace((n, n))
    a1 = Observable.from_basis(_spectrum(s, n), random_unitary(n, rng))
    a2 = Observable.from_basis(_spectrum(s, n), random_unitary(n, rng))
    phases = _phases(s, (n, n), rng)
    u = measurement_unitary(a1.family, make_matrix_units(a2.family), phases, space)
    return n, space, a1, a2, phases, u


def _bijection_lines(report, out: _Collector, n: int) -> bool:
    table = report.record_table()
    expected = {(a, b): (a + b) % n for a in range(n) for b in range(n)}
    out.note("record table (a, b) -> c:")
    for a in range(n):
        out.note("  " + "  ".join(f"({a},{b})->{table.get((a, b), '-')}" for b in range(n)))
    return table == expected


def _run_measure(s: Scenario, tol: float, out: _Collector) -> None:
    rng = rng_from(s.seed)
    n, space, a1, a2, phases, u = _measure_setup(s, rng)
    a1_0, a2_0 = a1.embed(0, space), a2.embed(1, space)
    a1_1, a2_1 = a1_0.evolve(u), a2_0.evolve(u)
    out.add(Check.residual("unitarity", u.residual(), tol))
    out.add(Check.residual("control-unchanged", frob(a1_1.matrix - a1_0.matrix), tol))
    rep = correlation_check(a1_1, a2_1, space, reference=a2_0, tol=max(tol, CORRELATION_TOL))
    out.add(Check.residual("correlation-residual", rep.residual, max(tol, CORRELATION_TOL)))
    out.add(Check.flag("records-correlated", rep.correlated))
    out.add(Check.flag("bijection-a-plus-b", _bijection_lines(rep, out, n)))
    if n > 1:
        c1, c2 = random_observable(n, rng), random_observable(n, rng)
        crep = correlation_check(c1.embed(0, space).evolve(u), c2.embed(1, space).evolve(u),
                                 space, reference=a2_0)
        out.add(Check.flag("noncommuting-pair-uncorrelated", not crep.correlated))


def _run_coarse(s: Scenario, tol: float, out: _Collector) -> None:
    mult = Multiplicities(s.multiplicities)
    n, big_m = len(mult.m), mult.total
    space = CompositeSpace((n, big_m))
    control = Observable.diagonal(_spectrum(s, n))
    units2 = MatrixUnitFamily.computational(big_m)
    u = coarse_measurement_unitary(control.family, units2, mult, space)
    lifted = control.embed(0, space)
    out.add(Check.residual("unitarity", u.residual(), tol))
    out.add(Check.residual("control-unchanged", frob(lifted.evolve(u).matrix - lifted.matrix), tol))
    support = record_support(u, control.family, units2.family, space, uniform_ready(units2))
    leak = sum(support[a, e] for a in range(n) for e in range(big_m) if e not in mult.block(a))
    out.add(Check.residual("records-inside-blocks", abs(leak), tol))
    out.note(f"multiplicities {list(mult.m)}, blocks {[list(mult.block(a)) for a in range(n)]}")
    for a in range(n):
        out.note(f"  branch {a}: " + " ".join(f"{round(x, 6) + 0.0:.6f}" for x in support[a]))


def _control_basis(s: Scenario, n: int, a1: Observable, rng) -> np.ndarray:
    choice = s.control or "fourier"
    v = make_matrix_units(a1.family).vectors
    if choice == "same":
        return v
    if choice == "hadamard":
        if n != 2:
            raise ScenarioError([f"control 'hadamard' needs n = 2, got n = {n}"])
        return v @ (np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    if choice == "random":
        return v @ random_unitary(n, rng)
    return v @ fourier_matrix(n)


def _run_sequential(s: Scenario, tol: float, out: _Collector) -> None:
    rng = rng_from(s.seed)
    n = s.n
    a1 = Observable.diagonal(_spectrum(s, n))
    a2 = Observable.diagonal(_spectrum(s, n))
    c1 = Observable.from_basis(_spectrum(s, n), _control_basis(s, n, a1, rng))
    rep = sequential_measurement(a1, c1, a2, _phases(s, (n, n), rng))
    out.add(Check.residual("unitarity", rep.total.residual(), tol))
    out.add(Check.residual("rotation-lands-on-control", rep.rotation_residual, tol))
    spec_dev = float(np.max(np.abs(np.linalg.eigvalsh(rep.a2_3.matrix)
                                    - np.sort(np.repeat(a2.values, n)))))
    out.add(Check.residual("record-spectrum-preserved", spec_dev, tol))
    if rep.repeat:
        out.add(Check.flag("one-branch-per-branch", rep.min_branches == rep.max_branches == 1,
                           "commuting control: repeat measurement"))
    else:
        out.add(Check.flag("branches-multiply", rep.min_branches >= 2))
    out.note(f"branches at t=3 per t=0 branch: {rep.branches.tolist()}")


# ---------------------------------------------------------- darwinism

def _run_darwinism(s: Scenario, tol: float, out: _Collector) -> None:
    rng = rng_from(s.seed)
    n, space, a1, a2, phases, u = _measure_setup(s, rng)
    ctol = max(tol, CORRELATION_TOL)
    a1_0, a2_0 = a1.embed(0, space), a2.embed(1, space)
    a1_1, a2_1 = a1_0.evolve(u), a2_0.evolve(u)
    rep = correlation_check(a1_1, a2_1, space, reference=a2_0, tol=ctol)
    out.add(Check.flag("records-correlated", rep.correlated, f"residual {rep.residual:.3e}"))
    out.add(Check.flag("bijection-a-plus-b", _bijection_lines(rep, out, n)))
    swapped = correlation_check(a2_1, a1_1, space, reference=a2_0, tol=ctol)
    out.add(Check.flag("symmetric", swapped.correlated == rep.correlated))
    if n > 1:
        out.add(Check.flag("product-observables-uncorrelated",
                           not correlation_check(a1_0, a2_0, space, tol=ctol).correlated))
        c1, c2 = random_observable(n, rng), random_observable(n, rng)
        crep = correlation_check(c1.embed(0, space).evolve(u), c2.embed(1, space).evolve(u),
                                 space, reference=a2_0, tol=ctol)
        out.add(Check.flag("noncommuting-pair-uncorrelated", not crep.correlated))

    joint = joint_observable(a1_0.family, a2_0.family)
    structure = branch_decomposition(u, joint)
    labels = joint.family.labels
    expected = {(a, b): (a, (a + b) % n) for a in range(n) for b in range(n)}
    out.add(Check.flag("joint-branches-relabel", structure.label_map() == expected,
                       f"{structure.branch_count} branches"))

    second = measurement_unitary(a1.family, make_matrix_units(a2.family),
                                 _phases(s, (n, n), rng), space)
    both = second @ u
    rep2 = correlation_check(a1_0.evolve(both), a2_0.evolve(both), space, reference=a2_1, tol=ctol)
    out.add(Check.flag("same-basis-chain-correlated", rep2.correlated))

    if n > 1:
        c1 = Observable.from_basis(a1.values, make_matrix_units(a1.family).vectors @ fourier_matrix(n))
        seq = sequential_measurement(a1, c1, a2, phases)
        new = correlation_check(seq.a2_3, seq.a1_3, space, reference=seq.a2_2, tol=ctol)
        old = correlation_check(seq.a2_3, a1_0, space, reference=seq.a2_2, tol=ctol)
        out.add(Check.flag("sequential-records-rotated-control", new.correlated))
        out.add(Check.flag("sequential-loses-original-records", not old.correlated))

    rho = HeisenbergState.pure(make_matrix_units(a1.family).vectors.sum(axis=1)).matrix
    info = rho @ a1.matrix
    d = make_matrix_units(a1.family).vectors @ np.diag(np.exp(1j * random_phases(n, rng))) \
        @ dagger(make_matrix_units(a1.family).vectors)
    out.add(Check.flag("phase-equivalence", phase_equivalent(info, d @ info @ dagger(d), a1.family)))
    out.note(f"classical act on joint observable: {structure.branch_count} branches {labels}")


# --------------------------------------------------------------- games

def _payoff(s: Scenario) -> Optional[PayoffFunction]:
    return None if s.payoff is None else PayoffFunction(s.payoff)


def _run_game(s: Scenario, tol: Optional[float], out: _Collector) -> None:
    payoff = _payoff(s)
    stage = s.stage
    btol = tol if tol is not None else BRACKET_TOL
    if stage == "1":
        report = stage1_value(Observable.diagonal(s.spectrum), payoff)
    elif stage == "2":
        report = stage2_value(s.spectrum, RationalWeights(s.multiplicities), payoff)
    elif stage == "3":
        _, report = stage3_value(s.spectrum, s.weights, btol, 40, payoff)
    elif stage == "auto":
        game = Game(HeisenbergState(s.matrix("state")), spectral_decompose(s.matrix("observable")), payoff)
        report = game_value(game, btol)
    else:
        obs = Observable.diagonal(s.spectrum)
        n = len(s.spectrum)
        if stage == "4.1":
            spec = MixedGameSpec.from_vectors(s.mixture_weights, s.matrix("mixture_vectors"))
        elif stage == "4.2":
            spec = MixedGameSpec((1.0 / n,) * n, ProjectorFamily.computational(n))
        elif stage == "4.3":
            spec = MixedGameSpec(tuple(RationalWeights(s.multiplicities).weights), ProjectorFamily.computational(n))
        else:
            spec = MixedGameSpec(s.weights, ProjectorFamily.computational(n))
        report = stage4_value(spec, obs, payoff, case=stage, tol=btol)
    out.extend(report.trail)
    vtol = tol if tol is not None else report.tolerance
    out.add(Check.compare("value-vs-oracle", report.value, report.oracle, vtol, report.method))
    out.note(f"method {report.method}: value {report.value:.12g}, oracle {report.oracle:.12g}")
    if report.bracketing is not None:
        b = report.bracketing
        out.note(f"bracket [{b.lower_value:.12g}, {b.upper_value:.12g}] after {b.iterations} "
                 f"refinements, width {b.width:.3e}")


def _run_axioms(s: Scenario, tol: Optional[float], out: _Collector) -> None:
    report = verify_rationality_axioms(seed=s.seed, n_games=s.games or 100, tol=tol or GAME_TOL)
    for r in report.results:
        out.add(Check(r.name, r.worst_residual, r.passed, None, tol or GAME_TOL, r.note or f"{r.trials} trials"))
    out.note(f"{report.games} seeded games (seed {s.seed})")


_MOTIONS = {
    "permutation": _run_permutation,
    "measure": _run_measure,
    "coarse": _run_coarse,
    "sequential": _run_sequential,
}


def run_scenario(s: Scenario, tolerance: Optional[float] = None, seed: Optional[int] = None,
                 timing: bool = False) -> RunReport:
    """Run one scenario. ``tolerance`` and ``seed`` override the scenario's own values."""
    if seed is not None:
        s = replace(s, seed=seed)
    tol = tolerance if tolerance is not None else s.tolerance
    out = _Collector()
    start = time.perf_counter()
    try:
        if s.kind == "algebra-check":
            _run_algebra(s, tol or ALGEBRA_TOL, out)
        elif s.kind == "measure-demo":
            _MOTIONS[s.motion](s, tol or ALGEBRA_TOL, out)
        elif s.kind == "darwinism-report":
            _run_darwinism(s, tol or ALGEBRA_TOL, out)
        elif s.kind == "game-value":
            _run_game(s, tol, out)
        else:
            _run_axioms(s, tol, out)
    except ValidationError as exc:
        raise ScenarioError([f"{s.name}: {exc}"]) from None
    elapsed = time.perf_counter() - start if timing else None
    return RunReport(s.name, s.kind, tuple(out.checks), tuple(out.details), elapsed)


# ------------------------------------------------------------- output

HEADER = ("check", "value", "oracle", "deviation", "pass")


def _num(x) -> str:
    return "" if x is None else "%.12g" % x


def _row(scenario: str, c: Check) -> tuple:
    return (f"{scenario}/{c.name}", _num(c.value), _num(c.oracle), _num(c.deviation),
            "true" if c.passed else "false")


def emit_report(reports, fmt: str = "text") -> str:
    """Render one report or a sequence of reports as aligned text or CSV."""
    if isinstance(reports, RunReport):
        reports = [reports]
    reports = list(reports)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for r in reports:
            for c in r.checks:
                writer.writerow(_row(r.name, c))
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    blocks = []
    for r in reports:
        rows = [("check", "value", "oracle", "deviation", "tolerance", "pass")]
        rows += [(c.name, _num(c.value), _num(c.oracle), _num(c.deviation), _num(c.tolerance),
                  "PASS" if c.passed else "FAIL") for c in r.checks]
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = [f"== {r.name} [{r.kind}] =="]
        for row in rows:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if r.details:
            lines.append("details:")
            lines += [f"  {d}" for d in r.details]
        failed = len(r.failures)
        lines.append(f"result: {'PASS' if failed == 0 else 'FAIL'} "
                     f"({len(r.checks)} checks, {failed} failed)")
        if r.elapsed is not None:
            lines.append(f"elapsed: {r.elapsed:.3f} s")
        blocks.append("\n".join(lines))
    total = sum(len(r.checks) for r in reports)
    failed = sum(len(r.failures) for r in reports)
    blocks.append(f"summary: {len(reports)} scenarios, {total} checks, {failed} failed")
    return "\n\n".join(blocks) + "\n"


def run_suite(scenarios: Sequence[Scenario], **kwargs) -> list:
    """Run scenarios in name order so reports are order-stable."""
    return [run_scenario(s, **kwargs) for s in sorted(scenarios, key=lambda s: s.name)]
