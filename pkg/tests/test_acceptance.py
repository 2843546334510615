"""Acceptance criteria, each run at its stated tolerance and time budget."""

import itertools
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from heisenflow.darwinism import correlation_check
from heisenflow.games import (
    MixedGameSpec,
    RationalWeights,
    stage1_value,
    stage2_value,
    stage3_value,
    stage4_value,
)
from heisenflow.games.axioms import verify_rationality_axioms
from heisenflow.measurement import (
    Permutation,
    measurement_unitary,
    permutation_unitary,
    sequential_measurement,
)
from heisenflow.operators import (
    CompositeSpace,
    HeisenbergState,
    Observable,
    dagger,
    frob,
    make_matrix_units,
    spectral_decompose,
)
from heisenflow.runner import emit_report, run_suite
from heisenflow.scenario import parse_scenario
from heisenflow.sampling import random_hermitian, random_observable, random_phases, random_unitary, rng_from

SCENARIOS = Path(__file__).parent.parent / "scenarios"
HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def criterion(number, title):
    return pytest.mark.criterion(number, title)


def _compositions(total, parts):
    """Every tuple of ``parts`` positive integers summing to ``total``."""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


@criterion(1, "projector and matrix-unit algebra, N=1..8, 20 bases each")
def test_algebra_residuals():
    start = time.perf_counter()
    worst_proj = worst_units = 0.0
    for n in range(1, 9):
        rng = rng_from(1000 + n)
        for _ in range(20):
            obs = spectral_decompose(random_hermitian(n, rng))
            worst_proj = max(worst_proj, max(obs.family.residuals().values()))
            worst_units = max(worst_units, make_matrix_units(obs.family).algebra_residual())
    elapsed = time.perf_counter() - start
    print(f"algebra: projector {worst_proj:.2e}, matrix units {worst_units:.2e}, {elapsed:.2f} s")
    assert worst_proj < 1e-10
    assert worst_units < 1e-10
    assert elapsed < 5.0


@criterion(2, "perfect measurement correlates c = a+b mod N, N=2..6")
def test_perfect_measurement():
    start = time.perf_counter()
    worst = 0.0
    for n in range(2, 7):
        rng = rng_from(2000 + n)
        space = CompositeSpace((n, n))
        a1, a2 = random_observable(n, rng), random_observable(n, rng)
        units2 = make_matrix_units(a2.family)
        a1_0, a2_0 = a1.embed(0, space), a2.embed(1, space)
        expected = {(a, b): (a + b) % n for a in range(n) for b in range(n)}
        for _ in range(10):
            u = measurement_unitary(a1.family, units2, random_phases((n, n), rng), space)
            a1_1, a2_1 = a1_0.evolve(u), a2_0.evolve(u)
            worst = max(worst, frob(a1_1.matrix - a1_0.matrix))
            rep = correlation_check(a1_1, a2_1, space, reference=a2_0)
            assert rep.correlated, (n, rep)
            assert rep.record_table() == expected
            c1, c2 = random_observable(n, rng), random_observable(n, rng)
            crep = correlation_check(c1.embed(0, space).evolve(u), c2.embed(1, space).evolve(u),
                                     space, reference=a2_0)
            assert not crep.correlated
    elapsed = time.perf_counter() - start
    print(f"perfect measurement: control drift {worst:.2e}, {elapsed:.2f} s")
    assert worst < 1e-10
    assert elapsed < 10.0


@criterion(3, "measured observables ignore phases, non-commuting ones do not")
@pytest.mark.parametrize("n", [2, 3, 4])
def test_phase_dichotomy(n):
    rng = rng_from(3000 + n)
    obs = random_observable(n, rng)
    units = make_matrix_units(obs.family)
    pi = Permutation.cyclic(n)
    u0 = permutation_unitary(units, pi)
    other = random_observable(n, rng)
    witness = 0.0
    for _ in range(10):
        u = permutation_unitary(units, pi, random_phases(n, rng))
        assert frob(obs.evolve(u).matrix - obs.evolve(u0).matrix) < 1e-10
        witness = max(witness, frob(other.evolve(u).matrix - other.evolve(u0).matrix))
    assert witness > 1e-3

    # the same split for the measurement interaction on the pair
    space = CompositeSpace((n, n))
    a2 = random_observable(n, rng)
    units2 = make_matrix_units(a2.family)
    m0 = measurement_unitary(obs.family, units2, None, space)
    m = measurement_unitary(obs.family, units2, random_phases((n, n), rng), space)
    for measured in (obs.embed(0, space), a2.embed(1, space)):
        assert frob(measured.evolve(m).matrix - measured.evolve(m0).matrix) < 1e-10
    rotated = other.embed(0, space)
    assert frob(rotated.evolve(m).matrix - rotated.evolve(m0).matrix) > 1e-3


@criterion(4, "sequential measurement in a rotated basis splits records")
def test_record_loss():
    a = Observable.diagonal((0.0, 1.0))
    rotated = sequential_measurement(a, Observable.from_basis((0.0, 1.0), HADAMARD), a)
    assert rotated.min_branches >= 2
    repeat = sequential_measurement(a, a, a)
    assert repeat.min_branches == repeat.max_branches == 1


@criterion(5, "equal-weight game equals the mean, N=1..6")
@pytest.mark.parametrize("n", range(1, 7))
def test_stage1(n):
    rng = rng_from(5000 + n)
    obs = random_observable(n, rng)
    rep = stage1_value(obs)
    assert abs(rep.value - obs.values.mean()) < 1e-10
    assert rep.deviation < 1e-10
    assert rep.passed, rep.failures
    assert f"all {math.factorial(n)} permutations" in rep.check("symmetrized-payoff-constant").note

    # every one of the N! acts fixes the state and relabels the payoff
    units = make_matrix_units(obs.family)
    v = units.vectors
    rho = HeisenbergState.pure(v.sum(axis=1)).matrix
    count = 0
    for pi in Permutation.all(n):
        u = permutation_unitary(units, pi).matrix
        assert frob(u @ rho @ dagger(u) - rho) < 1e-10
        relabeled = v @ np.diag(obs.values[list(pi.mapping)]) @ dagger(v)
        assert frob(u @ obs.matrix @ dagger(u) - relabeled) < 1e-10
        count += 1
    assert count == math.factorial(n)


@criterion(6, "rational-weight games for every composition, N<=4, M<=8")
def test_stage2_all_compositions():
    start = time.perf_counter()
    worst_record = worst_value = 0.0
    cases = 0
    rng = rng_from(6000)
    for n in range(1, 5):
        alpha = rng.uniform(-1, 1, n)
        for big_m in range(n, 9):
            for m in _compositions(big_m, n):
                rep = stage2_value(alpha, m)
                assert rep.passed, (m, rep.failures)
                worst_record = max(worst_record, rep.check("record-matches-control").value)
                worst_value = max(worst_value, abs(rep.value - np.dot(m, alpha) / big_m))
                cases += 1
    elapsed = time.perf_counter() - start
    print(f"stage 2: {cases} compositions, record {worst_record:.2e}, value {worst_value:.2e}, {elapsed:.2f} s")
    assert worst_record < 1e-9
    assert worst_value < 1e-9
    assert elapsed < 30.0


@criterion(7, "bracketing pins irrational-weight values")
def test_stage3_irrational_targets():
    rng = rng_from(7000)
    for k in range(20):
        n = 2 + k % 3
        w = rng.dirichlet(np.ones(n))
        assert RationalWeights.detect(w, 64) is None
        alpha = rng.uniform(-1, 1, n)
        bracket, rep = stage3_value(alpha, w)
        assert bracket.converged and bracket.width < 1e-6
        assert bracket.iterations <= 40
        assert abs(bracket.midpoint - np.dot(w, alpha)) < 1e-6
        assert rep.check("dominance-every-step").passed
        assert bracket.lower_value - 1e-12 <= np.dot(w, alpha) <= bracket.upper_value + 1e-12


def _stage4_specs(case, rng):
    for k in range(10):
        n = 2 + k % 3
        obs = random_observable(n, rng)
        if case == "4.1":
            basis = random_unitary(n, rng)
            yield MixedGameSpec.from_vectors(tuple(rng.dirichlet(np.ones(n))), basis), obs
        elif case == "4.2":
            yield MixedGameSpec((1.0 / n,) * n, obs.family), obs
        else:
            big_m = int(rng.integers(n + 1, 64 // n + 1))
            m = np.ones(n, dtype=int) + rng.multinomial(big_m - n, np.ones(n) / n)
            if np.all(m == m[0]):
                # equal weights belong to case 4.2
                m[0] += 1
            yield MixedGameSpec(tuple(m / m.sum()), obs.family), obs


@criterion(8, "mixed-state games, cases 4.1, 4.2 and 4.3")
@pytest.mark.parametrize("case", ["4.1", "4.2", "4.3"])
def test_stage4(case):
    rng = rng_from(8000 + int(case[-1]))
    worst = 0.0
    for spec, obs in _stage4_specs(case, rng):
        rep = stage4_value(spec, obs)
        assert rep.method == f"stage{case}"
        assert rep.passed, rep.failures
        if case == "4.3":
            assert rep.check("record-matches-control").value < 1e-9
        # unsharp mixtures have irrational weights and go through bracketing
        tol = 1e-6 if case == "4.1" else 1e-9
        worst = max(worst, rep.deviation)
        assert rep.deviation < tol, (case, rep.deviation)
    print(f"case {case}: worst deviation {worst:.2e}")


@criterion(9, "rationality axioms on 100 seeded games")
def test_axioms():
    report = verify_rationality_axioms(seed=9, n_games=100)
    for r in report.results:
        print(f"axiom {r.name}: worst {r.worst_residual:.2e} over {r.trials} trials")
        assert r.passed, r
        assert r.worst_residual < 1e-9


@criterion(10, "same suite and seed give a byte-identical report")
def test_determinism(tmp_path):
    scenarios = [parse_scenario(p.read_text(), p.stem) for p in sorted(SCENARIOS.glob("*.json"))]
    first = emit_report(run_suite(scenarios, seed=11), "csv")
    second = emit_report(run_suite(list(reversed(scenarios)), seed=11), "csv")
    assert first == second
    out = tmp_path / "report.csv"
    subprocess.run([sys.executable, "-m", "heisenflow", "--suite", str(SCENARIOS), "--seed", "11",
                    "--format", "csv", "--out", str(out)], check=True)
    assert out.read_text() == first
