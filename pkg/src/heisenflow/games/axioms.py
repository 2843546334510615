"""Check the computed value function against the rationality properties on seeded games."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..measurement import Permutation, permutation_unitary
from ..operators import (
    ALGEBRA_TOL,
    HeisenbergState,
    Observable,
    dagger,
    frob,
    make_matrix_units,
    spectral_decompose,
)
from ..sampling import random_hermitian, random_spectrum, random_unitary, rng_from
from .core import GAME_TOL, Game, PayoffFunction, payoff_sum
from .stages import INTERNAL_BRACKET_TOL, INTERNAL_MAX_ITER, game_value

AXIOMS = ("physicality", "dominance", "additivity", "classical-act-neutrality", "argmax-neutrality")


@dataclass(frozen=True)
class AxiomResult:
    name: str
    passed: bool
    worst_residual: float
    trials: int
    note: str = ""


@dataclass(frozen=True)
class AxiomReport:
    results: tuple
    games: int
    seed: Optional[int]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def result(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)


def _value(game: Game) -> float:
    return game_value(game, tol=INTERNAL_BRACKET_TOL, max_iter=INTERNAL_MAX_ITER).value


def random_rational_game(rng, max_n: int = 4, max_m: int = 8) -> Game:
    """Pure game with weights ``m_a / M`` (``M <= max_m``) in a Haar-random eigenbasis."""
    n = int(rng.integers(2, max_n + 1))
    big_m = int(rng.integers(n, max_m + 1))
    m = rng.multinomial(big_m, np.full(n, 1.0 / n))
    basis = random_unitary(n, rng)
    amps = np.sqrt(m / big_m) * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    obs = Observable.from_basis(tuple(random_spectrum(n, rng)), basis)
    payoff = PayoffFunction(tuple(rng.uniform(-1, 1, n)))
    return Game(HeisenbergState.pure(basis @ amps), obs, payoff)


def _psi(game: Game) -> np.ndarray:
    return np.linalg.eigh(game.state.matrix)[1][:, -1]


def _physicality(game: Game, rng) -> tuple:
    """Games sharing ``rho P(A)`` but built from different observables."""
    rho = game.state.matrix
    pa = game.payoff_observable
    base = _value(Game(game.state, pa))
    n = game.state.dim
    psi = _psi(game)
    q = np.eye(n) - rho
    shifted = spectral_decompose(pa.matrix + q @ random_hermitian(n, rng) @ q)
    variants = [shifted]
    if n >= 3:
        span, _ = np.linalg.qr(np.column_stack([psi, pa.matrix @ psi]))
        keep = span[:, : np.linalg.matrix_rank(np.column_stack([psi, pa.matrix @ psi]), 1e-9)]
        full, _ = np.linalg.qr(np.column_stack([keep, random_unitary(n, rng)]))
        comp = full[:, keep.shape[1]:]
        w = random_unitary(comp.shape[1], rng)
        u = keep @ dagger(keep) + comp @ w @ dagger(comp)
        variants.append(pa.evolve(u))
    worst = 0.0
    for alt in variants:
        same_info = frob(rho @ alt.matrix - rho @ pa.matrix)
        if same_info > 1e-9:
            worst = max(worst, same_info)
            continue
        worst = max(worst, abs(_value(Game(game.state, alt)) - base))
    return worst, len(variants)


def _moduli_preserving_act(game: Game, rng):
    units = make_matrix_units(game.observable.family)
    amps = dagger(units.vectors) @ _psi(game)
    mods = np.round(np.abs(amps), 9)
    mapping = np.arange(len(amps))
    for level in np.unique(mods):
        idx = np.flatnonzero(mods == level)
        mapping[idx] = rng.permutation(idx)
    pi = Permutation(tuple(int(x) for x in mapping))
    phases = np.angle(amps) - np.angle(amps[mapping])
    return permutation_unitary(units, pi, phases)


def verify_rationality_axioms(sample: Optional[Sequence[Game]] = None, seed: Optional[int] = 0,
                              n_games: int = 100, tol: float = GAME_TOL) -> AxiomReport:
    """Test physicality, dominance, additivity and classical act neutrality.

    Failures are reported, never raised. With no ``sample`` the games are
    drawn from ``random_rational_game`` using ``seed``.
    """
    rng = rng_from(seed)
    games = list(sample) if sample is not None else [random_rational_game(rng) for _ in range(n_games)]
    worst = dict.fromkeys(AXIOMS, 0.0)
    trials = dict.fromkeys(AXIOMS, 0)
    flips = 0
    for game in games:
        n = len(game.payoff)
        v = _value(game)

        r, k = _physicality(game, rng)
        worst["physicality"] = max(worst["physicality"], r)
        trials["physicality"] += k

        lowered = PayoffFunction(tuple(game.payoff.as_array() - np.abs(rng.normal(size=n)) * (rng.random(n) < 0.7)))
        v_low = _value(game.with_payoff(lowered))
        p0 = PayoffFunction.identity(game.observable.spectrum)
        v0, v0_shift = _value(game.with_payoff(p0)), _value(game.with_payoff(p0.shift(-1.0)))
        worst["dominance"] = max(worst["dominance"], v_low - v, abs(v0 - v0_shift - 1.0), v0_shift - v0)
        trials["dominance"] += 2

        other = PayoffFunction(tuple(rng.uniform(-1, 1, n)))
        v_other = _value(game.with_payoff(other))
        v_sum = _value(game.with_payoff(payoff_sum(game.payoff, other)))
        worst["additivity"] = max(worst["additivity"], abs(v_sum - v - v_other))
        trials["additivity"] += 1

        u = _moduli_preserving_act(game, rng)
        rho = game.state.matrix
        fixes = frob(u.matrix @ rho @ dagger(u.matrix) - rho)
        acted = Game(game.state, game.observable.evolve(u), game.payoff)
        v_act = _value(acted)
        worst["classical-act-neutrality"] = max(
            worst["classical-act-neutrality"], abs(v_act - v), fixes if fixes > ALGEBRA_TOL else 0.0
        )
        trials["classical-act-neutrality"] += 1

        v_other_act = _value(acted.with_payoff(other))
        before, after = v - v_other, v_act - v_other_act
        if abs(before) > tol and np.sign(before) != np.sign(after):
            flips += 1
        trials["argmax-neutrality"] += 1

    results = [
        AxiomResult(name, bool(worst[name] < tol), float(max(worst[name], 0.0)), trials[name])
        for name in AXIOMS[:-1]
    ]
    results.append(AxiomResult("argmax-neutrality", flips == 0, float(flips), trials["argmax-neutrality"],
                               "residual counts preference reversals"))
    return AxiomReport(tuple(results), len(games), seed)
