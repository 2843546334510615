import numpy as np
import pytest

from heisenflow.games import Game, PayoffFunction
from heisenflow.games.axioms import AXIOMS, random_rational_game, verify_rationality_axioms
from heisenflow.operators import HeisenbergState, Observable
from heisenflow.sampling import rng_from


@pytest.fixture(scope="module")
def report():
    return verify_rationality_axioms(seed=0, n_games=30)


def test_all_axioms_hold(report):
    assert report.passed
    assert report.games == 30
    assert [r.name for r in report.results] == list(AXIOMS)
    for r in report.results:
        assert r.worst_residual < 1e-9, r
        assert r.trials >= 30


def test_unknown_result_name(report):
    with pytest.raises(KeyError):
        report.result("transitivity")


def test_random_games_are_rational_and_pure():
    rng = rng_from(5)
    for _ in range(20):
        game = random_rational_game(rng)
        n = game.observable.dim
        assert 2 <= n <= 4
        p = np.array([np.trace(game.state.matrix @ b).real for b in game.observable.family])
        assert abs(p.sum() - 1) < 1e-12
        assert any(abs(p * total - np.rint(p * total)).max() < 1e-9 for total in range(n, 9))


def test_explicit_sample():
    obs = Observable.diagonal((0.0, 1.0))
    games = [
        Game(HeisenbergState.pure(np.array([1.0, 1.0]) / np.sqrt(2)), obs),
        Game(HeisenbergState.pure(np.array([1.0, np.sqrt(3)]) / 2), obs, PayoffFunction((2.0, -1.0))),
    ]
    rep = verify_rationality_axioms(sample=games, seed=1)
    assert rep.games == 2
    assert rep.passed


def test_seeded_reports_repeat():
    a = verify_rationality_axioms(seed=3, n_games=5)
    b = verify_rationality_axioms(seed=3, n_games=5)
    assert a.results == b.results
