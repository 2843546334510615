"""Game values built up in stages: equal weights, rational weights, irrational
weights by bracketing, and mixed states. Every value is returned with the
identities checked along the way and its distance from ``Tr(rho P(A))``.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Callable, Optional, Sequence

import numpy as np

from ..checks import Check
from ..darwinism import phase_equivalent
from ..errors import DimensionError, ValidationError
from ..measurement import (
    Multiplicities,
    Permutation,
    coarse_measurement_unitary,
    permutation_unitary,
)
from ..operators import (
    ALGEBRA_TOL,
    CompositeSpace,
    HeisenbergState,
    MatrixUnitFamily,
    Observable,
    Spectrum,
    dagger,
    express_in_family,
    frob,
    is_pure,
    make_matrix_units,
    unitarity_residual,
)
from .core import (
    BRACKET_TOL,
    DIMENSION_CAP,
    GAME_TOL,
    BracketingResult,
    Game,
    MixedGameSpec,
    PayoffFunction,
    RationalWeights,
    ValueReport,
    born_oracle,
)

ENUMERATION_LIMIT = 6
ENUMERATION_MAX = 8
EXHAUSTIVE_ACTS = 4
INTERNAL_BRACKET_TOL = 1e-11
INTERNAL_MAX_ITER = 60
MAX_LEVEL = 62
EQUAL_TOL = 1e-12


# ---------------------------------------------------------------- helpers

def _values(source, payoff: Optional[PayoffFunction]) -> np.ndarray:
    base = source.values if isinstance(source, Observable) else np.asarray(tuple(source), dtype=float)
    if payoff is None:
        return np.asarray(base, dtype=float)
    if len(payoff) != len(base):
        raise ValidationError(f"payoff covers {len(payoff)} outcomes, spectrum has {len(base)}")
    return payoff.as_array()


def _acts(n: int) -> list:
    """All permutations for small ``n``; a generating pair (swap, cycle) above that."""
    if n <= EXHAUSTIVE_ACTS:
        return list(Permutation.all(n))
    return [Permutation.transposition(n, 0, 1), Permutation.cyclic(n)]


def _prefixed(prefix: str, checks) -> list:
    return [dataclasses.replace(c, name=f"{prefix}{c.name}") for c in checks]


def _reduce_first(rho: np.ndarray, n: int, m: int) -> np.ndarray:
    """Partial trace over the second factor of an ``n x m`` composite."""
    return np.einsum("iaja->ij", rho.reshape(n, m, n, m))


def _reduce_second(rho: np.ndarray, n: int, m: int) -> np.ndarray:
    return np.einsum("aiaj->ij", rho.reshape(n, m, n, m))


def _diag_observable(values, units: MatrixUnitFamily) -> np.ndarray:
    v = units.vectors
    return (v * np.asarray(values)) @ dagger(v)


# ---------------------------------------------------------- equal weights

def _symmetrize(values: np.ndarray, units: MatrixUnitFamily, rho: np.ndarray,
                enumerate_limit: int = ENUMERATION_LIMIT):
    """Value of an equal-weight game from classical act neutrality.

    Each permutation act fixes ``rho`` and turns the game into the one paying
    ``alpha_{pi(a)}`` on branch ``a``; summed over all ``N!`` acts the payoff is
    the same constant on every branch, so ``N! V = const``.
    """
    n = len(values)
    alpha = np.asarray(values, dtype=float)
    a_mat = _diag_observable(alpha, units)
    fix_state = relabel = 0.0
    for pi in _acts(n):
        u = permutation_unitary(units, pi).matrix
        fix_state = max(fix_state, frob(u @ rho @ dagger(u) - rho))
        target = _diag_observable(alpha[list(pi.mapping)], units)
        relabel = max(relabel, frob(u @ a_mat @ dagger(u) - target))

    total = math.factorial(n - 1) * alpha.sum()
    if n <= min(enumerate_limit, ENUMERATION_MAX):
        perms = np.array(list(itertools.permutations(range(n))))
        per_branch = alpha[perms].sum(axis=0)
        how = f"enumerated all {len(perms)} permutations"
    else:
        # every branch index is sent to every value by exactly (n-1)! permutations
        per_branch = np.full((n, n), float(math.factorial(n - 1))) @ alpha
        how = "counting identity"
    spread = float(np.max(np.abs(per_branch - total))) / max(1.0, abs(total))
    checks = [
        Check.residual("acts-fix-state", fix_state, ALGEBRA_TOL),
        Check.residual("acts-relabel-payoff", relabel, ALGEBRA_TOL),
        Check.residual("symmetrized-payoff-constant", spread, ALGEBRA_TOL, how),
    ]
    return float(per_branch.mean()) / math.factorial(n), checks


def _equal_game(values) -> tuple:
    """Equal-weight game on ``len(values)`` outcomes (repeated values allowed)."""
    alpha = np.asarray(values, dtype=float)
    n = len(alpha)
    units = MatrixUnitFamily.computational(n)
    rho = np.full((n, n), 1.0 / n, dtype=complex)
    expected = np.tile(alpha / n, (n, 1))
    form = Check.residual("uniform-accessible-info", frob(rho @ np.diag(alpha) - expected), ALGEBRA_TOL)
    value, checks = _symmetrize(alpha, units, rho)
    return value, [form] + checks


def stage1_value(obs: Observable, payoff: Optional[PayoffFunction] = None) -> ValueReport:
    """Value of measuring ``obs`` on the equal superposition of its eigenvectors."""
    if not obs.nondegenerate:
        raise ValidationError("the equal-weight game needs a nondegenerate observable")
    alpha = _values(obs, payoff)
    n = len(alpha)
    units = make_matrix_units(obs.family)
    v = units.vectors
    psi = v.sum(axis=1) / np.sqrt(n)
    rho = np.outer(psi, psi.conj())
    a_mat = _diag_observable(alpha, units)
    expected = v @ np.tile(alpha / n, (n, 1)) @ dagger(v)
    trail = [Check.residual("uniform-accessible-info", frob(rho @ a_mat - expected), ALGEBRA_TOL)]
    value, checks = _symmetrize(alpha, units, rho)
    trail += checks
    trail.append(Check.compare("value-vs-mean", value, alpha.mean(), ALGEBRA_TOL))
    oracle = born_oracle(rho, obs, payoff)
    return ValueReport(value, "stage1", oracle, tuple(trail), GAME_TOL)


# ------------------------------------------------------- rational weights

def _coarse_setup(alpha: np.ndarray, m: Sequence[int], frame: Optional[MatrixUnitFamily]):
    n, mult = len(alpha), Multiplicities(tuple(m))
    big_m = mult.total
    if n * big_m > DIMENSION_CAP:
        raise DimensionError(f"composite dimension {n * big_m} exceeds the cap of {DIMENSION_CAP}")
    units1 = frame if frame is not None else MatrixUnitFamily.computational(n)
    units2 = MatrixUnitFamily.computational(big_m)
    space = CompositeSpace((n, big_m))
    u = coarse_measurement_unitary(units1.family, units2, mult, space).matrix
    record = alpha[[mult.owner(e) for e in range(big_m)]]
    a1 = np.kron(_diag_observable(alpha, units1), np.eye(big_m))
    a2 = np.kron(np.eye(n), np.diag(record))
    ready = np.full(big_m, 1 / np.sqrt(big_m), dtype=complex)
    return mult, units1, units2, u, a1, a2, record, ready


def _register_invariance(rho_after: np.ndarray, units2: MatrixUnitFamily, n: int) -> float:
    big_m = units2.dim
    base = _reduce_first(rho_after, n, big_m)
    worst = 0.0
    for pi in _acts(big_m):
        p = np.kron(np.eye(n), permutation_unitary(units2, pi).matrix)
        worst = max(worst, frob(_reduce_first(p @ rho_after @ dagger(p), n, big_m) - base))
    return worst


def _stage2_dense(alpha: np.ndarray, m: Sequence[int]) -> tuple:
    """Coarse-measurement reduction of a pure rational game to an equal game."""
    mult, units1, units2, u, a1, a2, record, ready = _coarse_setup(alpha, m, None)
    n, big_m = len(alpha), mult.total
    psi1 = np.sqrt(np.asarray(m, dtype=float) / big_m)
    rho = np.kron(np.outer(psi1, psi1), np.outer(ready, ready.conj()))
    ud = dagger(u)
    a1_1, a2_1 = ud @ a1 @ u, ud @ a2 @ u
    rho_after = u @ rho @ ud
    phi = np.zeros(n * big_m, dtype=complex)
    for e in range(big_m):
        phi[mult.owner(e) * big_m + e] = 1 / np.sqrt(big_m)
    checks = [
        Check.residual("coarse-unitarity", unitarity_residual(u), ALGEBRA_TOL),
        Check.residual("control-unchanged", frob(a1_1 - a1), ALGEBRA_TOL),
        Check.residual("record-matches-control", frob(rho @ a2_1 - rho @ a1), GAME_TOL),
        Check.residual("branches-equal-weight", frob(rho_after - np.outer(phi, phi.conj())), GAME_TOL),
        Check.residual("register-acts-fix-system", _register_invariance(rho_after, units2, n), GAME_TOL),
    ]
    value, eq = _equal_game(record)
    return value, checks + _prefixed("record-game:", eq)


def _as_rational(weights) -> RationalWeights:
    return weights if isinstance(weights, RationalWeights) else RationalWeights(tuple(weights))


def stage2_value(spectrum, weights, payoff: Optional[PayoffFunction] = None) -> ValueReport:
    """Value of a pure game with outcome weights ``m_a / M``, every ``m_a >= 1``."""
    rw = _as_rational(weights)
    alpha = _values(spectrum if isinstance(spectrum, (Spectrum, Observable)) else Spectrum(tuple(spectrum)), payoff)
    if len(rw.m) != len(alpha):
        raise ValidationError(f"{len(rw.m)} multiplicities for {len(alpha)} eigenvalues")
    if min(rw.m) < 1:
        raise ValidationError(
            f"zero multiplicity in {rw.m}; outcomes with zero weight need the bracketing stage"
        )
    if len(alpha) * rw.total > DIMENSION_CAP:
        raise DimensionError(
            f"composite dimension N*M = {len(alpha) * rw.total} exceeds the cap of {DIMENSION_CAP}"
        )
    value, trail = _stage2_dense(alpha, rw.m)
    w = rw.weights
    closed = float(np.dot(w, alpha))
    trail.append(Check.compare("value-vs-weighted-mean", value, closed, GAME_TOL))
    oracle = born_oracle(HeisenbergState.pure(np.sqrt(w)), Observable.diagonal(tuple(alpha)))
    return ValueReport(value, "stage2", oracle, tuple(trail), GAME_TOL)


def _closed_form(alpha: np.ndarray, m: np.ndarray) -> float:
    return float(np.dot(m / m.sum(), alpha))


def _rational_endpoint(dense: Callable) -> Callable:
    """Evaluate a rational game densely when it fits under the cap, else in closed form."""

    def evaluate(alpha: np.ndarray, m: np.ndarray):
        keep = m > 0
        a, mk = alpha[keep], m[keep]
        if keep.sum() * mk.sum() <= DIMENSION_CAP:
            return dense(a, tuple(int(x) for x in mk))
        return _closed_form(alpha, m), []

    return evaluate


_pure_endpoint = _rational_endpoint(_stage2_dense)


# ------------------------------------------------------------ bracketing

def _merge_worst(acc: dict, checks) -> None:
    for c in checks:
        prev = acc.get(c.name)
        if prev is None or (prev.passed and not c.passed) or (prev.passed == c.passed and c.value > prev.value):
            acc[c.name] = c


def _bracket(alpha: np.ndarray, w: np.ndarray, tol: float, max_iter: int, evaluate: Callable):
    """Squeeze the target between rational games on denominators ``2^k``.

    Each outcome keeps ``floor(w_a 2^k)`` units; the leftover units go to the
    smallest eigenvalue (lower game) or the largest (upper game). A level only
    counts as an iteration when the leftover fraction strictly shrinks.
    """
    lo, hi = int(np.argmin(alpha)), int(np.argmax(alpha))
    widths, lowers, uppers, dens = [], [], [], []
    worst_dominance = 0.0
    endpoint_checks: dict = {}
    last = math.inf
    converged = False
    for k in range(MAX_LEVEL + 1):
        big_m = 2 ** k
        q = np.floor(w * big_m).astype(np.int64)
        deficit = int(big_m - q.sum())
        frac = deficit / big_m
        if frac >= last:
            continue
        last = frac
        ml, mu = q.copy(), q.copy()
        ml[lo] += deficit
        mu[hi] += deficit
        vl, cl = evaluate(alpha, ml)
        vu, cu = evaluate(alpha, mu)
        _merge_worst(endpoint_checks, cl + cu)
        worst_dominance = max(worst_dominance, vl - vu)
        lowers.append(vl)
        uppers.append(vu)
        widths.append(vu - vl)
        dens.append(big_m)
        if vu - vl < tol or deficit == 0:
            converged = True
            break
        if len(widths) >= max_iter:
            break
    result = BracketingResult(
        lower_value=lowers[-1],
        upper_value=uppers[-1],
        iterations=len(widths),
        width=widths[-1],
        converged=converged,
        widths=tuple(widths),
        denominators=tuple(dens),
    )
    decreasing = all(b < a for a, b in zip(widths, widths[1:]))
    checks = [
        Check.residual("dominance-every-step", max(0.0, worst_dominance), GAME_TOL),
        Check.flag("widths-strictly-decrease", decreasing, f"{len(widths)} refinements"),
        Check("bracket-width", result.width, bool(result.width < tol), None, tol,
              f"denominator 2^{int(math.log2(dens[-1]))}"),
    ]
    checks += _prefixed("endpoint:", endpoint_checks.values())
    return result, checks


def _validated_weights(weights, n: int) -> np.ndarray:
    w = np.asarray(tuple(weights), dtype=float)
    if w.shape != (n,):
        raise ValidationError(f"{w.size} weights for {n} eigenvalues")
    if np.any(~np.isfinite(w)) or np.any(w < -EQUAL_TOL):
        raise ValidationError("weights must be finite and non-negative")
    if abs(w.sum() - 1) > 1e-9:
        raise ValidationError(f"weights sum to {w.sum():.12g}, expected 1")
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def _bracketed_value(alpha, w, tol, max_iter, evaluate, method, oracle):
    rw = RationalWeights.detect(w, DIMENSION_CAP // len(alpha))
    if rw is not None:
        value, trail = evaluate(alpha, np.array(rw.m))
        bracket = BracketingResult(value, value, 0, 0.0, True, (0.0,), (rw.total,))
        trail = list(trail) + [Check.flag("rational-target", True, f"weights are m/{rw.total}")]
    else:
        bracket, trail = _bracket(alpha, w, tol, max_iter, evaluate)
        value = bracket.midpoint
    containment = max(0.0, bracket.lower_value - oracle, oracle - bracket.upper_value)
    trail.append(Check.residual("bracket-contains-oracle", containment, GAME_TOL))
    report = ValueReport(value, method, oracle, tuple(trail), max(tol, GAME_TOL), bracket)
    return bracket, report


def stage3_value(spectrum, target_weights, tol: float = BRACKET_TOL, max_iter: int = 40,
                 payoff: Optional[PayoffFunction] = None) -> tuple:
    """Pure game with arbitrary real weights; returns ``(BracketingResult, ValueReport)``."""
    if not tol > 0:
        raise ValidationError("bracketing tolerance must be positive")
    alpha = _values(spectrum if isinstance(spectrum, (Spectrum, Observable)) else Spectrum(tuple(spectrum)), payoff)
    w = _validated_weights(target_weights, len(alpha))
    oracle = born_oracle(HeisenbergState.pure(np.sqrt(w)), Observable.diagonal(tuple(alpha)))
    return _bracketed_value(alpha, w, tol, max_iter, _pure_endpoint, "stage3", oracle)


def _pure_route(alpha: np.ndarray, w: np.ndarray, tol: float, max_iter: int) -> tuple:
    """Value of the pure game with weights ``w`` via whichever stage applies."""
    n = len(alpha)
    if np.max(np.abs(w - 1.0 / n)) <= EQUAL_TOL:
        value, checks = _equal_game(alpha)
        return value, checks, "stage1"
    rw = RationalWeights.detect(w, DIMENSION_CAP // n)
    if rw is not None:
        value, checks = _pure_endpoint(alpha, np.array(rw.m))
        return value, list(checks), "stage2"
    oracle = float(np.dot(w, alpha))
    bracket, report = _bracketed_value(alpha, w, tol, max_iter, _pure_endpoint, "stage3", oracle)
    return report.value, list(report.trail), "stage3"


# ----------------------------------------------------------- mixed states

STAGE4_CASES = ("4.1", "4.2", "4.3", "4.4")
_GOLDEN_ANGLE = np.pi * (3 - np.sqrt(5))


def _stage43_dense(alpha: np.ndarray, m: Sequence[int], frame: Optional[MatrixUnitFamily] = None) -> tuple:
    """Sharp mixed game with weights ``m_a / M`` reduced to an ``M``-outcome equal game.

    The register starts in a pure uniform ready state; the coarse measurement
    copies the control outcome into its block of register values.
    """
    mult, units1, units2, u, a1, a2, record, ready = _coarse_setup(alpha, m, frame)
    n, big_m = len(alpha), mult.total
    v1 = units1.vectors
    rho1 = (v1 * (np.asarray(m, dtype=float) / big_m)) @ dagger(v1)
    r_proj = np.outer(ready, ready.conj())
    rho = np.kron(rho1, r_proj)
    ud = dagger(u)
    a1_1, a2_1 = ud @ a1 @ u, ud @ a2 @ u
    info = rho @ a1
    product = frob(info - np.kron(_reduce_first(info, n, big_m), r_proj))
    rho_after = u @ rho @ ud
    record_dist = np.real(np.diag(_reduce_second(rho_after, n, big_m)))
    checks = [
        Check.residual("coarse-unitarity", unitarity_residual(u), ALGEBRA_TOL),
        Check.residual("control-unchanged", frob(a1_1 - a1), ALGEBRA_TOL),
        Check.residual("record-matches-control", frob(rho @ a2_1 - info), GAME_TOL),
        Check.residual("product-structure", product, GAME_TOL),
        Check.residual("register-acts-fix-system", _register_invariance(rho_after, units2, n), GAME_TOL),
        Check.residual("record-distribution-uniform", float(np.max(np.abs(record_dist - 1 / big_m))), GAME_TOL),
    ]
    value, eq = _equal_game(record)
    return value, checks + _prefixed("record-game:", eq)


_mixed_endpoint = _rational_endpoint(_stage43_dense)


def _stage41(spec: MixedGameSpec, obs: Observable, alpha: np.ndarray, oracle: float) -> ValueReport:
    units = make_matrix_units(obs.family)
    v = units.vectors
    n = len(alpha)
    beta = express_in_family(spec.family, units).beta
    coeffs = np.einsum("b,bde->de", np.asarray(spec.weights), beta)
    rho = spec.state.matrix
    a_mat = _diag_observable(alpha, units)
    form = v @ (coeffs * alpha[None, :]) @ dagger(v)
    lam = np.abs(coeffs)
    top = float(lam.max())
    boundary = "saturated at 1 (boundary case)" if top >= 1 - ALGEBRA_TOL else "strictly below 1"
    w = np.clip(np.real(np.diag(coeffs)), 0.0, None)
    w = w / w.sum()
    psi = v @ np.sqrt(w)
    rho_p = np.outer(psi, psi.conj())
    diag_gap = float(np.max(np.abs(
        np.diag(dagger(v) @ rho_p @ a_mat @ v) - np.diag(dagger(v) @ rho @ a_mat @ v)
    )))
    outer = np.sqrt(np.outer(w, w))
    off = ~np.eye(n, dtype=bool)
    min_gap = float((outer - lam)[off].min()) if n > 1 else 0.0
    d = v @ np.diag(np.exp(1j * _GOLDEN_ANGLE * np.arange(n))) @ dagger(v)
    phased = d @ rho_p @ a_mat @ dagger(d)
    trail = [
        Check.residual("mixture-accessible-info", frob(rho @ a_mat - form), ALGEBRA_TOL),
        Check("coherence-bound", top, bool(top < 1 + ALGEBRA_TOL), None, 1.0, boundary),
        Check.residual("pure-completion-diagonal", diag_gap, ALGEBRA_TOL),
        Check.residual("coherence-gap", max(0.0, -min_gap), ALGEBRA_TOL, f"smallest gap {min_gap:.3e}"),
        Check.flag("phase-indifference", phase_equivalent(rho_p @ a_mat, phased, units)),
    ]
    value, checks, route = _pure_route(alpha, w, INTERNAL_BRACKET_TOL, INTERNAL_MAX_ITER)
    trail += _prefixed(f"pure-{route}:", checks)
    return ValueReport(value, "stage4.1", oracle, tuple(trail), GAME_TOL, notes=(f"pure route {route}",))


def _stage42(spec: MixedGameSpec, obs: Observable, alpha: np.ndarray, oracle: float) -> ValueReport:
    units = make_matrix_units(obs.family)
    n = len(alpha)
    rho = spec.state.matrix
    a_mat = _diag_observable(alpha, units)
    trail = [Check.residual("equal-mixture-accessible-info", frob(rho @ a_mat - a_mat / n), ALGEBRA_TOL)]
    value, checks = _symmetrize(alpha, units, rho)
    trail += checks
    trail.append(Check.compare("value-vs-mean", value, alpha.mean(), ALGEBRA_TOL))
    return ValueReport(value, "stage4.2", oracle, tuple(trail), GAME_TOL)


def _stage43(obs: Observable, alpha: np.ndarray, rw: RationalWeights, oracle: float) -> ValueReport:
    if min(rw.m) >= 1:
        value, trail = _stage43_dense(alpha, rw.m, make_matrix_units(obs.family))
    else:
        value, trail = _mixed_endpoint(alpha, np.array(rw.m))
        trail = list(trail) + [Check.flag("zero-weight-outcomes-dropped", True)]
    trail.append(Check.compare("value-vs-weighted-mean", value, float(np.dot(rw.weights, alpha)), GAME_TOL))
    return ValueReport(value, "stage4.3", oracle, tuple(trail), GAME_TOL)


def stage4_value(spec: MixedGameSpec, obs: Observable, payoff: Optional[PayoffFunction] = None,
                 case: Optional[str] = None, tol: float = BRACKET_TOL, max_iter: int = 40) -> ValueReport:
    """Value of measuring ``obs`` on the mixture described by ``spec``.

    ``case`` forces one of ``4.1`` (unsharp), ``4.2`` (sharp, equal weights),
    ``4.3`` (sharp, rational) or ``4.4`` (sharp, irrational); by default it is
    detected from the mixture.
    """
    if spec.dim != obs.dim:
        raise DimensionError(f"mixture has dimension {spec.dim}, observable {obs.dim}")
    if not obs.nondegenerate:
        raise ValidationError("mixed-state games need a nondegenerate observable")
    if case is not None and case not in STAGE4_CASES:
        raise ValidationError(f"unknown mixed-state case {case!r}; expected one of {STAGE4_CASES}")
    alpha = _values(obs, payoff)
    n = len(alpha)
    rho = spec.state.matrix
    oracle = born_oracle(rho, obs, payoff)
    sharp = all(obs.family.commutes_with(p) for p in spec.family)
    p = np.clip(np.array([np.trace(rho @ b).real for b in obs.family]), 0.0, None)
    p = p / p.sum()
    if not sharp:
        detected = "4.1"
        rw = None
    elif np.max(np.abs(p - 1.0 / n)) <= EQUAL_TOL:
        detected, rw = "4.2", None
    else:
        rw = RationalWeights.detect(p, DIMENSION_CAP // n)
        detected = "4.3" if rw is not None else "4.4"
    if case is not None and case != detected:
        raise ValidationError(f"mixture is case {detected}, cannot evaluate it as case {case}")
    if detected == "4.1":
        return _stage41(spec, obs, alpha, oracle)
    if detected == "4.2":
        return _stage42(spec, obs, alpha, oracle)
    if detected == "4.3":
        return _stage43(obs, alpha, rw, oracle)
    _, report = _bracketed_value(alpha, p, tol, max_iter, _mixed_endpoint, "stage4.4", oracle)
    return report


# -------------------------------------------------------------- dispatch

def _pure_vector(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho)
    return vecs[:, -1]


def game_value(game: Game, tol: float = BRACKET_TOL, max_iter: int = 40) -> ValueReport:
    """Value of any game, routed to the stage that covers it."""
    obs, payoff = game.observable, game.payoff
    alpha = payoff.as_array()
    rho = game.state.matrix
    oracle = born_oracle(rho, obs, payoff)
    if not is_pure(rho, 1e-9):
        if not obs.nondegenerate:
            raise ValidationError("mixed-state games need a nondegenerate observable")
        if all(frob(b @ rho - rho @ b) < ALGEBRA_TOL for b in obs.family):
            p = np.clip([np.trace(rho @ b).real for b in obs.family], 0.0, None)
            spec = MixedGameSpec(tuple(p / p.sum()), obs.family)
        else:
            spec = MixedGameSpec.from_state(game.state)
        report = stage4_value(spec, obs, payoff, tol=tol, max_iter=max_iter)
        return dataclasses.replace(report, oracle=oracle)

    psi = _pure_vector(rho)
    extra = []
    if obs.nondegenerate:
        units = make_matrix_units(obs.family)
        amps = dagger(units.vectors) @ psi
        w = np.abs(amps) ** 2
        canon = units.vectors @ np.sqrt(w)
        pa = obs.relabel(alpha).matrix
        same = phase_equivalent(rho @ pa, np.outer(canon, canon.conj()) @ pa, units)
        extra.append(Check.flag("phase-indifference", same, "state vs real-amplitude representative"))
    else:
        w = np.array([np.linalg.norm(b @ psi) ** 2 for b in obs.family])
        extra.append(Check.flag("branch-vectors", True, "degenerate observable reduced to its branch vectors"))
    w = w / w.sum()
    n = len(alpha)
    equal = np.max(np.abs(w - 1.0 / n)) <= EQUAL_TOL
    rw = None if equal else RationalWeights.detect(w, DIMENSION_CAP // n)
    if equal and obs.nondegenerate:
        report = stage1_value(obs, payoff)
    elif equal:
        value, checks = _equal_game(alpha)
        report = ValueReport(value, "stage1", oracle, tuple(checks), GAME_TOL)
    elif rw is not None:
        value, checks = _pure_endpoint(alpha, np.array(rw.m))
        report = ValueReport(value, "stage2", oracle, tuple(checks), GAME_TOL)
    else:
        _, report = _bracketed_value(alpha, w, tol, max_iter, _pure_endpoint, "stage3", oracle)
    return dataclasses.replace(report, oracle=oracle, trail=tuple(extra) + tuple(report.trail))
