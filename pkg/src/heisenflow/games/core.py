"""Payoff algebra, games, the trace oracle and the report types shared by every stage."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..checks import Check
from ..errors import DimensionError, ValidationError
from ..measurement import Permutation
from ..operators import HeisenbergState, Observable, ProjectorFamily, dagger

GAME_TOL = 1e-9
BRACKET_TOL = 1e-6
DIMENSION_CAP = 64
WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class PayoffFunction:
    """Reward paid on each eigenvalue index of the measured observable."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in np.atleast_1d(np.asarray(self.values, dtype=float)))
        if not vals:
            raise ValidationError("payoff function has an empty domain")
        if not all(np.isfinite(vals)):
            raise ValidationError("payoffs must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def identity(cls, spectrum) -> "PayoffFunction":
        """``P0``: pays the measured eigenvalue itself."""
        return cls(tuple(spectrum))

    @classmethod
    def constant(cls, n: int, c: float) -> "PayoffFunction":
        return cls((float(c),) * n)

    def __len__(self) -> int:
        return len(self.values)

    def __call__(self, a: int) -> float:
        return self.values[a]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def shift(self, c: float) -> "PayoffFunction":
        return PayoffFunction(tuple(v + c for v in self.values))

    def __add__(self, other: "PayoffFunction") -> "PayoffFunction":
        return payoff_sum(self, other)

    def dominates(self, other: "PayoffFunction") -> bool:
        _same_domain(self, other)
        return all(x >= y for x, y in zip(self.values, other.values))


def _same_domain(p1: PayoffFunction, p2: PayoffFunction) -> None:
    if len(p1) != len(p2):
        raise ValidationError(f"payoff domains differ: {len(p1)} vs {len(p2)} outcomes")


def payoff_permute(p: PayoffFunction, pi: Permutation) -> PayoffFunction:
    """``(P o pi)(a) = P(pi(a))``; on ``P0`` this pays ``alpha_{pi(a)}`` on branch ``a``."""
    if not isinstance(pi, Permutation):
        pi = Permutation(tuple(pi))
    if len(pi) != len(p):
        raise ValidationError(f"permutation on {len(pi)} points for a payoff on {len(p)} outcomes")
    return PayoffFunction(tuple(p(pi(a)) for a in range(len(p))))


def payoff_sum(p1: PayoffFunction, p2: PayoffFunction) -> PayoffFunction:
    _same_domain(p1, p2)
    return PayoffFunction(tuple(x + y for x, y in zip(p1.values, p2.values)))


@dataclass(frozen=True, eq=False)
class Game:
    """A state, the observable measured on it, and what each outcome pays."""

    state: HeisenbergState
    observable: Observable
    payoff: Optional[PayoffFunction] = None

    def __post_init__(self):
        if self.state.dim != self.observable.dim:
            raise DimensionError(
                f"state has dimension {self.state.dim}, observable {self.observable.dim}"
            )
        if self.payoff is None:
            object.__setattr__(self, "payoff", PayoffFunction.identity(self.observable.spectrum))
        elif len(self.payoff) != len(self.observable.spectrum):
            raise ValidationError(
                f"payoff covers {len(self.payoff)} outcomes, observable has {len(self.observable.spectrum)}"
            )

    @property
    def payoff_observable(self) -> Observable:
        """``P(A) = sum_a P(alpha_a) B_a``."""
        return self.observable.relabel(self.payoff.values)

    @property
    def accessible_info(self) -> np.ndarray:
        return self.state.matrix @ self.payoff_observable.matrix

    def with_payoff(self, payoff: PayoffFunction) -> "Game":
        return Game(self.state, self.observable, payoff)


def born_oracle(state, obs: Observable, payoff: Optional[PayoffFunction] = None) -> float:
    """``Tr(rho P(A))``, the reference every computed value is compared with."""
    rho = state.matrix if isinstance(state, HeisenbergState) else np.asarray(state, dtype=complex)
    if rho.shape[0] != obs.dim:
        raise DimensionError(f"state has dimension {rho.shape[0]}, observable {obs.dim}")
    pa = obs if payoff is None else obs.relabel(payoff.values)
    return float(np.trace(rho @ pa.matrix).real)


@dataclass(frozen=True)
class RationalWeights:
    """Outcome weights ``m_a / M`` with integer ``m_a >= 0``."""

    m: tuple

    def __post_init__(self):
        m = tuple(int(x) for x in self.m)
        if any(x < 0 for x in m) or sum(m) < 1:
            raise ValidationError(f"multiplicities must be non-negative with a positive total, got {self.m}")
        object.__setattr__(self, "m", m)

    @property
    def total(self) -> int:
        return sum(self.m)

    @property
    def weights(self) -> np.ndarray:
        return np.array(self.m, dtype=float) / self.total

    @classmethod
    def detect(cls, weights, max_total: int, tol: float = WEIGHT_SUM_TOL) -> Optional["RationalWeights"]:
        """Smallest-denominator representation of ``weights``, or ``None`` above ``max_total``."""
        w = np.asarray(weights, dtype=float)
        for total in range(1, max_total + 1):
            m = np.rint(w * total)
            if m.sum() == total and np.max(np.abs(w - m / total)) <= tol:
                return cls(tuple(int(x) for x in m))
        return None


@dataclass(frozen=True)
class BracketingResult:
    """Rational games pinning an irrational-weight value from both sides.

    ``widths`` holds the bracket width after each counted refinement; it is
    strictly decreasing by construction.
    """

    lower_value: float
    upper_value: float
    iterations: int
    width: float
    converged: bool
    widths: tuple = ()
    denominators: tuple = ()

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower_value + self.upper_value)


@dataclass(frozen=True, eq=False)
class MixedGameSpec:
    """Mixture ``rho = sum_b mu_b P_b`` over the rank-1 projectors of ``family``."""

    weights: tuple
    family: ProjectorFamily

    def __post_init__(self):
        mu = np.asarray(self.weights, dtype=float)
        if mu.ndim != 1 or len(mu) != len(self.family):
            raise ValidationError(f"{mu.size} mixture weights for {len(self.family)} components")
        if np.any(~np.isfinite(mu)) or np.any(mu < -WEIGHT_SUM_TOL):
            raise ValidationError("mixture weights must be finite and non-negative")
        if abs(mu.sum() - 1) > 1e-9:
            raise ValidationError(f"mixture weights sum to {mu.sum():.12g}, expected 1")
        if not self.family.rank_one:
            raise ValidationError("mixture components must be rank-1 projectors")
        object.__setattr__(self, "weights", tuple(float(max(x, 0.0)) for x in mu))

    @classmethod
    def from_state(cls, state: HeisenbergState) -> "MixedGameSpec":
        """Eigen-decomposition of ``state`` (degenerate eigenspaces split arbitrarily)."""
        vals, vecs = np.linalg.eigh(state.matrix)
        vals = np.clip(vals, 0.0, None)
        return cls(tuple(vals / vals.sum()), ProjectorFamily.from_basis(vecs))

    @classmethod
    def from_vectors(cls, weights: Sequence[float], vectors) -> "MixedGameSpec":
        return cls(tuple(weights), ProjectorFamily.from_basis(np.asarray(vectors, dtype=complex)))

    @property
    def dim(self) -> int:
        return self.family.dim

    @property
    def state(self) -> HeisenbergState:
        return HeisenbergState(sum(w * p for w, p in zip(self.weights, self.family)))

    def lambdas(self, units) -> np.ndarray:
        """``lambda_de = |sum_b mu_b beta_bde|``: moduli of the state in the units' basis."""
        v = units.vectors
        return np.abs(dagger(v) @ self.state.matrix @ v)


@dataclass(frozen=True)
class ValueReport:
    """A game value, how it was reached, and the identities verified on the way."""

    value: float
    method: str
    oracle: float
    trail: tuple
    tolerance: float = GAME_TOL
    bracketing: Optional[BracketingResult] = None
    notes: tuple = field(default=())

    @property
    def deviation(self) -> float:
        return abs(self.value - self.oracle)

    @property
    def passed(self) -> bool:
        return self.deviation < self.tolerance and all(c.passed for c in self.trail)

    @property
    def failures(self) -> tuple:
        return tuple(c for c in self.trail if not c.passed)

    def check(self, name: str) -> Check:
        for c in self.trail:
            if c.name == name:
                return c
        raise KeyError(name)
