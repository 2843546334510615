"""Information-flow analysis: which motions act classically on an observable,
which pairs of observables are perfectly correlated, and when two accessible
information products differ only by phases no same-basis record can see.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError, NotClassicalError, ValidationError
from .measurement import Permutation
from .operators import (
    ALGEBRA_TOL,
    CompositeSpace,
    MatrixUnitFamily,
    Observable,
    ProjectorFamily,
    Spectrum,
    Unitary,
    commutator,
    dagger,
    frob,
    make_matrix_units,
)

CORRELATION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class BranchStructure:
    """Permutation and phases of a classical act, ``U = sum_b e^{i phi_b} S_{b, pi(b)}``.

    Phases are reduced to ``[0, 2 pi)`` and are relative to the gauge of the
    observable's matrix units.
    """

    permutation: Permutation
    phases: np.ndarray
    labels: tuple

    @property
    def branch_count(self) -> int:
        return len(self.permutation)

    def carried_values(self, spectrum: Spectrum) -> tuple:
        """Eigenvalue carried by each projector label after the act."""
        return tuple(spectrum[self.permutation(a)] for a in range(self.branch_count))

    def label_map(self) -> dict:
        return {self.labels[a]: self.labels[self.permutation(a)] for a in range(self.branch_count)}


def _units_for(obs) -> MatrixUnitFamily:
    family = obs.family if isinstance(obs, Observable) else obs
    if not family.rank_one:
        raise ValidationError(
            "classical acts are only defined for nondegenerate observables "
            f"(projector ranks {family.ranks})"
        )
    return make_matrix_units(family)


def _act_residual(u, obs):
    um = u.matrix if isinstance(u, Unitary) else np.asarray(u, dtype=complex)
    units = _units_for(obs)
    if um.shape[0] != units.dim:
        raise DimensionError(f"motion has dimension {um.shape[0]}, observable {units.dim}")
    v = units.vectors
    m = dagger(v) @ um @ v
    target = np.argmax(np.abs(m), axis=1)
    phases = np.mod(np.angle(m[np.arange(len(target)), target]), 2 * np.pi)
    ideal = np.zeros_like(m)
    ideal[np.arange(len(target)), target] = np.exp(1j * phases)
    return frob(m - ideal), target, phases, units


def is_classical_act(u, obs, tol: float = ALGEBRA_TOL) -> Optional[BranchStructure]:
    """Branch structure of ``u`` on ``obs``, or ``None`` if ``u`` mixes its projectors."""
    residual, target, phases, units = _act_residual(u, obs)
    if residual >= tol or len(set(target.tolist())) != len(target):
        return None
    return BranchStructure(Permutation(tuple(int(t) for t in target)), phases, units.family.labels)


def branch_decomposition(u, obs, tol: float = ALGEBRA_TOL) -> BranchStructure:
    structure = is_classical_act(u, obs, tol)
    if structure is None:
        residual = _act_residual(u, obs)[0]
        raise NotClassicalError(
            f"motion is not a classical act on this observable: weight off the best "
            f"permutation pattern is {residual:.3e} (tolerance {tol:.1e})"
        )
    return structure


@dataclass(frozen=True)
class CorrelationReport:
    """Outcome of a perfect-correlation test.

    ``bijection[r]`` maps outcome labels of the first observable to outcome
    labels of the second inside reference sector ``r`` (a single sector ``0``
    when no reference record is given).
    """

    correlated: bool
    bijection: Optional[dict]
    residual: float
    commutator: float

    def record_table(self) -> dict:
        """``{(a, b): r}``: the prior record ``r`` that pairs outcome ``a`` with ``b``."""
        if self.bijection is None:
            return {}
        return {(a, b): r for r, pairs in self.bijection.items() for a, b in pairs.items()}


def _family(x) -> ProjectorFamily:
    return x.family if isinstance(x, Observable) else x


def correlation_check(obs_a, obs_b, space: CompositeSpace = None, reference=None,
                      tol: float = CORRELATION_TOL) -> CorrelationReport:
    """Certify that ``obs_b`` records ``obs_a`` perfectly.

    Both observables must commute, and inside every sector of the
    ``reference`` family (typically the measuring register's record just
    before the interaction) the nonzero products ``P_a Q_b R_r`` must pair
    each outcome ``a`` with exactly one ``b``, injectively.
    """
    fa, fb = _family(obs_a), _family(obs_b)
    if fa.dim != fb.dim:
        raise DimensionError(f"observables act on dimensions {fa.dim} and {fb.dim}")
    if space is not None and space.total != fa.dim:
        raise DimensionError(f"observables have dimension {fa.dim}, space {space.total}")
    if reference is None:
        fr = ProjectorFamily((np.eye(fa.dim, dtype=complex),))
    else:
        fr = _family(reference)
        if fr.dim != fa.dim:
            raise DimensionError("reference family acts on a different space")

    comm = max(frob(commutator(p, q)) for p in fa for q in fb)
    ref_comm = max(
        [frob(commutator(p, r)) for p in fa for r in fr]
        + [frob(commutator(q, r)) for q in fb for r in fr]
    ) if reference is not None else 0.0

    worst = 0.0
    maps, bijective = {}, True
    for r_lab, r in zip(fr.labels, fr.projectors):
        pairs = {}
        for a_lab, p in zip(fa.labels, fa.projectors):
            pr = p @ r
            hits = []
            for b_lab, q in zip(fb.labels, fb.projectors):
                n = float(np.linalg.norm(pr @ q, 2))
                # commuting projectors multiply to a projector: norm 0 or 1
                worst = max(worst, min(n, abs(1.0 - n)))
                if n > 0.5:
                    hits.append(b_lab)
            if len(hits) > 1:
                bijective = False
            elif hits:
                pairs[a_lab] = hits[0]
        if len(set(pairs.values())) != len(pairs):
            bijective = False
        maps[r_lab] = pairs

    residual = max(comm, ref_comm, worst)
    bijection = maps if bijective else None
    return CorrelationReport(
        correlated=bool(bijection is not None and residual < tol),
        bijection=bijection,
        residual=residual,
        commutator=comm,
    )


def phase_alignment(x, y, basis, tol: float = ALGEBRA_TOL) -> Optional[np.ndarray]:
    """Phases ``theta`` with ``D x D^dagger = y`` for ``D = diag(e^{i theta})`` in ``basis``.

    Returns ``None`` when no diagonal unitary relates the two matrices.
    """
    units = basis if isinstance(basis, MatrixUnitFamily) else make_matrix_units(_family(basis))
    v = units.vectors
    xm, ym = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    if xm.shape != ym.shape or xm.shape[0] != units.dim:
        raise DimensionError("phase comparison needs equally sized matrices matching the basis")
    bx, by = dagger(v) @ xm @ v, dagger(v) @ ym @ v
    scale = max(1.0, float(np.max(np.abs(bx))))
    if np.max(np.abs(np.abs(bx) - np.abs(by))) > tol * scale:
        return None

    n = units.dim
    theta = np.full(n, np.nan)
    for root in range(n):
        if not np.isnan(theta[root]):
            continue
        theta[root] = 0.0
        queue = deque([root])
        while queue:
            d = queue.popleft()
            for e in range(n):
                if e == d or not np.isnan(theta[e]):
                    continue
                # y_de = e^{i(theta_d - theta_e)} x_de ; use whichever entry is larger
                if abs(bx[d, e]) >= abs(bx[e, d]) and abs(bx[d, e]) > tol * scale:
                    theta[e] = theta[d] - np.angle(by[d, e] / bx[d, e])
                elif abs(bx[e, d]) > tol * scale:
                    theta[e] = theta[d] + np.angle(by[e, d] / bx[e, d])
                else:
                    continue
                queue.append(e)
    dm = np.exp(1j * theta)
    if np.max(np.abs(dm[:, None] * bx * dm.conj()[None, :] - by)) > tol * scale:
        return None
    return np.mod(theta, 2 * np.pi)


def phase_equivalent(x, y, basis, tol: float = ALGEBRA_TOL) -> bool:
    """True iff ``x`` and ``y`` differ by conjugation with a unitary diagonal in ``basis``."""
    return phase_alignment(x, y, basis, tol) is not None
