"""Unitary motions: classical permutations, perfect measurements, coarse
measurements onto larger registers, and the sequential non-commuting pipeline.

Phase assignments are plain float arrays in radians: shape ``(N,)`` for a
permutation motion and ``(N, N)`` for a two-system measurement. ``None``
means all zeros.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError
from .operators import (
    ALGEBRA_TOL,
    CompositeSpace,
    MatrixUnitFamily,
    Observable,
    ProjectorFamily,
    Unitary,
    commutator,
    dagger,
    frob,
    joint_family,
    make_matrix_units,
)


def mod_add(a: int, b: int, n: int) -> int:
    """``(a + b) mod n`` on the index set ``0..n-1``."""
    if n < 1:
        raise ValidationError(f"modulus must be positive, got {n}")
    if not (0 <= a < n and 0 <= b < n):
        raise ValidationError(f"indices ({a}, {b}) out of range for modulus {n}")
    return (a + b) % n


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``0..N-1``; ``mapping[a]`` is the image of ``a``."""

    mapping: tuple

    def __post_init__(self):
        m = tuple(int(x) for x in self.mapping)
        if sorted(m) != list(range(len(m))):
            raise ValidationError(f"not a bijection on 0..{len(m) - 1}: {m}")
        object.__setattr__(self, "mapping", m)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def cyclic(cls, n: int, shift: int = 1) -> "Permutation":
        return cls(tuple((a + shift) % n for a in range(n)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        m = list(range(n))
        m[i], m[j] = m[j], m[i]
        return cls(tuple(m))

    @classmethod
    def all(cls, n: int):
        return (cls(p) for p in itertools.permutations(range(n)))

    def __len__(self) -> int:
        return len(self.mapping)

    def __call__(self, a: int) -> int:
        return self.mapping[a]

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.mapping)
        for a, b in enumerate(self.mapping):
            inv[b] = a
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """``self o other``: apply ``other`` first."""
        if len(other) != len(self):
            raise ValidationError("cannot compose permutations of different sizes")
        return Permutation(tuple(self.mapping[other.mapping[a]] for a in range(len(self))))

    @property
    def is_identity(self) -> bool:
        return self.mapping == tuple(range(len(self.mapping)))


@dataclass(frozen=True)
class Multiplicities:
    """Block sizes ``m_a`` of a coarse measurement register of size ``M``."""

    m: tuple

    def __post_init__(self):
        m = tuple(int(x) for x in self.m)
        if not m or any(x < 1 for x in m):
            raise ValidationError(f"multiplicities must all be >= 1, got {self.m}")
        object.__setattr__(self, "m", m)

    @property
    def total(self) -> int:
        return sum(self.m)

    @property
    def prefix(self) -> tuple:
        """``gamma_j = m_0 + ... + m_j``; block ``a`` is ``[gamma_{a-1}, gamma_a)``."""
        return tuple(itertools.accumulate(self.m))

    def block(self, a: int) -> range:
        start = 0 if a == 0 else self.prefix[a - 1]
        return range(start, self.prefix[a])

    def owner(self, e: int) -> int:
        """Control outcome whose block contains register index ``e``."""
        for a in range(len(self.m)):
            if e in self.block(a):
                return a
        raise ValidationError(f"register index {e} out of range for M={self.total}")


def as_phases(phases, shape) -> np.ndarray:
    if phases is None:
        return np.zeros(shape)
    p = np.asarray(phases, dtype=float)
    if p.shape != tuple(shape):
        raise ValidationError(f"phase assignment has shape {p.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(p)):
        raise ValidationError("phases must be finite")
    return p


def permutation_unitary(units: MatrixUnitFamily, pi: Permutation, phases=None) -> Unitary:
    """``U = sum_b exp(i phi_b) S_{b, pi(b)}``.

    Evolving the units' observable under ``U`` sends projector ``B_a`` to
    ``B_{pi(a)}`` whatever the phases are.
    """
    if not isinstance(pi, Permutation):
        pi = Permutation(tuple(pi))
    n = units.dim
    if len(pi) != n:
        raise DimensionError(f"permutation on {len(pi)} points for a {n}-dimensional family")
    phi = as_phases(phases, (n,))
    v = units.vectors
    # columns of v reordered by pi give |pi(b)>; U = V diag(e^{i phi}) P^T V^dagger
    u = (v * np.exp(1j * phi)) @ dagger(v[:, list(pi.mapping)])
    return Unitary(u)


def _two_system_space(space, d1: int, d2: int) -> CompositeSpace:
    if space is None:
        return CompositeSpace((d1, d2))
    if tuple(space.dims) != (d1, d2):
        raise DimensionError(f"composite space {space.dims} does not match ({d1}, {d2})")
    return space


def measurement_unitary(control: ProjectorFamily, target_units: MatrixUnitFamily,
                        phases=None, space: CompositeSpace = None) -> Unitary:
    """Perfect measurement ``sum_ab exp(i phi_ab) B_a (x) S_{b, a+b mod N}``.

    ``control`` lives on system 1 and has N outcomes; ``target_units`` is an
    N-dimensional matrix-unit family on system 2.
    """
    n = len(control)
    if target_units.dim != n:
        raise DimensionError(
            f"control has {n} outcomes but the target register has dimension {target_units.dim}"
        )
    space = _two_system_space(space, control.dim, n)
    phi = as_phases(phases, (n, n))
    v = target_units.vectors
    u = np.zeros((space.total, space.total), dtype=complex)
    for a, b_a in enumerate(control):
        # sum_b e^{i phi_ab} |b><a+b|
        shifted = v[:, [(a + b) % n for b in range(n)]]
        u += np.kron(b_a, (v * np.exp(1j * phi[a])) @ dagger(shifted))
    return Unitary(u)


def _reflection(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Unitary Householder reflection sending unit vector ``x`` to ``y``."""
    overlap = np.vdot(y, x)
    if abs(overlap) > 0:
        y = y * (overlap / abs(overlap))
    w = x - y
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        return np.eye(len(x), dtype=complex)
    w = w / nw
    return np.eye(len(x), dtype=complex) - 2 * np.outer(w, w.conj())


def uniform_ready(units: MatrixUnitFamily) -> np.ndarray:
    """Equal-amplitude superposition of the register's basis vectors."""
    return units.vectors.sum(axis=1) / np.sqrt(units.dim)


def coarse_measurement_unitary(control: ProjectorFamily, target_units: MatrixUnitFamily,
                               mult: Multiplicities, space: CompositeSpace = None,
                               ready=None) -> Unitary:
    """Measure N outcomes onto an M-dimensional register, outcome ``a`` onto block ``a``.

    The register starts in ``ready`` (default: uniform superposition). For
    control outcome ``a`` a reflection carries ``ready`` onto the uniform
    superposition of block ``[gamma_{a-1}, gamma_a)``, so every record value
    reachable in branch ``a`` indicates ``a``.
    """
    if not isinstance(mult, Multiplicities):
        mult = Multiplicities(tuple(mult))
    if len(mult.m) != len(control):
        raise DimensionError(f"{len(mult.m)} multiplicities for {len(control)} control outcomes")
    if mult.total != target_units.dim:
        raise ValidationError(
            f"multiplicity sum {mult.total} does not match register dimension {target_units.dim}"
        )
    space = _two_system_space(space, control.dim, target_units.dim)
    v = target_units.vectors
    r = uniform_ready(target_units) if ready is None else np.asarray(ready, dtype=complex)
    r = r / np.linalg.norm(r)
    u = np.zeros((space.total, space.total), dtype=complex)
    for a, b_a in enumerate(control):
        blk = list(mult.block(a))
        chi = v[:, blk].sum(axis=1) / np.sqrt(len(blk))
        u += np.kron(b_a, _reflection(r, chi))
    return Unitary(u)


def record_support(u: Unitary, control: ProjectorFamily, target: ProjectorFamily,
                   space: CompositeSpace, ready) -> np.ndarray:
    """``support[a, e] = Tr[(B_a (x) |r><r|) U^dagger (1 (x) B_e) U] / Tr B_a``.

    Row ``a`` is the weight the evolved register projectors carry inside
    control branch ``a`` when the register starts in ``ready``.
    """
    r = np.asarray(ready, dtype=complex)
    r = r / np.linalg.norm(r)
    rho_r = np.outer(r, r.conj())
    um = u.matrix
    out = np.zeros((len(control), len(target)))
    for a, b_a in enumerate(control):
        probe = np.kron(b_a, rho_r)
        for e, q in enumerate(target):
            evolved = dagger(um) @ np.kron(np.eye(space.dims[0]), q) @ um
            out[a, e] = np.trace(probe @ evolved).real / np.trace(b_a).real
    return out


@dataclass(frozen=True, eq=False)
class SequentialReport:
    """Observables along the three-step measure / rotate / measure pipeline.

    ``branches[a, b]`` counts the joint ``(A1(3), A2(3))`` branches overlapping
    the t=0 joint branch ``(a, b)``.
    """

    a1_1: Observable
    a2_1: Observable
    c1_1: Observable
    a1_2: Observable
    a2_2: Observable
    a1_3: Observable
    a2_3: Observable
    branches: np.ndarray
    repeat: bool
    rotation_residual: float
    total: Unitary

    @property
    def min_branches(self) -> int:
        return int(self.branches.min())

    @property
    def max_branches(self) -> int:
        return int(self.branches.max())


def basis_change(frm: MatrixUnitFamily, to: MatrixUnitFamily) -> np.ndarray:
    """Unitary ``V`` with ``V^dagger S^frm_ab V = S^to_ab``."""
    return frm.vectors @ dagger(to.vectors)


def sequential_measurement(a1: Observable, c1: Observable, a2: Observable,
                           phases=None, phases2=None, space: CompositeSpace = None,
                           overlap_tol: float = 1e-6) -> SequentialReport:
    """Measure A1 onto A2, rotate system 1 so A1(2) = C1(1), then measure again.

    Motions written in time-t operators compose as ``T_{t+1} = W T_t`` with
    ``W`` the same motion written in t=0 operators; every observable is then
    obtained by direct conjugation with the accumulated unitary.
    """
    n = a1.dim
    if c1.dim != n or a2.dim != n:
        raise DimensionError("all three observables must act on N-dimensional systems")
    if len(a1.spectrum) != n or len(c1.spectrum) != n or len(a2.spectrum) != n:
        raise ValidationError("sequential measurement needs nondegenerate observables")
    if not np.allclose(a1.values, c1.values, atol=ALGEBRA_TOL):
        raise ValidationError("A1(2) = C1(1) requires A1 and C1 to share a spectrum")
    space = _two_system_space(space, n, n)
    ua1, uc1, ua2 = make_matrix_units(a1.family), make_matrix_units(c1.family), make_matrix_units(a2.family)
    repeat = frob(commutator(a1.matrix, c1.matrix)) < ALGEBRA_TOL

    first = measurement_unitary(a1.family, ua2, phases, space)
    rotate = Unitary(np.kron(basis_change(ua1, uc1), np.eye(n)))
    second = measurement_unitary(a1.family, ua2, phases2 if phases2 is not None else phases, space)
    t1, t2 = first, rotate @ first
    t3 = second @ t2

    lift1, lift2 = a1.embed(0, space), a2.embed(1, space)
    c1_1 = c1.embed(0, space).evolve(t1)
    a1_2 = lift1.evolve(t2)
    report_a1_3, report_a2_3 = lift1.evolve(t3), lift2.evolve(t3)

    origin = joint_family(lift1.family, lift2.family)
    final = joint_family(report_a1_3.family, report_a2_3.family)
    branches = np.zeros((n, n), dtype=int)
    for e, lab in zip(origin.projectors, origin.labels):
        branches[lab] = sum(np.linalg.norm(e @ f, 2) > overlap_tol for f in final.projectors)

    return SequentialReport(
        a1_1=lift1.evolve(t1),
        a2_1=lift2.evolve(t1),
        c1_1=c1_1,
        a1_2=a1_2,
        a2_2=lift2.evolve(t2),
        a1_3=report_a1_3,
        a2_3=report_a2_3,
        branches=branches,
        repeat=bool(repeat),
        rotation_residual=frob(a1_2.matrix - c1_1.matrix),
        total=t3,
    )
