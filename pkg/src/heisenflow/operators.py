"""Dense complex operator algebra for small Hilbert spaces.

Observables are Hermitian matrices carried together with their spectral data:
a list of real eigenvalues and an orthogonal projector family. Evolution is
Heisenberg-style, so operators move under ``U^dagger X U`` and states stay put.
Everything here is immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, ValidationError

ALGEBRA_TOL = 1e-10
GROUPING_TOL = 1e-9
# construction guard; residuals are measured precisely by the callers that care
VALIDATION_TOL = 1e-8

GAUGE = "largest-component-real-positive"


def as_matrix(op, name: str = "operator") -> np.ndarray:
    m = np.asarray(op, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def frob(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def hermiticity_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - dagger(m))))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _matrix_of(op) -> np.ndarray:
    if isinstance(op, (Observable, HeisenbergState, Unitary)):
        return op.matrix
    return as_matrix(op)


@dataclass(frozen=True, eq=False)
class ProjectorFamily:
    """Ordered orthogonal projectors resolving the identity.

    ``labels`` default to ``0..K-1``; joint families on composite spaces use
    index tuples instead.
    """

    projectors: tuple
    labels: tuple = None

    def __post_init__(self):
        projs = tuple(as_matrix(p, "projector") for p in self.projectors)
        if not projs:
            raise ValidationError("projector family is empty")
        dim = projs[0].shape[0]
        if any(p.shape[0] != dim for p in projs):
            raise DimensionError("projectors in a family must share one dimension")
        labels = tuple(range(len(projs))) if self.labels is None else tuple(self.labels)
        if len(labels) != len(projs):
            raise ValidationError("one label per projector required")
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "labels", labels)
        # Hermitian idempotents summing to the identity are automatically
        # mutually orthogonal, so the O(K^2) product check is left to residuals().
        herm = max(hermiticity_residual(p) for p in projs)
        idem = max(frob(p @ p - p) for p in projs)
        comp = frob(sum(projs) - np.eye(dim))
        worst = max(herm, idem, comp)
        if worst > VALIDATION_TOL:
            raise ValidationError(
                f"not a projector family (hermiticity {herm:.2e}, "
                f"idempotence {idem:.2e}, completeness {comp:.2e})"
            )

    @classmethod
    def computational(cls, n: int) -> "ProjectorFamily":
        eye = np.eye(n, dtype=complex)
        return cls(tuple(np.outer(eye[:, a], eye[:, a]) for a in range(n)))

    @classmethod
    def from_basis(cls, basis, labels=None) -> "ProjectorFamily":
        """Rank-1 family from the columns of a unitary matrix."""
        v = as_matrix(basis, "basis")
        return cls(tuple(np.outer(v[:, a], v[:, a].conj()) for a in range(v.shape[1])), labels)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def __len__(self) -> int:
        return len(self.projectors)

    def __iter__(self):
        return iter(self.projectors)

    def __getitem__(self, i) -> np.ndarray:
        return self.projectors[i]

    @cached_property
    def ranks(self) -> tuple:
        return tuple(int(round(np.trace(p).real)) for p in self.projectors)

    @property
    def rank_one(self) -> bool:
        return all(r == 1 for r in self.ranks)

    def residuals(self) -> dict:
        """Worst-case violations of the projector algebra."""
        stack = np.array(self.projectors)
        prod = np.einsum("aij,bjk->abik", stack, stack)
        k = len(self.projectors)
        expected = np.zeros_like(prod)
        expected[np.arange(k), np.arange(k)] = stack
        orth = float(np.max(np.linalg.norm(prod - expected, axis=(2, 3))))
        return {
            "hermiticity": max(hermiticity_residual(p) for p in self.projectors),
            "orthogonality": orth,
            "completeness": frob(stack.sum(axis=0) - np.eye(self.dim)),
        }

    def evolve(self, u) -> "ProjectorFamily":
        um = _matrix_of(u)
        _require_same_dim(self.dim, um.shape[0], "projector family", "unitary")
        ud = dagger(um)
        return ProjectorFamily(tuple(ud @ p @ um for p in self.projectors), self.labels)

    def embed(self, slot: int, space: "CompositeSpace") -> "ProjectorFamily":
        return ProjectorFamily(tuple(tensor_embed(p, slot, space) for p in self.projectors), self.labels)

    def commutes_with(self, op, tol: float = ALGEBRA_TOL) -> bool:
        m = _matrix_of(op)
        return all(frob(commutator(p, m)) < tol for p in self.projectors)


@dataclass(frozen=True)
class Spectrum:
    values: tuple
    grouping_tol: float = GROUPING_TOL

    def __post_init__(self):
        vals = tuple(float(v) for v in np.atleast_1d(np.asarray(self.values, dtype=float)))
        if not vals:
            raise ValidationError("spectrum is empty")
        if not all(np.isfinite(vals)):
            raise ValidationError("spectrum values must be finite")
        if not self.grouping_tol > 0:
            raise ValidationError("grouping tolerance must be positive")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i) -> float:
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator ``sum_a values[a] * family[a]``."""

    spectrum: Spectrum
    family: ProjectorFamily
    matrix: np.ndarray = None

    def __post_init__(self):
        if not isinstance(self.spectrum, Spectrum):
            object.__setattr__(self, "spectrum", Spectrum(self.spectrum))
        if len(self.spectrum) != len(self.family):
            raise ValidationError(
                f"{len(self.spectrum)} eigenvalues for {len(self.family)} projectors"
            )
        built = np.einsum("a,aij->ij", self.spectrum.as_array(), np.array(self.family.projectors))
        if self.matrix is not None:
            given = as_matrix(self.matrix, "observable matrix")
            if frob(given - built) > VALIDATION_TOL * max(1.0, frob(built)):
                raise ValidationError("observable matrix does not match its spectral data")
        object.__setattr__(self, "matrix", built)

    @classmethod
    def from_parts(cls, values: Sequence[float], projectors, labels=None) -> "Observable":
        family = projectors if isinstance(projectors, ProjectorFamily) else ProjectorFamily(tuple(projectors), labels)
        return cls(Spectrum(tuple(values)), family)

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "Observable":
        return cls(Spectrum(tuple(values)), ProjectorFamily.computational(len(values)))

    @classmethod
    def from_basis(cls, values: Sequence[float], basis) -> "Observable":
        return cls(Spectrum(tuple(values)), ProjectorFamily.from_basis(basis))

    @property
    def dim(self) -> int:
        return self.family.dim

    @property
    def values(self) -> np.ndarray:
        return self.spectrum.as_array()

    @property
    def projectors(self) -> tuple:
        return self.family.projectors

    @property
    def nondegenerate(self) -> bool:
        return self.family.rank_one

    def reconstruction_residual(self) -> float:
        return frob(self.matrix - sum(v * p for v, p in zip(self.spectrum, self.family)))

    def relabel(self, values: Sequence[float]) -> "Observable":
        """Same projectors, new eigenvalues: the observable ``P(A)`` for a payoff ``P``."""
        return Observable(Spectrum(tuple(values), self.spectrum.grouping_tol), self.family)

    def evolve(self, u) -> "Observable":
        return Observable(self.spectrum, self.family.evolve(u))

    def embed(self, slot: int, space: "CompositeSpace") -> "Observable":
        return Observable(self.spectrum, self.family.embed(slot, space))


@dataclass(frozen=True, eq=False)
class Unitary:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "unitary")
        r = unitarity_residual(m)
        if r > VALIDATION_TOL:
            raise ValidationError(f"matrix is not unitary (residual {r:.2e})")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, n: int) -> "Unitary":
        return cls(np.eye(n, dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dagger(self) -> "Unitary":
        return Unitary(dagger(self.matrix))

    def __matmul__(self, other: "Unitary") -> "Unitary":
        return Unitary(self.matrix @ _matrix_of(other))

    def residual(self) -> float:
        return unitarity_residual(self.matrix)


def unitarity_residual(m: np.ndarray) -> float:
    eye = np.eye(m.shape[0])
    return max(frob(dagger(m) @ m - eye), frob(m @ dagger(m) - eye))


@dataclass(frozen=True, eq=False)
class HeisenbergState:
    """Static density operator: Hermitian, positive semidefinite, unit trace."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "state")
        herm = hermiticity_residual(m)
        if herm > VALIDATION_TOL:
            raise ValidationError(f"state is not Hermitian (max asymmetry {herm:.2e})")
        m = (m + dagger(m)) / 2
        tr = np.trace(m).real
        if abs(tr - 1) > VALIDATION_TOL:
            raise ValidationError(f"state trace is {tr:.12g}, expected 1")
        low = float(np.linalg.eigvalsh(m).min())
        if low < -VALIDATION_TOL:
            raise ValidationError(f"state is not positive (smallest eigenvalue {low:.2e})")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, vector) -> "HeisenbergState":
        v = np.asarray(vector, dtype=complex).ravel()
        n = np.linalg.norm(v)
        if n == 0:
            raise ValidationError("zero vector is not a state")
        v = v / n
        return cls(np.outer(v, v.conj()))

    @classmethod
    def mixture(cls, weights: Iterable[float], vectors) -> "HeisenbergState":
        weights = np.asarray(list(weights), dtype=float)
        if np.any(weights < 0) or abs(weights.sum() - 1) > VALIDATION_TOL:
            raise ValidationError("mixture weights must be non-negative and sum to 1")
        vecs = [np.asarray(v, dtype=complex) / np.linalg.norm(v) for v in vectors]
        return cls(sum(w * np.outer(v, v.conj()) for w, v in zip(weights, vecs)))

    @classmethod
    def maximally_mixed(cls, n: int) -> "HeisenbergState":
        return cls(np.eye(n, dtype=complex) / n)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def purity(self) -> bool:
        return is_pure(self)


@dataclass(frozen=True)
class CompositeSpace:
    """Left-to-right tensor product with row-major index fusion."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValidationError(f"subsystem dimensions must be positive, got {self.dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self) -> int:
        return len(self.dims)

    def flat_index(self, indices: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(indices), self.dims))

    def split_index(self, flat: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(flat, self.dims))


@dataclass(frozen=True, eq=False)
class MatrixUnitFamily:
    """Operators ``S_ab = |a><b|`` built on a gauge-fixed orthonormal basis.

    ``vectors`` holds the basis as columns; ``family`` is the projector family
    the units were built from, so ``S_aa == family[a]``.
    """

    vectors: np.ndarray
    family: ProjectorFamily
    gauge: str = GAUGE

    @classmethod
    def computational(cls, n: int) -> "MatrixUnitFamily":
        return cls(np.eye(n, dtype=complex), ProjectorFamily.computational(n), "computational")

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def unit(self, a: int, b: int) -> np.ndarray:
        return np.outer(self.vectors[:, a], self.vectors[:, b].conj())

    @cached_property
    def units(self) -> np.ndarray:
        """Array of shape ``(N, N, N, N)`` with ``units[a, b] == S_ab``."""
        v = self.vectors
        return np.einsum("ia,jb->abij", v, v.conj())

    def algebra_residual(self) -> float:
        """max over all index tuples of ``|S_ab S_cd - delta_bc S_ad|``."""
        n = self.dim
        s = self.units
        worst = 0.0
        eye = np.eye(n)
        for a in range(n):
            # prod[b, c, d] = S_ab @ S_cd
            prod = np.einsum("bij,cdjk->bcdik", s[a], s)
            expected = np.einsum("bc,dik->bcdik", eye, s[a])
            worst = max(worst, float(np.max(np.linalg.norm(prod - expected, axis=(3, 4)))))
        diag = max(frob(s[a, a] - self.family[a]) for a in range(n))
        adj = max(frob(dagger(s[a, b]) - s[b, a]) for a in range(n) for b in range(n))
        return max(worst, diag, adj)


@dataclass(frozen=True, eq=False)
class CoefficientTensor:
    """Coefficients ``beta[c, d, e]`` of projector ``c`` in a matrix-unit basis."""

    beta: np.ndarray

    def reconstruct(self, units: MatrixUnitFamily) -> tuple:
        v = units.vectors
        return tuple(v @ b @ dagger(v) for b in self.beta)

    def projector_residual(self, units: MatrixUnitFamily) -> float:
        return max(ProjectorFamily(self.reconstruct(units)).residuals().values())


def _require_same_dim(a: int, b: int, what_a: str, what_b: str) -> None:
    if a != b:
        raise DimensionError(f"{what_a} has dimension {a} but {what_b} has dimension {b}")


def spectral_decompose(matrix, grouping_tol: float = GROUPING_TOL) -> Observable:
    """Group the eigen-decomposition of a Hermitian matrix into an Observable.

    Eigenvalues closer than ``grouping_tol`` (chained, in ascending order) share
    one projector; the group's eigenvalue is the mean of its members.
    """
    m = as_matrix(matrix, "matrix")
    if not grouping_tol > 0:
        raise ValidationError("grouping tolerance must be positive")
    asym = hermiticity_residual(m)
    if asym > ALGEBRA_TOL * max(1.0, float(np.max(np.abs(m)))):
        raise ValidationError(f"matrix is not Hermitian: max asymmetry {asym:.3e}")
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] < grouping_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    values = tuple(float(np.mean(w[g])) for g in groups)
    projectors = tuple(v[:, g] @ dagger(v[:, g]) for g in groups)
    return Observable(Spectrum(values, grouping_tol), ProjectorFamily(projectors), m)


def _gauge_fix(vec: np.ndarray) -> np.ndarray:
    mags = np.abs(vec)
    # first component within rounding of the maximum magnitude
    idx = int(np.flatnonzero(mags >= mags.max() - 1e-10)[0])
    return vec * (np.conj(vec[idx]) / mags[idx])


def make_matrix_units(family: ProjectorFamily) -> MatrixUnitFamily:
    if isinstance(family, Observable):
        family = family.family
    bad = [a for a, r in enumerate(family.ranks) if r != 1]
    if bad or any(abs(np.trace(p).real - 1) > VALIDATION_TOL for p in family):
        raise ValidationError(
            f"matrix units need rank-1 projectors; projectors {bad} have rank "
            f"{[family.ranks[a] for a in bad]}"
        )
    cols = []
    for p in family:
        j = int(np.argmax(np.linalg.norm(p, axis=0)))
        col = p[:, j]
        cols.append(_gauge_fix(col / np.linalg.norm(col)))
    return MatrixUnitFamily(np.column_stack(cols), family, GAUGE)


def express_in_family(obs, units: MatrixUnitFamily) -> CoefficientTensor:
    """``beta[c, d, e] = Tr(S_ed B_c)`` for each projector ``B_c`` of ``obs``."""
    family = obs.family if isinstance(obs, Observable) else obs
    _require_same_dim(family.dim, units.dim, "observable", "matrix-unit family")
    v = units.vectors
    return CoefficientTensor(np.array([dagger(v) @ p @ v for p in family]))


def evolve(op, u):
    """Heisenberg step ``U^dagger op U``; observables keep their spectral labels."""
    if isinstance(op, Observable):
        return op.evolve(u)
    m, um = as_matrix(op), _matrix_of(u)
    _require_same_dim(m.shape[0], um.shape[0], "operator", "unitary")
    return dagger(um) @ m @ um


def tensor_embed(op, slot: int, space: CompositeSpace) -> np.ndarray:
    m = _matrix_of(op)
    if not 0 <= slot < len(space.dims):
        raise ValidationError(f"slot {slot} out of range for {len(space.dims)} subsystems")
    _require_same_dim(m.shape[0], space.dims[slot], "operator", f"subsystem {slot}")
    out = np.ones((1, 1), dtype=complex)
    for i, d in enumerate(space.dims):
        out = np.kron(out, m if i == slot else np.eye(d))
    return out


def accessible_info(state, obs) -> np.ndarray:
    """The product ``rho A``, the only input game equivalences may depend on."""
    rho, a = _matrix_of(state), _matrix_of(obs)
    _require_same_dim(rho.shape[0], a.shape[0], "state", "observable")
    return rho @ a


def is_pure(state, tol: float = ALGEBRA_TOL) -> bool:
    rho = _matrix_of(state)
    return frob(rho @ rho - rho) < tol


def joint_family(*families: ProjectorFamily, tol: float = 0.5) -> ProjectorFamily:
    """Nonzero products of commuting projector families on one space.

    Labels are tuples of the factor labels; zero products (spectral norm below
    ``tol``) are dropped so the result still resolves the identity.
    """
    dim = families[0].dim
    for f in families[1:]:
        _require_same_dim(dim, f.dim, "family", "family")
    projs, labels = [np.eye(dim, dtype=complex)], [()]
    for fam in families:
        nprojs, nlabels = [], []
        for p, lab in zip(projs, labels):
            for q, qlab in zip(fam.projectors, fam.labels):
                pq = p @ q
                if np.linalg.norm(pq, 2) > tol:
                    nprojs.append(pq)
                    nlabels.append(lab + (qlab,))
        projs, labels = nprojs, nlabels
    return ProjectorFamily(tuple(projs), tuple(labels))


def joint_observable(*families: ProjectorFamily) -> Observable:
    """Observable whose eigenprojectors are the joint branches of ``families``.

    Eigenvalues are the branch positions ``0..K-1``; labels carry the tuples.
    """
    fam = joint_family(*families)
    return Observable(Spectrum(tuple(float(k) for k in range(len(fam)))), fam)
