"""Lie-algebraic machinery: commutators, diagonal prolongations, wedge-rank
tests, and the minimal prolongation order used by superposition rules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (Domain, LieSystem, ScalarField, VectorField, as_coords,
                   fd_jacobian, sample_interior)
from .errors import NoFullRank, ShapeError

#: Relative singular-value cutoff for numeric rank decisions.
RANK_CUTOFF = 1e-10


def commutator(X: VectorField, Y: VectorField, state) -> np.ndarray:
    """Lie bracket ``[X, Y]`` evaluated at a point: ``Jac_Y X - Jac_X Y``."""
    if X.dim != Y.dim:
        raise ShapeError(f"field dimensions differ: {X.dim} vs {Y.dim}")
    x = as_coords(state)
    return Y.jacobian(x) @ X(x) - X.jacobian(x) @ Y(x)


def commutator_fd(X: VectorField, Y: VectorField, state, scale: float = 1e-6) -> np.ndarray:
    """Finite-difference cross-check of :func:`commutator` (central differences)."""
    if X.dim != Y.dim:
        raise ShapeError(f"field dimensions differ: {X.dim} vs {Y.dim}")
    x = as_coords(state)
    return fd_jacobian(Y.func, x, scale) @ X(x) - fd_jacobian(X.func, x, scale) @ Y(x)


@dataclass(frozen=True)
class StructureReport:
    """Worst-case residual of the structure-constant check."""

    max_residual: float
    tol: float
    worst_pair: tuple[int, int]
    worst_point: np.ndarray

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def check_structure_constants(sys: LieSystem, points, tol: float) -> StructureReport:
    """Compare ``[Y_a, Y_b]`` against ``sum_g c[a, b, g] Y_g`` over sample points."""
    if tol <= 0:
        raise ShapeError("tol must be positive")
    worst = -1.0
    worst_pair = (0, 0)
    worst_point = None
    r = sys.r
    for p in points:
        x = as_coords(p)
        Y = sys.field_matrix(x)
        for a in range(r):
            for b in range(a + 1, r):
                lhs = commutator(sys.fields[a], sys.fields[b], x)
                rhs = sys.structure[a, b] @ Y
                res = float(np.max(np.abs(lhs - rhs)))
                if res > worst:
                    worst, worst_pair, worst_point = res, (a, b), x
    return StructureReport(worst, tol, worst_pair, worst_point)


# ---------------------------------------------------------------------------
# diagonal prolongations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProlongedField(VectorField):
    """Diagonal prolongation of a field to M^k, acting copywise."""

    base: VectorField = None
    copies: int = 1


def prolong_field(X: VectorField, k: int) -> VectorField:
    """Diagonal prolongation ``X^[k]`` on M^k; ``k == 1`` returns ``X`` itself."""
    if k < 1:
        raise ShapeError("k must be >= 1")
    if k == 1:
        return X
    n = X.dim

    def func(x):
        pts = as_coords(x).reshape(k, n)
        return np.concatenate([X(p) for p in pts])

    def jac(x):
        pts = as_coords(x).reshape(k, n)
        out = np.zeros((k * n, k * n))
        for a, p in enumerate(pts):
            out[a * n:(a + 1) * n, a * n:(a + 1) * n] = X.jacobian(p)
        return out

    return ProlongedField(dim=k * n, func=func, jac=jac, base=X, copies=k)


def prolong_function(f, k: int, dim: int | None = None):
    """Diagonal prolongation of a scalar function: sum of ``f`` over the copies.

    Accepts a :class:`ScalarField` (returned as one, with gradient) or a plain
    callable together with ``dim``.  ``k == 1`` returns ``f`` itself.
    """
    if k < 1:
        raise ShapeError("k must be >= 1")
    if k == 1:
        return f
    if isinstance(f, ScalarField):
        n = f.dim

        def func(x):
            pts = as_coords(x).reshape(k, n)
            return sum(f(p) for p in pts)

        def grad(x):
            pts = as_coords(x).reshape(k, n)
            return np.concatenate([f.gradient(p) for p in pts])

        return ScalarField(k * n, func, grad if f.has_analytic_grad else None,
                           name=f"{f.name}^[{k}]" if f.name else "")
    if dim is None:
        raise ShapeError("dim is required when prolonging a bare callable")

    def func(x):
        pts = as_coords(x).reshape(k, dim)
        return sum(float(f(p)) for p in pts)

    return func


def wedge_matrix(fields, point) -> np.ndarray:
    """Stack of prolonged field values at a point of M^k, shape ``(r, k*n)``."""
    fields = list(fields)
    dims = {f.dim for f in fields}
    if len(dims) != 1:
        raise ShapeError("fields must share a dimension")
    n = dims.pop()
    x = as_coords(point)
    if x.shape[0] % n != 0:
        raise ShapeError(f"point length {x.shape[0]} is not a multiple of n={n}")
    k = x.shape[0] // n
    pts = x.reshape(k, n)
    return np.stack([np.concatenate([f(p) for p in pts]) for f in fields])


def wedge_determinant(fields, point):
    """Wedge test for prolonged fields at a point of M^k.

    When ``r == k*n`` the stacked field vectors form a square matrix and the
    determinant is returned (a float); otherwise the numeric rank (an int,
    singular values above ``RANK_CUTOFF`` relative to the largest).
    """
    M = wedge_matrix(fields, point)
    r, kn = M.shape
    if r == kn:
        return float(np.linalg.det(M))
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_CUTOFF * s[0]))


def _full_rank_at(fields, point, r: int) -> bool:
    M = wedge_matrix(fields, point)
    if r == M.shape[1]:
        det = np.linalg.det(M)
        scale = np.linalg.norm(M, np.inf)
        return abs(det) > 1e-10 * max(scale, 1e-300) ** r
    s = np.linalg.svd(M, compute_uv=False)
    return bool(s.size and np.sum(s > RANK_CUTOFF * s[0]) == r)


def minimal_prolongation_order(sys: LieSystem, trials: int = 50, seed: int = 0,
                               cap: int = 6) -> int:
    """Smallest k such that the prolonged VG fields reach full rank r on M^k.

    Genericity is operationalised by sampling ``trials`` seeded interior
    points per candidate k and accepting the first full-rank hit; the
    determinant threshold is scale-relative (1e-10 times the matrix infinity
    norm to the r-th power).
    """
    if trials < 1:
        raise ShapeError("trials must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    r = sys.r
    n = sys.dim
    for k in range(1, cap + 1):
        if r > k * n:
            continue  # rank r is impossible on M^k
        prolonged = [prolong_field(f, k) for f in sys.fields]
        domain_k = sys.domain.prolonged(k)
        for point in sample_interior(domain_k, rng, trials):
            if _full_rank_at(prolonged, point, r):
                return k
    raise NoFullRank(f"{sys.name}: no full rank up to k={cap} ({trials} trials per level)")
