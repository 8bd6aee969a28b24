"""Domain types for states, drivers, vector fields, and stochastic Lie systems.

Conventions used throughout the package:

* A driver is the vector ``B = (B^1, ..., B^ell)`` with ``B^1 = t`` (time is the
  first component) and the remaining components independent Brownian motions.
* A system's coefficient map returns an ``(ell, r)`` matrix ``b[a, alpha]``; the
  operator row ``a`` is ``sum_alpha b[a, alpha] * Y_alpha(x)``, so row 0 is the
  drift (the coefficient of ``dt``).
* Structure constants are stored as ``c[alpha, beta, gamma]`` with
  ``[Y_alpha, Y_beta] = sum_gamma c[alpha, beta, gamma] * Y_gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericsError, ShapeError

#: Strict margin for positivity constraints; logarithms of state coordinates
#: appear in first integrals, so boundary points are excluded.
POSITIVITY_MARGIN = 1e-12

RNG_ALGORITHM = "philox4x64"


def as_coords(x) -> np.ndarray:
    """Coerce a state (``State`` or array-like) to a float 1-d array."""
    if isinstance(x, State):
        return x.coords
    return np.atleast_1d(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# domains and states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """Open subset of R^n cut out by strict positivity of selected coordinates.

    ``positive[i]`` means coordinate ``i`` must exceed ``POSITIVITY_MARGIN``.
    """

    dim: int
    positive: tuple[bool, ...]

    def __post_init__(self):
        if len(self.positive) != self.dim:
            raise ShapeError(f"positivity mask has length {len(self.positive)}, expected {self.dim}")

    @classmethod
    def full_space(cls, n: int) -> "Domain":
        return cls(n, (False,) * n)

    @classmethod
    def positive_orthant(cls, n: int) -> "Domain":
        return cls(n, (True,) * n)

    @classmethod
    def half_line(cls) -> "Domain":
        return cls(1, (True,))

    @classmethod
    def mixed(cls, positive: Sequence[bool]) -> "Domain":
        return cls(len(positive), tuple(bool(p) for p in positive))

    def contains(self, x) -> bool:
        x = as_coords(x)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        for xi, pos in zip(x, self.positive):
            if pos and xi <= POSITIVITY_MARGIN:
                return False
        return True

    def sample(self, rng: np.random.Generator, low: float = -2.0, high: float = 2.0) -> np.ndarray:
        """One interior point; positive coordinates are drawn well inside (0, high]."""
        out = rng.uniform(low, high, size=self.dim)
        for i, pos in enumerate(self.positive):
            if pos:
                out[i] = rng.uniform(0.2, max(high, 0.4))
        return out

    def prolonged(self, k: int) -> "Domain":
        return Domain(self.dim * k, self.positive * k)


@dataclass(frozen=True)
class State:
    """Point on the system manifold together with its domain descriptor."""

    coords: np.ndarray
    domain: Domain

    def __post_init__(self):
        coords = np.atleast_1d(np.asarray(self.coords, dtype=float))
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)
        if not self.domain.contains(coords):
            raise DomainError(f"state {coords} is not interior to its domain")

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


# ---------------------------------------------------------------------------
# fields and scalar functions
# ---------------------------------------------------------------------------

def fd_jacobian(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                scale: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian with step ``scale * (1 + |x_i|)`` per coordinate."""
    x = as_coords(x)
    n = x.shape[0]
    f0 = np.asarray(func(x), dtype=float)
    jac = np.empty((f0.shape[0], n))
    for i in range(n):
        h = scale * (1.0 + abs(x[i]))
        xp = x.copy(); xp[i] += h
        xm = x.copy(); xm[i] -= h
        jac[:, i] = (np.asarray(func(xp), float) - np.asarray(func(xm), float)) / (2.0 * h)
    return jac


def fd_gradient(func: Callable[[np.ndarray], float], x: np.ndarray,
                scale: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = as_coords(x)
    grad = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        h = scale * (1.0 + abs(x[i]))
        xp = x.copy(); xp[i] += h
        xm = x.copy(); xm[i] -= h
        grad[i] = (float(func(xp)) - float(func(xm))) / (2.0 * h)
    return grad


@dataclass(frozen=True)
class VectorField:
    """Vector field on R^n with an analytic Jacobian.

    ``func(x) -> (n,)`` and ``jac(x) -> (n, n)`` must be pure; the Jacobian is
    analytic (finite differences are used only as cross-checks).
    """

    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.func(as_coords(x)), dtype=float)

    def jacobian(self, x) -> np.ndarray:
        return np.asarray(self.jac(as_coords(x)), dtype=float)


@dataclass(frozen=True)
class ScalarField:
    """Scalar function on R^n, optionally with an analytic gradient."""

    dim: int
    func: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""

    def __call__(self, x) -> float:
        return float(self.func(as_coords(x)))

    def gradient(self, x) -> np.ndarray:
        if self.grad is not None:
            return np.asarray(self.grad(as_coords(x)), dtype=float)
        return fd_gradient(self.func, x)

    @property
    def has_analytic_grad(self) -> bool:
        return self.grad is not None


# ---------------------------------------------------------------------------
# stochastic Lie systems
# ---------------------------------------------------------------------------

def _check_structure_algebra(c: np.ndarray, tol: float = 1e-12) -> None:
    """Validate antisymmetry and the Jacobi identity of structure constants."""
    r = c.shape[0]
    if c.shape != (r, r, r):
        raise ShapeError(f"structure constants must be (r, r, r), got {c.shape}")
    if np.max(np.abs(c + np.swapaxes(c, 0, 1))) > tol:
        raise ShapeError("structure constants are not antisymmetric in (alpha, beta)")
    # Jacobi: sum_mu c[b,g,mu] c[a,mu,nu] + cyclic(a,b,g) = 0
    jac = (np.einsum("bgm,amn->abgn", c, c)
           + np.einsum("gam,bmn->abgn", c, c)
           + np.einsum("abm,gmn->abgn", c, c))
    if np.max(np.abs(jac)) > tol:
        raise ShapeError("structure constants violate the Jacobi identity")


@dataclass(frozen=True)
class LieSystem:
    """Stochastic Lie system: VG basis fields plus driver-dependent coefficients.

    ``coeffs(B)`` maps a driver vector of length ``ell`` to the ``(ell, r)``
    coefficient matrix of the operator (row 0 = drift row).  ``log_mask``
    selects coordinates integrated in log space to preserve positivity.
    """

    name: str
    fields: tuple[VectorField, ...]
    structure: np.ndarray
    coeffs: Callable[[np.ndarray], np.ndarray]
    ell: int
    domain: Domain
    log_mask: tuple[bool, ...] | None = None

    def __post_init__(self):
        structure = np.asarray(self.structure, dtype=float)
        structure.flags.writeable = False
        object.__setattr__(self, "structure", structure)
        object.__setattr__(self, "fields", tuple(self.fields))
        dims = {f.dim for f in self.fields}
        if len(dims) != 1 or dims != {self.domain.dim}:
            raise ShapeError("all VG fields must share the manifold dimension")
        if self.ell < 1:
            raise ShapeError("driver must have at least the time component")
        _check_structure_algebra(structure)
        if structure.shape[0] != len(self.fields):
            raise ShapeError("structure constants do not match the number of fields")
        if self.log_mask is not None and len(self.log_mask) != self.domain.dim:
            raise ShapeError("log_mask length must equal the manifold dimension")

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def r(self) -> int:
        return len(self.fields)

    def field_matrix(self, x) -> np.ndarray:
        """Stack of basis-field values at ``x``, shape ``(r, n)``."""
        x = as_coords(x)
        return np.stack([f(x) for f in self.fields])

    def coeff_matrix(self, B) -> np.ndarray:
        B = np.asarray(B, dtype=float)
        if B.shape != (self.ell,):
            raise ShapeError(f"driver vector has shape {B.shape}, expected ({self.ell},)")
        C = np.asarray(self.coeffs(B), dtype=float)
        if C.shape != (self.ell, self.r):
            raise ShapeError(f"coefficient map returned {C.shape}, expected ({self.ell}, {self.r})")
        return C


def assemble_operator(sys: LieSystem, B, state) -> np.ndarray:
    """Stratonovich operator matrix at ``(B, state)``, shape ``(ell, n)``.

    Row ``a`` is ``sum_alpha b[a, alpha](B) * Y_alpha(state)``; row 0 is the
    drift row (coefficient of ``dt``).
    """
    x = as_coords(state)
    if not sys.domain.contains(x):
        raise DomainError(f"state {x} outside the domain of {sys.name}")
    C = sys.coeff_matrix(B)
    if not np.all(np.isfinite(C)):
        raise NumericsError(f"non-finite coefficients for {sys.name} at B={B}")
    Y = sys.field_matrix(x)
    if not np.all(np.isfinite(Y)):
        raise NumericsError(f"non-finite field values for {sys.name} at {x}")
    return C @ Y


def validate_state(sys: LieSystem, state) -> bool:
    """True iff the state is strictly interior to the system's domain."""
    try:
        x = as_coords(state)
    except (TypeError, ValueError):
        return False
    return x.shape == (sys.dim,) and sys.domain.contains(x)


# ---------------------------------------------------------------------------
# seeded Brownian driver paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DriverPath:
    """Discretised semimartingale driver: time grid plus Brownian increments.

    ``increments[b, k]`` is the increment of Brownian component ``b + 2`` (in
    driver numbering, where component 1 is the time) over ``[t_k, t_{k+1}]``.
    """

    seed: int
    t_grid: np.ndarray
    increments: np.ndarray
    level: int
    rng_algorithm: str = RNG_ALGORITHM

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        inc = np.asarray(self.increments, dtype=float)
        if t.ndim != 1 or t.shape[0] < 2 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ShapeError("t_grid must be strictly increasing and start at 0")
        if inc.ndim != 2 or inc.shape[1] != t.shape[0] - 1:
            raise ShapeError("increments must have shape (ell - 1, steps)")
        t.flags.writeable = False
        inc.flags.writeable = False
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "increments", inc)

    @property
    def ell(self) -> int:
        return self.increments.shape[0] + 1

    @property
    def n_steps(self) -> int:
        return self.t_grid.shape[0] - 1

    @property
    def t_end(self) -> float:
        return float(self.t_grid[-1])

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.t_grid)

    def values(self) -> np.ndarray:
        """Brownian values at the grid nodes, shape ``(ell - 1, steps + 1)``, starting at 0."""
        zero = np.zeros((self.increments.shape[0], 1))
        return np.hstack([zero, np.cumsum(self.increments, axis=1)])

    def driver_at(self, k: int, values: np.ndarray | None = None) -> np.ndarray:
        """Full driver vector ``(t_k, B^2_k, ..., B^ell_k)`` at grid node ``k``."""
        vals = self.values() if values is None else values
        return np.concatenate([[self.t_grid[k]], vals[:, k]])

    def coarsen(self) -> "DriverPath":
        """Drop to the next-coarser level by pairwise increment summation."""
        if self.n_steps % 2 != 0:
            raise ShapeError("cannot coarsen a path with an odd number of steps")
        inc = self.increments.reshape(self.increments.shape[0], -1, 2).sum(axis=2)
        return DriverPath(self.seed, self.t_grid[::2].copy(), inc,
                          self.level - 1, self.rng_algorithm)


def brownian_family(seed: int, ell: int, t_end: float, base_steps: int,
                    levels: int) -> list[DriverPath]:
    """Consistent family of driver paths at ``levels`` refinement levels.

    The finest level (``base_steps * 2**(levels-1)`` steps) is generated from a
    counter-based Philox stream keyed by ``seed``; coarser levels are obtained
    by pairwise increment summation, so the family shares one realisation of
    the underlying noise.  Increments are ``Normal(0, dt)``.
    """
    if levels < 1:
        raise ShapeError("levels must be >= 1")
    if ell < 1:
        raise ShapeError("ell must be >= 1 (time is always the first component)")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    steps = base_steps * 2 ** (levels - 1)
    dt = t_end / steps
    inc = rng.standard_normal((ell - 1, steps)) * np.sqrt(dt)
    t_grid = np.linspace(0.0, t_end, steps + 1)
    finest = DriverPath(seed, t_grid, inc, levels - 1)
    family = [finest]
    for _ in range(levels - 1):
        family.append(family[-1].coarsen())
    family.reverse()  # index k = level k (coarsest first)
    return family


def brownian_path(seed: int, ell: int, t_end: float, steps: int) -> DriverPath:
    """Single driver path with ``steps`` uniform steps (level 0 of its own family)."""
    return brownian_family(seed, ell, t_end, steps, 1)[0]


def zero_noise_path(ell: int, t_end: float, steps: int) -> DriverPath:
    """Deterministic driver: time marches, all Brownian increments are zero."""
    t_grid = np.linspace(0.0, t_end, steps + 1)
    return DriverPath(0, t_grid, np.zeros((ell - 1, steps)), 0)


# ---------------------------------------------------------------------------
# generic-point sampling
# ---------------------------------------------------------------------------

def sample_interior(domain: Domain, rng: np.random.Generator, count: int,
                    low: float = -2.0, high: float = 2.0) -> list[np.ndarray]:
    """Seeded interior points of a domain (uniform box; positive coords in (0.2, high))."""
    return [domain.sample(rng, low, high) for _ in range(count)]


def sample_generic_copies(domain: Domain, k: int, rng: np.random.Generator,
                          min_sep: float = 1e-6, low: float = -2.0,
                          high: float = 2.0, max_tries: int = 100) -> np.ndarray:
    """k domain points, pairwise separated by ``min_sep`` in every coordinate.

    Returns the stacked point on M^k as a flat array of length ``k * n``.
    Resamples (up to ``max_tries``) until genericity holds.
    """
    for _ in range(max_tries):
        pts = np.stack([domain.sample(rng, low, high) for _ in range(k)])
        separated = True
        for a in range(k):
            for b in range(a + 1, k):
                if np.any(np.abs(pts[a] - pts[b]) < min_sep):
                    separated = False
        if separated:
            return pts.reshape(-1)
    raise NumericsError("could not sample generic copies (domain too tight?)")
