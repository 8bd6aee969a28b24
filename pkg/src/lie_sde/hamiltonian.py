"""Symplectic structures, Poisson brackets, Hamiltonian pairs, and
Casimir-derived constants of motion.

Sign conventions (calibrated once, asserted by tests):

* ``omega(u, v) = u^T W v`` where ``W = form.matrix(x)`` is antisymmetric.
* A pair ``(Y, h)`` is Hamiltonian when ``omega(Y, .) = dh``, i.e.
  ``W^T Y = grad h``.
* The Poisson bracket is ``{f, g} = grad(f)^T P grad(g)`` with bivector
  ``P = -W^{-1}``; equivalently ``{f, g} = X_g f``.  The overall sign is
  pinned by the epidemic-model pair, whose bracket must equal -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import Domain, ScalarField, VectorField, as_coords, fd_gradient
from .errors import ShapeError, SingularFormError
from .liealg import prolong_field, prolong_function


@dataclass(frozen=True)
class SymplecticForm:
    """Pointwise antisymmetric, nondegenerate two-form on an even-dimensional domain."""

    dim: int
    matrix: Callable[[np.ndarray], np.ndarray]
    domain: Domain

    def __post_init__(self):
        if self.dim % 2 != 0:
            raise ShapeError("symplectic forms need even dimension")

    def matrix_at(self, x) -> np.ndarray:
        W = np.asarray(self.matrix(as_coords(x)), dtype=float)
        if W.shape != (self.dim, self.dim):
            raise ShapeError(f"form matrix has shape {W.shape}, expected ({self.dim}, {self.dim})")
        if not np.all(np.isfinite(W)):
            raise SingularFormError(f"form has non-finite entries at {as_coords(x)}")
        if np.max(np.abs(W + W.T)) != 0.0:
            raise ShapeError("form matrix is not exactly antisymmetric")
        return W

    def bivector_at(self, x) -> np.ndarray:
        """Poisson bivector ``P = -W^{-1}`` at a point."""
        W = self.matrix_at(x)
        det = np.linalg.det(W)
        if not np.isfinite(det) or abs(det) < 1e-300:
            raise SingularFormError(f"form degenerate at {as_coords(x)}")
        return -np.linalg.inv(W)


@dataclass(frozen=True)
class HamiltonianStructure:
    """Symplectic form plus paired (field, Hamiltonian) lists and their algebra.

    ``lh_structure[a, b, g]`` are the Lie-Hamilton structure constants of the
    bracket, ``central_charges[a, b]`` the constant parts:
    ``{h_a, h_b} = sum_g lh_structure[a, b, g] h_g + central_charges[a, b]``.
    """

    form: SymplecticForm
    fields: tuple[VectorField, ...]
    hams: tuple[ScalarField, ...]
    lh_structure: np.ndarray
    central_charges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "hams", tuple(self.hams))
        if len(self.fields) != len(self.hams):
            raise ShapeError("fields and Hamiltonians must pair up")
        r = len(self.hams)
        lh = np.asarray(self.lh_structure, dtype=float)
        cc = np.asarray(self.central_charges, dtype=float)
        if lh.shape != (r, r, r) or cc.shape != (r, r):
            raise ShapeError("algebra tensors must be (r,r,r) and (r,r)")
        if np.max(np.abs(lh + np.swapaxes(lh, 0, 1))) > 0 or np.max(np.abs(cc + cc.T)) > 0:
            raise ShapeError("bracket tensors must be antisymmetric")
        lh.flags.writeable = False
        cc.flags.writeable = False
        object.__setattr__(self, "lh_structure", lh)
        object.__setattr__(self, "central_charges", cc)

    @property
    def r(self) -> int:
        return len(self.hams)


def poisson_bracket(S: HamiltonianStructure, f: ScalarField, g: ScalarField, state) -> float:
    """Poisson bracket ``{f, g}`` at a point (see module docstring for the sign)."""
    x = as_coords(state)
    P = S.form.bivector_at(x)
    return float(f.gradient(x) @ P @ g.gradient(x))


def bracket_function(S: HamiltonianStructure, f: ScalarField, g: ScalarField) -> ScalarField:
    """``{f, g}`` as a scalar field (gradient by finite differences)."""
    return ScalarField(S.form.dim, lambda x: poisson_bracket(S, f, g, x),
                       name=f"{{{f.name},{g.name}}}")


@dataclass(frozen=True)
class PairReport:
    max_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def check_hamiltonian_pair(S: HamiltonianStructure, Y: VectorField, h: ScalarField,
                           points, tol: float) -> PairReport:
    """Residual of the Hamiltonian condition ``W^T Y = grad h`` over points."""
    if Y.dim != S.form.dim or h.dim != S.form.dim:
        raise ShapeError("field/Hamiltonian dimension does not match the form")
    worst = 0.0
    for p in points:
        x = as_coords(p)
        res = S.form.matrix_at(x).T @ Y(x) - h.gradient(x)
        worst = max(worst, float(np.max(np.abs(res))))
    return PairReport(worst, tol)


def check_lh_brackets(S: HamiltonianStructure, points, tol: float) -> PairReport:
    """Verify ``{h_a, h_b} = sum_g c[a,b,g] h_g + charge[a,b]`` over points."""
    worst = 0.0
    for p in points:
        x = as_coords(p)
        hvals = np.array([h(x) for h in S.hams])
        for a in range(S.r):
            for b in range(a + 1, S.r):
                lhs = poisson_bracket(S, S.hams[a], S.hams[b], x)
                rhs = float(S.lh_structure[a, b] @ hvals + S.central_charges[a, b])
                worst = max(worst, abs(lhs - rhs))
    return PairReport(worst, tol)


# ---------------------------------------------------------------------------
# polynomials on the dual algebra and Casimir-derived constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Polynomial in r symbols: terms are (coefficient, exponent-tuple) pairs."""

    nvars: int
    terms: tuple[tuple[float, tuple[int, ...]], ...]

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=float)
        total = 0.0
        for coeff, exps in self.terms:
            total += coeff * float(np.prod(v ** np.asarray(exps)))
        return total

    def partial(self, i: int) -> "Polynomial":
        new_terms = []
        for coeff, exps in self.terms:
            if exps[i] == 0:
                continue
            reduced = list(exps)
            reduced[i] -= 1
            new_terms.append((coeff * exps[i], tuple(reduced)))
        return Polynomial(self.nvars, tuple(new_terms))


def sl2_casimir() -> Polynomial:
    """Quadratic sl(2) Casimir ``v_0 v_2 - v_1^2`` in the basis ordering used here."""
    return Polynomial(3, ((1.0, (1, 0, 1)), (-1.0, (0, 2, 0))))


def casimir_constant(S: HamiltonianStructure, C: Polynomial, m: int,
                     s: int | Sequence[int]) -> ScalarField:
    """Constant of motion ``C(sum_a h_1(x_a), ..., sum_a h_r(x_a))`` on M^m.

    ``s`` selects the copies summed over: an integer means copies ``0..s-1``
    (the standard choice), a sequence gives an explicit copy subset (needed
    for the oscillator-with-inverse-cube system, whose second integral sums
    over copies {0, 2}).
    """
    if C.nvars != S.r:
        raise ShapeError("Casimir polynomial arity must match the number of Hamiltonians")
    subset = tuple(range(s)) if isinstance(s, int) else tuple(s)
    if not subset or min(subset) < 0 or max(subset) >= m:
        raise ShapeError(f"copy subset {subset} invalid for m={m}")
    n = S.form.dim
    partials = [C.partial(i) for i in range(S.r)]

    def u_values(pts):
        return np.array([sum(h(pts[a]) for a in subset) for h in S.hams])

    def func(x):
        pts = as_coords(x).reshape(m, n)
        return C(u_values(pts))

    def grad(x):
        pts = as_coords(x).reshape(m, n)
        u = u_values(pts)
        dC = np.array([p(u) for p in partials])
        out = np.zeros(m * n)
        for a in subset:
            block = sum(dC[i] * S.hams[i].gradient(pts[a]) for i in range(S.r))
            out[a * n:(a + 1) * n] = block
        return out

    analytic = all(h.has_analytic_grad for h in S.hams)
    return ScalarField(m * n, func, grad if analytic else None,
                       name=f"casimir[{','.join(map(str, subset))}]")


def check_casimir(S: HamiltonianStructure, candidate: ScalarField, points,
                  tol: float) -> PairReport:
    """Max of ``|{h_a, candidate}|`` over points and basis Hamiltonians."""
    if tol <= 0:
        raise ShapeError("tol must be positive")
    worst = 0.0
    for p in points:
        for h in S.hams:
            worst = max(worst, abs(poisson_bracket(S, h, candidate, p)))
    return PairReport(worst, tol)


def prolong_structure(S: HamiltonianStructure, k: int) -> HamiltonianStructure:
    """Diagonal prolongation of the whole structure to M^k.

    The form becomes block-diagonal, Hamiltonians become copy sums, the
    Lie-Hamilton constants are unchanged, and central charges scale by k
    (a constant bracket picks up one copy of itself per block).
    """
    if k == 1:
        return S
    n = S.form.dim

    def matrix(x):
        pts = as_coords(x).reshape(k, n)
        out = np.zeros((k * n, k * n))
        for a, p in enumerate(pts):
            out[a * n:(a + 1) * n, a * n:(a + 1) * n] = S.form.matrix(p)
        return out

    form = SymplecticForm(k * n, matrix, S.form.domain.prolonged(k))
    fields = tuple(prolong_field(f, k) for f in S.fields)
    hams = tuple(prolong_function(h, k) for h in S.hams)
    return HamiltonianStructure(form, fields, hams, S.lh_structure.copy(),
                                k * S.central_charges)
