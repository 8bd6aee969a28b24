"""Parameterised constructors for the catalogued stochastic Lie systems.

Each entry bundles the VG basis fields with analytic Jacobians, the structure
constants (validated at construction), the driver-coefficient map, the
Hamiltonian structure where one exists, first integrals, the superposition
rule where one is known, and the minimal prolongation order m.

Coefficient slots accept a real constant or a callable receiving the full
driver vector ``B`` (with ``B[0] = t``), so coefficients may depend on the
Brownian values as well as on time.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .core import (Domain, DriverPath, LieSystem, ScalarField, VectorField,
                   as_coords, sample_generic_copies, sample_interior)
from .errors import ShapeError, UnsupportedError
from .hamiltonian import (HamiltonianStructure, Polynomial, SymplecticForm,
                          casimir_constant, sl2_casimir)
from .integrate import integrate_stratonovich
from .superposition import (SuperpositionRule, corona_rule, lv_rule,
                            riccati_rule)

Coefficient = float | Callable[[np.ndarray], float]


def as_coeff(c: Coefficient) -> Callable[[np.ndarray], float]:
    """Normalise a coefficient slot to a callable of the driver vector."""
    if callable(c):
        return c
    value = float(c)
    return lambda B: value


@dataclass(frozen=True)
class FirstIntegral:
    """Named first integral of the prolonged system, on M^copies."""

    name: str
    copies: int
    func: ScalarField


@dataclass(frozen=True)
class CatalogEntry:
    """A catalogued system with everything its verification needs."""

    name: str
    sys: LieSystem
    m: int
    ham: HamiltonianStructure | None = None
    integrals: tuple[FirstIntegral, ...] = ()
    rule: SuperpositionRule | None = None
    params: dict = dc_field(default_factory=dict)
    defaults: dict = dc_field(default_factory=dict)

    def sample_points(self, rng, count: int):
        """Seeded interior points of the base manifold."""
        return sample_interior(self.sys.domain, rng, count)

    def sample_ham_points(self, rng, count: int, min_sep: float = 0.2):
        """Seeded points of the Hamiltonian structure's space.

        For structures living on a prolonged space (the Riccati one) the
        copies are kept ``min_sep``-separated so the form stays away from its
        coincidence singularities.
        """
        if self.ham is None:
            raise UnsupportedError(f"{self.name} has no Hamiltonian structure")
        k = self.ham.form.dim // self.sys.dim
        if k == 1:
            return sample_interior(self.sys.domain, rng, count)
        return [sample_generic_copies(self.sys.domain, k, rng, min_sep)
                for _ in range(count)]


# ---------------------------------------------------------------------------
# stochastic Riccati equation
# ---------------------------------------------------------------------------

def _riccati_fields() -> tuple[VectorField, ...]:
    X0 = VectorField(1, lambda x: np.ones(1), lambda x: np.zeros((1, 1)))
    X1 = VectorField(1, lambda x: x.copy(), lambda x: np.ones((1, 1)))
    X2 = VectorField(1, lambda x: x ** 2, lambda x: np.array([[2.0 * x[0]]]))
    return X0, X1, X2


def _antisym(c: np.ndarray) -> np.ndarray:
    """Fill the (beta, alpha) half from the (alpha, beta) half."""
    return c - np.swapaxes(c, 0, 1)


def _riccati_prolonged_structure() -> HamiltonianStructure:
    """Hamiltonian structure of the 4-copy prolonged Riccati fields.

    The symplectic form carries squared pair differences,
    ``omega = sum_i dG_(2i) ^ dG_(2i+1) / (G_(2i) - G_(2i+1))^2``; with this
    scaling the three rational Hamiltonians below satisfy omega(X_a, .) = dh_a
    for the prolonged fields and close the bracket table
    {h0,h1} = -h0, {h0,h2} = -2 h1, {h1,h2} = -h2.
    """
    def matrix(g):
        g = as_coords(g)
        W = np.zeros((4, 4))
        with np.errstate(divide="ignore"):
            for i in range(2):
                u = g[2 * i] - g[2 * i + 1]
                w = 1.0 / u ** 2
                W[2 * i, 2 * i + 1] = w
                W[2 * i + 1, 2 * i] = -w
        return W

    form = SymplecticForm(4, matrix, Domain.full_space(4))

    def pairs(g):
        return ((g[0], g[1]), (g[2], g[3]))

    def h0(g):
        return sum(1.0 / (a - b) for a, b in pairs(as_coords(g)))

    def h0_grad(g):
        g = as_coords(g)
        out = np.empty(4)
        for i in range(2):
            u = g[2 * i] - g[2 * i + 1]
            out[2 * i] = -1.0 / u ** 2
            out[2 * i + 1] = 1.0 / u ** 2
        return out

    def h1(g):
        return 0.5 * sum((a + b) / (a - b) for a, b in pairs(as_coords(g)))

    def h1_grad(g):
        g = as_coords(g)
        out = np.empty(4)
        for i in range(2):
            a, b = g[2 * i], g[2 * i + 1]
            u = a - b
            out[2 * i] = -b / u ** 2
            out[2 * i + 1] = a / u ** 2
        return out

    def h2(g):
        return sum(a * b / (a - b) for a, b in pairs(as_coords(g)))

    def h2_grad(g):
        g = as_coords(g)
        out = np.empty(4)
        for i in range(2):
            a, b = g[2 * i], g[2 * i + 1]
            u = a - b
            out[2 * i] = -(b / u) ** 2
            out[2 * i + 1] = (a / u) ** 2
        return out

    from .liealg import prolong_field
    fields = tuple(prolong_field(X, 4) for X in _riccati_fields())
    hams = (ScalarField(4, h0, h0_grad, "h0"),
            ScalarField(4, h1, h1_grad, "h1"),
            ScalarField(4, h2, h2_grad, "h2"))
    lh = np.zeros((3, 3, 3))
    lh[0, 1, 0] = -1.0
    lh[0, 2, 1] = -2.0
    lh[1, 2, 2] = -1.0
    return HamiltonianStructure(form, fields, hams, _antisym(lh), np.zeros((3, 3)))


def riccati(b0: Coefficient = 1.0, b1: Coefficient = 0.0, b2: Coefficient = -1.0,
            bp0: Coefficient = 0.0, bp1: Coefficient = 0.1, bp2: Coefficient = 0.0,
            name: str = "riccati") -> CatalogEntry:
    """Stochastic Riccati equation
    ``dG = (b2 G^2 + b1 G + b0) dt + (bp2 G^2 + bp1 G + bp0) o dB``.

    VG basis ``X_a = G^a d/dG`` (a = 0, 1, 2) with sl(2) relations
    [X0,X1] = X0, [X0,X2] = 2 X1, [X1,X2] = X2; the superposition rule uses
    three particular solutions (m = 3).
    """
    slots = [as_coeff(c) for c in (b0, b1, b2)]
    noise = [as_coeff(c) for c in (bp0, bp1, bp2)]

    def coeffs(B):
        return np.array([[f(B) for f in slots], [f(B) for f in noise]])

    c = np.zeros((3, 3, 3))
    c[0, 1, 0] = 1.0
    c[0, 2, 1] = 2.0
    c[1, 2, 2] = 1.0
    sys = LieSystem(name, _riccati_fields(), _antisym(c), coeffs, 2,
                    Domain.full_space(1))
    ham = _riccati_prolonged_structure()
    cas = casimir_constant(ham, sl2_casimir(), 1, 1)
    casimir = ScalarField(4, cas.func, cas.grad, name="C")
    integrals = (FirstIntegral("C", 4, casimir),)
    return CatalogEntry(
        name=name, sys=sys, m=3, ham=ham, integrals=integrals, rule=riccati_rule(),
        params={"b0": b0, "b1": b1, "b2": b2, "bp0": bp0, "bp1": bp1, "bp2": bp2},
        defaults={"initial": (2.0,),
                  "particulars": ((-1.0,), (0.0,), (1.0,)),
                  "integral_copies": ((-1.0,), (0.0,), (1.0,), (2.0,))},
    )


# ---------------------------------------------------------------------------
# stochastic harmonic oscillator and its Riccati reduction
# ---------------------------------------------------------------------------

def oscillator(omega2: Coefficient = 1.0, gamma: Coefficient = 0.0,
               omega2_B: Coefficient = 0.0, gamma_B: Coefficient = 0.1) -> CatalogEntry:
    """Stochastic harmonic oscillator
    ``dx = v dt``, ``dv = -(omega2 x + gamma v) dt - (omega2_B x + gamma_B v) o dB``.

    The coefficients span the linear fields x d/dx, x d/dv, v d/dx, v d/dv,
    which close a four-dimensional (gl(2)) VG algebra; m = 2.
    """
    W1 = VectorField(2, lambda p: np.array([p[0], 0.0]),
                     lambda p: np.array([[1.0, 0.0], [0.0, 0.0]]))
    W2 = VectorField(2, lambda p: np.array([0.0, p[0]]),
                     lambda p: np.array([[0.0, 0.0], [1.0, 0.0]]))
    W3 = VectorField(2, lambda p: np.array([p[1], 0.0]),
                     lambda p: np.array([[0.0, 1.0], [0.0, 0.0]]))
    W4 = VectorField(2, lambda p: np.array([0.0, p[1]]),
                     lambda p: np.array([[0.0, 0.0], [0.0, 1.0]]))
    c = np.zeros((4, 4, 4))
    c[0, 1, 1] = 1.0    # [x dx, x dv] = x dv
    c[0, 2, 2] = -1.0   # [x dx, v dx] = -v dx
    c[1, 2, 0] = 1.0    # [x dv, v dx] = x dx - v dv
    c[1, 2, 3] = -1.0
    c[1, 3, 1] = 1.0    # [x dv, v dv] = x dv
    c[2, 3, 2] = -1.0   # [v dx, v dv] = -v dx
    om, ga = as_coeff(omega2), as_coeff(gamma)
    om_B, ga_B = as_coeff(omega2_B), as_coeff(gamma_B)

    def coeffs(B):
        return np.array([[0.0, -om(B), 1.0, -ga(B)],
                         [0.0, -om_B(B), 0.0, -ga_B(B)]])

    sys = LieSystem("oscillator", (W1, W2, W3, W4), _antisym(c), coeffs, 2,
                    Domain.full_space(2))
    return CatalogEntry(
        name="oscillator", sys=sys, m=2,
        params={"omega2": omega2, "gamma": gamma,
                "omega2_B": omega2_B, "gamma_B": gamma_B},
        defaults={"initial": (0.0, 1.0)},
    )


def oscillator_reduction(omega2: Coefficient = 1.0, gamma: Coefficient = 0.0,
                         omega2_B: Coefficient = 0.0,
                         gamma_B: Coefficient = 0.1) -> CatalogEntry:
    """Riccati system satisfied by the ratio G = x / v of the oscillator:
    ``dG = (1 + gamma G + omega2 G^2) dt + (gamma_B G + omega2_B G^2) o dB``."""
    return riccati(b0=1.0, b1=gamma, b2=omega2,
                   bp0=0.0, bp1=gamma_B, bp2=omega2_B, name="riccati")


def compare_oscillator_reduction(entry: CatalogEntry, x0: float, v0: float,
                                 path: DriverPath) -> dict:
    """Pathwise check that x/v of the oscillator solves the reduced Riccati system.

    Both systems are integrated on the same driver path; the comparison window
    ends where v crosses zero (the ratio degenerates there) or where either
    trajectory truncates.
    """
    if entry.name != "oscillator":
        raise UnsupportedError("reduction comparison is defined for the oscillator")
    reduced = oscillator_reduction(**entry.params)
    osc_traj = integrate_stratonovich(entry.sys, (x0, v0), path)
    ric_traj = integrate_stratonovich(reduced.sys, (x0 / v0,), path)
    n = min(osc_traj.n_valid, ric_traj.n_valid)
    v = osc_traj.states[:n, 1]
    crossing = np.nonzero(v * v0 <= 0.0)[0]
    if crossing.size:
        n = int(crossing[0])
    if n < 2:
        return {"window_end": 0.0, "max_error": np.inf, "n_compared": 0,
                "v_crossed_zero": True}
    ratio = osc_traj.states[:n, 0] / v[:n]
    err = float(np.max(np.abs(ratio - ric_traj.states[:n, 0])))
    return {"window_end": float(path.t_grid[n - 1]), "max_error": err,
            "n_compared": int(n), "v_crossed_zero": bool(crossing.size)}


# ---------------------------------------------------------------------------
# stochastic Ermakov system
# ---------------------------------------------------------------------------

def ermakov(omega2: Coefficient = 1.0, sigma: float = 0.1, k: float = 1.0) -> CatalogEntry:
    """Stochastic Ermakov system on rho > 0:
    ``d rho = v dt``, ``dv = (-omega2 rho + k / rho^3) dt + sigma rho o dB``.

    VG basis X1 = -rho dv, X2 = (v dv - rho drho)/2, X3 = v drho + (k/rho^3) dv
    with [X1,X2] = X1, [X1,X3] = 2 X2, [X2,X3] = X3; Hamiltonian relative to
    omega = drho ^ dv with h1 = rho^2/2, h2 = -rho v / 2,
    h3 = (v^2 + k/rho^2)/2.  The sl(2) Casimir yields the two-copy invariant
    F1 and the {0,2}-copy invariant F2 on three copies.
    """
    X1 = VectorField(2, lambda q: np.array([0.0, -q[0]]),
                     lambda q: np.array([[0.0, 0.0], [-1.0, 0.0]]))
    X2 = VectorField(2, lambda q: np.array([-0.5 * q[0], 0.5 * q[1]]),
                     lambda q: np.array([[-0.5, 0.0], [0.0, 0.5]]))
    X3 = VectorField(2, lambda q: np.array([q[1], k / q[0] ** 3]),
                     lambda q: np.array([[0.0, 1.0],
                                         [-3.0 * k / q[0] ** 4, 0.0]]))
    c = np.zeros((3, 3, 3))
    c[0, 1, 0] = 1.0
    c[0, 2, 1] = 2.0
    c[1, 2, 2] = 1.0
    om = as_coeff(omega2)

    def coeffs(B):
        return np.array([[om(B), 0.0, 1.0], [-sigma, 0.0, 0.0]])

    domain = Domain.mixed((True, False))
    sys = LieSystem("ermakov", (X1, X2, X3), _antisym(c), coeffs, 2, domain)

    form = SymplecticForm(2, lambda q: np.array([[0.0, 1.0], [-1.0, 0.0]]), domain)
    h1 = ScalarField(2, lambda q: 0.5 * q[0] ** 2,
                     lambda q: np.array([q[0], 0.0]), "h1")
    h2 = ScalarField(2, lambda q: -0.5 * q[0] * q[1],
                     lambda q: np.array([-0.5 * q[1], -0.5 * q[0]]), "h2")
    h3 = ScalarField(2, lambda q: 0.5 * (q[1] ** 2 + k / q[0] ** 2),
                     lambda q: np.array([-k / q[0] ** 3, q[1]]), "h3")
    lh = np.zeros((3, 3, 3))
    lh[0, 1, 0] = -1.0
    lh[0, 2, 1] = -2.0
    lh[1, 2, 2] = -1.0
    ham = HamiltonianStructure(form, (X1, X2, X3), (h1, h2, h3),
                               _antisym(lh), np.zeros((3, 3)))
    C = sl2_casimir()
    F1 = casimir_constant(ham, C, 2, 2)
    F2 = casimir_constant(ham, C, 3, (0, 2))
    integrals = (FirstIntegral("F1", 2, ScalarField(4, F1.func, F1.grad, "F1")),
                 FirstIntegral("F2", 3, ScalarField(6, F2.func, F2.grad, "F2")))
    return CatalogEntry(
        name="ermakov", sys=sys, m=2, ham=ham, integrals=integrals,
        params={"omega2": omega2, "sigma": sigma, "k": k},
        defaults={"initial": (1.0, 0.5),
                  "integral_copies": ((1.0, 0.5), (1.5, -0.3), (0.8, 0.2))},
    )


# ---------------------------------------------------------------------------
# epidemic (coronavirus limit-case) model
# ---------------------------------------------------------------------------

def corona(A: Coefficient = 0.3, B: Coefficient = 0.1,
           noise: str = "stratonovich") -> CatalogEntry:
    """Two-component epidemic model on the positive quadrant:
    ``dH = -A(t) H dt - B(t) H dW``, ``dR = -A(t) R dt + B(t) H dW``.

    VG basis M1 = H (dH - dR), M2 = -H dH - R dR (the algebra is abelian:
    [M1, M2] = 0); Hamiltonian relative to omega = dH ^ dR / (R H + H^2) with
    h1 = log(H + R), h2 = log(H / (H + R)) and central bracket {h1, h2} = -1.
    One particular solution suffices (m = 1).

    The source model is printed without a Stratonovich circle; ``noise``
    selects the reading.  Under ``"ito"`` the equivalent Stratonovich drift
    gains ``-B(t)^2/2 M1``, which stays inside the VG algebra.
    """
    if noise not in ("stratonovich", "ito"):
        raise ShapeError("noise must be 'stratonovich' or 'ito'")
    M1 = VectorField(2, lambda p: np.array([p[0], -p[0]]),
                     lambda p: np.array([[1.0, 0.0], [-1.0, 0.0]]))
    M2 = VectorField(2, lambda p: np.array([-p[0], -p[1]]),
                     lambda p: -np.eye(2))
    Af, Bf = as_coeff(A), as_coeff(B)

    if noise == "stratonovich":
        def coeffs(Bvec):
            return np.array([[0.0, Af(Bvec)], [-Bf(Bvec), 0.0]])
    else:
        def coeffs(Bvec):
            b = Bf(Bvec)
            return np.array([[-0.5 * b * b, Af(Bvec)], [-b, 0.0]])

    domain = Domain.positive_orthant(2)
    sys = LieSystem("corona", (M1, M2), np.zeros((2, 2, 2)), coeffs, 2,
                    domain, log_mask=(True, True))

    def matrix(p):
        c = 1.0 / (p[1] * p[0] + p[0] ** 2)
        return np.array([[0.0, c], [-c, 0.0]])

    form = SymplecticForm(2, matrix, domain)
    h1 = ScalarField(2, lambda p: np.log(p[0] + p[1]),
                     lambda p: np.array([1.0, 1.0]) / (p[0] + p[1]), "h1")
    h2 = ScalarField(2, lambda p: np.log(p[0] / (p[0] + p[1])),
                     lambda p: np.array([1.0 / p[0] - 1.0 / (p[0] + p[1]),
                                         -1.0 / (p[0] + p[1])]), "h2")
    charges = np.array([[0.0, -1.0], [1.0, 0.0]])
    ham = HamiltonianStructure(form, (M1, M2), (h1, h2),
                               np.zeros((2, 2, 2)), charges)

    def diff_integral(h: ScalarField, name: str) -> FirstIntegral:
        def func(x):
            pts = as_coords(x).reshape(2, 2)
            return h(pts[0]) - h(pts[1])

        def grad(x):
            pts = as_coords(x).reshape(2, 2)
            return np.concatenate([h.gradient(pts[0]), -h.gradient(pts[1])])

        return FirstIntegral(name, 2, ScalarField(4, func, grad, name))

    integrals = (diff_integral(h1, "F1"), diff_integral(h2, "F2"))
    return CatalogEntry(
        name="corona", sys=sys, m=1, ham=ham, integrals=integrals,
        rule=corona_rule(),
        params={"A": A, "B": B, "noise": noise},
        defaults={"initial": (2.0, 3.0),
                  "particulars": ((1.0, 1.0),),
                  "integral_copies": ((1.0, 1.0), (2.0, 3.0))},
    )


# ---------------------------------------------------------------------------
# Lotka-Volterra systems
# ---------------------------------------------------------------------------

def _lv_fields() -> tuple[VectorField, ...]:
    Z1 = VectorField(2, lambda p: np.array([p[0], 0.0]),
                     lambda p: np.array([[1.0, 0.0], [0.0, 0.0]]))
    Z2 = VectorField(2, lambda p: np.array([0.0, p[1]]),
                     lambda p: np.array([[0.0, 0.0], [0.0, 1.0]]))
    Z3 = VectorField(2, lambda p: np.array([p[0] * p[1], 0.0]),
                     lambda p: np.array([[p[1], p[0]], [0.0, 0.0]]))
    return Z1, Z2, Z3


def lv_diffusion(b1: Coefficient = 1.0, a1: Coefficient = 0.5,
                 sigma1: Coefficient = 0.1, b2: float = 0.2,
                 sigma2: float = 0.1) -> CatalogEntry:
    """Lotka-Volterra system with diffusion on the positive quadrant:
    ``dN1 = (b1 - a1 N2) N1 dt + sigma1 N1 o dW1``,
    ``dN2 = b2 N2 dt + sigma2 N2 o dW2``.

    VG basis Z1 = N1 d1, Z2 = N2 d2, Z3 = N1 N2 d1 (the only nonzero bracket
    is [Z2, Z3] = Z3); Hamiltonian relative to omega = dN1 ^ dN2 / (N1 N2)
    with h1 = log N2, h2 = -log N1, h3 = N2 and central bracket {h1, h2} = 1.
    The rule needs two particular solutions (m = 2); F2 lives on three copies.
    """
    Z1, Z2, Z3 = _lv_fields()
    c = np.zeros((3, 3, 3))
    c[1, 2, 2] = 1.0
    b1f, a1f, s1f = as_coeff(b1), as_coeff(a1), as_coeff(sigma1)
    b2v, s2v = float(b2), float(sigma2)

    def coeffs(B):
        return np.array([[b1f(B), b2v, -a1f(B)],
                         [s1f(B), 0.0, 0.0],
                         [0.0, s2v, 0.0]])

    domain = Domain.positive_orthant(2)
    sys = LieSystem("lv-diffusion", (Z1, Z2, Z3), _antisym(c), coeffs, 3,
                    domain, log_mask=(True, True))

    def matrix(p):
        c_ = 1.0 / (p[0] * p[1])
        return np.array([[0.0, c_], [-c_, 0.0]])

    form = SymplecticForm(2, matrix, domain)
    h1 = ScalarField(2, lambda p: np.log(p[1]),
                     lambda p: np.array([0.0, 1.0 / p[1]]), "h1")
    h2 = ScalarField(2, lambda p: -np.log(p[0]),
                     lambda p: np.array([-1.0 / p[0], 0.0]), "h2")
    h3 = ScalarField(2, lambda p: p[1], lambda p: np.array([0.0, 1.0]), "h3")
    lh = np.zeros((3, 3, 3))
    lh[1, 2, 2] = -1.0    # {h2, h3} = -h3, mirroring [Z2, Z3] = Z3
    charges = np.zeros((3, 3))
    charges[0, 1] = 1.0
    charges[1, 0] = -1.0
    ham = HamiltonianStructure(form, (Z1, Z2, Z3), (h1, h2, h3),
                               _antisym(lh), charges)

    def F1_func(x):
        pts = as_coords(x).reshape(2, 2)
        return pts[0, 1] / pts[1, 1]

    def F1_grad(x):
        pts = as_coords(x).reshape(2, 2)
        return np.array([0.0, 1.0 / pts[1, 1],
                         0.0, -pts[0, 1] / pts[1, 1] ** 2])

    def F2_func(x):
        pts = as_coords(x).reshape(3, 2)
        (a0, d0), (a1_, d1), (a2, d2) = pts
        return ((d1 - d2) * np.log(a0 / a1_) - (d0 - d1) * np.log(a1_ / a2)) / d2

    def F2_grad(x):
        pts = as_coords(x).reshape(3, 2)
        (a0, d0), (a1_, d1), (a2, d2) = pts
        L01 = np.log(a0 / a1_)
        L12 = np.log(a1_ / a2)
        val = ((d1 - d2) * L01 - (d0 - d1) * L12) / d2
        return np.array([
            (d1 - d2) / (d2 * a0),      # d/d a0
            -L12 / d2,                  # d/d d0
            -(d0 - d2) / (d2 * a1_),    # d/d a1
            (L01 + L12) / d2,           # d/d d1
            (d0 - d1) / (d2 * a2),      # d/d a2
            -L01 / d2 - val / d2,       # d/d d2
        ])

    integrals = (FirstIntegral("F1", 2, ScalarField(4, F1_func, F1_grad, "F1")),
                 FirstIntegral("F2", 3, ScalarField(6, F2_func, F2_grad, "F2")))
    return CatalogEntry(
        name="lv-diffusion", sys=sys, m=2, ham=ham, integrals=integrals,
        rule=lv_rule(),
        params={"b1": b1, "a1": a1, "sigma1": sigma1, "b2": b2, "sigma2": sigma2},
        defaults={"initial": (1.5, 1.2),
                  "particulars": ((2.0, 1.0), (3.0, 2.0)),
                  "integral_copies": ((2.0, 1.0), (3.0, 2.0), (1.0, 0.5))},
    )


def lv_additive(b1: Coefficient = 1.0, b2: Coefficient = 0.2,
                a1: Coefficient = 0.5, sigma2: Coefficient = 0.1) -> CatalogEntry:
    """Lotka-Volterra system with additive noise in the second population:
    ``dN1 = (b1(t) - a1(t) N2) N1 dt``, ``dN2 = b2(t) N2 dt + sigma2(t) dW``.

    The VG algebra gains the translation field d2 (four fields in total); no
    symplectic form makes this system Hamiltonian, and no closed-form rule is
    catalogued, so the entry supports simulation and structure checks only.
    N2 can exit the quadrant (additive noise), which truncates trajectories.
    """
    Z1, Z2, Z3 = _lv_fields()
    Z4 = VectorField(2, lambda p: np.array([0.0, 1.0]),
                     lambda p: np.zeros((2, 2)))
    c = np.zeros((4, 4, 4))
    c[1, 2, 2] = 1.0     # [Z2, Z3] = Z3
    c[1, 3, 3] = -1.0    # [Z2, Z4] = -Z4
    c[2, 3, 0] = -1.0    # [Z3, Z4] = -Z1
    b1f, b2f, a1f, s2f = (as_coeff(b1), as_coeff(b2), as_coeff(a1),
                          as_coeff(sigma2))

    def coeffs(B):
        return np.array([[b1f(B), b2f(B), -a1f(B), 0.0],
                         [0.0, 0.0, 0.0, s2f(B)]])

    sys = LieSystem("lv-additive", (Z1, Z2, Z3, Z4), _antisym(c), coeffs, 2,
                    Domain.positive_orthant(2), log_mask=(True, False))
    return CatalogEntry(
        name="lv-additive", sys=sys, m=2,
        params={"b1": b1, "b2": b2, "a1": a1, "sigma2": sigma2},
        defaults={"initial": (1.0, 1.0)},
    )


# ---------------------------------------------------------------------------
# geometric Brownian motion helper (a Riccati special case, used as an oracle)
# ---------------------------------------------------------------------------

def gbm_system(mu: float, sigma: float) -> LieSystem:
    """Geometric Brownian motion ``dX = mu X dt + sigma X o dB`` as a Riccati system."""
    return riccati(b0=0.0, b1=mu, b2=0.0, bp0=0.0, bp1=sigma, bp2=0.0,
                   name="gbm").sys


def gbm_stratonovich_solution(path: DriverPath, x0: float, mu: float,
                              sigma: float) -> np.ndarray:
    """Exact Stratonovich solution ``x0 exp(mu t + sigma B_t)`` on the path's grid."""
    Bvals = path.values()[0]
    return x0 * np.exp(mu * path.t_grid + sigma * Bvals)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

BUILDERS: dict[str, Callable[..., CatalogEntry]] = {
    "riccati": riccati,
    "oscillator": oscillator,
    "ermakov": ermakov,
    "corona": corona,
    "lv-diffusion": lv_diffusion,
    "lv-additive": lv_additive,
}


def get_entry(name: str, **params) -> CatalogEntry:
    """Build a catalogued entry by name with keyword parameter overrides."""
    if name not in BUILDERS:
        raise UnsupportedError(
            f"unknown system '{name}'; available: {', '.join(sorted(BUILDERS))}")
    return BUILDERS[name](**params)


def all_entries() -> list[CatalogEntry]:
    return [build() for build in BUILDERS.values()]
