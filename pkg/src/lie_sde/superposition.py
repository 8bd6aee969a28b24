"""Superposition rules: closed-form evaluation, constant solving, and
pathwise verification against shared-noise simulations.

The verification protocol integrates the m particular solutions AND the
target solution on the SAME driver path, solves for the constants once at
t = 0, and measures the sup-norm gap between the rule's reconstruction and
the simulated target over the common valid window.  Constants are never
re-fitted along the path; the whole point is that one constant vector works
for all times.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Callable

import numpy as np

from .core import as_coords, brownian_family, brownian_path
from .errors import (DomainError, ShapeError, SingularRuleError,
                     UnsupportedError, VerificationInconclusive)
from .integrate import integrate_stratonovich

#: Relative threshold below which a rule denominator counts as vanished.
GUARD_REL = 1e-12


@dataclass(frozen=True)
class SuperpositionRule:
    """Algebraic map from m particular solutions and constants to the general solution.

    ``phi(constants, states)`` takes the constants vector and an ``(m, n)``
    stack of particular states; ``solve_constants(target, states)`` inverts it
    at a single time; ``singular_guard(states, constants)`` raises
    :class:`SingularRuleError` on degenerate inputs.  The map itself never
    sees the driver or the noise realisation.
    """

    name: str
    m: int
    const_dim: int
    phi: Callable[[np.ndarray, np.ndarray], np.ndarray]
    solve_constants: Callable[[np.ndarray, np.ndarray], np.ndarray]
    singular_guard: Callable[[np.ndarray, np.ndarray | None], None]


def _rel_guard(value: float, scale: float, what: str) -> None:
    if abs(value) <= GUARD_REL * max(scale, 1e-300):
        raise SingularRuleError(f"{what} vanished (value {value:.3e}, scale {scale:.3e})")


# ---------------------------------------------------------------------------
# stochastic Riccati rule (Mobius-type, three particular solutions)
# ---------------------------------------------------------------------------

def eval_riccati_rule(g1: float, g2: float, g3: float, z: float) -> float:
    """General Riccati solution from three particular solutions and one constant.

    ``(g3 (g1 - g2) + z g1 (g3 - g2)) / ((g1 - g2) + z (g3 - g2))``
    """
    scale = 1.0 + max(abs(g1), abs(g2), abs(g3))
    for a, b, lbl in ((g1, g2, "g1 - g2"), (g1, g3, "g1 - g3"), (g2, g3, "g2 - g3")):
        _rel_guard(a - b, scale, f"particular separation {lbl}")
    den = (g1 - g2) + z * (g3 - g2)
    _rel_guard(den, max(abs(g1 - g2), abs(z * (g3 - g2))), "rule denominator")
    return (g3 * (g1 - g2) + z * g1 * (g3 - g2)) / den


def _riccati_solve_z(g0: float, g1: float, g2: float, g3: float) -> float:
    scale = 1.0 + max(abs(g0), abs(g1), abs(g2), abs(g3))
    _rel_guard(g0 - g1, scale, "target separation g0 - g1")
    _rel_guard(g3 - g2, scale, "particular separation g3 - g2")
    return (g3 - g0) * (g1 - g2) / ((g0 - g1) * (g3 - g2))


def riccati_rule() -> SuperpositionRule:
    def phi(consts, states):
        states = np.asarray(states, float).reshape(3)
        return np.array([eval_riccati_rule(states[0], states[1], states[2],
                                           float(consts[0]))])

    def solve(target, states):
        states = np.asarray(states, float).reshape(3)
        return np.array([_riccati_solve_z(float(as_coords(target)[0]), *states)])

    def guard(states, consts=None):
        states = np.asarray(states, float).reshape(3)
        scale = 1.0 + float(np.max(np.abs(states)))
        for a in range(3):
            for b in range(a + 1, 3):
                _rel_guard(states[a] - states[b], scale, "particular separation")
        if consts is not None:
            den = (states[0] - states[1]) + float(consts[0]) * (states[2] - states[1])
            _rel_guard(den, max(abs(states[0] - states[1]),
                                abs(float(consts[0]) * (states[2] - states[1]))),
                       "rule denominator")

    return SuperpositionRule("riccati", 3, 1, phi, solve, guard)


# ---------------------------------------------------------------------------
# epidemic-model rule (one particular solution, two constants)
# ---------------------------------------------------------------------------

def eval_corona_rule(H1: float, R1: float, k1: float, k2: float) -> tuple[float, float]:
    """``H0 = k1 k2 H1``, ``R0 = k1 (H1 + R1) - k1 k2 H1``; output must stay positive."""
    if min(H1, R1, k1, k2) <= 0.0:
        raise DomainError("rule inputs must be positive")
    H0 = k1 * k2 * H1
    R0 = k1 * (H1 + R1) - k1 * k2 * H1
    if H0 <= 0.0 or R0 <= 0.0:
        raise DomainError(f"constants map outside the positive quadrant: ({H0}, {R0})")
    return H0, R0


def corona_rule() -> SuperpositionRule:
    def phi(consts, states):
        (H1, R1), = np.asarray(states, float).reshape(1, 2)
        return np.array(eval_corona_rule(H1, R1, float(consts[0]), float(consts[1])))

    def solve(target, states):
        H0, R0 = as_coords(target)
        (H1, R1), = np.asarray(states, float).reshape(1, 2)
        if min(H0, R0, H1, R1) <= 0.0:
            raise DomainError("states must be positive")
        k1 = (H0 + R0) / (H1 + R1)
        k2 = H0 * (H1 + R1) / (H1 * (H0 + R0))
        return np.array([k1, k2])

    def guard(states, consts=None):
        states = np.asarray(states, float).reshape(1, 2)
        if np.min(states) <= 0.0:
            raise SingularRuleError("particular solution left the positive quadrant")

    return SuperpositionRule("corona", 1, 2, phi, solve, guard)


# ---------------------------------------------------------------------------
# Lotka-Volterra diffusion rule (two particular solutions, two constants)
# ---------------------------------------------------------------------------

def eval_lv_rule(copy1, copy2, xi1: float, xi2: float) -> tuple[float, float]:
    """Population rule: ``N2 = xi1 (N2)_1`` and the power-law expression for ``N1``."""
    n11, n21 = as_coords(copy1)
    n12, n22 = as_coords(copy2)
    if min(n11, n21, n12, n22, xi1, xi2) <= 0.0:
        raise DomainError("rule inputs must be positive")
    _rel_guard(n21 - n22, max(n21, n22), "second-population separation")
    expo = (xi1 - 1.0) * n21 / (n21 - n22)
    N2 = xi1 * n21
    N1 = xi2 ** (n22 / (n21 - n22)) * n11 * (n11 / n12) ** expo
    return float(N1), float(N2)


def _lv_F2(p0, p1, p2) -> float:
    (a0, b0), (a1, b1), (a2, b2) = p0, p1, p2
    return ((b1 - b2) * np.log(a0 / a1) - (b0 - b1) * np.log(a1 / a2)) / b2


def lv_rule() -> SuperpositionRule:
    def phi(consts, states):
        states = np.asarray(states, float).reshape(2, 2)
        return np.array(eval_lv_rule(states[0], states[1],
                                     float(consts[0]), float(consts[1])))

    def solve(target, states):
        target = as_coords(target)
        states = np.asarray(states, float).reshape(2, 2)
        if np.min(states) <= 0.0 or np.min(target) <= 0.0:
            raise DomainError("states must be positive")
        _rel_guard(states[0, 1] - states[1, 1], max(states[0, 1], states[1, 1]),
                   "second-population separation")
        xi1 = target[1] / states[0, 1]
        # invert the power formula through logarithms (all factors positive)
        xi2 = np.exp(_lv_F2(target, states[0], states[1]))
        return np.array([xi1, xi2])

    def guard(states, consts=None):
        states = np.asarray(states, float).reshape(2, 2)
        if np.min(states) <= 0.0:
            raise SingularRuleError("particular solution left the positive quadrant")
        _rel_guard(states[0, 1] - states[1, 1], max(states[0, 1], states[1, 1]),
                   "second-population separation")

    return SuperpositionRule("lv-diffusion", 2, 2, phi, solve, guard)


def solve_constants(entry, target, particulars) -> np.ndarray:
    """Constants k with ``phi(k, particulars) = target`` (closed form per rule)."""
    if entry.rule is None:
        raise UnsupportedError(f"{entry.name} has no superposition rule")
    return entry.rule.solve_constants(target, np.asarray(particulars, float))


# ---------------------------------------------------------------------------
# pathwise verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelResult:
    dt: float
    error: float
    n_compared: int
    n_skipped: int
    window_end: float
    usable: bool


@dataclass(frozen=True)
class PathwiseReport:
    entry: str
    seed: int
    threshold: float
    slack: float
    constants: tuple
    levels: tuple[LevelResult, ...]
    passed: bool
    observed_orders: tuple

    def as_dict(self) -> dict:
        return asdict(self)


def verify_pathwise(entry, target0=None, particulars0=None, seed: int = 0,
                    levels: int = 3, t_end: float = 1.0, base_steps: int = 100,
                    threshold: float = 1e-2, slack: float = 1.2,
                    floor: float = 1e-13) -> PathwiseReport:
    """Pathwise test of the superposition claim on shared noise.

    Per refinement level: integrate the m particular solutions and the target
    from their initial values on the same driver path, reconstruct the target
    through the rule with constants solved at t = 0, and record the relative
    sup-norm error over the common valid window.  PASS requires the per-level
    errors to decrease (within ``slack``) and the finest error to beat
    ``threshold``.  Windows shorter than half the horizon make a level
    unusable; if no level is usable the run is inconclusive.

    Errors below ``floor`` count as converged and are exempt from the
    monotonicity requirement: for the population system the discrete flow in
    log coordinates satisfies the rule identically, so every level sits at
    roundoff and the sequence has no meaningful slope.
    """
    if entry.rule is None:
        raise UnsupportedError(f"{entry.name} has no superposition rule")
    rule = entry.rule
    target0 = as_coords(target0 if target0 is not None else entry.defaults["initial"])
    particulars0 = np.asarray(
        particulars0 if particulars0 is not None else entry.defaults["particulars"],
        dtype=float).reshape(rule.m, entry.sys.dim)
    rule.singular_guard(particulars0, None)
    consts = rule.solve_constants(target0, particulars0)

    family = brownian_family(seed, entry.sys.ell, t_end, base_steps, levels)
    results = []
    for path in family:
        trajs = [integrate_stratonovich(entry.sys, p0, path) for p0 in particulars0]
        target_traj = integrate_stratonovich(entry.sys, target0, path)
        n_common = min(min(tr.n_valid for tr in trajs), target_traj.n_valid)
        window_end = float(path.t_grid[n_common - 1])
        usable = window_end >= t_end / 2.0
        err = 0.0
        skipped = 0
        compared = 0
        for j in range(n_common):
            states_j = np.stack([tr.states[j] for tr in trajs])
            try:
                rule.singular_guard(states_j, consts)
                recon = rule.phi(consts, states_j)
            except (SingularRuleError, DomainError):
                skipped += 1
                continue
            tgt = target_traj.states[j]
            err = max(err, float(np.max(np.abs(recon - tgt))
                                 / (1.0 + np.max(np.abs(tgt)))))
            compared += 1
        if compared == 0:
            usable = False
        results.append(LevelResult(float(path.dt[0]), err, compared, skipped,
                                   window_end, usable))
    usable_levels = [r for r in results if r.usable]
    if not usable_levels:
        raise VerificationInconclusive(
            f"{entry.name}: every level truncated before t={t_end / 2}")
    errs = [r.error for r in usable_levels]
    orders = tuple(float(np.log2(errs[i] / errs[i + 1])) if errs[i + 1] > 0 else None
                   for i in range(len(errs) - 1))
    monotone = all(errs[i + 1] <= slack * errs[i] or errs[i + 1] < floor
                   for i in range(len(errs) - 1))
    passed = monotone and errs[-1] < threshold and len(usable_levels) >= 2
    return PathwiseReport(entry.name, seed, threshold, slack, tuple(map(float, consts)),
                          tuple(results), passed, orders)


# ---------------------------------------------------------------------------
# first integrals along shared-noise trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegralDrift:
    name: str
    copies: int
    initial_value: float
    drift: float
    passed: bool


@dataclass(frozen=True)
class IntegralsReport:
    entry: str
    seed: int
    dt: float
    threshold: float
    window_end: float
    results: tuple[IntegralDrift, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def as_dict(self) -> dict:
        return asdict(self)


def check_first_integrals_along_path(entry, copies0=None, seed: int = 0,
                                     level: int = 0, t_end: float = 1.0,
                                     base_steps: int = 1000,
                                     threshold: float | None = None) -> IntegralsReport:
    """Relative drift of each first integral along shared-noise copy trajectories.

    All copies are integrated on ONE driver path (the diagonal prolongation is
    driven by the same noise), and each integral is evaluated on the first
    ``arity`` copies at every common grid time.  The default threshold scales
    with the step: ``5 * dt``.
    """
    if not entry.integrals:
        raise UnsupportedError(f"{entry.name} has no catalogued first integrals")
    copies0 = np.asarray(
        copies0 if copies0 is not None else entry.defaults["integral_copies"],
        dtype=float).reshape(-1, entry.sys.dim)
    usable = [F for F in entry.integrals if F.copies <= copies0.shape[0]]
    if not usable:
        raise ShapeError(f"{entry.name}: need at least "
                         f"{min(F.copies for F in entry.integrals)} copies")
    steps = base_steps * 2 ** level
    path = brownian_path(seed, entry.sys.ell, t_end, steps)
    dt = t_end / steps
    if threshold is None:
        threshold = 5.0 * dt
    trajs = [integrate_stratonovich(entry.sys, c0, path) for c0 in copies0]
    n_common = min(tr.n_valid for tr in trajs)
    window_end = float(path.t_grid[n_common - 1])
    if window_end < t_end / 2.0:
        raise VerificationInconclusive(
            f"{entry.name}: copies truncated at t={window_end}")
    results = []
    for F in usable:
        stacked0 = np.concatenate([trajs[a].states[0] for a in range(F.copies)])
        f0 = F.func(stacked0)
        worst = 0.0
        for j in range(n_common):
            stacked = np.concatenate([trajs[a].states[j] for a in range(F.copies)])
            worst = max(worst, abs(F.func(stacked) - f0) / (1.0 + abs(f0)))
        results.append(IntegralDrift(F.name, F.copies, float(f0), worst,
                                     worst < threshold))
    return IntegralsReport(entry.name, seed, dt, threshold, window_end,
                           tuple(results))


def check_jacobian_condition(entry, point) -> float:
    """Determinant of the integrals' partials in the copy-0 coordinates.

    ``point`` lives on M^(m+1); each integral is evaluated on its own leading
    copies.  Analytic integral gradients are used when available, central
    finite differences otherwise.
    """
    n = entry.sys.dim
    if len(entry.integrals) != n:
        raise UnsupportedError(
            f"{entry.name}: need exactly n={n} integrals for the Jacobian test")
    pts = np.asarray(point, float).reshape(-1, n)
    rows = []
    for F in entry.integrals:
        if F.copies > pts.shape[0]:
            raise ShapeError(f"point has {pts.shape[0]} copies, {F.name} needs {F.copies}")
        stacked = pts[: F.copies].reshape(-1)
        rows.append(F.func.gradient(stacked)[:n])
    return float(np.linalg.det(np.stack(rows)))
