"""Rate region over the six per-message rates and small LPs on it.

The region is the intersection of the pair cut-set bounds and the two
triple-sum bounds, all of the form (0/1 coefficients) . r <= rhs with r >= 0.
The solver is a dense textbook simplex with Bland's anti-cycling rule; at
6 variables and at most 8 rows, robustness matters and speed does not.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from . import bounds
from .model import ChannelConfig, RateTuple, ValidationError, validate

TOL = 1e-9

# column order everywhere in this module
RATE_ORDER = RateTuple.FIELD_ORDER


@dataclasses.dataclass(frozen=True)
class LinearConstraint:
    coeffs: tuple[float, float, float, float, float, float]  # on (r12, r13, r21, r23, r31, r32)
    rhs: float
    label: str


@dataclasses.dataclass(frozen=True)
class RateRegion:
    """Constraint list; nonnegativity of every rate is implicit."""

    constraints: tuple[LinearConstraint, ...]


@dataclasses.dataclass(frozen=True)
class LpSolution:
    status: str  # optimal | unbounded | infeasible
    optimal_value: float
    optimizer: RateTuple | None
    tight_constraints: tuple[str, ...]


# supports of the constraints this module can generate, as index sets over RATE_ORDER
_PAIR_SUPPORTS = {
    "cutset.out1": (0, 1),  # r12 + r13
    "cutset.in1": (2, 4),   # r21 + r31
    "cutset.out2": (2, 3),  # r21 + r23
    "cutset.in2": (0, 5),   # r12 + r32
    "cutset.out3": (4, 5),  # r31 + r32
    "cutset.in3": (1, 3),   # r13 + r23
}
_LEMMA_SUPPORTS = {
    "lemma1": (2, 4, 5),    # r21 + r31 + r32
    "lemma2": (0, 1, 3),    # r12 + r13 + r23
}


def _unit_constraint(support: tuple[int, ...], rhs: float, label: str) -> LinearConstraint:
    coeffs = [0.0] * 6
    for j in support:
        coeffs[j] = 1.0
    return LinearConstraint(coeffs=tuple(coeffs), rhs=rhs, label=label)


def build_region(cfg: ChannelConfig, include_cutset: bool = True,
                 include_lemma1: bool = True, include_lemma2: bool = True) -> RateRegion:
    """Assemble the inequality description of the rate region.

    Reciprocal in/out duplicates are kept so tight-constraint labels stay
    traceable; at least one family must be included.
    """
    validate(cfg)
    if not (include_cutset or include_lemma1 or include_lemma2):
        raise ValidationError("at least one constraint family must be included")
    cons: list[LinearConstraint] = []
    if include_cutset:
        cs = bounds.cutset_bounds(cfg)
        for name in ("out1", "in1", "out2", "in2", "out3", "in3"):
            label = f"cutset.{name}"
            cons.append(_unit_constraint(_PAIR_SUPPORTS[label], getattr(cs, name), label))
    if include_lemma1:
        cons.append(_unit_constraint(_LEMMA_SUPPORTS["lemma1"], bounds.lemma1_bound(cfg), "lemma1"))
    if include_lemma2:
        cons.append(_unit_constraint(_LEMMA_SUPPORTS["lemma2"], bounds.lemma2_bound(cfg), "lemma2"))
    return RateRegion(constraints=tuple(cons))


def _check_weights(weights) -> np.ndarray:
    w = np.asarray([float(v) for v in weights], dtype=float)
    if w.shape != (6,):
        raise ValidationError(f"expected 6 weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite")
    if np.any(w < 0):
        raise ValidationError("weights must be nonnegative")
    if not np.any(w > 0):
        raise ValidationError("weights must not be all zero")
    return w


def max_weighted_sum(region: RateRegion, weights) -> LpSolution:
    """Maximize weights . r over the region with r >= 0.

    Simplex on the slack-variable tableau.  Every built-in constraint has a
    nonnegative rhs (capacities), so the slack basis is feasible and no
    phase-1 is needed; a negative rhs on a nonnegative-coefficient row is
    reported as infeasible outright.
    """
    w = _check_weights(weights)
    m = len(region.constraints)
    A = np.array([c.coeffs for c in region.constraints], dtype=float).reshape(m, 6)
    b = np.array([c.rhs for c in region.constraints], dtype=float)
    for i in range(m):
        if b[i] < -TOL:
            if np.all(A[i] >= 0):
                return LpSolution(status="infeasible", optimal_value=math.nan,
                                  optimizer=None, tight_constraints=())
            raise ValidationError("negative rhs with mixed-sign coefficients is unsupported")

    n = 6
    tableau = np.hstack([A, np.eye(m), b.reshape(m, 1)])
    basis = list(range(n, n + m))
    red = np.concatenate([-w, np.zeros(m)])  # reduced costs; negative means improving

    while True:
        entering = next((j for j in range(n + m) if red[j] < -TOL), None)
        if entering is None:
            break
        col = tableau[:, entering]
        candidates = [
            (tableau[i, -1] / col[i], basis[i], i) for i in range(m) if col[i] > TOL
        ]
        if not candidates:
            return LpSolution(status="unbounded", optimal_value=math.inf,
                              optimizer=None, tight_constraints=())
        # Bland: min ratio, ties broken by the smallest basic variable index
        _, _, row = min(candidates, key=lambda t: (t[0], t[1]))
        pivot = tableau[row, entering]
        tableau[row] = tableau[row] / pivot
        for i in range(m):
            if i != row and tableau[i, entering] != 0.0:
                tableau[i] = tableau[i] - tableau[i, entering] * tableau[row]
        red = red - red[entering] * tableau[row, :-1]
        basis[row] = entering

    x = np.zeros(n + m)
    for i, j in enumerate(basis):
        x[j] = tableau[i, -1]
    rates = np.where((x[:n] < 0) & (x[:n] > -TOL), 0.0, x[:n])  # rounding guard
    optimizer = RateTuple.from_sequence(rates)
    value = float(w @ rates)
    slack = b - A @ rates
    tight = tuple(c.label for c, s in zip(region.constraints, slack) if abs(s) <= TOL)
    return LpSolution(status="optimal", optimal_value=value,
                      optimizer=optimizer, tight_constraints=tight)


def is_feasible(region: RateRegion, rates: RateTuple, tol: float = TOL) -> bool:
    if tol < 0:
        raise ValidationError("tolerance must be >= 0")
    r = np.asarray(rates.as_tuple(), dtype=float)
    if np.any(r < -tol):
        return False
    for c in region.constraints:
        if float(np.dot(c.coeffs, r)) > c.rhs + tol:
            return False
    return True


def _support_caps(region: RateRegion) -> dict[tuple[int, ...], float]:
    """Min rhs per constraint support; rejects supports this oracle cannot handle."""
    known = set(_PAIR_SUPPORTS.values()) | set(_LEMMA_SUPPORTS.values())
    caps: dict[tuple[int, ...], float] = {}
    for c in region.constraints:
        support = tuple(j for j, v in enumerate(c.coeffs) if v != 0.0)
        if support not in known or any(c.coeffs[j] != 1.0 for j in support):
            raise ValidationError(f"constraint {c.label!r} has an unsupported pattern for the grid oracle")
        caps[support] = min(caps.get(support, math.inf), c.rhs)
    covered = set()
    for support in caps:
        covered.update(support)
    missing = [RATE_ORDER[j] for j in range(6) if j not in covered]
    if missing:
        raise ValidationError(f"region is unbounded: {missing} appear in no constraint")
    return caps


def oracle_max_sum(region: RateRegion, grid_step: float) -> float:
    """Best rate sum over the feasibility grid at resolution grid_step.

    Exactly equals a naive exhaustive search over all six rates on the grid,
    computed by reduction: every supported constraint couples (r13, r23) and
    (r31, r32) only through r12 and r21, and for fixed (r12, r21) the grid
    maximum of a pair with individual caps ca, cb and a joint cap cj is
    min(floor(ca) + floor(cb), floor(cj)), which is attainable on the grid.
    So a 2-D sweep over (r12, r21) reproduces the 6-D search value.
    """
    if not (grid_step > 0):
        raise ValidationError(f"grid_step must be > 0, got {grid_step!r}")
    caps = _support_caps(region)
    s = float(grid_step)

    def rhs(label: str) -> float:
        table = _PAIR_SUPPORTS | _LEMMA_SUPPORTS
        return caps.get(table[label], math.inf)

    b_out1, b_in1 = rhs("cutset.out1"), rhs("cutset.in1")
    b_out2, b_in2 = rhs("cutset.out2"), rhs("cutset.in2")
    b_out3, b_in3 = rhs("cutset.out3"), rhs("cutset.in3")
    l1, l2 = rhs("lemma1"), rhs("lemma2")

    def grid_floor(v):
        return s * np.floor((v + TOL) / s)

    def axis(cap_value: float) -> np.ndarray:
        return s * np.arange(int(np.floor((cap_value + TOL) / s)) + 1)

    a = axis(min(b_out1, b_in2, l2))   # r12 values
    c = axis(min(b_in1, b_out2, l1))   # r21 values
    A = a[:, None]
    C = c[None, :]
    # pair (r13, r23): r13 <= out1 - a, r23 <= out2 - c, sum <= min(in3, l2 - a)
    pair_x = np.minimum(grid_floor(b_out1 - A) + grid_floor(b_out2 - C),
                        grid_floor(np.minimum(b_in3, l2 - A)))
    # pair (r31, r32): r31 <= in1 - c, r32 <= in2 - a, sum <= min(out3, l1 - c)
    pair_y = np.minimum(grid_floor(b_in1 - C) + grid_floor(b_in2 - A),
                        grid_floor(np.minimum(b_out3, l1 - C)))
    total = A + C + pair_x + pair_y
    return float(total.max())


def region_to_json(region: RateRegion) -> str:
    obj = {
        "rate_order": list(RATE_ORDER),
        "constraints": [
            {"label": c.label, "coeffs": list(c.coeffs), "rhs": c.rhs}
            for c in region.constraints
        ],
    }
    return json.dumps(obj, indent=2, sort_keys=True)


def solution_to_json(sol: LpSolution) -> str:
    obj = {
        "status": sol.status,
        "optimal_value": sol.optimal_value,
        "optimizer": None if sol.optimizer is None else dict(
            zip(RATE_ORDER, sol.optimizer.as_tuple())
        ),
        "tight_constraints": list(sol.tight_constraints),
    }
    return json.dumps(obj, indent=2, sort_keys=True)
