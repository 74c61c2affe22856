"""Exact integer and rational arithmetic for the moduli components of
equivariant minimal surfaces.

Non-holomorphic components are indexed by genus g and the degrees (d1, d2) of
the anti-complex and complex divisors, admissible when

    2 d1 + d2 < 6 (g - 1)   and   d1 + 2 d2 < 6 (g - 1).

Holomorphic components are indexed by (g, sign, b, l) with

    3 (g - 1) + b/2 < l < 6 (g - 1) - b,   0 <= b < 2 (g - 1).

Toledo invariants live in (2/3) Z with |tau| <= 2g - 2 and are kept as exact
fractions throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InadmissibleComponentError


@dataclass(frozen=True)
class NonHolComponent:
    g: int
    d1: int
    d2: int

    def __post_init__(self):
        if self.g < 2:
            raise InadmissibleComponentError("genus must be >= 2")
        if self.d1 < 0 or self.d2 < 0:
            raise InadmissibleComponentError("divisor degrees must be >= 0")
        bound = 6 * (self.g - 1)
        if not (2 * self.d1 + self.d2 < bound and self.d1 + 2 * self.d2 < bound):
            raise InadmissibleComponentError(
                f"(d1, d2) = ({self.d1}, {self.d2}) violates the stability inequalities"
            )


@dataclass(frozen=True)
class HolComponent:
    g: int
    sign: str  # "+" (holomorphic) | "-" (anti-holomorphic)
    b: int
    l: int

    def __post_init__(self):
        if self.g < 2:
            raise InadmissibleComponentError("genus must be >= 2")
        if self.sign not in ("+", "-"):
            raise InadmissibleComponentError("sign must be '+' or '-'")
        if not (0 <= self.b < 2 * (self.g - 1)):
            raise InadmissibleComponentError(f"branch degree b = {self.b} out of range")
        if not (Fraction(3 * (self.g - 1)) + Fraction(self.b, 2) < self.l < 6 * (self.g - 1) - self.b):
            raise InadmissibleComponentError(
                f"(b, l) = ({self.b}, {self.l}) violates the admissibility inequalities"
            )


@dataclass(frozen=True)
class ComponentReport:
    toledo: Fraction
    dim: int
    fiber_rank: int
    hodge_length: int
    euler_normal: int | None = None  # non-holomorphic components only
    hitchin_critical_coeff: int | None = None  # critical level as a multiple of pi

    def __post_init__(self):
        if (3 * self.toledo) % 2 != 0:
            raise InadmissibleComponentError("toledo must lie in (2/3) Z")

    @property
    def hitchin_critical_level(self):
        if self.hitchin_critical_coeff is None:
            return None
        return self.hitchin_critical_coeff * math.pi


def enumerate_nonhol(g):
    """All admissible (d1, d2) pairs in lexicographic order."""
    if g < 2:
        raise InadmissibleComponentError("genus must be >= 2")
    bound = 6 * (g - 1)
    out = []
    for d1 in range(bound):
        if 2 * d1 >= bound:
            break
        for d2 in range(bound):
            if 2 * d1 + d2 < bound and d1 + 2 * d2 < bound:
                out.append(NonHolComponent(g, d1, d2))
    return out


def nonhol_invariants(c):
    """Numerical invariants of a non-holomorphic component."""
    tau = Fraction(2, 3) * (c.d2 - c.d1)
    report = ComponentReport(
        toledo=tau,
        dim=8 * c.g - 8,
        fiber_rank=5 * c.g - 5 - c.d1 - c.d2,
        hodge_length=3,
        euler_normal=2 * (c.g - 1) - c.d1 - c.d2,
        hitchin_critical_coeff=4 * (c.g - 1) - c.d1 - c.d2,
    )
    _check_toledo_bound(report.toledo, c.g)
    return report


def enumerate_hol(g, sign="+"):
    """All admissible (b, l) pairs for one orientation, lexicographic."""
    if g < 2:
        raise InadmissibleComponentError("genus must be >= 2")
    out = []
    for b in range(2 * (g - 1)):
        lo = Fraction(3 * (g - 1)) + Fraction(b, 2)
        l_min = int(lo) + 1  # smallest integer strictly above the bound
        for l in range(l_min, 6 * (g - 1) - b):
            out.append(HolComponent(g, sign, b, l))
    return out


def hol_invariants(c):
    """Numerical invariants of a holomorphic (+) or anti-holomorphic (-) component."""
    tau = Fraction(2, 3) * (6 * c.g - 6 - c.b - c.l)
    if c.sign == "-":
        tau = -tau
    report = ComponentReport(
        toledo=tau,
        dim=3 * (c.g - 1) + c.l + 1,
        fiber_rank=c.l + 1 - c.b - c.g,
        hodge_length=2,
    )
    _check_toledo_bound(report.toledo, c.g)
    return report


def conjugate(c):
    """Orientation swap of a holomorphic component (negates the Toledo invariant)."""
    return HolComponent(c.g, "-" if c.sign == "+" else "+", c.b, c.l)


def reducible_family(g):
    """Reducible limits through P(U(1,1) x U(1)): even branch degree b below
    2(g-1) with integer Toledo invariant 2g - 2 - b."""
    if g < 2:
        raise InadmissibleComponentError("genus must be >= 2")
    return [{"b": b, "toledo": 2 * g - 2 - b} for b in range(0, 2 * (g - 1), 2)]


def hitchin_from_area(area):
    """Energy-level label for conformal data: the Hitchin function equals the
    induced area, so this is the identity on nonnegative reals."""
    if area < 0.0:
        raise ValueError("area must be >= 0")
    return float(area)


def _check_toledo_bound(tau, g):
    if abs(tau) > 2 * g - 2:
        raise InadmissibleComponentError(f"|toledo| = {abs(tau)} exceeds 2g - 2")
