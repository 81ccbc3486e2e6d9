"""Exponential (tension) cubic B-spline basis on a uniform grid.

The basis function centered at knot x_m is supported on [x_{m-2}, x_{m+2}]
and is built from hyperbolic segments controlled by a tension parameter
rho > 0.  With z = rho*h it is normalized so that B(x_m) = 1, and as
z -> 0 it degenerates to the ordinary cubic B-spline with B(x_m +- h) = 1/4.

Everything numerically delicate funnels through four scalar kernels

    s1(y) = sinh(y) / y                    -> 1    as y -> 0
    c2(y) = (cosh(y) - 1) / y**2           -> 1/2
    s3(y) = (sinh(y) - y) / y**3           -> 1/6
    d3(y) = (y*cosh(y) - sinh(y)) / y**3   -> 1/3

whose closed forms cancel catastrophically for small arguments.  Below
KERNEL_SERIES_CUTOFF they are summed as convergent Taylor series instead,
which keeps every derived quantity accurate to a few ulp uniformly in y.

The five segment coefficients a1, b1, b2, c1, d1 of the piecewise
representation grow like 1/z**2 and 1/z**3 as z -> 0.  The direct closed
forms for them lose roughly 3*log10(1/z) digits to cancellation, so below
SERIES_THRESHOLD they are computed from the kernel route; the basis records
which route produced them in ``eval_path``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError, NormalizationError

# rho*h below this uses series-route segment coefficients (and tags the basis).
SERIES_THRESHOLD = 1e-2

# Kernel arguments below this are summed by series; above, closed forms are
# already stable.  Both branches agree to ~3e-15 relative at the cutoff.
KERNEL_SERIES_CUTOFF = 0.5

# cosh overflows near 710; nothing sensible lives beyond this anyway.
_MAX_RHO_H = 700.0


def _s1(y: float, series: bool | None = None) -> float:
    """sinh(y)/y, finite and accurate down to y = 0."""
    if series is None:
        series = y < KERNEL_SERIES_CUTOFF
    if not series:
        return math.sinh(y) / y
    y2 = y * y
    term = 1.0
    total = 1.0
    k = 0
    while True:
        term *= y2 / ((2 * k + 2) * (2 * k + 3))
        if total + term == total:
            return total
        total += term
        k += 1


def _c2(y: float, series: bool | None = None) -> float:
    """(cosh(y) - 1)/y**2."""
    if series is None:
        series = y < KERNEL_SERIES_CUTOFF
    if not series:
        half = math.sinh(0.5 * y)
        return 2.0 * half * half / (y * y)
    y2 = y * y
    term = 0.5
    total = 0.5
    k = 0
    while True:
        term *= y2 / ((2 * k + 3) * (2 * k + 4))
        if total + term == total:
            return total
        total += term
        k += 1


def _s3(y: float, series: bool | None = None) -> float:
    """(sinh(y) - y)/y**3."""
    if series is None:
        series = y < KERNEL_SERIES_CUTOFF
    if not series:
        return (math.sinh(y) - y) / (y * y * y)
    y2 = y * y
    term = 1.0 / 6.0
    total = term
    k = 0
    while True:
        term *= y2 / ((2 * k + 4) * (2 * k + 5))
        if total + term == total:
            return total
        total += term
        k += 1


def _d3(y: float, series: bool | None = None) -> float:
    """(y*cosh(y) - sinh(y))/y**3."""
    if series is None:
        series = y < KERNEL_SERIES_CUTOFF
    if not series:
        return (y * math.cosh(y) - math.sinh(y)) / (y * y * y)
    y2 = y * y
    term = 1.0 / 3.0
    total = term
    k = 0
    while True:
        term *= y2 / ((2 * k + 2) * (2 * k + 5))
        if total + term == total:
            return total
        total += term
        k += 1


@dataclass(frozen=True)
class SplineBasis:
    """Immutable bundle of one (rho, h) basis: segment coefficients plus
    cached hyperbolics and the route that produced the coefficients."""

    rho: float
    h: float
    a1: float
    b1: float
    b2: float
    c1: float
    d1: float
    c_h: float  # cosh(rho*h)
    s_h: float  # sinh(rho*h)
    eval_path: str  # "direct" or "series"


@dataclass(frozen=True)
class NodalStencils:
    """Weights expressing nodal U, U', U'' through three consecutive
    spline coefficients:

        U_m   = alpha1*d_{m-1} + alpha2*d_m + alpha1*d_{m+1}
        U'_m  = beta1*d_{m-1}              - beta1*d_{m+1}
        U''_m = gamma1*d_{m-1} + gamma2*d_m + gamma1*d_{m+1}

    with alpha2 = 1, beta1 < 0 and gamma2 = -2*gamma1.
    """

    alpha1: float
    alpha2: float
    beta1: float
    gamma1: float
    gamma2: float


def _coefficients_direct(rho: float, h: float) -> tuple[float, float, float, float, float]:
    # Closed forms, in the algebraically reduced arrangement.  The raw
    # display carries (1 - cosh) factors in numerator and denominator of
    # b1, c1, d1; cancelling them is exact and removes the one rounding
    # amplifier that is not common to all five coefficients, which keeps
    # the partition identity tight right down to the series threshold.
    z = rho * h
    c = math.cosh(z)
    big_d = z * c - math.sinh(z)
    a1 = z * c / big_d
    b1 = -rho * (2.0 * c + 1.0) / (2.0 * big_d)
    b2 = 0.5 * rho / big_d
    c1 = (2.0 * math.exp(-z) + 1.0) / (4.0 * big_d)
    d1 = -(2.0 * math.exp(z) + 1.0) / (4.0 * big_d)
    return a1, b1, b2, c1, d1


def _coefficients_series(rho: float, h: float) -> tuple[float, float, float, float, float]:
    # Same quantities through the stable kernel route.  Uses the exact
    # rearrangements  c1 = (2*exp(-z) + 1)/(4*D),  d1 = -(2*exp(z) + 1)/(4*D)
    # and b1 = -rho*(2*cosh(z) + 1)/(2*D)  with  D = z*cosh(z) - sinh(z),
    # so the only small denominator is D = z**3 * d3(z).
    z = rho * h
    c = math.cosh(z)
    d3 = _d3(z, True)
    denom2 = z * z * d3  # D / z
    denom3 = z * z * z * d3  # D
    a1 = c / denom2
    b1 = -(2.0 * c + 1.0) / (2.0 * h * denom2)
    b2 = 1.0 / (2.0 * h * denom2)
    c1 = (2.0 * math.exp(-z) + 1.0) / (4.0 * denom3)
    d1 = -(2.0 * math.exp(z) + 1.0) / (4.0 * denom3)
    return a1, b1, b2, c1, d1


def make_basis(rho: float, h: float, path: str | None = None) -> SplineBasis:
    """Construct the basis for tension rho > 0 on spacing h > 0.

    The route for the segment coefficients is chosen automatically:
    series below SERIES_THRESHOLD on rho*h, direct above.  ``path`` forces
    one route (used by the cross-validation tests); forcing "direct" far
    below the threshold is allowed to fail, since the closed forms have no
    digits left there.

    Raises InvalidParameterError for non-finite or non-positive inputs and
    NormalizationError if a1 + c1 + d1 fails its partition identity.
    """
    if not (math.isfinite(rho) and rho > 0.0):
        raise InvalidParameterError(f"rho must be finite and positive, got {rho!r}")
    if not (math.isfinite(h) and h > 0.0):
        raise InvalidParameterError(f"h must be finite and positive, got {h!r}")
    z = rho * h
    if z > _MAX_RHO_H:
        raise InvalidParameterError(f"rho*h = {z:g} too large, cosh would overflow")
    if path is None:
        path = "series" if z < SERIES_THRESHOLD else "direct"
    elif path not in ("direct", "series"):
        raise InvalidParameterError(f"path must be 'direct' or 'series', got {path!r}")

    if path == "direct":
        a1, b1, b2, c1, d1 = _coefficients_direct(rho, h)
    else:
        a1, b1, b2, c1, d1 = _coefficients_series(rho, h)

    # Partition identity a1 + c1 + d1 = 1.  The coefficients themselves grow
    # like 1/z**3, so the achievable tolerance scales with their magnitude:
    # one ulp of c1 already exceeds an absolute 1e-14 once z < 0.2 or so.
    total = a1 + c1 + d1
    scale = max(1.0, abs(a1), abs(c1), abs(d1))
    if not abs(total - 1.0) <= 1e-14 * scale:
        raise NormalizationError(
            f"a1 + c1 + d1 = {total!r} for rho = {rho:g}, h = {h:g} ({path} route)"
        )
    return SplineBasis(
        rho=float(rho), h=float(h), a1=a1, b1=b1, b2=b2, c1=c1, d1=d1,
        c_h=math.cosh(z), s_h=math.sinh(z), eval_path=path,
    )


def nodal_stencils(basis: SplineBasis) -> NodalStencils:
    """Nodal value/derivative weights for the given basis.

    On the series route the weights are written as the polynomial-limit
    values times normalized correction ratios; once rho*h is small enough
    that the corrections round away, the weights are bit-identical to
    ``polynomial_limit_stencils(h)``.
    """
    rho, h = basis.rho, basis.h
    z = rho * h
    if basis.eval_path == "series":
        s1 = _s1(z, True)
        c2 = _c2(z, True)
        s3 = _s3(z, True)
        d3 = _d3(z, True)
        alpha1 = 0.25 * (6.0 * s3) / (3.0 * d3)
        beta1 = (-3.0 / (4.0 * h)) * (2.0 * c2) / (3.0 * d3)
        gamma1 = (3.0 / (2.0 * h * h)) * s1 / (3.0 * d3)
    else:
        s1 = _s1(z)
        c2 = _c2(z)
        s3 = _s3(z)
        d3 = _d3(z)
        alpha1 = s3 / (2.0 * d3)
        beta1 = -c2 / (2.0 * h * d3)
        gamma1 = s1 / (2.0 * h * h * d3)
    return NodalStencils(
        alpha1=alpha1, alpha2=1.0, beta1=beta1, gamma1=gamma1, gamma2=-2.0 * gamma1
    )


def polynomial_limit_stencils(h: float) -> NodalStencils:
    """Stencil weights of the plain cubic B-spline (the rho -> 0 limit)."""
    if not (math.isfinite(h) and h > 0.0):
        raise InvalidParameterError(f"h must be finite and positive, got {h!r}")
    gamma1 = 3.0 / (2.0 * h * h)
    return NodalStencils(
        alpha1=0.25, alpha2=1.0, beta1=-3.0 / (4.0 * h),
        gamma1=gamma1, gamma2=-2.0 * gamma1,
    )


def eval_with_derivatives(
    basis: SplineBasis, m: int, x: float, origin: float = 0.0
) -> tuple[float, float, float]:
    """Evaluate (B_m, B_m', B_m'') at x for the spline centered on
    x_m = origin + m*h.

    Exactly zero (all three values) for |x - x_m| >= 2h.  The two segment
    shapes, written with q = |x - x_m|/h and D3 = d3(rho*h):

        inner (q <= 1), y = rho*h*q:
            B   = 1 - q**2 * s1(z)*c2(y)/D3 + q**3 * (2*cosh(z)+1)*s3(y)/(2*D3)
        outer (1 <= q < 2), w = 2 - q, y = rho*h*w:
            B   = w**3 * s3(y) / (2*D3)

    both of which reduce to the familiar cubic B-spline pieces as rho -> 0.
    """
    h = basis.h
    z = basis.rho * h
    t = x - (origin + m * h)
    sign = -1.0 if t < 0.0 else 1.0
    q = abs(t) / h
    if q >= 2.0:
        return 0.0, 0.0, 0.0
    d3 = _d3(z)
    if q >= 1.0:
        w = 2.0 - q
        y = z * w
        s3 = _s3(y)
        c2 = _c2(y)
        s1 = _s1(y)
        b = w * w * w * s3 / (2.0 * d3)
        bp = -w * w * c2 / (2.0 * d3) / h
        bpp = w * s1 / (2.0 * d3) / (h * h)
    else:
        y = z * q
        s1z = _s1(z)
        two_c_plus_1 = 2.0 * basis.c_h + 1.0
        s3 = _s3(y)
        c2 = _c2(y)
        s1 = _s1(y)
        b = 1.0 - q * q * s1z * c2 / d3 + q * q * q * two_c_plus_1 * s3 / (2.0 * d3)
        bp = (two_c_plus_1 * q * q * c2 / (2.0 * d3) - q * s1z * s1 / d3) / h
        bpp = (-s1z * math.cosh(y) / d3 + two_c_plus_1 * q * s1 / (2.0 * d3)) / (h * h)
    return b, sign * bp, bpp
