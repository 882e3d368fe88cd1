"""Complex special functions: exponential integral, Lambert W, arccot.

Scalars only; complex values are plain Python ``complex``.
"""

from __future__ import annotations

import cmath
import math

from .errors import DomainError, NoConvergenceError

EULER_GAMMA = 0.57721566490153286061
PI = math.pi

# |z| beyond which the asymptotic series is used; the optimally truncated
# remainder is ~exp(-|z|), far below double precision.
_ASYMPTOTIC_RADIUS = 40.0
# Power series is used where |z| - Re z stays below this bound; the relative
# cancellation error is ~eps * exp(|z| - Re z).
_SERIES_SPREAD = 10.0


def arccot(x: float) -> float:
    """Inverse cotangent with range (0, pi), continuous through x = 0."""
    return 0.5 * PI - math.atan(x)


def _ei_series(z: complex) -> complex:
    total = 0j
    term = 1 + 0j
    n = 1
    while True:
        term *= z / n
        inc = term / n
        total += inc
        if abs(inc) <= 1e-17 * abs(total) or n > 500:
            break
        n += 1
    if z.imag == 0.0:
        # principal value on the real axis
        log_z = complex(math.log(abs(z.real)), 0.0)
    else:
        log_z = cmath.log(z)
    return EULER_GAMMA + log_z + total


def _asymptotic_sum(z: complex) -> complex:
    """(1/z) * sum_k k!/z^k, optimally truncated. Equals e^{-z} (Ei(z) - i*pi*sgn Im z)."""
    total = 1 + 0j
    term = 1 + 0j
    prev = math.inf
    for k in range(1, 200):
        term *= k / z
        size = abs(term)
        if size > prev:
            break
        total += term
        if size < 1e-17 * abs(total):
            break
        prev = size
    return total / z


def _e1_continued_fraction_scaled(w: complex, max_iter: int = 5000) -> complex:
    """e^w * E1(w) from the modified Lentz evaluation of the E1 continued fraction."""
    tiny = 1e-300
    b = w + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise NoConvergenceError(f"E1 continued fraction did not converge at w={w}")


def exp_integral_ei(z: complex | float) -> complex:
    """Exponential integral Ei(z) = -PV int_{-z}^inf e^{-s}/s ds.

    Branch cut along the negative real axis. On the cut itself the real
    principal value is returned, so for real ``z`` the result agrees with
    the usual real Ei.

    Raises
    ------
    DomainError
        At ``z == 0`` (logarithmic singularity).
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"Ei argument must be finite, got {z}")
    if z == 0:
        raise DomainError("Ei has a logarithmic singularity at z = 0")
    sgn = (z.imag > 0) - (z.imag < 0)
    r = abs(z)
    if r > _ASYMPTOTIC_RADIUS:
        return cmath.exp(z) * _asymptotic_sum(z) + 1j * PI * sgn
    if r - z.real <= _SERIES_SPREAD:
        return _ei_series(z)
    # -z lies well inside the right half plane; E1(-z) converges there
    return -cmath.exp(z) * _e1_continued_fraction_scaled(-z) + 1j * PI * sgn


def exp_e1_scaled(w: complex | float) -> complex:
    """Return e^w E1(w) on the principal branch, without overflow for large Re w.

    Closed-form moment integrals need ``e^{-z} (pi -/+ i Ei(z))`` at
    ``z = -w`` or its conjugate; algebraically that is ``+/- i e^w E1(w)``,
    and evaluating it this way avoids cancelling two terms of size
    ``pi * e^{Re w}``.
    """
    w = complex(w)
    if w == 0:
        raise DomainError("E1 has a logarithmic singularity at w = 0")
    r = abs(w)
    if r > _ASYMPTOTIC_RADIUS:
        return -_asymptotic_sum(-w)
    if r + w.real <= _SERIES_SPREAD:
        # E1(w) = -Ei(-w) - i*pi*sgn(Im w); principal log puts the cut at w < 0 from above
        total = 0j
        term = 1 + 0j
        for n in range(1, 500):
            term *= -w / n
            inc = term / n
            total += inc
            if abs(inc) <= 1e-17 * abs(total):
                break
        e1 = -EULER_GAMMA - cmath.log(w) - total
        return cmath.exp(w) * e1
    return _e1_continued_fraction_scaled(w)


def _lambert_seed(branch: int, z: complex) -> complex:
    branch_point_gap = 2.0 * (math.e * z + 1.0)
    p = cmath.sqrt(branch_point_gap)
    if branch == 0:
        if abs(z) < 0.3:
            return z * (1 - z + 1.5 * z * z)
        if abs(z + 1 / math.e) < 0.3:
            return -1 + p - p * p / 3 + 11 / 72 * p**3
        lz = cmath.log(z)
        return lz - cmath.log(lz) if abs(z) > 3 else cmath.log(1 + z)
    if branch == -1:
        if abs(z + 1 / math.e) < 0.3 and z.imag >= 0:
            return -1 - p - p * p / 3 - 11 / 72 * p**3
    lz = cmath.log(z) + 2j * PI * branch
    return lz - cmath.log(lz)


def lambert_w(branch: int, z: complex | float, *, real: bool = False,
              max_iter: int = 100) -> complex | float:
    """Branch ``branch`` of the Lambert W function, w * exp(w) = z.

    Halley iteration from a series or asymptotic seed. Branch 0 is the
    principal branch; branch -1 is real on [-1/e, 0). Other integer branches
    use the asymptotic seed and follow the usual branch numbering.

    With ``real=True`` the result is returned as a float and a
    :class:`DomainError` is raised when z is outside the branch's real domain.
    """
    branch = int(branch)
    zc = complex(z)
    if real:
        if zc.imag != 0:
            raise DomainError("real Lambert W requested for a complex argument")
        x = zc.real
        if branch == 0 and x < -1 / math.e:
            raise DomainError(f"W_0 is not real for z={x} < -1/e")
        if branch == -1 and not (-1 / math.e <= x < 0):
            raise DomainError(f"W_-1 is real only on [-1/e, 0), got z={x}")
        if branch not in (0, -1):
            raise DomainError("only branches 0 and -1 take real values")
    if zc == 0:
        if branch == 0:
            return 0.0 if real else 0j
        raise DomainError("W_k(0) is singular for k != 0")
    if zc == -1 / math.e and branch in (0, -1):
        return -1.0 if real else -1 + 0j

    w = _lambert_seed(branch, zc)
    if real:
        w = complex(w.real, 0.0)
    for _ in range(max_iter):
        ew = cmath.exp(w)
        f = w * ew - zc
        wp1 = w + 1
        if wp1 == 0:
            w += 1e-8
            continue
        denom = ew * wp1 - (w + 2) * f / (2 * wp1)
        step = f / denom
        w -= step
        if abs(step) <= 1e-15 * (1 + abs(w)):
            break
        # near the branch point the iterate can cycle at rounding level
        if abs(f) <= 4e-16 * abs(zc) and abs(step) <= 1e-12 * (1 + abs(w)):
            break
    else:
        raise NoConvergenceError(f"Lambert W branch {branch} did not converge at z={z}")
    # polish with one Newton step to tighten the residual near the branch point
    ew = cmath.exp(w)
    if w + 1 != 0:
        w -= (w * ew - zc) / (ew * (w + 1))
    if real:
        return w.real
    return w
