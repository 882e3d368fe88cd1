"""Independent reference implementations used only by the tests."""

import cmath
import math
import warnings

import numpy as np
from scipy import integrate

EULER = 0.57721566490153286061


def ei_series_real(x: float) -> float:
    """Ei(x) = gamma_E + ln|x| + sum x^n / (n n!) for real x != 0."""
    terms = []
    term = 1.0
    for n in range(1, 400):
        term *= x / n
        terms.append(term / n)
        if abs(term / n) < 1e-18 * max(1.0, abs(sum(terms))):
            break
    return EULER + math.log(abs(x)) + math.fsum(terms)


def _cquad(f, a, b, **kw):
    with warnings.catch_warnings():
        # epsrel=1e-13 sits at the rounding floor; quad says so but the result is fine
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda t: f(t).real, a, b, epsabs=0, epsrel=1e-13, limit=500, **kw)[0]
        im = integrate.quad(lambda t: f(t).imag, a, b, epsabs=0, epsrel=1e-13, limit=500, **kw)[0]
    return complex(re, im)


def ei_quadrature(z: complex) -> complex:
    """Ei(z) = -E1(-z) + i pi sgn(Im z), with E1(w) = e^{-w} int_0^inf e^{-t}/(t + w) dt.

    The horizontal ray from w never crosses the cut of E1 for Im w != 0 or w > 0.
    """
    z = complex(z)
    sgn = (z.imag > 0) - (z.imag < 0)
    if z.imag == 0 and z.real > 0:
        # principal value at t = z via the Cauchy weight on [0, 2z], plus the tail
        x = z.real
        pv = integrate.quad(lambda t: math.exp(-t), 0, 2 * x, weight="cauchy", wvar=x,
                            epsabs=0, epsrel=1e-13, limit=500)[0]
        tail = integrate.quad(lambda t: math.exp(-t) / (t - x), 2 * x, np.inf,
                              epsabs=0, epsrel=1e-13, limit=500)[0]
        return complex(-math.exp(x) * (pv + tail))
    points = [z.real] if z.real > 0 else None
    f = lambda t: cmath.exp(-t) / (t - z)  # noqa: E731
    hi = max(60.0, 2 * abs(z))
    integral = _cquad(f, 0, hi, points=points) + _cquad(f, hi, np.inf)
    return -cmath.exp(z) * integral + 1j * math.pi * sgn



def delay_integrals_quadrature(omega_sq: float, gamma: float, ell: float, power: int) -> complex:
    """int_0^inf kappa^power (2 gamma/ell) e^{i kappa ell} / D^2 dkappa with D = omega^2 - kappa^2 - 2 i gamma kappa.

    The Fourier factor is handled by QUADPACK's cosine and sine weights.
    """
    def f(k):
        D = omega_sq - k * k - 2j * gamma * k
        return k**power * (2 * gamma / ell) / (D * D)

    def fourier(part, weight):
        with warnings.catch_warnings():
            # QAWF reports harmless cycle-level warnings on the 1/kappa^2 tail
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return integrate.quad(part, 0, np.inf, weight=weight, wvar=ell,
                                  epsabs=1e-15, limlst=200)[0]

    fr_cos = fourier(lambda k: f(k).real, "cos")
    fr_sin = fourier(lambda k: f(k).real, "sin")
    fi_cos = fourier(lambda k: f(k).imag, "cos")
    fi_sin = fourier(lambda k: f(k).imag, "sin")
    return complex(fr_cos - fi_sin, fr_sin + fi_cos)


def direct_integral_quadrature(omega_sq: float, gamma: float) -> complex:
    """int_0^inf dkappa / D(kappa)."""
    def f(k):
        return 1.0 / (omega_sq - k * k - 2j * gamma * k)

    w = math.sqrt(omega_sq)
    re = sum(integrate.quad(lambda k: f(k).real, a, b, epsabs=0, epsrel=1e-13, limit=500)[0]
             for a, b in ((0, w), (w, np.inf)))
    im = sum(integrate.quad(lambda k: f(k).imag, a, b, epsabs=0, epsrel=1e-13, limit=500)[0]
             for a, b in ((0, w), (w, np.inf)))
    return complex(re, im)
