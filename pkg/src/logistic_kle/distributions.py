"""Initial-condition laws and coordinate laws.

The initial proportion P0 lives on a truncated support [p01, p02] inside
(0,1); two families are supported, a truncated Beta and a truncated
exponential.  The Karhunen-Loeve coordinates xi_j follow either a standard
Gaussian or the symmetric uniform on (-sqrt(3), sqrt(3)) -- both mean 0,
variance 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import betainc, betaincinv, ndtri

__all__ = [
    "InitialLaw",
    "XiLaw",
    "truncated_beta",
    "truncated_exponential",
    "initial_pdf",
    "initial_sample",
    "xi_pdf",
    "STANDARD_GAUSSIAN",
    "UNIFORM_SYM",
]

_SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class InitialLaw:
    """Absolutely continuous law of P0, truncated and renormalized to
    [p01, p02] with 0 < p01 < p02 < 1.

    ``kind`` is ``"beta"`` (params = (alpha, beta)) or ``"exponential"``
    (params = (lam,)).  ``norm_const`` is the integral of the un-normalized
    kernel over the truncated support.
    """

    kind: str
    params: tuple
    p01: float
    p02: float
    norm_const: float = field(repr=False)

    def _kernel(self, p):
        if self.kind == "beta":
            a, b = self.params
            return p ** (a - 1.0) * (1.0 - p) ** (b - 1.0)
        lam, = self.params
        return lam * np.exp(-lam * p)

    def pdf(self, p):
        """Density at ``p`` (scalar or array); zero outside [p01, p02]."""
        p = np.asarray(p, dtype=float)
        inside = (p >= self.p01) & (p <= self.p02)
        safe = np.where(inside, p, 0.5 * (self.p01 + self.p02))
        vals = self._kernel(safe) / self.norm_const
        out = np.where(inside, vals, 0.0)
        return out if out.ndim else float(out)

    def cdf(self, p):
        """P[P0 <= p], vectorized; both kinds have closed forms (the Beta
        one through the regularized incomplete beta function)."""
        p = np.asarray(p, dtype=float)
        x = np.clip(p, self.p01, self.p02)
        if self.kind == "exponential":
            lam, = self.params
            c = (np.exp(-lam * self.p01) - np.exp(-lam * x)) / self.norm_const
        else:
            a, b = self.params
            i01 = betainc(a, b, self.p01)
            c = (betainc(a, b, x) - i01) / (betainc(a, b, self.p02) - i01)
        c = np.clip(c, 0.0, 1.0)
        return c if c.ndim else float(c)

    def cdf_quad(self, p):
        """Scalar CDF by adaptive quadrature of the density (reference path)."""
        p = float(p)
        if p <= self.p01:
            return 0.0
        if p >= self.p02:
            return 1.0
        val, _ = quad(self._kernel, self.p01, p, epsabs=1e-14, epsrel=1e-13)
        return min(max(val / self.norm_const, 0.0), 1.0)

    def ppf(self, u):
        """Inverse CDF, vectorized over ``u`` (closed form for both kinds)."""
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        if np.any((u <= 0.0) | (u >= 1.0)):
            raise ValueError("u must lie strictly inside (0, 1)")
        if self.kind == "exponential":
            lam, = self.params
            out = -np.log(np.exp(-lam * self.p01) - u * self.norm_const) / lam
        else:
            a, b = self.params
            i01 = betainc(a, b, self.p01)
            i02 = betainc(a, b, self.p02)
            out = betaincinv(a, b, i01 + u * (i02 - i01))
        out = np.clip(out, self.p01, self.p02)
        return float(out) if scalar else out

    def sample(self, rng, size=None):
        return self.ppf(rng.uniform(size=size) if size is not None else rng.uniform())

    def moments(self):
        """(mean, variance) by adaptive quadrature of p^k * pdf."""
        m1, _ = quad(lambda p: p * self.pdf(p), self.p01, self.p02,
                     epsabs=1e-13, epsrel=1e-12)
        m2, _ = quad(lambda p: p * p * self.pdf(p), self.p01, self.p02,
                     epsabs=1e-13, epsrel=1e-12)
        return m1, m2 - m1 * m1


def _check_support(p01, p02):
    if not (0.0 < p01 < p02 < 1.0):
        raise ValueError(f"support [{p01}, {p02}] must satisfy 0 < p01 < p02 < 1")


def truncated_beta(alpha, beta, p01=0.1, p02=0.9):
    """Beta(alpha, beta) kernel truncated and renormalized to [p01, p02].

    The normalization constant is computed by adaptive quadrature of the
    un-normalized kernel (no incomplete-beta special functions needed).
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    _check_support(p01, p02)
    kern = lambda p: p ** (alpha - 1.0) * (1.0 - p) ** (beta - 1.0)
    norm, _ = quad(kern, p01, p02, epsabs=1e-15, epsrel=1e-13)
    return InitialLaw("beta", (float(alpha), float(beta)), float(p01), float(p02), norm)


def truncated_exponential(lam, p01=0.1, p02=0.9):
    """Exponential(rate lam) truncated and renormalized to [p01, p02]."""
    if lam <= 0:
        raise ValueError("rate lam must be positive")
    _check_support(p01, p02)
    norm = np.exp(-lam * p01) - np.exp(-lam * p02)
    return InitialLaw("exponential", (float(lam),), float(p01), float(p02), norm)


@dataclass(frozen=True)
class XiLaw:
    """Law of one KLE coordinate: 'gaussian' (standard normal) or 'uniform'
    (uniform on (-sqrt(3), sqrt(3)))."""

    kind: str

    @property
    def support(self):
        if self.kind == "gaussian":
            return (-np.inf, np.inf)
        return (-_SQRT3, _SQRT3)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            out = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
        else:
            out = np.where(np.abs(x) < _SQRT3, 1.0 / (2.0 * _SQRT3), 0.0)
        return out if out.ndim else float(out)

    def from_uniform(self, u):
        """Map U(0,1) deviates to this law (deterministic transform)."""
        if self.kind == "gaussian":
            return ndtri(u)
        return _SQRT3 * (2.0 * np.asarray(u) - 1.0)

    def sample(self, rng, size=None):
        return self.from_uniform(rng.uniform(size=size))


STANDARD_GAUSSIAN = XiLaw("gaussian")
UNIFORM_SYM = XiLaw("uniform")


def initial_pdf(law: InitialLaw, p):
    """Density of the initial law at ``p`` (0 outside the support)."""
    return law.pdf(p)


def initial_sample(law: InitialLaw, u):
    """Inverse-CDF sample from a U(0,1) deviate ``u`` (scalar or array)."""
    return law.ppf(u)


def xi_pdf(law: XiLaw, x):
    return law.pdf(x)
