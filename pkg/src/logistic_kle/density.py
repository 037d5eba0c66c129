"""First probability density of the truncated logistic solution.

The solution of P' = A(t)(1-P)P with P(t0) = P0 satisfies

    logit(P_t) = logit(P0) + K_N(t, xi),      K_N = m(t) + sum_j H_j(t) xi_j

once A is replaced by its N-term KLE.  Transforming P0 -> P_t pointwise gives
the density of P_t at p as an N-dimensional integral over the coordinate law:

    f1n(p, t) = int f_P0(arg(p, K)) * jac(p, K) f_xi(xi) dxi,

with arg/jac the stable closed forms in ``rvt_kernel``.  Three evaluation
paths are provided:

* ``f1n_eval``      -- tensor-product Gaussian quadrature in N dimensions
                       (works for every coordinate law; the literal formula);
* ``f1n_collapsed`` -- Gaussian coordinates only: K_N(t) is exactly
                       N(m(t), sigma_N(t)^2), so the N-D integral collapses to
                       one dimension;
* ``f1_exact_wiener`` -- the non-truncated reference for the Wiener model,
                       where the time-integral is N(0, t^3/3) exactly.

The collapsed/exact paths default to a convolution-in-logit-space evaluator
(panelled Gauss-Legendre over the initial support) that resolves the
integrand's support kinks and is accurate to machine precision; passing an
explicit Gauss-Hermite rule switches to the plain sum over that rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import expit, logit

from .distributions import InitialLaw
from .kle import KleProcess, kn_sigma, primitive_h
from .quadrature import (QuadratureRule, default_order, make_rule,
                         rule_for_law, tensor_nodes_chunks)

__all__ = [
    "Problem",
    "DensityGrid",
    "k_n",
    "rvt_kernel",
    "f1n_eval",
    "f1n_collapsed",
    "f1_exact_wiener",
    "density_grid",
    "DEFAULT_P_GRID",
]

DEFAULT_P_GRID = np.linspace(0.005, 0.995, 201)

_SQRT2PI = np.sqrt(2.0 * np.pi)
_T0_TOL = 1e-12


@dataclass(frozen=True)
class Problem:
    """A truncated random logistic IVP: process model + initial law + order.

    ``quad_orders`` is the per-dimension quadrature order of the tensor path;
    ``None`` picks the dimension-dependent default.
    """

    process: KleProcess
    initial: InitialLaw
    N: int
    quad_orders: int | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("truncation order N must be >= 1")

    @cached_property
    def rule(self) -> QuadratureRule:
        order = self.quad_orders if self.quad_orders else default_order(self.N)
        return rule_for_law(self.process.xi_law, order)

    def h_vector(self, t):
        return np.array([primitive_h(self.process, j, t)
                         for j in range(1, self.N + 1)])


@dataclass(frozen=True)
class DensityGrid:
    """Density values on a (t, p) product grid; values[i, j] = f(p_grid[j],
    t_grid[i])."""

    p_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)


def k_n(process: KleProcess, t, xi):
    """Time-integral of the N-term truncated coefficient: m(t) + sum H_j(t) xi_j."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1 or xi.size < 1:
        raise ValueError("xi must be a nonempty 1-D vector")
    process.domain.require(t)
    total = process.mean_primitive(t)
    for j in range(1, xi.size + 1):
        total += primitive_h(process, j, t) * xi[j - 1]
    return float(total)


def rvt_kernel(p, K):
    """Inverse-flow point and Jacobian of the logistic transport map.

    Given logit(P_t) = logit(P0) + K, the initial point mapping to p is
    arg = sigmoid(logit(p) - K) and the density picks up jac = d(arg)/dp.
    Evaluated branch-wise in e^{-|K|} so nothing overflows for any real K:

        K >= 0:  E = e^{-K},  arg = pE / ((1-p) + pE),   jac = E / ((1-p) + pE)^2
        K <  0:  F = e^{K},   arg = p / ((1-p)F + p),    jac = F / ((1-p)F + p)^2

    Returns (arg, jac), broadcasting over both inputs.
    """
    p = np.asarray(p, dtype=float)
    K = np.asarray(K, dtype=float)
    scalar = p.ndim == 0 and K.ndim == 0
    p, K = np.broadcast_arrays(p, K)
    arg = np.empty(p.shape)
    jac = np.empty(p.shape)

    pos = K >= 0
    if np.any(pos):
        E = np.exp(-K[pos])
        den = (1.0 - p[pos]) + p[pos] * E
        arg[pos] = p[pos] * E / den
        jac[pos] = E / (den * den)
    neg = ~pos
    if np.any(neg):
        F = np.exp(K[neg])
        den = (1.0 - p[neg]) * F + p[neg]
        arg[neg] = p[neg] / den
        jac[neg] = F / (den * den)

    if scalar:
        return float(arg), float(jac)
    return arg, jac


# ---------------------------------------------------------------------------
# tensor path


def _f1n_tensor_many(problem: Problem, p, t):
    """Tensor-quadrature density at a vector of p values, one time t."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("p must lie in (0, 1)")
    problem.process.domain.require(t)
    if abs(t - problem.process.domain.t0) <= _T0_TOL:
        return problem.initial.pdf(p)

    h = problem.h_vector(t)
    m_t = problem.process.mean_primitive(t)
    f0 = problem.initial.pdf
    out = np.zeros(p.size)
    for pts, wts in tensor_nodes_chunks(problem.rule, problem.N):
        K = pts @ h + m_t
        for i in range(p.size):
            arg, jac = rvt_kernel(p[i], K)
            out[i] += float(np.dot(wts, f0(arg) * jac))
    return out


def f1n_eval(problem: Problem, p, t):
    """Density of the order-N solution at (p, t) by tensor quadrature.

    At t = t0 this is the initial density exactly (K = 0 at every node and
    the weights sum to one), so that case is returned directly.
    """
    return float(_f1n_tensor_many(problem, p, t)[0])


# ---------------------------------------------------------------------------
# collapsed 1-D paths (Gaussian K)


def _gauss_logit_convolution(p, mean, sigma, law: InitialLaw,
                             nsig=10.0, panel_sig=3.0):
    """Density of P with logit(P) = logit(P0) + K, K ~ N(mean, sigma^2).

    In u = logit(q) the integral is a convolution of the initial logit-density
    with the normal kernel:

        f(p) = 1/(p(1-p)) * int f0(q) q(1-q) phi((v - mean - u)/sigma)/sigma du,

    v = logit(p), over u in [logit(p01), logit(p02)] intersected with the
    +/- nsig*sigma kernel window.  Each (per-p) window is split into
    ceil(2 nsig / panel_sig) equal panels with 24-point Gauss-Legendre, which
    resolves the kernel to machine precision; the initial-support endpoints
    are window endpoints, so the kink there is never straddled.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("p must lie in (0, 1)")
    if sigma == 0.0:
        return law.pdf(p)

    v = logit(p)
    u_lo = np.maximum(logit(law.p01), v - mean - nsig * sigma)
    u_hi = np.minimum(logit(law.p02), v - mean + nsig * sigma)
    width = u_hi - u_lo
    alive = width > 0

    npanels = int(np.ceil(2.0 * nsig / panel_sig))
    gx, gw = np.polynomial.legendre.leggauss(24)
    # panel offsets in [0, 1]: npanels panels x 24 nodes, flattened
    edges = np.linspace(0.0, 1.0, npanels + 1)
    offs = (edges[:-1, None] + np.diff(edges)[:, None] * (gx[None, :] + 1.0) / 2.0).ravel()
    wts = (np.diff(edges)[:, None] * gw[None, :] / 2.0).ravel()

    out = np.zeros(p.size)
    if np.any(alive):
        lo = u_lo[alive, None]
        wd = width[alive, None]
        u = lo + wd * offs[None, :]
        q = expit(u)
        z = (v[alive, None] - mean - u) / sigma
        kern = np.exp(-0.5 * z * z) / (sigma * _SQRT2PI)
        vals = law.pdf(q) * q * (1.0 - q) * kern
        out[alive] = (vals @ wts) * wd.ravel()
    return out / (p * (1.0 - p))


def _hermite_sum(p, mean, sigma, law: InitialLaw, rule: QuadratureRule):
    """Plain Gauss-Hermite sum over K = mean + sigma * z for the same object."""
    if rule.kind != "hermite":
        raise ValueError("collapsed path needs a Gauss-Hermite rule")
    p = np.atleast_1d(np.asarray(p, dtype=float))
    K = mean + sigma * rule.nodes
    out = np.empty(p.size)
    for i in range(p.size):
        arg, jac = rvt_kernel(p[i], K)
        out[i] = np.dot(rule.weights, law.pdf(arg) * jac)
    return out


def f1n_collapsed(problem: Problem, p, t, rule: QuadratureRule | None = None):
    """Density of the order-N solution via the exact 1-D Gaussian reduction.

    Requires Gaussian coordinates: K_N(t) is then N(m(t), sigma_N(t)^2) with
    sigma_N from the closed-form primitives, and the N-dimensional integral
    equals a single integral over that law.  With ``rule=None`` (default) the
    logit-convolution evaluator is used; passing a Gauss-Hermite rule gives
    the plain weighted sum over K = m + sigma z instead.
    """
    if problem.process.xi_law.kind != "gaussian":
        raise ValueError("collapsed path requires Gaussian KLE coordinates")
    problem.process.domain.require(t)
    mean, sigma = kn_sigma(problem.process, t, problem.N)
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    if sigma == 0.0:
        out = problem.initial.pdf(p_arr)
    elif rule is None:
        out = _gauss_logit_convolution(p_arr, mean, sigma, problem.initial)
    else:
        out = _hermite_sum(p_arr, mean, sigma, problem.initial, rule)
    return float(out[0]) if np.isscalar(p) or np.asarray(p).ndim == 0 else out


def f1_exact_wiener(initial: InitialLaw, p, t, T=1.5,
                    rule: QuadratureRule | None = None):
    """Non-truncated density for the Wiener growth model.

    The full time-integral of the Wiener process is N(0, t^3/3), so the exact
    density has the same 1-D form as the collapsed path with
    sigma = sqrt(t^3/3); at t = 0 it is the initial density by continuity.
    """
    if not 0.0 <= t <= T + _T0_TOL:
        raise ValueError(f"time {t} outside [0, {T}]")
    sigma = np.sqrt(t ** 3 / 3.0)
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    if sigma == 0.0:
        out = initial.pdf(p_arr)
    elif rule is None:
        out = _gauss_logit_convolution(p_arr, 0.0, sigma, initial)
    else:
        out = _hermite_sum(p_arr, 0.0, sigma, initial, rule)
    return float(out[0]) if np.isscalar(p) or np.asarray(p).ndim == 0 else out


# ---------------------------------------------------------------------------
# grid driver


def density_grid(problem: Problem, p_grid=None, t_grid=None, path="auto"):
    """Fill a DensityGrid over sorted p and t grids.

    ``path`` is one of 'auto' (collapsed for Gaussian coordinates, tensor
    otherwise), 'tensor', 'collapsed', or 'exact' (Wiener reference density,
    ignoring the truncation order).
    """
    p_grid = DEFAULT_P_GRID.copy() if p_grid is None else np.asarray(p_grid, dtype=float)
    if t_grid is None:
        dom = problem.process.domain
        t_grid = np.linspace(dom.t0, dom.T, 4)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(p_grid) <= 0) or np.any(np.diff(t_grid) < 0):
        raise ValueError("grids must be sorted ascending")
    if np.any((p_grid <= 0) | (p_grid >= 1)):
        raise ValueError("p grid must lie inside (0, 1)")

    if path == "auto":
        path = "collapsed" if problem.process.xi_law.kind == "gaussian" else "tensor"
    if path == "exact" and problem.process.kind != "wiener":
        raise ValueError("exact reference density is only known for the Wiener model")

    values = np.empty((t_grid.size, p_grid.size))
    for i, t in enumerate(t_grid):
        if path == "tensor":
            values[i] = _f1n_tensor_many(problem, p_grid, t)
        elif path == "collapsed":
            values[i] = f1n_collapsed(problem, p_grid, t)
        elif path == "exact":
            values[i] = f1_exact_wiener(problem.initial, p_grid, t,
                                        problem.process.params["T"])
        else:
            raise ValueError(f"unknown path {path!r}")

    meta = {
        "N": problem.N,
        "quad_order": problem.rule.order if path == "tensor" else None,
        "process": problem.process.kind,
        "initial": problem.initial.kind,
        "path": path,
    }
    return DensityGrid(p_grid, t_grid, values, meta)
