"""Implicit interference functions.

For a receiver with noise power ``sigma2``, outage floor ``rho`` and received
interference powers ``terms = (t_1, ..., t_n)``, define

    psi(x) = rho * exp(sigma2 * x) * prod_k (1 + t_k * x).

psi is continuous and strictly increasing on [0, inf) with psi(0) = rho < 1,
so psi(x) = 1 has a unique positive root ``zeta``.  The closed-form outage
constraint of a user then holds at rate R iff (2^R - 1) / (signal power) <=
zeta, which turns every outage-constrained rate into the explicit form
log2(1 + zeta * signal).  The root is the SINR-threshold-per-signal-power the
user can support at its outage target.

``zeta_upper_bound`` replaces exp and the product by their tangent
minorants, giving the positive root of a quadratic that always dominates
zeta; it brackets the solver and appears in the gadget rate bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ZetaContext",
    "psi",
    "solve_zeta",
    "zeta_upper_bound",
    "dzeta_v_dp",
    "dzeta_e_dp",
]

_DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class ZetaContext:
    """Receiver-side context: noise power, outage floor, interference powers."""

    sigma2: float
    rho: float
    terms: tuple = ()

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 = {self.sigma2} must be > 0")
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho = {self.rho} must lie in (0, 1)")
        terms = tuple(float(t) for t in self.terms)
        if any(t < 0 or not math.isfinite(t) for t in terms):
            raise ValueError("interference terms must be finite and nonnegative")
        object.__setattr__(self, "terms", terms)


def psi(x: float, ctx: ZetaContext) -> float:
    """Evaluate psi(x); exact at x = 0 (returns rho), overflow-safe otherwise."""
    if x < 0:
        raise ValueError("psi is defined on x >= 0")
    return ctx.rho * math.exp(
        ctx.sigma2 * x + sum(math.log1p(t * x) for t in ctx.terms)
    )


def _upper_bound(sigma2: float, rho: float, aggregate: float) -> float:
    # positive root of rho*(1 + sigma2*x)*(1 + aggregate*x) = 1
    c = 1.0 - 1.0 / rho  # < 0
    if aggregate == 0.0:
        return -c / sigma2
    a = sigma2 * aggregate
    b = sigma2 + aggregate
    disc = b * b - 4.0 * a * c
    # cancellation-free form of (-b + sqrt(disc)) / (2a)
    return 2.0 * c / (-b - math.sqrt(disc))


def zeta_upper_bound(ctx: ZetaContext) -> float:
    """Quadratic upper bound on the psi-root.

    Uses the aggregate interference sum(terms) as a single pseudo-interferer:
    since exp(s*x) >= 1 + s*x and prod(1 + t_k x) >= 1 + sum(t_k) x, the root
    of rho*(1 + sigma2*x)*(1 + sum(t) x) = 1 dominates zeta.  For an empty
    context this degenerates to the linear root (1/rho - 1)/sigma2.
    """
    return _upper_bound(ctx.sigma2, ctx.rho, math.fsum(ctx.terms))


def _solve(sigma2: float, rho: float, terms, tol: float):
    """Newton-in-bracket root of log(psi); returns (root, residual, iters)."""
    terms = [t for t in terms if t > 0.0]
    log_rho = math.log(rho)
    if not terms:
        x = -log_rho / sigma2
        return x, log_rho + sigma2 * x, 0

    def f(x):
        return log_rho + sigma2 * x + sum(math.log1p(t * x) for t in terms)

    def fp(x):
        return sigma2 + sum(t / (1.0 + t * x) for t in terms)

    lo = 0.0
    hi = _upper_bound(sigma2, rho, math.fsum(terms))
    # f is increasing and concave, so Newton from below converges monotonically;
    # bisection is kept as a safeguard against a step leaving the bracket.
    x = min(-log_rho / fp(0.0), hi)
    fx = f(x)
    for it in range(1, 200):
        if fx < 0.0:
            lo = x
        else:
            hi = x
        if abs(fx) <= tol and hi - lo <= tol * max(1.0, x):
            break
        x_new = x - fx / fp(x)
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if x_new == x:
            break
        x = x_new
        fx = f(x)
    return x, fx, it


def solve_zeta(ctx: ZetaContext, tol: float = _DEFAULT_TOL, full_output: bool = False):
    """Unique positive root of psi(x) = 1.

    Bracketed in (0, zeta_upper_bound(ctx)].  With no interferers the root is
    the exact closed form log(1/rho)/sigma2.  ``full_output=True`` returns
    (zeta, log-psi residual, iterations).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x, res, it = _solve(ctx.sigma2, ctx.rho, ctx.terms, tol)
    if full_output:
        return x, res, it
    return x


def dzeta_v_dp(p: float, ctx: ZetaContext) -> float:
    """d zeta / dp for a single interferer at power p (implicit differentiation).

    With z = zeta(p):  dz/dp = -z / (sigma2 + sigma2*p*z + p).
    ``ctx`` supplies sigma2 and rho; its own terms are ignored.
    """
    if p < 0:
        raise ValueError("p must be nonnegative")
    z, _, _ = _solve(ctx.sigma2, ctx.rho, (p,), _DEFAULT_TOL)
    return -z / (ctx.sigma2 + ctx.sigma2 * p * z + p)


def dzeta_e_dp(p: float, p_bar: float, ctx: ZetaContext) -> float:
    """Partial derivative in the first argument for two interferers (p, p_bar).

    With z = zeta(p, p_bar):
        dz/dp = -z (1 + p_bar z) /
                ((1 + p z)(p_bar + sigma2 (1 + p_bar z)) + p (1 + p_bar z)).
    The function is symmetric, so the p_bar-partial is dzeta_e_dp(p_bar, p, ctx).
    """
    if p < 0 or p_bar < 0:
        raise ValueError("powers must be nonnegative")
    z, _, _ = _solve(ctx.sigma2, ctx.rho, (p, p_bar), _DEFAULT_TOL)
    u = 1.0 + p_bar * z
    denom = (1.0 + p * z) * (p_bar + ctx.sigma2 * u) + p * u
    return -z * u / denom
