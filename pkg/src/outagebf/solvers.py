"""Power-control solvers for the single-antenna outage-constrained channel.

The closed-form outage constraint of user i at rate R,

    rho_i exp(c sigma2_i / (Q_ii p_i)) prod_{k!=i}(1 + c Q_ki p_k / (Q_ii p_i)) <= 1,
    c = 2^R - 1,

is strictly decreasing in p_i and strictly increasing in every interferer
power, so the componentwise minimal-power response is a standard interference
function.  Iterating it from p = 0 yields monotone nondecreasing iterates that
converge to the minimal feasible point whenever one exists, which gives a
polynomial-time feasibility test and, via bisection on the common rate, the
max-min-fair solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import SisoInstance
from .outage import outage_lhs_siso
from .zeta import ZetaContext, _solve

__all__ = [
    "srm_rates_from_powers",
    "min_power_response",
    "FeasibilityResult",
    "feasibility_fixed_point",
    "MmfSolution",
    "mmf_bisection",
    "mmf_upper_bound",
    "mmf_modulus_bound",
    "outage_balancing_siso",
    "VertexSliceContext",
    "single_user_objective_F",
    "single_user_objective_f",
]

_LN2 = math.log(2.0)
_SWEEP_CAP = 10_000
_SWEEP_TOL = 1e-12
_LHS_SLACK = 1e-9
_POWER_SLACK = 1e-12


def _zeta_for_user(instance: SisoInstance, p, i: int) -> float:
    terms = [
        float(instance.Q[k, i] * p[k])
        for k in range(instance.K)
        if k != i and instance.Q[k, i] * p[k] > 0
    ]
    return _solve(float(instance.sigma2[i]), float(instance.rho[i]), terms, 1e-13)[0]


def srm_rates_from_powers(instance: SisoInstance, p) -> np.ndarray:
    """Largest outage-feasible rate of every user at the given powers.

    R_i = log2(1 + zeta_i * Q_ii * p_i), where zeta_i solves the implicit
    interference equation at user i's received interference; plugging R_i back
    into the closed-form constraint gives equality.  p_i = 0 yields R_i = 0.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative")
    R = np.zeros(instance.K)
    for i in range(instance.K):
        if p[i] > 0:
            z = _zeta_for_user(instance, p, i)
            R[i] = math.log1p(z * instance.Q[i, i] * p[i]) / _LN2
    return R


def min_power_response(instance: SisoInstance, i: int, p_others, R_target: float) -> float:
    """Smallest own power satisfying user i's constraint at rate ``R_target``.

    Monotone inversion of the closed-form constraint in p_i: with c = 2^R - 1
    the root is c / (Q_ii * zeta_i), zeta_i evaluated at the fixed interferer
    powers (entry i of ``p_others`` is ignored).  R_target = 0 needs no power.
    """
    if R_target < 0:
        raise ValueError("R_target must be nonnegative")
    if R_target == 0.0:
        return 0.0
    c = math.expm1(R_target * _LN2)
    z = _zeta_for_user(instance, np.asarray(p_others, dtype=np.float64), i)
    return c / (float(instance.Q[i, i]) * z)


@dataclass
class FeasibilityResult:
    """Outcome of a fixed-point feasibility test.

    ``residual`` is the worst constraint violation max_i max(0, LHS_i - 1) at
    the returned point; for an infeasible verdict ``p`` is the last iterate,
    kept as a diagnostic.
    """

    status: str  # "feasible" | "infeasible"
    p: np.ndarray
    iterations: int
    residual: float
    trace: tuple | None = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _feasible_at_targets(
    instance: SisoInstance, targets, keep_trace: bool = False
) -> FeasibilityResult:
    """Fixed point of the minimal-power response at per-user rate targets."""
    K = instance.K
    Q = instance.Q
    sigma2 = instance.sigma2
    rho = instance.rho
    P = instance.P
    c = [math.expm1(t * _LN2) for t in targets]
    p = [0.0] * K
    trace = [tuple(p)] if keep_trace else None
    exceeded = False
    converged = False
    it = 0
    for it in range(1, _SWEEP_CAP + 1):
        p_new = [0.0] * K
        for i in range(K):
            if c[i] == 0.0:
                continue
            terms = [
                Q[k, i] * p[k] for k in range(K) if k != i and Q[k, i] * p[k] > 0
            ]
            z = _solve(float(sigma2[i]), float(rho[i]), terms, 1e-13)[0]
            pi = c[i] / (float(Q[i, i]) * z)
            p_new[i] = pi
            if pi > P[i] + _POWER_SLACK:
                exceeded = True
        if keep_trace:
            trace.append(tuple(p_new))
        if exceeded:
            p = p_new
            break
        if max(abs(a - b) for a, b in zip(p_new, p)) <= _SWEEP_TOL:
            p = p_new
            converged = True
            break
        p = p_new
    p_arr = np.array(p)
    residual = 0.0
    for i in range(K):
        if targets[i] > 0 and p_arr[i] > 0:
            residual = max(
                residual, outage_lhs_siso(instance, p_arr, float(targets[i]), i) - 1.0
            )
    ok = (
        converged
        and not exceeded
        and residual <= _LHS_SLACK
        and bool(np.all(p_arr <= P + _POWER_SLACK))
    )
    return FeasibilityResult(
        status="feasible" if ok else "infeasible",
        p=p_arr,
        iterations=it,
        residual=residual,
        trace=tuple(trace) if keep_trace else None,
    )


def feasibility_fixed_point(
    instance: SisoInstance, R_bar: float, keep_trace: bool = False
) -> FeasibilityResult:
    """Decide whether the common weighted rate ``R_bar`` is supportable.

    Tests per-user targets alpha_i * R_bar by iterating the minimal-power
    response from p = 0 (Jacobi sweeps, sup-norm tolerance 1e-12, at most
    10,000 sweeps, early exit once a response exceeds its budget).  The final
    verdict re-checks the witness against the closed-form constraints
    (LHS <= 1 + 1e-9, p <= P + 1e-12).
    """
    if R_bar < 0:
        raise ValueError("R_bar must be nonnegative")
    targets = instance.alpha * R_bar
    return _feasible_at_targets(instance, targets, keep_trace=keep_trace)


def mmf_upper_bound(instance: SisoInstance) -> float:
    """Interference-free cap on the max-min weighted rate.

    Dropping all interference, user i at full power supports at most
    log2(1 + P_i Q_ii log(1/rho_i) / sigma2_i); the bound is the weighted min
    over users and is tight when the instance has no cross coupling.
    """
    vals = [
        math.log1p(
            float(instance.P[i] * instance.Q[i, i])
            * math.log(1.0 / float(instance.rho[i]))
            / float(instance.sigma2[i])
        )
        / _LN2
        / float(instance.alpha[i])
        for i in range(instance.K)
    ]
    return min(vals)


@dataclass
class MmfSolution:
    """Max-min-fairness bisection output.

    ``trace`` records (lower, upper) after every iteration starting from the
    initial bracket; ``tested`` records each midpoint with its feasibility
    verdict; ``binding_users`` lists every index attaining min_i R_i/alpha_i
    at the witness (ties within 1e-9 included).
    """

    R: float
    p: np.ndarray
    trace: tuple
    tested: tuple
    iterations: int
    binding_users: tuple


def mmf_bisection(instance: SisoInstance, delta: float) -> MmfSolution:
    """Bisection on the common weighted rate, accurate to within ``delta``.

    Brackets [0, mmf_upper_bound] and halves until the bracket is narrower
    than delta; the returned rate is the last feasible lower end with its
    fixed-point witness.  The iteration count equals ceil(log2(upper/delta))
    whenever upper/delta is not an exact power of two.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    hi = mmf_upper_bound(instance)
    lo = 0.0
    best_p = np.zeros(instance.K)
    trace = [(lo, hi)]
    tested = []
    it = 0
    while hi - lo >= delta:
        mid = 0.5 * (lo + hi)
        res = feasibility_fixed_point(instance, mid)
        tested.append((mid, res.feasible))
        if res.feasible:
            lo = mid
            best_p = res.p
        else:
            hi = mid
        it += 1
        trace.append((lo, hi))
    rates = srm_rates_from_powers(instance, best_p)
    weighted = rates / instance.alpha
    mn = float(np.min(weighted))
    binding = tuple(
        int(i) for i in range(instance.K) if weighted[i] <= mn + 1e-9 * max(1.0, abs(mn))
    )
    return MmfSolution(
        R=lo,
        p=best_p,
        trace=tuple(trace),
        tested=tuple(tested),
        iterations=it,
        binding_users=binding,
    )


def mmf_modulus_bound(instance: SisoInstance, step: float) -> float:
    """Bound on how far the min weighted rate can move across half a grid cell.

    Uses sup bounds on the rate gradients: zeta_i <= log(1/rho_i)/sigma2_i,
    |dzeta_i/dp_k| <= Q_ki zeta_i / sigma2_i, so the min weighted rate is
    Lipschitz with constant max_i L_i/alpha_i in the sup norm, where
    L_i = (Q_ii/ln2) zeta_max_i (1 + P_i/sigma2_i * sum_{k!=i} Q_ki).
    Returned value is (step/2) times that constant.
    """
    worst = 0.0
    for i in range(instance.K):
        zmax = math.log(1.0 / float(instance.rho[i])) / float(instance.sigma2[i])
        cross = sum(
            float(instance.Q[k, i]) for k in range(instance.K) if k != i
        )
        L = (
            float(instance.Q[i, i])
            / _LN2
            * zmax
            * (1.0 + float(instance.P[i]) / float(instance.sigma2[i]) * cross)
        )
        worst = max(worst, L / float(instance.alpha[i]))
    return 0.5 * step * worst


def outage_balancing_siso(instance: SisoInstance, R_targets, tol: float = 1e-6):
    """Largest common secure-probability floor supporting fixed rate targets.

    Bisects the shared rho over (0, 1): the constraint LHS scales linearly in
    rho, so feasibility at fixed targets is monotone decreasing in rho.
    Returns (rho_star, witness powers); raises if even the smallest tested
    rho is infeasible ("targets unachievable").
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    R_targets = np.asarray(R_targets, dtype=np.float64)
    if R_targets.shape != (instance.K,):
        raise ValueError(f"R_targets must have shape ({instance.K},)")
    if np.any(R_targets < 0):
        raise ValueError("rate targets must be nonnegative")
    lo, hi = 0.0, 1.0
    best = None
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        inst_mid = SisoInstance(
            Q=instance.Q,
            sigma2=instance.sigma2,
            rho=np.full(instance.K, mid),
            P=instance.P,
            alpha=instance.alpha,
        )
        res = _feasible_at_targets(inst_mid, R_targets)
        if res.feasible:
            lo = mid
            best = res.p
        else:
            hi = mid
    if best is None:
        raise ValueError("targets unachievable")
    return lo, best


# ---------------------------------------------------------------------------
# Single-coordinate slice of the gadget sum-rate objective
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _zeta1(sigma2: float, rho: float, t: float) -> float:
    return _solve(sigma2, rho, (t,) if t > 0 else (), 1e-13)[0]


@dataclass(frozen=True)
class VertexSliceContext:
    """Environment of one vertex user's power coordinate.

    ``partner_power`` is the other user on the same vertex; ``neighbors``
    holds one (partner_power_of_neighbor, edge_weight_alpha) pair per incident
    edge user.  Defaults match the gadget family (sigma2 = 0.1, rho = 0.95,
    edge users transmit at 0.7).
    """

    partner_power: float
    neighbors: tuple = ()
    sigma2: float = 0.1
    rho: float = 0.95

    def as_zeta_context(self, terms=()) -> ZetaContext:
        return ZetaContext(sigma2=self.sigma2, rho=self.rho, terms=terms)


def single_user_objective_F(p: float, ctx: VertexSliceContext) -> float:
    """Weighted rate contribution of one vertex user's power, all else fixed.

    F(p) = log2(1 + p zeta(partner)) + log2(1 + partner zeta(p))
           + sum_j alpha_j log2(1 + 0.7 zeta(p, q_j)).
    """
    if p < 0:
        raise ValueError("p must be nonnegative")
    s2, rho, q = ctx.sigma2, ctx.rho, ctx.partner_power
    zp = _zeta1(s2, rho, q)
    zv = _zeta1(s2, rho, p)
    F = math.log1p(p * zp) / _LN2 + math.log1p(q * zv) / _LN2
    for qj, alpha in ctx.neighbors:
        ze = _solve(s2, rho, tuple(t for t in (p, qj) if t > 0), 1e-13)[0]
        F += alpha * math.log1p(0.7 * ze) / _LN2
    return F


def single_user_objective_f(p: float, ctx: VertexSliceContext) -> float:
    """Derivative dF/dp via the implicit-function forms of dzeta.

    f * ln 2 = zeta(q)/(1 + p zeta(q))
               - [q zeta(p) / (1 + q zeta(p))] / (sigma2 + sigma2 p zeta(p) + p)
               - sum_j alpha_j [0.7 zeta_j / (1 + 0.7 zeta_j)] *
                     (1 + q_j zeta_j) / ((1 + p zeta_j)(q_j + sigma2(1 + q_j zeta_j))
                                         + p (1 + q_j zeta_j))
    with zeta_j = zeta(p, q_j).  F has at most one stationary point on p >= 0:
    the sign of f makes at most one minus-to-plus transition.
    """
    if p < 0:
        raise ValueError("p must be nonnegative")
    s2, rho, q = ctx.sigma2, ctx.rho, ctx.partner_power
    zp = _zeta1(s2, rho, q)
    zv = _zeta1(s2, rho, p)
    val = zp / (1.0 + p * zp)
    val -= (q * zv / (1.0 + q * zv)) / (s2 + s2 * p * zv + p)
    for qj, alpha in ctx.neighbors:
        ze = _solve(s2, rho, tuple(t for t in (p, qj) if t > 0), 1e-13)[0]
        u = 1.0 + qj * ze
        denom = (1.0 + p * ze) * (qj + s2 * u) + p * u
        val -= alpha * (0.7 * ze / (1.0 + 0.7 * ze)) * u / denom
    return val / _LN2
