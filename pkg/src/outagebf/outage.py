"""Rate-outage machinery: instantaneous rates, closed-form constraints, Monte Carlo.

For user i at rate R with c = 2^R - 1, signal power s_i = w_i^H Q_ii w_i and
interference powers g_k = w_k^H Q_ki w_k, the rate-outage probability under
circularly-symmetric Gaussian channels satisfies

    Pr[rate_i < R] <= 1 - rho_i
        <=>  LHS_i = rho_i * exp(c*sigma2_i/s_i) * prod_{k!=i} (1 + c*g_k/s_i) <= 1,

and the inequality is exact (the LHS equals rho_i / Pr[rate_i >= R]).  The
SISO specialization substitutes s_i = Q_ii p_i, g_k = Q_ki p_k.
"""

from __future__ import annotations

import math

import numpy as np

from .model import BeamformerSet, MisoInstance, SisoInstance

__all__ = [
    "instantaneous_rate",
    "outage_lhs",
    "outage_lhs_siso",
    "outage_lhs_all",
    "mc_outage",
]

_LN2 = math.log(2.0)
_MC_CHUNK = 65536
_PSD_CLIP = 1e-10


def instantaneous_rate(channels, beams: BeamformerSet, i: int, sigma2_i: float) -> float:
    """Shannon rate of receiver i for one channel realization.

    ``channels[k]`` is the realized vector from transmitter k into receiver i.
    """
    h = np.asarray(channels, dtype=np.complex128)
    g = np.abs(np.einsum("kn,kn->k", h.conj(), beams.w)) ** 2
    interf = float(np.sum(g)) - float(g[i])
    return math.log1p(g[i] / (interf + sigma2_i)) / _LN2


def _signal_and_interference(instance, x, i):
    """(s_i, [g_k for k != i]) from either a beamformer set or a power vector."""
    if isinstance(instance, MisoInstance):
        w = x.w if isinstance(x, BeamformerSet) else np.asarray(x, dtype=np.complex128)
        wi = w[i]
        s = float(np.real(wi.conj() @ instance.Qcov[i, i] @ wi))
        g = [
            max(float(np.real(w[k].conj() @ instance.Qcov[k, i] @ w[k])), 0.0)
            for k in range(instance.K)
            if k != i
        ]
    else:
        p = np.asarray(x, dtype=np.float64)
        s = float(instance.Q[i, i] * p[i])
        g = [float(instance.Q[k, i] * p[k]) for k in range(instance.K) if k != i]
    return s, g


def _lhs_from_terms(rho_i, sigma2_i, s, g, R_i):
    if R_i < 0:
        raise ValueError("rate must be nonnegative")
    if R_i == 0.0:
        return float(rho_i)
    if not s > 0.0:
        raise ValueError(
            "undefined constraint: zero received signal power with positive rate"
        )
    c = math.expm1(R_i * _LN2)  # 2^R - 1
    return rho_i * math.exp(
        c * sigma2_i / s + sum(math.log1p(c * gk / s) for gk in g)
    )


def outage_lhs(instance: MisoInstance, beams: BeamformerSet, R_i: float, i: int) -> float:
    """Closed-form outage-constraint LHS for user i; the constraint is LHS <= 1."""
    s, g = _signal_and_interference(instance, beams, i)
    return _lhs_from_terms(instance.rho[i], instance.sigma2[i], s, g, R_i)


def outage_lhs_siso(instance: SisoInstance, p, R_i: float, i: int) -> float:
    """SISO specialization of :func:`outage_lhs` for a power vector p."""
    s, g = _signal_and_interference(instance, p, i)
    return _lhs_from_terms(instance.rho[i], instance.sigma2[i], s, g, R_i)


def outage_lhs_all(instance, x, R) -> np.ndarray:
    """Vector of constraint LHS values for all users at per-user rates R.

    Accepts a MisoInstance with a BeamformerSet or a SisoInstance with a power
    vector.  Quadratic forms are evaluated for all (k, i) pairs at once, so
    this is the fast path for certificate checking.
    """
    R = np.asarray(R, dtype=np.float64)
    K = instance.K
    if R.shape != (K,):
        raise ValueError(f"R must have shape ({K},)")
    if isinstance(instance, MisoInstance):
        w = x.w if isinstance(x, BeamformerSet) else np.asarray(x, dtype=np.complex128)
        G = np.einsum("ka,kiab,kb->ki", w.conj(), instance.Qcov, w).real
    else:
        p = np.asarray(x, dtype=np.float64)
        G = instance.Q * p[:, None]
    G = np.maximum(G, 0.0)
    out = np.empty(K)
    for i in range(K):
        s = float(G[i, i])
        g = [float(G[k, i]) for k in range(K) if k != i]
        out[i] = _lhs_from_terms(instance.rho[i], instance.sigma2[i], s, g, R[i])
    return out


def _cov_factor(Q: np.ndarray) -> np.ndarray:
    """F with F F^H = Q from a Hermitian eigendecomposition.

    Eigenvalues in [-1e-10, 0) are clipped to zero; anything lower is a
    factorization failure.
    """
    Qh = 0.5 * (Q + Q.conj().T)
    lam, U = np.linalg.eigh(Qh)
    if lam[0] < -_PSD_CLIP:
        raise ValueError(
            f"covariance is not PSD (min eigenvalue {lam[0]:.3g} < -{_PSD_CLIP:g})"
        )
    return U * np.sqrt(np.clip(lam, 0.0, None))


def mc_outage(
    instance: MisoInstance,
    beams: BeamformerSet,
    R_i: float,
    i: int,
    n_samples: int,
    seed: int,
):
    """Monte-Carlo estimate of Pr[rate_i < R_i] with binomial standard error.

    Channels h_ki ~ CN(0, Qcov[k, i]) are drawn independently through
    eigendecomposition factors from one counter-based Philox stream, in fixed
    chunks of 65536 samples with users in index order inside each chunk — the
    estimate is bit-reproducible given (seed, n_samples).

    Returns (estimate, stderr).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if R_i < 0:
        raise ValueError("rate must be nonnegative")
    if R_i == 0.0:
        return 0.0, 0.0  # rate is a.s. nonnegative
    K, Nt = instance.K, instance.Nt
    # row vectors a_k with y_k = a_k z ~ h_ki^H w_k for z standard complex normal
    a = np.empty((K, Nt), dtype=np.complex128)
    for k in range(K):
        a[k] = beams.w[k].conj() @ _cov_factor(instance.Qcov[k, i])
    thresh = math.expm1(R_i * _LN2)
    sigma2 = float(instance.sigma2[i])
    rng = np.random.Generator(np.random.Philox(key=seed))
    count = 0
    done = 0
    while done < n_samples:
        m = min(_MC_CHUNK, n_samples - done)
        g = np.empty((K, m))
        for k in range(K):
            z = rng.standard_normal((Nt, m)) + 1j * rng.standard_normal((Nt, m))
            y = a[k] @ z
            g[k] = 0.5 * (y.real**2 + y.imag**2)  # z has variance 2 per entry
        interf = np.sum(g, axis=0) - g[i]
        count += int(np.count_nonzero(g[i] < thresh * (interf + sigma2)))
        done += m
    est = count / n_samples
    return est, math.sqrt(est * (1.0 - est) / n_samples)
