"""Closed-form quantities for the honest-vs-insider comparison.

Everything here is coefficient-free except the expected utilities: the
difference between the two traders' log-returns,

    H_t = (B_T^2/T + log(T/(T-t)) - (B_T - B_t)^2/(T-t)) / 2,

depends only on the Brownian endpoints, so the win probability
P(H_t < 0), its explicit positive lower bound, and the alpha-moments of
exp(H_t) are functions of (t, T) alone -- in fact of the fraction t/T.

P(H_t < 0) is computed two independent ways: a semi-analytic reduction
(conditional normal CDF integrated adaptively over one Gaussian variable),
which serves as the oracle, and plain Monte Carlo over endpoint draws.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad as _adaptive_quad
from scipy.special import ndtr

from . import kernels
from .model import MarketModel
from .quadrature import simpson_nodes

SQRT2 = math.sqrt(2.0)
# coefficient (1 + sqrt(2))/sqrt(2) appearing in the bound's exponent
KAPPA = (1.0 + SQRT2) / SQRT2

GAP_CHUNK = 1 << 16


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate: sample count, mean, standard error."""

    n: int
    mean: float
    stderr: float


@dataclass(frozen=True)
class GapEvaluation:
    """Utility gap H at one endpoint configuration."""

    t: float
    T: float
    b_t: float
    b_T: float
    H: float

    @classmethod
    def from_endpoints(cls, b_t, b_T, t, T):
        return cls(t=float(t), T=float(T), b_t=float(b_t), b_T=float(b_T),
                   H=gap_closed_form(b_t, b_T, t, T))


@dataclass(frozen=True)
class BoundEvaluation:
    """Win-probability lower bound and its building blocks at (t, T).

    bound = exp-form of the explicit lower bound; it underflows to 0.0 when
    log_bound < log(min double) ~ -745, which happens at extreme t/T; use
    log_bound (always finite for 0 < t < T) for positivity checks.
    """

    t: float
    T: float
    L: float
    a: float
    b: float
    c: float
    bound: float
    log_bound: float


@dataclass(frozen=True)
class CubicPoly:
    """Cubic whose unique positive root is the optimal horizon for fixed f."""

    A3: float
    A2: float
    A1: float
    A0: float
    f: float
    L: float

    def __call__(self, T):
        return ((self.A3 * T + self.A2) * T + self.A1) * T + self.A0


def expected_utility_honest(model: MarketModel, t, nquad=2048) -> float:
    """E log(M_t/M_0) for the honest trader: integral of r + (mu-r)^2/(2 sigma^2).

    Composite Simpson on an internal nquad-interval grid; exact for constant
    coefficients.
    """
    t = float(t)
    if not 0 <= t <= model.T:
        raise ValueError(f"t={t} outside [0, T={model.T}]")
    if t == 0.0:
        return 0.0
    s = np.linspace(0.0, t, nquad + 1)
    r = model.r(s)
    excess = model.mu(s) - r
    sig = model.sigma(s)
    return simpson_nodes(r + excess * excess / (2.0 * sig * sig), t / nquad)


def expected_utility_insider(model: MarketModel, t, nquad=2048) -> float:
    """Honest expected utility plus log(T/(T-t))/2.

    Diverges as t approaches T: the market is not viable there, so t >= T is
    rejected.
    """
    t = float(t)
    if t >= model.T:
        raise ValueError(
            f"insider expected utility diverges as t -> T: market not viable "
            f"at t={t} >= T={model.T}"
        )
    if t == 0.0:
        return 0.0
    return expected_utility_honest(model, t, nquad) + 0.5 * (
        math.log(model.T) - math.log(model.T - t)
    )


def gap_closed_form(b_t, b_T, t, T) -> float:
    """Insider-minus-honest log-return given the Brownian endpoints.

    H = (B_T^2/T + log(T/(T-t)) - (B_T-B_t)^2/(T-t)) / 2; zero at t = 0.
    Logarithms are taken as log(T) - log(T-t) to stay accurate near the
    horizon.
    """
    t = float(t)
    T = float(T)
    if not 0 <= t < T:
        raise ValueError(f"need 0 <= t < T, got t={t}, T={T}")
    tau = T - t
    d = b_T - b_t
    return 0.5 * (b_T * b_T / T + (math.log(T) - math.log(tau)) - d * d / tau)


def _win_region_cdf(x, t, T):
    # P(H < 0 | B_t/sqrt(t) = x): the event is quadratic in the independent
    # normal Y = (B_T-B_t)/sqrt(T-t), solved in closed form:
    #   Y < y-  or  Y > y+,   y+- = sqrt(tau/t) x -++ sqrt(T/t) sqrt(x^2 + c)
    tau = T - t
    c = math.log(T) - math.log(tau)
    s = math.sqrt(tau / t) * x
    d = math.sqrt(T / t) * math.sqrt(x * x + c)
    return ndtr(s - d) + ndtr(-(s + d))


def prob_honest_wins_quadrature(t, T) -> float:
    """P(H_t < 0) by conditional-CDF reduction and adaptive quadrature.

    Absolute accuracy well below 1e-8 across the whole range (the integrand
    develops a narrow feature near x = 0 as t/T -> 0, handled by adaptive
    subdivision anchored at 0).  Takes no market model: H is coefficient-free.
    """
    t = float(t)
    T = float(T)
    if not 0 < t < T:
        raise ValueError(f"need 0 < t < T strictly, got t={t}, T={T}")
    inv_sqrt2pi = 1.0 / math.sqrt(2.0 * math.pi)

    def integrand(x):
        return math.exp(-0.5 * x * x) * _win_region_cdf(x, t, T) * inv_sqrt2pi

    total = 0.0
    for a, b in ((-np.inf, -8.0), (-8.0, -1.0), (-1.0, 0.0),
                 (0.0, 1.0), (1.0, 8.0), (8.0, np.inf)):
        piece, _ = _adaptive_quad(integrand, a, b, epsabs=1e-12, epsrel=1e-12,
                                  limit=200)
        total += piece
    return total


def prob_honest_wins_mc(t, T, paths, seed, workers=1) -> McEstimate:
    """Monte Carlo P(H_t < 0) from independent endpoint draws.

    Sample j uses random stream j of the seed, so the estimate is
    bit-identical for any worker count; stderr is the binomial one.
    """
    t = float(t)
    T = float(T)
    if not 0 < t < T:
        raise ValueError(f"need 0 < t < T strictly, got t={t}, T={T}")
    paths = int(paths)
    if paths < 1:
        raise ValueError("paths must be >= 1")

    def chunk_neg(start, count):
        h = kernels.gap_samples(seed, start, count, t, T)
        return int(np.count_nonzero(h < 0.0))

    neg = sum(_map_chunks(chunk_neg, paths, GAP_CHUNK, workers))
    p = neg / paths
    return McEstimate(n=paths, mean=p, stderr=math.sqrt(p * (1.0 - p) / paths))


def lower_bound(t, T) -> BoundEvaluation:
    """Explicit positive lower bound on P(H_t < 0) for 0 < t < T.

    bound = sqrt(t(T-t)) / [4 (3t + T + 2t L + sqrt(2)(T-t))]
            * exp{-[t(L+1)(L+2) + (1+sqrt2)/sqrt2 (T-t)] / (t(T-t))},
    with L = ((T-t)/2) log(T/(T-t)); also returns the triangle/Young
    constants a, b, c entering its derivation.
    """
    t = float(t)
    T = float(T)
    if not 0 < t < T:
        raise ValueError(f"need 0 < t < T strictly, got t={t}, T={T}")
    tau = T - t
    L = 0.5 * tau * (math.log(T) - math.log(tau))
    a = (t + T) / (2.0 * t * tau)
    b = (2.0 * t * (L + 1.0) + SQRT2 * tau) / (t * tau)
    c = (t * (L + 1.0) ** 2 + tau) / (t * tau)
    denom = 4.0 * (3.0 * t + T + 2.0 * t * L + SQRT2 * tau)
    expo = -(t * (L + 1.0) * (L + 2.0) + KAPPA * tau) / (t * tau)
    log_bound = 0.5 * math.log(t * tau) - math.log(denom) + expo
    bound = math.sqrt(t * tau) / denom * math.exp(expo)
    return BoundEvaluation(t=t, T=T, L=L, a=a, b=b, c=c, bound=bound,
                           log_bound=log_bound)


def horizon_free_L(f) -> float:
    """Scale-free L(f) = ((1-f)/2) log(1/(1-f)) entering the scaled bound."""
    f = float(f)
    if not 0 < f < 1:
        raise ValueError(f"need 0 < f < 1, got f={f}")
    return -0.5 * (1.0 - f) * math.log1p(-f)


def lower_bound_scaled(f, T) -> float:
    """The bound at t = f T, parametrized by the fraction f.

    Algebraically identical to lower_bound(f*T, T).bound (the horizon enters
    only through L_t = L(f) * T), and evaluated through the same code path so
    the identity is exact in floating point as well.
    """
    f = float(f)
    T = float(T)
    if not 0 < f < 1:
        raise ValueError(f"need 0 < f < 1, got f={f}")
    if not T > 0:
        raise ValueError(f"need T > 0, got T={T}")
    return lower_bound(f * T, T).bound


def cubic_coefficients(f) -> CubicPoly:
    """Coefficients of d(log bound)/dT = 0 cleared to a cubic in T.

    Signs are (-, -, +, +) for every f in (0, 1), so by Descartes' rule the
    cubic has exactly one positive root: the unique maximum in T of the
    scaled bound.
    """
    f = float(f)
    L = horizon_free_L(f)
    d = 3.0 * f + 1.0 + SQRT2 * (1.0 - f)
    e = 2.0 * f + KAPPA * (1.0 - f)
    return CubicPoly(
        A3=-2.0 * f * f * L**3,
        A2=-(d * f * L * L + 2.0 * f * f * (1.0 - f) * L),
        A1=2.0 * f * L * e,
        A0=e * d,
        f=f,
        L=L,
    )


def optimal_horizon(f, rel_tol=1e-10) -> float:
    """Unique positive root of the cubic: the horizon maximizing the bound.

    Bracketed by doubling from [1e-12, 1] (the leading coefficient is
    negative, so the cubic eventually turns negative), then bisected to
    rel_tol.  The result is verified to beat its relative neighbors at
    T*(1 +- 1e-4); failure of either step signals an internal inconsistency
    and raises RuntimeError.
    """
    poly = cubic_coefficients(f)
    lo = 1e-12
    hi = 1.0
    if poly(lo) <= 0.0:
        raise RuntimeError(f"internal inconsistency: cubic not positive at T={lo}")
    while poly(hi) > 0.0:
        lo = hi
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError(
                "internal inconsistency: no sign change of the cubic in "
                "[1e-12, 1e12]"
            )
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if poly(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    t_star = 0.5 * (lo + hi)
    here = lower_bound_scaled(f, t_star)
    if not (here >= lower_bound_scaled(f, t_star * (1.0 - 1e-4))
            and here >= lower_bound_scaled(f, t_star * (1.0 + 1e-4))):
        raise RuntimeError(
            f"internal inconsistency: T*={t_star} does not maximize the "
            f"scaled bound at f={f}"
        )
    return t_star


def moment_ratio(alpha, t, T) -> float:
    """E[(insider wealth / honest wealth)^alpha] = E[exp(alpha H_t)].

    Finite iff t < min(T, T/alpha^2):
        (T/(T+at))^1/2 (T/(T-t))^(a/2) ((T+at)/(T-a^2 t))^1/2;
    returns inf in the divergent regime (a distinguished value, not an
    error: callers legitimately probe the viability boundary).  Finite for
    all t in [0, T) iff alpha <= 1.
    """
    alpha = float(alpha)
    t = float(t)
    T = float(T)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not 0 <= t < T:
        raise ValueError(f"need 0 <= t < T, got t={t}, T={T}")
    if alpha * alpha * t >= T:
        return math.inf
    return (
        math.sqrt(T / (T + alpha * t))
        * (T / (T - t)) ** (alpha / 2.0)
        * math.sqrt((T + alpha * t) / (T - alpha * alpha * t))
    )


def moment_ratio_mc(alpha, t, T, paths, seed, workers=1) -> McEstimate:
    """Monte Carlo mean of exp(alpha H_t) over endpoint draws.

    Only valid in the finite regime t < min(T, T/alpha^2); raises otherwise.
    """
    alpha = float(alpha)
    t = float(t)
    T = float(T)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not 0 <= t < T:
        raise ValueError(f"need 0 <= t < T, got t={t}, T={T}")
    if alpha * alpha * t >= T:
        raise ValueError(
            f"moment is divergent at alpha={alpha}, t={t}, T={T} "
            f"(needs t < T/alpha^2 = {T / alpha**2})"
        )
    paths = int(paths)
    if paths < 1:
        raise ValueError("paths must be >= 1")
    if t == 0.0:
        return McEstimate(n=paths, mean=1.0, stderr=0.0)

    def chunk_sums(start, count):
        e = np.exp(alpha * kernels.gap_samples(seed, start, count, t, T))
        return float(np.sum(e)), float(np.sum(e * e))

    parts = _map_chunks(chunk_sums, paths, GAP_CHUNK, workers)
    total = math.fsum(p[0] for p in parts)
    total_sq = math.fsum(p[1] for p in parts)
    mean = total / paths
    if paths == 1:
        return McEstimate(n=1, mean=mean, stderr=0.0)
    var = max(0.0, (total_sq - paths * mean * mean) / (paths - 1))
    return McEstimate(n=paths, mean=mean, stderr=math.sqrt(var / paths))


def _map_chunks(fn, total, chunk, workers):
    """Apply fn(start, count) over fixed chunks; results in chunk order.

    The chunk layout depends only on (total, chunk), never on the worker
    count, and reductions downstream consume the list in order, so results
    are bit-identical however many threads run the chunks.
    """
    spans = [(s, min(chunk, total - s)) for s in range(0, total, chunk)]
    if workers <= 1 or len(spans) == 1:
        return [fn(s, c) for s, c in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sc: fn(sc[0], sc[1]), spans))
