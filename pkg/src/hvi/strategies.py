"""Optimal portfolios and pathwise wealth for the honest and insider traders.

Both traders maximize expected log-utility of normalized wealth.  The honest
trader holds the classical fraction (mu - r) / sigma^2; the insider, who
additionally observes the terminal Brownian value, adds the anticipating
term (B_T - B_s) / (sigma (T - s)).

Log-returns are evaluated along a sampled path from the explicit exponential
solutions of the wealth dynamics: a deterministic drift integral (composite
Simpson on the grid nodes) plus grid stochastic integrals.  The ds-integrals
that involve the path use the left-rectangle rule so that the discrete sums
obey the same integration-by-parts identity as their continuous-time
counterparts; `simulate_wealth_euler` provides the step-by-step scheme as an
independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MarketModel, node_index
from .quadrature import simpson_nodes
from .stochastic import BrownianPath


@dataclass(frozen=True)
class PortfolioWeight:
    """Fraction of wealth in the risky asset (shorting/leverage allowed)."""

    value: float


@dataclass(frozen=True)
class WealthOutcome:
    """Log-returns of both traders on one path at time t."""

    path_id: int
    t: float
    log_return_honest: float
    log_return_insider: float


class WealthPositivityError(RuntimeError):
    """Plain-Euler wealth crossed zero (diagnostic for the non-log scheme)."""

    def __init__(self, step, wealth):
        super().__init__(
            f"plain-Euler wealth became non-positive at step {step} "
            f"(wealth {wealth}); use the log scheme"
        )
        self.step = step
        self.wealth = wealth


def honest_weight(model: MarketModel, s) -> PortfolioWeight:
    """Classical log-optimal fraction (mu(s) - r(s)) / sigma(s)^2."""
    sig = model.sigma(s)
    return PortfolioWeight((model.mu(s) - model.r(s)) / (sig * sig))


def insider_weight(model: MarketModel, s, b_s, b_T) -> PortfolioWeight:
    """Insider fraction: honest weight plus (B_T - B_s)/(sigma(s) (T - s)).

    Defined for s < T only; the anticipating term blows up at the horizon.
    """
    if s >= model.T:
        raise ValueError(
            f"insider weight undefined at s={s} >= T={model.T}: "
            "the anticipating term diverges at the horizon"
        )
    base = honest_weight(model, s).value
    return PortfolioWeight(base + (b_T - b_s) / (model.sigma(s) * (model.T - s)))


def _require_strategy_node(model, path, t):
    if path.grid.t_end != model.T:
        raise ValueError("path must be sampled on the full horizon grid [0, T]")
    if t >= model.T:
        raise ValueError(f"strategies are evaluated at t < T only (t={t}, T={model.T})")
    return node_index(path.grid, t)


def honest_log_return(model: MarketModel, path: BrownianPath, t) -> float:
    """log(M_t / M_0) for the honest trader along the path.

    Deterministic part: Simpson quadrature of r + (mu-r)^2/(2 sigma^2) on the
    grid nodes of [0, t].  Stochastic part: Ito sum of (mu-r)/sigma.
    """
    k = _require_strategy_node(model, path, t)
    nodes = path.grid.nodes
    det = honest_drift_integral(model, nodes[: k + 1], path.grid.dt)
    phi = _market_price_of_risk(model, nodes[:k])
    return det + _kahan_weighted(phi, path.increments, k)


def insider_log_return(model: MarketModel, path: BrownianPath, t) -> float:
    """log(M_t / M_0) for the insider along the path.

    Adds to the honest log-return the anticipating stochastic sum of
    (B_T - B_s)/(T - s) and subtracts half the left-rectangle sum of its
    square; the correction involves no market coefficients.
    """
    k = _require_strategy_node(model, path, t)
    fwd, quad = _gap_sums(path, k, model.T)
    return honest_log_return(model, path, t) + fwd - 0.5 * quad


def simulated_gap(path: BrownianPath, t) -> float:
    """Insider-minus-honest log-return on the path (coefficient-free)."""
    if t > path.grid.t_end:
        raise ValueError("t beyond the path horizon")
    k = node_index(path.grid, t)
    fwd, quad = _gap_sums(path, k, path.grid.t_end)
    return fwd - 0.5 * quad


def wealth_outcome(model: MarketModel, path: BrownianPath, t, path_id=0) -> WealthOutcome:
    """Both log-returns on one path (insider = honest + anticipating terms)."""
    k = _require_strategy_node(model, path, t)
    honest = honest_log_return(model, path, t)
    fwd, quad = _gap_sums(path, k, model.T)
    return WealthOutcome(
        path_id=path_id,
        t=float(t),
        log_return_honest=honest,
        log_return_insider=honest + fwd - 0.5 * quad,
    )


def simulate_wealth_euler(model: MarketModel, path: BrownianPath, t, who, scheme="log") -> float:
    """Step-by-step wealth simulation; returns log(M_t / M_0).

    The default log scheme propagates log M with increments
    (drift - pi^2 sigma^2 / 2) dt + pi sigma dW, which keeps wealth positive
    by construction.  scheme="plain" updates M itself (Euler on the wealth
    equation) and raises WealthPositivityError if wealth crosses zero.
    """
    if who not in ("honest", "insider"):
        raise ValueError(f"who must be 'honest' or 'insider', got {who!r}")
    if scheme not in ("log", "plain"):
        raise ValueError(f"scheme must be 'log' or 'plain', got {scheme!r}")
    k = _require_strategy_node(model, path, t)
    nodes = path.grid.nodes[:k]
    dt = path.grid.dt
    r = model.r(nodes)
    mu = model.mu(nodes)
    sig = model.sigma(nodes)
    pi = (mu - r) / (sig * sig)
    if who == "insider":
        b_T = path.terminal
        pi = pi + (b_T - path.values[:k]) / (sig * (model.T - nodes))
    drift = (1.0 - pi) * r + pi * mu
    inc = path.increments[:k]
    if scheme == "log":
        terms = (drift - 0.5 * pi * pi * sig * sig) * dt + pi * sig * inc
        return _kahan_sum(terms)
    m = 1.0
    for i in range(k):
        m = m * (1.0 + drift[i] * dt + pi[i] * sig[i] * inc[i])
        if m <= 0.0:
            raise WealthPositivityError(i, m)
    return float(np.log(m))


def _market_price_of_risk(model, nodes):
    return (model.mu(nodes) - model.r(nodes)) / model.sigma(nodes)


def honest_drift_integral(model, nodes, dx):
    """Simpson integral of r + (mu-r)^2/(2 sigma^2) over the given nodes.

    The deterministic part of the honest log-return; shared by the per-path
    evaluation and the Monte Carlo drivers so both combine identically.
    """
    r = model.r(nodes)
    mu = model.mu(nodes)
    sig = model.sigma(nodes)
    excess = mu - r
    return simpson_nodes(r + excess * excess / (2.0 * sig * sig), dx)


def _gap_sums(path, k, horizon):
    # left-point sums of the anticipating integrand and its squared ds-term,
    # in the same operation order as the Monte Carlo kernels
    vals = path.values
    inc = path.increments
    nodes = path.grid.nodes
    dt = path.grid.dt
    b_T = path.terminal
    s_f = 0.0
    c_f = 0.0
    s_q = 0.0
    c_q = 0.0
    for j in range(k):
        u = (b_T - vals[j]) / (horizon - nodes[j])
        y = u * inc[j] - c_f
        tt = s_f + y
        c_f = (tt - s_f) - y
        s_f = tt
        y = u * u * dt - c_q
        tt = s_q + y
        c_q = (tt - s_q) - y
        s_q = tt
    return s_f, s_q


def _kahan_weighted(phi, inc, k):
    s = 0.0
    c = 0.0
    for i in range(k):
        y = phi[i] * inc[i] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


def _kahan_sum(terms):
    s = 0.0
    c = 0.0
    for x in terms:
        y = x - c
        t = s + y
        c = (t - s) - y
        s = t
    return float(s)
