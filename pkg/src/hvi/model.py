"""Market coefficients and time discretization.

A market is Black-Scholes with one risky and one riskless asset on a fixed
investing period [0, T].  The rate r, drift mu, and volatility sigma are
deterministic functions of time, represented either as constants or as
piecewise-linear interpolants of user samples (linear interpolation keeps
them continuous and makes quadrature error analyzable).

Volatility positivity is enforced at the sample nodes only; for a piecewise
linear function positive node values imply positivity everywhere, so this is
exact for the representations supported here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CoefficientSpec = "float | Sequence[tuple[float, float]]"


@dataclass(frozen=True)
class Coefficient:
    """Constant or piecewise-linear deterministic function of time."""

    times: np.ndarray | None
    values: np.ndarray
    # constant iff times is None (values then holds a single entry)

    @classmethod
    def from_spec(cls, spec, horizon, name):
        if np.isscalar(spec):
            v = float(spec)
            if not np.isfinite(v):
                raise ValueError(f"{name}: coefficient must be finite, got {spec!r}")
            return cls(None, np.array([v]))
        pairs = list(spec)
        if len(pairs) == 0:
            raise ValueError(f"{name}: sample list must be non-empty")
        times = np.array([float(t) for t, _ in pairs])
        values = np.array([float(v) for _, v in pairs])
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(values)):
            raise ValueError(f"{name}: samples must be finite")
        if np.any(np.diff(times) <= 0):
            raise ValueError(f"{name}: sample times must be strictly increasing")
        if times[0] < 0 or times[-1] > horizon:
            raise ValueError(
                f"{name}: sample times must lie inside [0, {horizon}]"
            )
        if times[0] != 0.0 or times[-1] != horizon:
            raise ValueError(
                f"{name}: samples must cover [0, {horizon}] "
                f"(first time 0 and last time {horizon})"
            )
        return cls(times, values)

    @property
    def is_constant(self):
        return self.times is None

    def __call__(self, s):
        if self.times is None:
            if np.isscalar(s):
                return self.values[0]
            return np.full(np.shape(s), self.values[0])
        out = np.interp(s, self.times, self.values)
        return float(out) if np.isscalar(s) else out

    def spec(self):
        """Round-trippable spec: scalar or list of (time, value) pairs."""
        if self.times is None:
            return float(self.values[0])
        return [(float(t), float(v)) for t, v in zip(self.times, self.values)]


@dataclass(frozen=True)
class MarketModel:
    """Deterministic market coefficients r, mu, sigma on [0, T]."""

    T: float
    r: Coefficient
    mu: Coefficient
    sigma: Coefficient


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of n steps on [0, t_end]; nodes[0] = 0, nodes[n] = t_end."""

    t_end: float
    n: int
    nodes: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def dt(self):
        return self.t_end / self.n


def make_model(T, r, mu, sigma) -> MarketModel:
    """Build a market model from coefficient specs.

    Each spec is either a number or a sorted list of (time, value) samples
    covering [0, T]; evaluation between samples is linear interpolation.
    Raises ValueError for non-positive T, sigma samples <= 0, or malformed
    sample lists.
    """
    T = float(T)
    if not (np.isfinite(T) and T > 0):
        raise ValueError(f"horizon T must be positive and finite, got {T}")
    r_c = Coefficient.from_spec(r, T, "r")
    mu_c = Coefficient.from_spec(mu, T, "mu")
    sigma_c = Coefficient.from_spec(sigma, T, "sigma")
    if np.any(sigma_c.values <= 0):
        raise ValueError("sigma must be strictly positive at every sample")
    return MarketModel(T=T, r=r_c, mu=mu_c, sigma=sigma_c)


def grid(t_end, n) -> TimeGrid:
    """Uniform time grid: n steps of size t_end/n.

    Doubling n keeps the shared nodes bit-identical (step scaling by powers
    of two is exact) and inserts midpoints.
    """
    t_end = float(t_end)
    n = int(n)
    if not (np.isfinite(t_end) and t_end > 0):
        raise ValueError(f"t_end must be positive, got {t_end}")
    if n < 1:
        raise ValueError(f"step count must be >= 1, got {n}")
    nodes = np.arange(n + 1) * (t_end / n)
    nodes[n] = t_end
    nodes.flags.writeable = False
    return TimeGrid(t_end=t_end, n=n, nodes=nodes)


def node_index(g: TimeGrid, t) -> int:
    """Index of grid node equal to t; raises if t is not a node."""
    i = int(round(t / g.dt))
    if 0 <= i <= g.n and abs(g.nodes[min(i, g.n)] - t) <= 4 * np.spacing(max(1.0, abs(t))):
        return i
    raise ValueError(f"t={t} is not a node of the {g.n}-step grid on [0, {g.t_end}]")
