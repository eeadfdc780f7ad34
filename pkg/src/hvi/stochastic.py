"""Brownian paths and grid stochastic integrals.

Paths are sampled from deterministic, splittable random streams: stream
(seed, index) always yields the same normal variates, on any platform and
under any worker count (see `kernels`).  Integrals are left-point Riemann
sums on the simulation grid; for anticipating integrands this discretizes
the forward (limit-of-mollified-sums) integral, with the grid step playing
the mollification parameter's role, and for adapted integrands it coincides
with the Ito sum on the same path.  Sums are Kahan-compensated.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .model import TimeGrid

ITO_LEFT = "ito_left"
FORWARD_LEFT = "forward_left"


@dataclass(frozen=True)
class RngStream:
    """Handle for one deterministic normal-variate stream."""

    seed: int
    index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not 0 <= int(self.index) < 2**64:
            raise ValueError("stream index must fit in 64 bits")

    def normals(self, count, start=0):
        return kernels.normals(self.seed, self.index, start, count)


@dataclass(frozen=True)
class BrownianPath:
    """One sampled trajectory W on a uniform grid, W(0) = 0."""

    grid: TimeGrid
    values: np.ndarray

    @cached_property
    def increments(self):
        """W(t_{i+1}) - W(t_i); recomposes values to one rounding per step."""
        d = np.diff(self.values)
        d.flags.writeable = False
        return d

    @property
    def terminal(self):
        """W at the final node (the value the insider observes)."""
        return float(self.values[-1])


@dataclass(frozen=True)
class IntegralResult:
    value: float
    rule: str
    steps: int


def sample_path(grid: TimeGrid, rng: RngStream) -> BrownianPath:
    """Sample W on the grid; increments are iid N(0, dt).

    Callers that evaluate strategies on [0, t] must still sample on the full
    horizon grid (grid.t_end = T) so the terminal value is a genuine path
    value.
    """
    z = rng.normals(grid.n)
    dw = z * np.sqrt(grid.dt)
    values = np.empty(grid.n + 1)
    values[0] = 0.0
    np.cumsum(dw, out=values[1:])
    values.flags.writeable = False
    return BrownianPath(grid=grid, values=values)


def _left_sum(phi, increments, k):
    # Kahan-compensated sum of phi[i] * dW[i], i < k
    s = 0.0
    c = 0.0
    for i in range(k):
        y = phi[i] * increments[i] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


def _check_up_to(phi, path, up_to):
    k = int(up_to)
    if k < 0 or k > path.grid.n:
        raise IndexError(f"up_to={up_to} outside the {path.grid.n}-step grid")
    if len(phi) < k:
        raise IndexError(f"integrand has {len(phi)} entries, need {k}")
    return k


def ito_integral(phi, path: BrownianPath, up_to) -> IntegralResult:
    """Left-point Ito sum of an adapted integrand against the path.

    phi holds integrand values at the left nodes t_0..t_{k-1}; the value is
    sum_{i<k} phi_i (W(t_{i+1}) - W(t_i)).
    """
    k = _check_up_to(phi, path, up_to)
    return IntegralResult(
        value=_left_sum(np.asarray(phi, dtype=np.float64), path.increments, k),
        rule=ITO_LEFT,
        steps=path.grid.n,
    )


def forward_integral(phi, path: BrownianPath, up_to) -> IntegralResult:
    """Left-point sum with forward increments; phi may anticipate.

    Same arithmetic as `ito_integral` (and the same number on the same path
    for adapted phi); kept distinct because the integrand may depend on the
    whole path, e.g. on the terminal value.
    """
    k = _check_up_to(phi, path, up_to)
    return IntegralResult(
        value=_left_sum(np.asarray(phi, dtype=np.float64), path.increments, k),
        rule=FORWARD_LEFT,
        steps=path.grid.n,
    )
