"""Default-free zero-coupon bond under a mean-reverting affine short rate.

The short rate follows

    dr(t) = (a1(t) - a2(t) * r) dt + s_r(t) dW(t)

with a2(t) > 0 and s_r(t) >= 0, all three coefficients piecewise
constant in time (constants being the classic Vasicek case). The
discount bond maturing at T is affine,

    Z(r, t) = exp(A(t) - B(t) * r),

where B solves B' = a2(t) * B - 1 backward from B(T) = 0 and

    A(t) = -int_t^T [ a1(u) * B(u) - s_r(u)^2 * B(u)^2 / 2 ] du.

For constant coefficients both A and B have closed forms; piecewise
coefficients are handled segment by segment (B still in closed form,
A by fixed high-order Gauss-Legendre quadrature per segment, which is
exact to machine precision for these smooth integrands).

``paper_literal_a`` is a diagnostic switch that builds A from the
mean-reversion coefficient a2 instead of the drift level a1. That
variant is NOT a solution of the discount-bond equation (the PDE
residual check exposes it); it exists so the discrepancy between the
two conventions can be demonstrated from the command line.

All functions accept scalar or ndarray times and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PiecewiseConstant",
    "ShortRateModel",
    "coeff_A",
    "coeff_B",
    "zcb_price",
]

# Below this value of a2*(T-t) the closed forms switch to Taylor series
# to dodge catastrophic cancellation.
_SMALL_B = 1e-6
_SMALL_A = 1e-4

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class PiecewiseConstant:
    """Right-continuous step function of time.

    ``values[i]`` applies on [breakpoints[i-1], breakpoints[i]), with
    values[0] before the first breakpoint and values[-1] after the last.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != len(self.breakpoints) + 1:
            raise ValueError(
                f"need {len(self.breakpoints) + 1} values for "
                f"{len(self.breakpoints)} breakpoints, got {len(self.values)}"
            )
        if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstant":
        return cls((), (float(value),))

    @property
    def is_constant(self) -> bool:
        return len(self.breakpoints) == 0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints), t, side="right")
        out = np.asarray(self.values)[idx]
        return float(out) if out.ndim == 0 else out


def _as_step(f) -> PiecewiseConstant:
    if isinstance(f, PiecewiseConstant):
        return f
    return PiecewiseConstant.constant(f)


@dataclass(frozen=True)
class ShortRateModel:
    """Affine short-rate model coefficients and bond maturity.

    a1 : drift level (rate units / year)
    a2 : mean-reversion speed (1/year), must stay positive
    s_r : rate volatility (rate units / sqrt(year)), nonnegative
    maturity : discount-bond maturity T in years
    paper_literal_a : diagnostic A-convention switch (see module docs)
    """

    a1: PiecewiseConstant | float
    a2: PiecewiseConstant | float
    s_r: PiecewiseConstant | float
    maturity: float
    paper_literal_a: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a1", _as_step(self.a1))
        object.__setattr__(self, "a2", _as_step(self.a2))
        object.__setattr__(self, "s_r", _as_step(self.s_r))
        object.__setattr__(self, "maturity", float(self.maturity))
        if not self.maturity > 0.0:
            raise ValueError(f"maturity must be positive, got {self.maturity}")
        for name in ("a1", "a2", "s_r"):
            bps = getattr(self, name).breakpoints
            if any(b <= 0.0 or b >= self.maturity for b in bps):
                raise ValueError(
                    f"{name} breakpoints must lie strictly inside "
                    f"(0, {self.maturity}), got {bps}"
                )
        grid = self._segment_edges()[:-1]
        if np.any(np.atleast_1d(self.a2(grid)) <= 0.0):
            raise ValueError("a2(t) must be positive on [0, maturity]")
        if np.any(np.atleast_1d(self.s_r(grid)) < 0.0):
            raise ValueError("s_r(t) must be nonnegative on [0, maturity]")

    def _segment_edges(self) -> np.ndarray:
        """Boundaries 0 = e0 < ... < em = T between constant-coefficient spans."""
        pts = {0.0, self.maturity}
        for f in (self.a1, self.a2, self.s_r):
            pts.update(f.breakpoints)
        return np.array(sorted(pts))

    @property
    def is_constant(self) -> bool:
        return self.a1.is_constant and self.a2.is_constant and self.s_r.is_constant


def _ramp(a2, tau):
    """(1 - exp(-a2*tau)) / a2 with a Taylor branch for tiny a2*tau."""
    a2 = np.asarray(a2, dtype=float)
    tau = np.asarray(tau, dtype=float)
    x = a2 * tau
    small = x < _SMALL_B
    safe_a2 = np.where(small, 1.0, a2)
    exact = -np.expm1(-x) / safe_a2
    series = tau * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0)
    return np.where(small, series, exact)


def _check_time(model: ShortRateModel, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(np.isnan(t)) or np.any(t < 0.0) or np.any(t > model.maturity):
        raise ValueError(
            f"time must lie in [0, {model.maturity}], got {t!r}"
        )
    return t


def _boundary_B(model: ShortRateModel) -> tuple[np.ndarray, np.ndarray]:
    """B at every segment edge, swept backward from B(T) = 0."""
    edges = model._segment_edges()
    m = len(edges) - 1
    b = np.zeros(m + 1)
    for j in range(m - 1, -1, -1):
        a2 = float(model.a2(edges[j]))
        length = edges[j + 1] - edges[j]
        b[j] = b[j + 1] * np.exp(-a2 * length) + _ramp(a2, length)
    return edges, b


def coeff_B(model: ShortRateModel, t):
    """Rate-sensitivity coefficient B(t) of the discount bond.

    Closed form per constant-coefficient segment; B(T) = 0 and B >= 0.
    Scalar in, scalar out; arrays are mapped elementwise.
    """
    t_arr = _check_time(model, t)
    edges, b_edges = _boundary_B(model)
    j = np.clip(np.searchsorted(edges, t_arr, side="right") - 1, 0, len(edges) - 2)
    a2 = np.asarray(model.a2(edges[j]))
    tau = edges[j + 1] - t_arr
    out = b_edges[j + 1] * np.exp(-a2 * tau) + _ramp(a2, tau)
    return float(out) if out.ndim == 0 else out


def _A_constant(level, a2, s_r, tau):
    """Closed-form A over a horizon tau with constant coefficients."""
    level = np.asarray(level, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    s_r = np.asarray(s_r, dtype=float)
    tau = np.asarray(tau, dtype=float)
    x = a2 * tau
    small = x < _SMALL_A
    safe_a2 = np.where(small, 1.0, a2)
    b = _ramp(a2, tau)
    exact = (b - tau) * (level / safe_a2 - s_r**2 / (2.0 * safe_a2**2)) \
        - s_r**2 * b * b / (4.0 * safe_a2)
    tau2 = tau * tau
    series = (
        -level * tau2 * (0.5 - x / 6.0 + x * x / 24.0)
        + 0.5 * s_r**2 * tau2 * tau * (1.0 / 3.0 - x / 4.0 + 7.0 * x * x / 60.0)
    )
    return np.where(small, series, exact)


def coeff_A(model: ShortRateModel, t):
    """Log-level coefficient A(t) of the discount bond; A(T) = 0.

    Constant coefficients use the closed form. Piecewise-constant
    coefficients integrate a1(u)*B(u) - s_r(u)^2*B(u)^2/2 segment by
    segment with 64-point Gauss-Legendre rules (absolute accuracy well
    below 1e-12 for these analytic pieces).
    """
    t_arr = _check_time(model, t)
    level_fn = model.a2 if model.paper_literal_a else model.a1

    if model.is_constant:
        out = _A_constant(
            float(level_fn(0.0)),
            float(model.a2(0.0)),
            float(model.s_r(0.0)),
            model.maturity - t_arr,
        )
        return float(out) if out.ndim == 0 else out

    def integrand(u):
        b = coeff_B(model, u)
        return np.asarray(level_fn(u)) * b - 0.5 * np.asarray(model.s_r(u)) ** 2 * b * b

    def gl_piece(lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        c = 0.5 * (lo + hi)
        h = 0.5 * (hi - lo)
        u = c[..., None] + h[..., None] * _GL_NODES
        vals = integrand(u.ravel()).reshape(u.shape)
        return h * (vals @ _GL_WEIGHTS)

    edges = model._segment_edges()
    # Tail integrals from each edge out to maturity.
    seg_int = np.array([gl_piece(edges[k], edges[k + 1]) for k in range(len(edges) - 1)])
    tail = np.concatenate([np.cumsum(seg_int[::-1])[::-1], [0.0]])

    flat = np.atleast_1d(t_arr)
    j = np.clip(np.searchsorted(edges, flat, side="right") - 1, 0, len(edges) - 2)
    partial = gl_piece(flat, edges[j + 1])
    out = -(partial + tail[j + 1])
    return float(out[0]) if np.ndim(t_arr) == 0 else out.reshape(t_arr.shape)


def zcb_price(model: ShortRateModel, r, t):
    """Discount bond price Z(r, t) = exp(A(t) - B(t) * r); Z(r, T) = 1."""
    a = coeff_A(model, t)
    b = coeff_B(model, t)
    out = np.exp(np.asarray(a) - np.asarray(b) * np.asarray(r, dtype=float))
    return float(out) if out.ndim == 0 else out
