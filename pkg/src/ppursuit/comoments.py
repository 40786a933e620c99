"""Finite-sample product co-moments of two series, optionally trimmed.

All estimators use the empirical (divide-by-n) convention and center both
series by their own, possibly trimmed, means before forming products.
Trimming is symmetric: ``k = floor(n * alpha / 2)`` values are discarded
from each tail of whatever quantity is being averaged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ComomentOrder",
    "DegenerateScaleError",
    "TrimSpec",
    "NO_TRIM",
    "as_series",
    "consistency_factor",
    "product_comoment",
    "scale_estimate",
    "trim_count",
    "trimmed_mean",
]

# sigma below this fraction of max|x| counts as zero
DEGENERATE_RTOL = 1e-12


class DegenerateScaleError(ValueError):
    """Raised when a scale estimate is numerically zero."""

    def __init__(self, msg: str = "degenerate scale"):
        super().__init__(msg)


@dataclass(frozen=True)
class TrimSpec:
    """Total fraction ``alpha`` trimmed, split evenly over both tails."""

    alpha: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if not (0.0 <= self.alpha < 0.5) or not math.isfinite(self.alpha):
            raise ValueError(f"trim alpha must lie in [0, 0.5), got {self.alpha!r}")

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.enabled else 0.0

    @property
    def active(self) -> bool:
        return self.effective_alpha > 0.0

    @classmethod
    def of(cls, alpha: float | None) -> "TrimSpec":
        if alpha is None or alpha == 0:
            return NO_TRIM
        return cls(float(alpha), True)


NO_TRIM = TrimSpec(0.0, False)


@dataclass(frozen=True)
class ComomentOrder:
    """Exponents of the centered series in ``mean(u**exp_u * v**exp_v)``."""

    exp_u: int
    exp_v: int

    def __post_init__(self):
        if self.exp_u < 1 or self.exp_v < 1:
            raise ValueError("co-moment exponents must be >= 1")
        if not 2 <= self.exp_u + self.exp_v <= 4:
            raise ValueError("co-moment order must be between 2 and 4")

    @property
    def total(self) -> int:
        return self.exp_u + self.exp_v

    def swapped(self) -> "ComomentOrder":
        return ComomentOrder(self.exp_v, self.exp_u)


def as_series(x, name: str = "series") -> np.ndarray:
    """Validate ``x`` as a nonempty, finite 1-D float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size == 0:
        raise ValueError("empty input")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite value")
    return arr


def trim_count(n: int, alpha: float) -> int:
    """Number of values dropped from *each* tail of a length-``n`` sample."""
    if alpha <= 0:
        return 0
    # guard against 0.15 * 1000 / 2 landing just below an integer
    return int(math.floor(n * alpha / 2.0 + 1e-9))


def _tmean(x: np.ndarray, k: int) -> float:
    if k == 0:
        return float(np.mean(x))
    n = x.size
    return float(np.mean(np.sort(x)[k:n - k]))


def trimmed_mean(x, trim: TrimSpec = NO_TRIM) -> float:
    """Mean after removing the ``k`` smallest and ``k`` largest entries.

    >>> trimmed_mean([1, 2, 3, 4, 5, 6, 7, 8, 9, 100], TrimSpec(0.2))
    5.5
    """
    x = as_series(x)
    return _tmean(x, trim_count(x.size, trim.effective_alpha))


def _scale(x: np.ndarray, k: int) -> tuple[np.ndarray, float]:
    xc = x - _tmean(x, k)
    sd = math.sqrt(_tmean(xc * xc, k))
    if sd <= DEGENERATE_RTOL * float(np.max(np.abs(x))):
        raise DegenerateScaleError()
    return xc, sd


def scale_estimate(x, trim: TrimSpec = NO_TRIM) -> float:
    """Square root of the (trimmed) mean of squared deviations.

    Untrimmed, this is the population standard deviation. Raises
    :class:`DegenerateScaleError` for (numerically) constant input.
    """
    x = as_series(x)
    return _scale(x, trim_count(x.size, trim.effective_alpha))[1]


def consistency_factor(n: int) -> float:
    """Finite-sample factor ``n / ((n - 1)(n - 2))`` for third-order co-moments."""
    if n < 3:
        raise ValueError("consistency factor needs n >= 3")
    return n / ((n - 1.0) * (n - 2.0))


def product_comoment(
    u,
    v,
    order: ComomentOrder | tuple[int, int],
    scaled: bool = False,
    trim: TrimSpec = NO_TRIM,
    consistency: bool = False,
) -> float:
    """Estimate ``E[u^a v^b]`` of the centered pair, ``(a, b) = order``.

    Parameters
    ----------
    u, v : array_like
        Paired samples of equal length ``n >= 3``.
    order : ComomentOrder or (int, int)
        Exponents on ``u`` and ``v``. (1, 1) is covariance, (2, 1) and
        (1, 2) the two co-skewness variants, (3, 1), (2, 2), (1, 3) the
        co-kurtosis variants.
    scaled : bool
        Divide by ``sigma_u**a * sigma_v**b``; turns covariance into
        correlation and makes the result invariant to positive rescaling.
    trim : TrimSpec
        Trimming applied to centering, scale and the product terms alike.
    consistency : bool
        For third-order co-moments without trimming, replace the mean of
        the product terms by ``consistency_factor(n) * sum``.
    """
    if not isinstance(order, ComomentOrder):
        order = ComomentOrder(*order)
    u = as_series(u, "u")
    v = as_series(v, "v")
    n = u.size
    if v.size != n:
        raise ValueError(f"length mismatch: {n} != {v.size}")
    if n < 3:
        raise ValueError("co-moments need at least 3 observations")
    k = trim_count(n, trim.effective_alpha)

    if scaled:
        uc, su = _scale(u, k)
        vc, sv = _scale(v, k)
    else:
        uc = u - _tmean(u, k)
        vc = v - _tmean(v, k)

    a, b = order.exp_u, order.exp_v
    prod = (uc ** a) * (vc ** b)
    if consistency and order.total == 3 and k == 0:
        m = consistency_factor(n) * float(np.sum(prod))
    else:
        m = _tmean(prod, k)
    if scaled:
        m = m / ((su ** a) * (sv ** b))
    return m
