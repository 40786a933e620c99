"""Projection indices: variance, second- to fourth-order co-moments and CAPI.

An :class:`IndexSpec` is a declarative description; :func:`evaluate` computes
it on one score series, :func:`batch_objective` on many candidate series at
once (the grid search's hot path, served by the kernel backend).

Textual encoding (used by the CLI)::

    kind[:w1,w2,w3,w4,w5,w6][:trim=alpha][:scaled|unscaled]

e.g. ``capi:1,.5,.5,-0.03,-0.03,-0.03:trim=0.15:scaled``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _backend
from .comoments import (
    NO_TRIM,
    ComomentOrder,
    TrimSpec,
    _scale,
    _tmean,
    as_series,
    product_comoment,
    trim_count,
)

__all__ = [
    "CAPI_ORDERS",
    "CapiWeights",
    "IndexSpec",
    "KINDS",
    "batch_objective",
    "batch_values",
    "evaluate",
    "objective",
    "truncate_weights",
]

KINDS = (
    "variance",
    "covariance",
    "covariance_squared",
    "correlation",
    "cosk1",
    "cosk2",
    "coku1",
    "coku2",
    "coku3",
    "capi",
)

# canonical flattening of the double-indexed CAPI weights
CAPI_ORDERS = (
    ComomentOrder(1, 1),
    ComomentOrder(2, 1),
    ComomentOrder(1, 2),
    ComomentOrder(3, 1),
    ComomentOrder(2, 2),
    ComomentOrder(1, 3),
)

_SINGLE_ORDER = {
    "variance": ComomentOrder(1, 1),
    "covariance": ComomentOrder(1, 1),
    "covariance_squared": ComomentOrder(1, 1),
    "correlation": ComomentOrder(1, 1),
    "cosk1": ComomentOrder(2, 1),
    "cosk2": ComomentOrder(1, 2),
    "coku1": ComomentOrder(3, 1),
    "coku2": ComomentOrder(2, 2),
    "coku3": ComomentOrder(1, 3),
}
_FIXED_SCALING = {
    "variance": False,
    "covariance": False,
    "covariance_squared": False,
    "correlation": True,
}
# maximized through their square, so the sign of the direction is free
_SQUARED_OBJECTIVE = {"covariance", "covariance_squared", "correlation"}

DEFAULT_OMEGA = (1.0, 0.5, 0.5, -0.03, -0.03, -0.03)


@dataclass(frozen=True)
class CapiWeights:
    """Weights for (1,1), (2,1), (1,2), (3,1), (2,2), (1,3), in that order."""

    omega: tuple[float, ...] = DEFAULT_OMEGA

    def __post_init__(self):
        om = tuple(float(w) for w in self.omega)
        if len(om) > 6:
            raise ValueError("CAPI takes at most six weights")
        om = om + (0.0,) * (6 - len(om))
        if not all(np.isfinite(om)):
            raise ValueError("CAPI weights must be finite")
        if not any(om):
            raise ValueError("at least one CAPI weight must be nonzero")
        object.__setattr__(self, "omega", om)


def truncate_weights(weights: CapiWeights, max_order: int) -> CapiWeights:
    """Zero all weights on co-moments above ``max_order`` (2, 3 or 4)."""
    if max_order not in (2, 3, 4):
        raise ValueError("max order must be 2, 3 or 4")
    om = tuple(w if o.total <= max_order else 0.0 for w, o in zip(weights.omega, CAPI_ORDERS))
    return CapiWeights(om)


@dataclass(frozen=True)
class IndexSpec:
    kind: str = "capi"
    capi_weights: CapiWeights = field(default_factory=CapiWeights)
    scaled: bool = True
    trim: TrimSpec = NO_TRIM

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown index kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.capi_weights, CapiWeights):
            object.__setattr__(self, "capi_weights", CapiWeights(tuple(self.capi_weights)))
        if not isinstance(self.trim, TrimSpec):
            object.__setattr__(self, "trim", TrimSpec.of(self.trim))
        if self.kind in _FIXED_SCALING:
            object.__setattr__(self, "scaled", _FIXED_SCALING[self.kind])

    @property
    def needs_y(self) -> bool:
        return self.kind != "variance"

    @property
    def squared_objective(self) -> bool:
        return self.kind in _SQUARED_OBJECTIVE

    def terms(self) -> tuple[tuple[ComomentOrder, ...], tuple[float, ...]]:
        """Co-moment orders and their weights, zero weights dropped."""
        if self.kind == "capi":
            pairs = [(o, w) for o, w in zip(CAPI_ORDERS, self.capi_weights.omega) if w != 0.0]
            return tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)
        return (_SINGLE_ORDER[self.kind],), (1.0,)

    def with_trim(self, alpha: float) -> "IndexSpec":
        return replace(self, trim=TrimSpec.of(alpha))

    # -- textual encoding -------------------------------------------------
    def to_text(self) -> str:
        parts = [self.kind]
        if self.kind == "capi":
            parts.append(",".join(repr(w) for w in self.capi_weights.omega))
        if self.trim.active:
            parts.append(f"trim={self.trim.alpha!r}")
        if self.kind not in _FIXED_SCALING:
            parts.append("scaled" if self.scaled else "unscaled")
        return ":".join(parts)

    @classmethod
    def parse(cls, text: str) -> "IndexSpec":
        tokens = [t.strip() for t in text.strip().split(":")]
        kind = tokens[0]
        if kind not in KINDS:
            raise ValueError(f"unknown index kind {kind!r}")
        kw: dict = {"kind": kind}
        for tok in tokens[1:]:
            if not tok:
                raise ValueError(f"empty field in index spec {text!r}")
            if tok in ("scaled", "unscaled"):
                want = tok == "scaled"
                if kind in _FIXED_SCALING and _FIXED_SCALING[kind] != want:
                    raise ValueError(f"{kind} cannot be {tok}")
                kw["scaled"] = want
            elif tok.startswith("trim="):
                kw["trim"] = TrimSpec.of(float(tok[5:]))
            elif kind == "capi" and "capi_weights" not in kw:
                kw["capi_weights"] = CapiWeights(tuple(float(w) for w in tok.split(",")))
            else:
                raise ValueError(f"unrecognized field {tok!r} in index spec {text!r}")
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "capi_weights": list(self.capi_weights.omega),
            "scaled": self.scaled,
            "trim": self.trim.effective_alpha,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IndexSpec":
        return cls(
            kind=d["kind"],
            capi_weights=CapiWeights(tuple(d["capi_weights"])),
            scaled=bool(d["scaled"]),
            trim=TrimSpec.of(d["trim"]),
        )


def _check_y(index: IndexSpec, y, n: int):
    if not index.needs_y:
        return None
    if y is None:
        raise ValueError("dependent series required")
    y = as_series(y, "y")
    if y.size != n:
        raise ValueError(f"length mismatch: {n} != {y.size}")
    return y


def evaluate(index: IndexSpec, scores, y=None) -> float:
    """Value of ``index`` for one projected score series (and ``y``)."""
    s = as_series(scores, "scores")
    y = _check_y(index, y, s.size)
    v = s if y is None else y
    orders, weights = index.terms()
    total = 0.0
    for order, w in zip(orders, weights):
        total += w * product_comoment(s, v, order, index.scaled, index.trim)
    if index.kind == "covariance_squared":
        return total * total
    return total


def objective(index: IndexSpec, scores, y=None) -> float:
    """The quantity actually maximized: :func:`evaluate`, squared for cov/corr kinds."""
    val = evaluate(index, scores, y)
    if index.kind in ("covariance", "correlation"):
        return val * val
    return val


def batch_values(index: IndexSpec, S, y=None, backend=None) -> np.ndarray:
    """Raw (unsquared) weighted co-moment sum for each row of ``S``.

    Rows with degenerate scale come back as NaN when the index is scaled.
    """
    S = np.ascontiguousarray(S, dtype=float)
    if S.ndim != 2:
        raise ValueError("candidate scores must be a 2-D (m, n) array")
    n = S.shape[1]
    y = _check_y(index, y, n)
    k = trim_count(n, index.trim.effective_alpha)
    vc, sdv = None, 1.0
    if y is not None:
        if index.scaled:
            vc, sdv = _scale(y, k)
        else:
            vc = y - _tmean(y, k)
    orders, weights = index.terms()
    eu = [o.exp_u for o in orders]
    ev = [o.exp_v for o in orders]
    return _backend.comoment_batch(S, vc, sdv, eu, ev, weights, index.scaled, k, backend=backend)


def batch_objective(index: IndexSpec, S, y=None, backend=None) -> np.ndarray:
    vals = batch_values(index, S, y, backend=backend)
    if index.squared_objective:
        return vals * vals
    return vals
