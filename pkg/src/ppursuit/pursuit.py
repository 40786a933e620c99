"""Multi-component projection pursuit with deflation and a least-squares inner model."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .comoments import _tmean, trim_count
from .grid import GridConfig, GridError, _as_matrix, optimize_direction
from .indices import IndexSpec

__all__ = ["PursuitModel", "fit", "transform", "predict", "center_values"]


def center_values(X, trim_alpha: float = 0.0):
    """Column centers: plain means, or trimmed means when ``trim_alpha > 0``."""
    X = np.asarray(X, dtype=float)
    k = trim_count(X.shape[0], trim_alpha)
    if X.ndim == 1:
        return _tmean(X, k)
    return np.array([_tmean(X[:, j], k) for j in range(X.shape[1])])


@dataclass(frozen=True)
class PursuitModel:
    """A fitted model. Arrays are stored column-per-component.

    ``weights`` and ``loadings`` are (p, h), ``scores`` is (n, h),
    ``gamma`` is (h,). ``gamma`` and ``y_center`` are None when fitted
    without a dependent series.
    """

    weights: np.ndarray
    scores: np.ndarray
    loadings: np.ndarray
    gamma: np.ndarray | None
    x_center: np.ndarray
    y_center: float | None
    index: IndexSpec
    cfg: GridConfig = field(default_factory=GridConfig)
    h_requested: int = 1
    stopped_early: bool = False
    column_names: tuple[str, ...] | None = None

    @property
    def h(self) -> int:
        return self.weights.shape[1]

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "format": "ppursuit-model/1",
            "index": self.index.to_dict(),
            "index_text": self.index.to_text(),
            "grid": self.cfg.to_dict(),
            "h_requested": self.h_requested,
            "h": self.h,
            "stopped_early": self.stopped_early,
            "column_names": None if self.column_names is None else list(self.column_names),
            "x_center": arr(self.x_center),
            "y_center": self.y_center,
            "weights": arr(self.weights),
            "loadings": arr(self.loadings),
            "gamma": arr(self.gamma),
            "scores": arr(self.scores),
        }

    def to_json(self) -> str:
        # json emits floats via repr, which round-trips exactly
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "PursuitModel":
        p = len(d["x_center"])
        h = d["h"]

        def mat(a, rows):
            return np.array(a, dtype=float).reshape(rows, h)

        gamma = None if d["gamma"] is None else np.array(d["gamma"], dtype=float).reshape(h)
        return cls(
            weights=mat(d["weights"], p),
            scores=mat(d["scores"], len(d["scores"])),
            loadings=mat(d["loadings"], p),
            gamma=gamma,
            x_center=np.array(d["x_center"], dtype=float),
            y_center=d["y_center"],
            index=IndexSpec.from_dict(d["index"]),
            cfg=GridConfig(**d["grid"]),
            h_requested=d["h_requested"],
            stopped_early=d["stopped_early"],
            column_names=None if d["column_names"] is None else tuple(d["column_names"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "PursuitModel":
        return cls.from_dict(json.loads(text))


def fit(
    X,
    y=None,
    index: IndexSpec | None = None,
    h: int = 1,
    cfg: GridConfig | None = None,
    seed: int = 0,
    column_names=None,
) -> PursuitModel:
    """Fit ``h`` components by grid search and deflation.

    For each component the direction ``w`` maximizing the index on the
    current residual matrix ``E`` gives scores ``t = E w`` and loadings
    ``p = E't / |t|^2``; then ``E <- E - t p'``. Scores are therefore
    mutually orthogonal and the inner coefficients reduce to
    ``gamma_i = t_i'y / |t_i|^2``.

    Fitting stops early (``stopped_early=True``) when a residual score is
    numerically zero or no admissible direction remains.
    """
    index = index or IndexSpec()
    cfg = cfg or GridConfig()
    X = _as_matrix(X)
    n, p = X.shape
    if not 1 <= h <= min(n, p):
        raise ValueError(f"h must lie in [1, {min(n, p)}], got {h}")
    if y is not None:
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.size != n:
            raise ValueError(f"length mismatch: {n} != {y.size}")
        if not np.all(np.isfinite(y)):
            raise ValueError("non-finite value")
    elif index.needs_y:
        raise ValueError("dependent series required")

    alpha = index.trim.effective_alpha
    x_center = center_values(X, alpha)
    E = X - x_center
    y_center = None
    yc = None
    if y is not None:
        y_center = float(center_values(y, alpha))
        yc = y - y_center

    norm0 = np.linalg.norm(E)
    W, T, P = [], [], []
    stopped = False
    for _ in range(h):
        try:
            w = optimize_direction(E, yc, index, cfg, seed)
        except GridError:
            stopped = True
            break
        t = E @ w
        tt = float(t @ t)
        if np.sqrt(tt) < 1e-12 * norm0 or tt == 0.0:
            stopped = True
            break
        pl = (E.T @ t) / tt
        E = E - np.outer(t, pl)
        W.append(w)
        T.append(t)
        P.append(pl)

    if not W:
        raise GridError("no admissible direction")
    W = np.column_stack(W)
    T = np.column_stack(T)
    P = np.column_stack(P)
    gamma = None
    if yc is not None:
        gamma = (T.T @ yc) / np.einsum("ij,ij->j", T, T)
    names = None if column_names is None else tuple(str(c) for c in column_names)
    return PursuitModel(W, T, P, gamma, x_center, y_center, index, cfg, h, stopped, names)


def transform(model: PursuitModel, Xnew) -> np.ndarray:
    """Scores of new observations through the stored deflation chain."""
    Xnew = np.asarray(Xnew, dtype=float)
    if Xnew.ndim == 1:
        Xnew = Xnew[None, :]
    Xnew = np.ascontiguousarray(Xnew)
    if Xnew.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} columns, got {Xnew.shape[1]}")
    E = Xnew - model.x_center
    T = np.empty((E.shape[0], model.h))
    for i in range(model.h):
        t = E @ model.weights[:, i]
        T[:, i] = t
        E = E - np.outer(t, model.loadings[:, i])
    return T


def predict(model: PursuitModel, Xnew) -> np.ndarray:
    if model.gamma is None:
        raise ValueError("unsupervised model")
    return model.y_center + transform(model, Xnew) @ model.gamma
