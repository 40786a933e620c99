"""Generalized betas: first-component CAPI weights against a market index."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .comoments import NO_TRIM, TrimSpec
from .grid import GridConfig
from .indices import CapiWeights, IndexSpec, truncate_weights
from .ingest import ReturnsPanel
from .pursuit import fit

__all__ = ["BetaReport", "RollingReport", "classical_betas", "cmd_betas", "cmd_rolling"]

MIN_WINDOW_ROWS = 15


def classical_betas(X, y) -> np.ndarray:
    """OLS slopes ``cov(x_j, y) / var(y)`` for every column of ``X``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    yc = y - y.mean()
    vy = float(yc @ yc)
    if vy <= 1e-300:
        raise ValueError("degenerate index column")
    return (X - X.mean(axis=0)).T @ yc / vy


def _first_weights(X, y, omega: CapiWeights, scaled: bool, trim: TrimSpec, cfg: GridConfig):
    idx = IndexSpec("capi", omega, scaled, trim)
    return fit(X, y, idx, h=1, cfg=cfg).weights[:, 0]


@dataclass(frozen=True)
class BetaReport:
    symbols: tuple
    classical_beta: np.ndarray
    capi_weights_by_order: dict
    index_text: dict = field(default_factory=dict)

    def rows(self):
        orders = sorted(self.capi_weights_by_order)
        for j, s in enumerate(self.symbols):
            yield s, float(self.classical_beta[j]), [float(self.capi_weights_by_order[o][j]) for o in orders]

    def header(self):
        return ["symbol", "beta"] + [f"order_{o}" for o in sorted(self.capi_weights_by_order)]

    def to_dict(self) -> dict:
        return {
            "symbols": list(self.symbols),
            "classical_beta": self.classical_beta.tolist(),
            "capi_weights_by_order": {str(k): v.tolist() for k, v in sorted(self.capi_weights_by_order.items())},
            "index": {str(k): v for k, v in sorted(self.index_text.items())},
        }


def cmd_betas(panel: ReturnsPanel, omega: CapiWeights | None = None, trim: TrimSpec = NO_TRIM,
              orders=(2, 3, 4), scaled: bool = False, cfg: GridConfig | None = None) -> BetaReport:
    """Classical betas and, per maximum co-moment order, the CAPI weight vector.

    For order 2 only the covariance weight is kept, order 3 adds both
    co-skewness weights and order 4 all co-kurtosis weights.
    """
    if panel.y is None:
        raise ValueError("panel has no index series")
    omega = omega or CapiWeights()
    cfg = cfg or GridConfig()
    betas = classical_betas(panel.matrix, panel.y)
    by_order, texts = {}, {}
    for o in orders:
        om = truncate_weights(omega, int(o))
        by_order[int(o)] = _first_weights(panel.matrix, panel.y, om, scaled, trim, cfg)
        texts[int(o)] = IndexSpec("capi", om, scaled, trim).to_text()
    return BetaReport(panel.symbols, betas, by_order, texts)


@dataclass(frozen=True)
class RollingReport:
    symbols: tuple
    window_labels: tuple
    weights_per_window: tuple
    skipped: tuple = ()

    @property
    def weight_matrix(self) -> np.ndarray:
        return np.vstack(self.weights_per_window)

    @property
    def mean(self) -> np.ndarray:
        return self.weight_matrix.mean(axis=0)

    @property
    def sd(self) -> np.ndarray:
        W = self.weight_matrix
        return W.std(axis=0, ddof=1) if W.shape[0] > 1 else np.zeros(W.shape[1])

    def to_dict(self) -> dict:
        return {
            "symbols": list(self.symbols),
            "windows": list(self.window_labels),
            "weights": [w.tolist() for w in self.weights_per_window],
            "skipped": list(self.skipped),
            "mean": self.mean.tolist(),
            "std": self.sd.tolist(),
        }


def month_labels(dates) -> list[str]:
    return [f"{d.year:04d}-{d.month:02d}" for d in dates]


def cmd_rolling(panel: ReturnsPanel, omega: CapiWeights | None = None, trim: TrimSpec = NO_TRIM,
                window: str = "monthly", scaled: bool = False, cfg: GridConfig | None = None,
                min_rows: int = MIN_WINDOW_ROWS) -> RollingReport:
    """One-component CAPI weights per calendar month, plus their mean and sd."""
    if window != "monthly":
        raise ValueError(f"unsupported window {window!r}")
    if panel.y is None:
        raise ValueError("panel has no index series")
    omega = omega or CapiWeights((1.0, 0.5, 0.5))
    cfg = cfg or GridConfig()
    labels = np.array(month_labels(panel.dates))
    used, weights, skipped = [], [], []
    for lab in dict.fromkeys(labels):
        mask = labels == lab
        if mask.sum() < min_rows:
            skipped.append(lab)
            continue
        sub = panel.rows(mask)
        weights.append(_first_weights(sub.matrix, sub.y, omega, scaled, trim, cfg))
        used.append(lab)
    if len(used) < 2:
        raise ValueError(f"need at least 2 usable windows, got {len(used)}")
    return RollingReport(panel.symbols, tuple(used), tuple(weights), tuple(skipped))
