"""Grid direction search.

Starting from the best coordinate axis, each sweep rotates the current
direction ``w`` within the planes spanned by ``w`` and each axis ``e_k``,
scanning ``n_angles`` angles over ``[-theta, theta]``. After a sweep the
interval contracts by ``shrink``. Only strict improvements replace ``w``,
so the kept index value never decreases.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .indices import IndexSpec, batch_objective, batch_values

__all__ = ["GridConfig", "GridError", "exhaustive_2d", "optimize_direction", "canonical_sign"]


class GridError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridConfig:
    n_angles: int = 90
    max_sweeps: int = 25
    shrink: float = 0.5
    tol: float = 1e-6

    def __post_init__(self):
        if self.n_angles < 3:
            raise ValueError("n_angles must be >= 3")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def _as_matrix(X) -> np.ndarray:
    # C order keeps BLAS summation order, hence results, layout-independent
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("data matrix must be 2-D")
    if X.shape[0] < 3:
        raise ValueError("need at least 3 observations")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite value")
    return X


def _scores(X, C):
    # (m, n) candidate-major layout expected by the kernels
    return np.ascontiguousarray(C.T @ X.T)


def _first_argmax(vals):
    if np.all(np.isnan(vals)):
        return -1
    return int(np.nanargmax(vals))


def canonical_sign(w, X, y, index: IndexSpec) -> np.ndarray:
    """Fix the sign of ``w``.

    If the objective distinguishes ``w`` from ``-w`` the better one is kept.
    Otherwise: for cov/corr-type indices with ``y``, ``cov(Xw, y) >= 0``;
    failing that, the largest-magnitude entry is made positive.
    """
    w = np.asarray(w, dtype=float)
    X = _as_matrix(X)
    vals = batch_objective(index, _scores(X, np.column_stack([w, -w])), y)
    fp, fn = vals
    if np.isfinite(fp) and np.isfinite(fn):
        if abs(fp - fn) > 1e-9 * max(abs(fp), abs(fn), 1e-300):
            return w if fp > fn else -w
    if index.squared_objective and y is not None:
        c = float(np.dot(X @ w - np.mean(X @ w), np.asarray(y) - np.mean(y)))
        if c != 0.0:
            return w if c > 0 else -w
    j = int(np.argmax(np.abs(w)))
    return w if w[j] >= 0 else -w


def optimize_direction(
    X,
    y=None,
    index: IndexSpec | None = None,
    cfg: GridConfig | None = None,
    seed: int = 0,
    trace: list | None = None,
) -> np.ndarray:
    """Unit direction maximizing ``index`` over projections ``X @ w``.

    Parameters
    ----------
    X : (n, p) array
    y : (n,) array, optional
        Dependent series; required by every index except variance.
    index : IndexSpec
    cfg : GridConfig
    seed : int
        Reserved for stochastic variants; the search is deterministic.
    trace : list, optional
        If given, the kept objective value is appended after every sweep.

    Raises
    ------
    GridError
        If the index is undefined (degenerate) for every candidate.
    """
    del seed
    index = index or IndexSpec()
    cfg = cfg or GridConfig()
    X = _as_matrix(X)
    n, p = X.shape
    if index.needs_y:
        if y is None:
            raise ValueError("dependent series required")
        y = np.asarray(y, dtype=float)
        if y.shape != (n,):
            raise ValueError(f"length mismatch: {n} != {y.size}")
    if p == 1:
        return np.ones(1)

    eye = np.eye(p)
    axes = np.hstack([eye, -eye])
    vals = batch_objective(index, _scores(X, axes), y)
    j = _first_argmax(vals)
    if j < 0:
        raise GridError("no admissible direction")
    w = axes[:, j].copy()
    best = float(vals[j])

    grid = np.linspace(-1.0, 1.0, cfg.n_angles)
    theta = math.pi / 2
    for _ in range(cfg.max_sweeps):
        w_start = w.copy()
        cos_t = np.cos(theta * grid)
        sin_t = np.sin(theta * grid)
        for k in range(p):
            u = eye[k] - w[k] * w
            nu = np.linalg.norm(u)
            if nu < 1e-12:
                continue
            u /= nu
            xw = X @ w
            xu = X @ u
            S = np.outer(cos_t, xw) + np.outer(sin_t, xu)
            vals = batch_objective(index, S, y)
            j = _first_argmax(vals)
            if j >= 0 and vals[j] > best:
                w = cos_t[j] * w + sin_t[j] * u
                w /= np.linalg.norm(w)
                best = float(vals[j])
        if trace is not None:
            trace.append(best)
        step = 2.0 * theta / (cfg.n_angles - 1)
        theta *= cfg.shrink
        if np.linalg.norm(w - w_start) < cfg.tol and step < cfg.tol:
            break

    return canonical_sign(w, X, y, index)


def exhaustive_2d(X, y=None, index: IndexSpec | None = None, resolution: float = 1e-3) -> np.ndarray:
    """Brute-force maximizer over all angles in ``[0, pi)`` for two columns.

    Both ``(cos a, sin a)`` and its negative are evaluated, so indices that
    are not sign-symmetric are handled too.
    """
    index = index or IndexSpec()
    X = _as_matrix(X)
    if X.shape[1] != 2:
        raise ValueError("exhaustive_2d needs exactly 2 columns")
    if index.needs_y and y is None:
        raise ValueError("dependent series required")
    angles = np.arange(0.0, math.pi, resolution)
    C = np.vstack([np.cos(angles), np.sin(angles)])
    C = np.hstack([C, -C])
    vals = batch_objective(index, _scores(X, C), y)
    j = _first_argmax(vals)
    if j < 0:
        raise GridError("no admissible direction")
    return canonical_sign(C[:, j], X, y, index)


def index_value(index: IndexSpec, X, w, y=None) -> float:
    """Raw index value of a single direction (convenience for reporting)."""
    return float(batch_values(index, _scores(_as_matrix(X), np.asarray(w, float)[:, None]), y)[0])
