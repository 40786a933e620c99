"""Skew-t latent-variable simulation: data generation, contamination, metrics, runner.

Each replicate draws ``[y, t]`` from a bivariate skew-t, builds
``X = t p' + noise``, optionally contaminates, fits a one-component CAPI
pursuit model and records

* AD, the absolute difference between the scaled (2,1) co-moment of
  ``(y, t_hat)`` and that of ``(y, t)``;
* PR, the loading ratio ``|p_hat_4 / p_hat_2|`` (truth 0.003 / 2 = 0.0015).

Per-replicate seeds come from ``numpy.random.SeedSequence([seed, r])``, so
replicate ``r`` is reproducible on its own and independent of scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .comoments import ComomentOrder, TrimSpec, product_comoment
from .grid import GridConfig
from .indices import CapiWeights, IndexSpec
from .pursuit import PursuitModel, fit

__all__ = [
    "SimSetting",
    "SimSummary",
    "SkewTParams",
    "CSV_COLUMNS",
    "contaminate",
    "generate_latent_data",
    "metric_ad",
    "metric_pr",
    "replicate_seeds",
    "run_replicate",
    "run_simulation",
    "sample_skew_t",
    "thread_count",
]

TRUE_LOADINGS = (1.0, 2.0, 0.5, 0.003, 1.5)
OUTLIER_MEAN = 25.0
DEFAULT_SLANT = (-5.0, 5.0)
CONTAM_TARGETS = ("none", "latent_and_y", "x_columns")
_TARGET_ALIASES = {"latent": "latent_and_y", "t": "latent_and_y", "x": "x_columns"}

CSV_COLUMNS = (
    "sigma_eps", "nu", "phi", "contam_target", "omega_offdiag", "trim",
    "mean_ad", "sd_ad", "median_ad", "mad_ad",
    "mean_pr", "sd_pr", "median_pr", "mad_pr", "n_failures",
)


@dataclass(frozen=True)
class SkewTParams:
    """Location ``xi``, scale matrix ``omega``, slant ``alpha_slant``, dof ``nu``."""

    xi: tuple = (0.0, 0.0)
    omega: tuple = ((1.0, 0.0), (0.0, 1.0))
    alpha_slant: tuple = DEFAULT_SLANT
    nu: float = 50.0

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        d = len(self.xi)
        if om.shape != (d, d) or len(self.alpha_slant) != d:
            raise ValueError("xi, omega and alpha_slant dimensions disagree")
        if not np.allclose(om, om.T, rtol=0, atol=1e-12):
            raise ValueError("omega must be symmetric")
        if np.any(np.diag(om) <= 0):
            raise ValueError("omega must have a positive diagonal")
        if not self.nu > 0:
            raise ValueError("nu must be positive")

    @classmethod
    def bivariate(cls, nu: float, offdiag: float = 0.0, slant=DEFAULT_SLANT) -> "SkewTParams":
        return cls((0.0, 0.0), ((1.0, offdiag), (offdiag, 1.0)), tuple(slant), nu)


def sample_skew_t(params: SkewTParams, n: int, seed: int) -> np.ndarray:
    """``n`` draws from the multivariate skew-t (rows are observations).

    A skew-normal ``Z`` is obtained by hidden truncation: draw ``(x0, x)``
    jointly normal with ``corr(x0, x) = delta`` and flip ``x`` wherever
    ``x0 < 0``. Then ``xi + omega_diag * Z / sqrt(V)`` with
    ``V ~ chi2(nu) / nu``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    om = np.asarray(params.omega, dtype=float)
    try:
        np.linalg.cholesky(om)
    except np.linalg.LinAlgError:
        raise ValueError("omega is not positive definite") from None
    scale = np.sqrt(np.diag(om))
    corr = om / np.outer(scale, scale)
    a = np.asarray(params.alpha_slant, dtype=float)
    delta = corr @ a / math.sqrt(1.0 + a @ corr @ a)
    d = len(a)
    big = np.empty((d + 1, d + 1))
    big[0, 0] = 1.0
    big[0, 1:] = delta
    big[1:, 0] = delta
    big[1:, 1:] = corr
    L = np.linalg.cholesky(big)

    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((n, d + 1)) @ L.T
    z = np.where(draws[:, :1] > 0, draws[:, 1:], -draws[:, 1:])
    v = rng.chisquare(params.nu, size=n) / params.nu
    return np.asarray(params.xi, dtype=float) + scale * z / np.sqrt(v)[:, None]


def generate_latent_data(t, loadings_p=TRUE_LOADINGS, sigma_eps: float = 0.001, seed: int = 0) -> np.ndarray:
    """``X = t p' + eps`` with i.i.d. ``N(0, sigma_eps^2)`` noise."""
    if sigma_eps < 0:
        raise ValueError("sigma_eps must be >= 0")
    t = np.asarray(t, dtype=float).reshape(-1)
    p = np.asarray(loadings_p, dtype=float).reshape(-1)
    X = np.outer(t, p)
    if sigma_eps > 0:
        X = X + np.random.default_rng(seed).normal(0.0, sigma_eps, size=X.shape)
    return X


def _target(target: str) -> str:
    target = _TARGET_ALIASES.get(target, target)
    if target not in CONTAM_TARGETS:
        raise ValueError(f"unknown contamination target {target!r}")
    return target


def contaminate(y, t, X, phi: float, target: str, seed: int):
    """Replace ``floor(n * phi / 2)`` entries at each end by ``N(25, 1)`` draws.

    ``latent_and_y`` hits the first entries of ``y`` and the last of ``t``;
    ``x_columns`` hits the first rows of column 1 and the last rows of
    column 2 of ``X``. Inputs are not modified; copies are returned.
    """
    target = _target(target)
    y = None if y is None else np.array(y, dtype=float)
    t = None if t is None else np.array(t, dtype=float)
    X = None if X is None else np.array(X, dtype=float)
    if phi == 0:
        return y, t, X
    if not 0 < phi < 1:
        raise ValueError("phi must lie in [0, 1)")
    if target == "none":
        raise ValueError("phi > 0 requires a contamination target")
    rng = np.random.default_rng(seed)
    if target == "latent_and_y":
        k = int(math.floor(len(y) * phi / 2 + 1e-9))
        if k:
            y[:k] = rng.normal(OUTLIER_MEAN, 1.0, k)
            t[-k:] = rng.normal(OUTLIER_MEAN, 1.0, k)
    else:
        if X is None or X.shape[1] < 2:
            raise ValueError("x_columns contamination needs X with >= 2 columns")
        k = int(math.floor(X.shape[0] * phi / 2 + 1e-9))
        if k:
            X[:k, 0] = rng.normal(OUTLIER_MEAN, 1.0, k)
            X[-k:, 1] = rng.normal(OUTLIER_MEAN, 1.0, k)
    return y, t, X


def metric_ad(y, t_hat, t_true) -> float:
    """``|cosk(y, y, t_hat) - cosk(y, y, t_true)|`` with scaled (2,1) co-moments."""
    o = ComomentOrder(2, 1)
    return abs(product_comoment(y, t_hat, o, scaled=True) - product_comoment(y, t_true, o, scaled=True))


def metric_pr(model: PursuitModel) -> float:
    """``|p_4 / p_2|`` from the first component's loadings."""
    if model.h < 1 or model.n_features < 4:
        raise ValueError("loading ratio needs >= 1 component and >= 4 variables")
    return loading_ratio(model.loadings[:, 0])


def loading_ratio(loadings) -> float:
    loadings = np.asarray(loadings, dtype=float)
    if abs(loadings[1]) < 1e-12:
        raise ValueError("degenerate reference loading")
    return abs(loadings[3] / loadings[1])


@dataclass(frozen=True)
class SimSetting:
    sigma_eps: float = 0.001
    nu: float = 50.0
    phi: float = 0.0
    omega_offdiag: float = 0.0
    contam_target: str = "none"
    n: int = 1000
    loadings_p: tuple = TRUE_LOADINGS
    trim_alpha: float = 0.0
    n_runs: int = 100
    slant: tuple = DEFAULT_SLANT
    capi_weights: tuple = (1.0, 0.5, 0.5, 0.0, 0.0, 0.0)
    scaled: bool = True
    grid: GridConfig = field(default_factory=GridConfig)

    def __post_init__(self):
        object.__setattr__(self, "contam_target", _target(self.contam_target))
        if (self.contam_target == "none") != (self.phi == 0):
            raise ValueError("contam_target must be 'none' exactly when phi == 0")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if self.n < 10:
            raise ValueError("n must be >= 10")
        if len(self.loadings_p) < 4:
            raise ValueError("the loading ratio needs at least 4 variables")
        if self.sigma_eps < 0:
            raise ValueError("sigma_eps must be >= 0")
        TrimSpec.of(self.trim_alpha)

    @property
    def index(self) -> IndexSpec:
        return IndexSpec("capi", CapiWeights(tuple(self.capi_weights)), self.scaled,
                         TrimSpec.of(self.trim_alpha))

    @property
    def params(self) -> SkewTParams:
        return SkewTParams.bivariate(self.nu, self.omega_offdiag, self.slant)


def _stats(x):
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return (math.nan,) * 4
    med = float(np.median(x))
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return float(np.mean(x)), sd, med, float(np.median(np.abs(x - med)))


@dataclass(frozen=True)
class SimSummary:
    mean_ad: float
    sd_ad: float
    median_ad: float
    mad_ad: float
    mean_pr: float
    sd_pr: float
    median_pr: float
    mad_pr: float
    setting: SimSetting
    n_failures: int = 0
    ad: tuple = ()
    pr: tuple = ()

    def to_row(self) -> dict:
        s = self.setting
        row = {
            "sigma_eps": s.sigma_eps, "nu": s.nu, "phi": s.phi,
            "contam_target": s.contam_target, "omega_offdiag": s.omega_offdiag,
            "trim": s.trim_alpha,
        }
        row.update({k: v for k, v in asdict(self).items() if k in CSV_COLUMNS})
        return {k: row[k] for k in CSV_COLUMNS}


def replicate_seeds(seed: int, r: int, count: int = 3) -> list[int]:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(r)])
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]


def run_replicate(setting: SimSetting, seed: int, r: int) -> tuple[float, float]:
    """AD and PR for replicate ``r`` of ``setting``."""
    s_draw, s_contam, s_noise = replicate_seeds(seed, r)
    yt = sample_skew_t(setting.params, setting.n, s_draw)
    y, t = yt[:, 0], yt[:, 1]
    y_obs, t_obs = y, t
    if setting.contam_target == "latent_and_y":
        y_obs, t_obs, _ = contaminate(y, t, None, setting.phi, "latent_and_y", s_contam)
    X = generate_latent_data(t_obs, setting.loadings_p, setting.sigma_eps, s_noise)
    if setting.contam_target == "x_columns":
        _, _, X = contaminate(None, None, X, setting.phi, "x_columns", s_contam)
    model = fit(X, y_obs, setting.index, h=1, cfg=setting.grid)
    return metric_ad(y, model.scores[:, 0], t), metric_pr(model)


def thread_count() -> int:
    """Worker threads from ``PPURSUIT_THREADS`` (0 or unset means all cores)."""
    try:
        k = int(os.environ.get("PPURSUIT_THREADS", "0"))
    except ValueError:
        k = 0
    if k <= 0:
        k = os.cpu_count() or 1
    return k


def run_simulation(setting: SimSetting, seed: int = 0, threads: int | None = None) -> SimSummary:
    """Run ``setting.n_runs`` replicates and summarize AD and PR.

    Failed replicates (degenerate fits) are counted, not summarized.
    """
    threads = thread_count() if threads is None else max(1, threads)

    def one(r):
        try:
            return run_replicate(setting, seed, r)
        except (ValueError, RuntimeError, ArithmeticError):
            return None

    runs = range(setting.n_runs)
    if threads == 1 or setting.n_runs == 1:
        results = [one(r) for r in runs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one, runs))
    ok = [res for res in results if res is not None]
    if not ok:
        raise RuntimeError("all replicates failed")
    ad = tuple(res[0] for res in ok)
    pr = tuple(res[1] for res in ok)
    return SimSummary(*_stats(ad), *_stats(pr), setting=setting,
                      n_failures=len(results) - len(ok), ad=ad, pr=pr)
