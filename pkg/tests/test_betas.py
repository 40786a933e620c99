import datetime as dt
import os

import numpy as np
import pytest

from oracles import spearman
from ppursuit.betas import classical_betas, cmd_betas, cmd_rolling
from ppursuit.comoments import TrimSpec
from ppursuit.indices import DEFAULT_OMEGA, CapiWeights, IndexSpec
from ppursuit.ingest import ReturnsPanel, read_panel_csv
from ppursuit.pursuit import fit


def _price_panel(fixtures_dir):
    dates, M, names, y = read_panel_csv(os.path.join(fixtures_dir, "panel_prices.csv"), "IDX")
    return ReturnsPanel(dates[1:], np.diff(M, axis=0), names, np.diff(y), "IDX")


def _returns_panel(fixtures_dir):
    dates, M, names, y = read_panel_csv(os.path.join(fixtures_dir, "regime_returns.csv"), "IDX")
    return ReturnsPanel(dates, M, names, y, "IDX")


def test_classical_beta_oracle():
    rng = np.random.default_rng(0)
    y = rng.standard_normal(100)
    X = np.column_stack([0.5 * y + rng.standard_normal(100), -2 * y])
    for j in range(2):
        slope = np.polyfit(y, X[:, j], 1)[0]
        assert classical_betas(X, y)[j] == pytest.approx(slope, rel=1e-10)
    with pytest.raises(ValueError, match="degenerate index"):
        classical_betas(X, np.ones(100))


def test_identical_securities():
    y = np.random.default_rng(1).standard_normal(60)
    d = tuple(dt.date(2019, 1, 1) + dt.timedelta(days=i) for i in range(60))
    p = 4
    panel = ReturnsPanel(d, np.column_stack([y] * p), tuple("ABCD"), y, "M")
    rep = cmd_betas(panel, orders=(2,))
    np.testing.assert_allclose(rep.classical_beta, 1.0, rtol=1e-14)
    np.testing.assert_allclose(rep.capi_weights_by_order[2], 1 / np.sqrt(p), atol=1e-6)


def test_order_two_is_covariance_fit(fixtures_dir):
    panel = _price_panel(fixtures_dir)
    rep = cmd_betas(panel, CapiWeights(DEFAULT_OMEGA), orders=(2, 3, 4))
    cov = fit(panel.matrix, panel.y, IndexSpec("covariance")).weights[:, 0]
    np.testing.assert_allclose(rep.capi_weights_by_order[2], cov, atol=1e-12)
    # OLS-beta oracle: the covariance direction is proportional to the betas
    b = rep.classical_beta
    np.testing.assert_allclose(rep.capi_weights_by_order[2], b / np.linalg.norm(b), atol=1e-5)
    for w in rep.capi_weights_by_order.values():
        assert abs(np.linalg.norm(w) - 1) < 1e-12
    assert np.all(np.isfinite(b))


def test_fixture_rank_agreement(fixtures_dir):
    rep = cmd_betas(_price_panel(fixtures_dir), orders=(2,))
    assert spearman(rep.capi_weights_by_order[2], rep.classical_beta) >= 0.9
    assert rep.header() == ["symbol", "beta", "order_2"]


def test_report_serialization(fixtures_dir):
    rep = cmd_betas(_price_panel(fixtures_dir), orders=(2, 3))
    d = rep.to_dict()
    assert d["symbols"] == [f"S{i:02d}" for i in range(1, 13)]
    assert set(d["capi_weights_by_order"]) == {"2", "3"}
    assert IndexSpec.parse(d["index"]["3"]).capi_weights.omega == (1.0, 0.5, 0.5, 0, 0, 0)


def test_betas_needs_index():
    panel = ReturnsPanel((dt.date(2019, 1, 1),) * 5, np.ones((5, 2)), ("A", "B"))
    with pytest.raises(ValueError):
        cmd_betas(panel)


class TestRolling:
    def test_identical_months(self):
        rng = np.random.default_rng(2)
        X, y = rng.standard_normal((20, 3)), rng.standard_normal(20)
        jan = [dt.date(2019, 1, 1) + dt.timedelta(days=i) for i in range(20)]
        feb = [dt.date(2019, 2, 1) + dt.timedelta(days=i) for i in range(20)]
        panel = ReturnsPanel(tuple(jan + feb), np.vstack([X, X]), ("A", "B", "C"), np.concatenate([y, y]))
        rep = cmd_rolling(panel)
        assert rep.window_labels == ("2019-01", "2019-02")
        assert np.all(rep.sd == 0.0)

    def test_fixture_shape(self, fixtures_dir):
        rep = cmd_rolling(_returns_panel(fixtures_dir), CapiWeights((1, 0.5, 0.5)))
        assert len(rep.window_labels) == 12 and rep.weight_matrix.shape == (12, 12)
        assert rep.mean.shape == (12,) and rep.sd.shape == (12,)
        np.testing.assert_allclose(np.linalg.norm(rep.weight_matrix, axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(rep.mean, rep.weight_matrix.mean(axis=0))
        d = rep.to_dict()
        assert len(d["mean"]) == len(d["std"]) == 12

    def test_regime_change(self, fixtures_dir):
        rep = cmd_rolling(_returns_panel(fixtures_dir))
        j = rep.symbols.index("S03")
        w = rep.weight_matrix[:, j]
        assert np.all(w[:6] > 0.2) and np.all(w[6:] < -0.2)
        others = np.delete(rep.weight_matrix, j, axis=1)
        early, late = others[:6].mean(axis=0), others[6:].mean(axis=0)
        assert np.all(np.sign(early[np.abs(early) > 0.1]) == np.sign(late[np.abs(early) > 0.1]))

    def test_short_windows_skipped(self):
        rng = np.random.default_rng(3)
        d = ([dt.date(2019, 1, 1) + dt.timedelta(days=i) for i in range(20)]
             + [dt.date(2019, 2, 1) + dt.timedelta(days=i) for i in range(10)]
             + [dt.date(2019, 3, 1) + dt.timedelta(days=i) for i in range(20)])
        panel = ReturnsPanel(tuple(d), rng.standard_normal((50, 3)), ("A", "B", "C"), rng.standard_normal(50))
        rep = cmd_rolling(panel, trim=TrimSpec(0.1))
        assert rep.window_labels == ("2019-01", "2019-03") and rep.skipped == ("2019-02",)
        assert rep.weight_matrix.shape == (2, 3)

    def test_too_few_windows(self):
        rng = np.random.default_rng(4)
        d = tuple(dt.date(2019, 1, 1) + dt.timedelta(days=i) for i in range(25))
        panel = ReturnsPanel(d, rng.standard_normal((25, 2)), ("A", "B"), rng.standard_normal(25))
        with pytest.raises(ValueError, match="at least 2 usable windows"):
            cmd_rolling(panel)
        with pytest.raises(ValueError):
            cmd_rolling(panel, window="weekly")
