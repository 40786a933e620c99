"""Acceptance criteria 1-9, each at its stated tolerance.

Every criterion prints one ``PASS``/``FAIL`` line (collected in the
pytest terminal summary, or printed directly when run as a script).
"""

import csv
import os
import subprocess
import sys
import tempfile
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, FIXTURES
from oracles import angle, nipals_pls1, pca_directions, spearman
from ppursuit.betas import cmd_betas
from ppursuit.grid import exhaustive_2d, optimize_direction
from ppursuit.indices import IndexSpec
from ppursuit.ingest import ReturnsPanel, read_panel_csv
from ppursuit.pursuit import fit, predict
from ppursuit.skewt_sim import SimSetting, run_simulation

SEED = 0


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_pca_equivalence():
    start = time.perf_counter()
    worst = 0.0
    for seed in range(5):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((200, 5)) @ np.diag([3.0, 2.2, 1.5, 1.0, 0.6]) @ np.linalg.qr(
            rng.standard_normal((5, 5)))[0]
        _, vecs = pca_directions(X)
        m = fit(X, None, IndexSpec("variance"), h=3)
        worst = max(worst, *(angle(m.weights[:, i], vecs[:, i]) for i in range(3)))
    elapsed = time.perf_counter() - start
    report(1, worst < 0.02 and elapsed < 10,
           f"max angle {worst:.2e} rad (< 0.02), runtime {elapsed:.2f} s (< 10)")


def test_criterion_2_pls_equivalence():
    worst_angle, worst_rmse = 0.0, 0.0
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        X = rng.standard_normal((50, 4)) @ rng.standard_normal((4, 4))
        y = X @ rng.standard_normal(4) + 0.5 * rng.standard_normal(50)
        m = fit(X, y, IndexSpec("covariance_squared"), h=2)
        W, pls_predict = nipals_pls1(X, y, 2)
        worst_angle = max(worst_angle, *(angle(m.weights[:, i], W[:, i]) for i in range(2)))
        rmse_pp = np.sqrt(np.mean((predict(m, X) - y) ** 2))
        rmse_pls = np.sqrt(np.mean((pls_predict(X) - y) ** 2))
        worst_rmse = max(worst_rmse, abs(rmse_pp - rmse_pls),
                         float(np.sqrt(np.mean((predict(m, X) - pls_predict(X)) ** 2))))
    report(2, worst_angle < 0.02 and worst_rmse < 1e-4,
           f"max angle {worst_angle:.2e} rad (< 0.02), max RMSE difference {worst_rmse:.2e} (< 1e-4)")


def test_criterion_3_grid_vs_exhaustive():
    worst = {}
    for kind in ("covariance", "cosk1", "capi"):
        idx = IndexSpec(kind)
        w_max = 0.0
        for seed in range(10):
            rng = np.random.default_rng(200 + seed)
            X = rng.standard_normal((200, 2)) @ rng.standard_normal((2, 2))
            y = X @ rng.standard_normal(2) + 0.5 * rng.chisquare(3, 200)
            w_max = max(w_max, angle(optimize_direction(X, y, idx), exhaustive_2d(X, y, idx, 1e-3)))
        worst[kind] = w_max
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items())
    report(3, max(worst.values()) < 0.01, f"max angle per kind: {detail} rad (< 0.01)")


@pytest.fixture(scope="module")
def table1_summary():
    start = time.perf_counter()
    s = run_simulation(SimSetting(sigma_eps=0.001, nu=50, phi=0.0, omega_offdiag=0.0, n=1000, n_runs=25), seed=SEED)
    return s, time.perf_counter() - start


def test_criterion_4_table1_ad(table1_summary):
    s, elapsed = table1_summary
    report(4, s.mean_ad <= 0.10 and s.median_ad <= 0.06 and elapsed < 300 and s.n_failures == 0,
           f"mean AD {s.mean_ad:.4f} (<= 0.10), median AD {s.median_ad:.4f} (<= 0.06), "
           f"{s.n_failures} failures, runtime {elapsed:.1f} s (< 300)")


def test_criterion_5_table2_pr(table1_summary):
    s, _ = table1_summary
    report(5, s.mean_pr <= 0.20, f"mean PR {s.mean_pr:.5f} (<= 0.20), sd {s.sd_pr:.2e}")


def test_criterion_6_robustness_ordering():
    base = dict(nu=50, phi=0.1, contam_target="latent_and_y", n=1000, n_runs=25)
    trimmed = run_simulation(SimSetting(trim_alpha=0.15, **base), seed=SEED)
    plain = run_simulation(SimSetting(trim_alpha=0.0, **base), seed=SEED)
    ok = trimmed.mean_pr < plain.mean_pr and trimmed.mean_pr <= 0.15
    report(6, ok, f"mean PR trim 0.15 = {trimmed.mean_pr:.6f} vs trim 0 = {plain.mean_pr:.6f} "
                  f"(need strictly less), trimmed <= 0.15: {trimmed.mean_pr <= 0.15}")


def test_criterion_7_invariant_suites():
    import test_properties as props

    suites = [props.test_score_orthogonality, props.test_deflation_identity, props.test_unit_norm_and_sign,
              props.test_scaled_scale_invariance, props.test_alpha_zero_bit_equality]
    failed = []
    for fn in suites:
        assert fn.hypothesis.inner_test is not None
        try:
            fn()
        except Exception as exc:  # noqa: BLE001
            failed.append(f"{fn.__name__}: {type(exc).__name__}")
    report(7, not failed, f"{len(suites)} property suites x 200 cases, failures: {failed or 'none'}")


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "ppursuit", *args], capture_output=True, check=True)


def test_criterion_8_determinism():
    with tempfile.TemporaryDirectory() as d:
        x = os.path.join(d, "x.csv")
        rng = np.random.default_rng(5)
        X = rng.standard_normal((80, 4))
        y = X @ [1.0, 0.5, -0.5, 0.1] + rng.standard_normal(80) ** 2
        with open(x, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a", "b", "c", "d", "y"])
            w.writerows([[repr(float(v)) for v in row] for row in np.column_stack([X, y])])
        outs = {}
        for i in range(2):
            _cli("simulate", "--nu", "50", "--phi", "0", "--runs", "100", "--seed", "7",
                 "--out", os.path.join(d, f"sim{i}.csv"))
            _cli("fit", "--x", x, "--y-col", "y", "--components", "2", "--seed", "7",
                 "--model-out", os.path.join(d, f"model{i}.json"))
            for stem in ("sim", "model"):
                ext = "csv" if stem == "sim" else "json"
                with open(os.path.join(d, f"{stem}{i}.{ext}"), "rb") as fh:
                    outs.setdefault(stem, []).append(fh.read())
    same = {k: v[0] == v[1] for k, v in outs.items()}
    report(8, all(same.values()), f"byte-identical reruns: simulate {same['sim']}, fit {same['model']}")


def test_criterion_9_betas_rank_agreement():
    dates, M, names, y = read_panel_csv(os.path.join(FIXTURES, "panel_prices.csv"), "IDX")
    panel = ReturnsPanel(dates[1:], np.diff(M, axis=0), names, np.diff(y), "IDX")
    rep = cmd_betas(panel, orders=(2, 3, 4))
    rho = spearman(rep.capi_weights_by_order[2], rep.classical_beta)
    shape_ok = rep.header() == ["symbol", "beta", "order_2", "order_3", "order_4"] and len(rep.symbols) == 12
    report(9, rho >= 0.9 and shape_ok, f"Spearman(order-2 weights, OLS betas) = {rho:.3f} (>= 0.9), "
                                       f"report columns {rep.header()}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
