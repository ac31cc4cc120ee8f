"""Acceptance criteria, one test each, at full sample sizes.

Sample sizes, seeds and tolerances are fixed in advance; a failing check is
reported as is and never re-run with another seed.
"""

import json
import math
import os

import numpy as np
import pytest

from rightinverse.cli import main
from rightinverse.exponent import K_characteristics, analytic_rho
from rightinverse.experiments import DEFAULT_CONFIGS, ExperimentConfig, run_experiment
from rightinverse.fluctuation import closed_form_ladder, estimate_ladder_char, extract_ladder
from rightinverse.levy_model import (CompoundPoisson, ExponentialNegative, LevyModel,
                                     closed_form_rho)
from rightinverse.path_sim import SimConfig, first_passage, simulate_path
from rightinverse.resolvent import resolvent_density
from rightinverse.right_inverse import empirical_rho, evans_batch, evans_construct

pytestmark = pytest.mark.acceptance

WORKERS = os.cpu_count() or 1
SEED = 20240601
JD_SPEC = {"family": "jump_diffusion", "b": 0.0, "sigma2": 1.0, "rate": 1.0, "p_up": 0.5,
           "rate_up": 2.0, "rate_down": 2.0}


def _run(name, **overrides):
    doc = dict(DEFAULT_CONFIGS[name], experiment=name, seed=SEED)
    doc.update(overrides)
    return run_experiment(ExperimentConfig.from_dict(doc), workers=WORKERS)


def _by_name(result, prefix):
    return [r for r in result.reports if r.name.startswith(prefix)]


def test_rho_three_routes_brownian(acceptance_line):
    res = _run("rho-routes", model={"family": "brownian"}, n_paths=100_000, dt=1e-4,
               horizon=12.0, depth=8, q_grid=[0.5, 1.0, 2.0], params={"rel_tol": 0.02})
    text = "; ".join(f"q={row['q']:g} emp={row['empirical']:.4f}+-{row['se']:.4f} "
                     f"ana={row['analytic']:.4f} cf={row['closed_form']:.4f}"
                     for row in res.tables["rho"])
    assert acceptance_line(1, res.passed, "rho routes BM, N=1e5, dt=1e-4, n=8: " + text)


def test_pure_drift_is_exact(acceptance_line):
    model = LevyModel.pure_drift(1.0)
    cfg = SimConfig(1e-3, 2.0, seed=SEED)
    ev = evans_construct(simulate_path(model, cfg), 8)
    grid_err = float(np.max(np.abs(ev.K - ev.x)))
    batch = evans_batch(model, cfg, 1000, 8, keep=[255])
    K1 = batch.K[:, 0]
    rho_err = max(abs(empirical_rho(K1, q)[0] - q) for q in (0.5, 1.0, 2.0))
    spread = float(np.ptp(K1))
    ok = grid_err <= 1e-12 and rho_err <= 1e-12 and spread == 0.0
    assert acceptance_line(2, ok, f"pure drift: max|K_x - x|={grid_err:.1e}, "
                                  f"max|rho-q|={rho_err:.1e}, spread of K_1={spread:g}")


def test_spectrally_negative_root(acceptance_line):
    model = LevyModel.from_drift(2.0, 0.0, CompoundPoisson(1.0, ExponentialNegative(1.0)))
    cfg = SimConfig(1e-3, 40.0, seed=SEED)
    n = 20_000
    K1 = np.empty(n)
    over = np.empty(n)
    for i in range(n):
        path = simulate_path(model, cfg.with_stream(i),
                             until=lambda p: math.isfinite(first_passage(p, 1.0).time))
        K1[i] = evans_construct(path, 8).K[-1]
        over[i] = first_passage(path, 1.0).overshoot
    emp, se = empirical_rho(K1, 1.0)
    phi = closed_form_rho(model, 1.0)
    dev = abs(emp / phi - 1.0)
    ok = dev <= 0.02 and bool(np.all(over == 0.0))
    assert acceptance_line(3, ok, f"SN root: rho={emp:.5f}+-{se:.5f} vs Phi(1)={phi:.5f} "
                                  f"(dev {dev:.2%}), max overshoot={over.max():g}")


def test_thinned_ladder_against_evans(acceptance_line):
    res = _run("thinned-vs-evans", model=JD_SPEC, n_paths=10_000, depth=10, dt=1e-3,
               q_grid=[0.5, 1.0], params={"beta_grid": [0.0, 1.0]})
    clock, expo = res.reports
    text = (f"clock within 10 dt on {clock.lhs[0]:.1%} of 1e4 paths; exponent max rel dev "
            f"{expo.statistic:.2%} at (q,beta) in {{0.5,1}}x{{0,1}}")
    assert acceptance_line(4, res.passed, text)


@pytest.mark.parametrize("model", [{"family": "brownian"}, JD_SPEC], ids=["bm", "jd"])
def test_entrance_law_transform(acceptance_line, model):
    res = _run("entrance-laws", model=model, q_grid=[1.0], lam_grid=[0.0])
    rep = _by_name(res, "entrance-law-transform")[0]
    ok = rep.passed and rep.n_samples >= 100_000
    text = (f"entrance transform {model['family']}: MC={rep.lhs[0].real:.4f} vs "
            f"rho/q-eta_K={rep.rhs[0].real:.4f} (dev {rep.statistic:.2%}, N={rep.n_samples})")
    assert acceptance_line(5, ok, text)


def test_theorem1_concatenation(acceptance_line):
    res = _run("theorem1", n_paths=9000)
    ks, marg = res.reports
    ok = res.passed and res.info["passing"] >= 10_000
    text = (f"passing={res.info['passing']}, post-passage KS p={ks.statistic:.3f}, "
            f"Lambda bins max rel dev {marg.statistic:.2%}")
    assert acceptance_line(6, ok, text)


def test_gaussian_scaling(acceptance_line):
    res = _run("sigpos")
    scale = _by_name(res, "sigpos-scaling")[0]
    shapes = [r for r in res.reports if "shape" in r.name]
    text = (f"ratio(1)/ratio(4)={scale.lhs[0]:.3f} vs 4 (dev {scale.statistic:.2%}); "
            f"min shape KS p={min(r.statistic for r in shapes):.3f}; absolute ratios "
            f"{scale.detail['ratio_low']:.3f}, {scale.detail['ratio_high']:.3f} "
            f"(2/sigma2: 2, 0.5)")
    assert acceptance_line(7, res.passed, text)


def test_bv_jump_start_rate(acceptance_line):
    res = _run("bv-jumpstart")
    rate = _by_name(res, "bv-jumpstart-rate")[0]
    ok = rate.passed and res.info["n_steps"] >= 100_000
    text = (f"jump-start rate {rate.lhs[0]:.4f} vs Pi(0,inf)/b={rate.rhs[0]:.4f} "
            f"(dev {rate.statistic:.2%}, levels={res.info['n_steps']})")
    assert acceptance_line(8, ok, text)


@pytest.mark.parametrize("mu", [0.0, 0.5], ids=["bm", "bm-drift"])
def test_wiener_hopf(acceptance_line, mu):
    res = _run("wiener-hopf", model={"family": "brownian", "mu": mu},
               q_grid=[0.5, 1.0, 2.0], lam_grid=[0.0, 1.0, 2.0, 5.0])
    rep = res.reports[0]
    assert acceptance_line(9, rep.passed and rep.statistic < 1e-10,
                           f"Wiener-Hopf mu={mu:g}: max residual {rep.statistic:.1e}")


@pytest.mark.parametrize("model", [LevyModel.brownian(),
                                   ExperimentConfig.from_dict({"experiment": "wiener-hopf",
                                                               "model": JD_SPEC}).levy_model()],
                         ids=["bm", "jd"])
def test_resolvent_monotonicity(acceptance_line, model):
    q = 1.0
    rho = analytic_rho(model, closed_form_ladder(model), q)
    x = np.linspace(0.0, 5.0, 100)
    f = np.exp(-rho * x) * resolvent_density(model, q, -x, tol=1e-9)
    worst = float(np.max(np.diff(f)))
    assert acceptance_line(10, worst <= 1e-6, f"{model.describe()}: max increase of "
                                              f"e^(-rho x) u(-x) = {worst:.1e}")


@pytest.mark.parametrize("mu, oracle", [(0.0, 0.0), (-1.0, 2.0), (1.0, 0.0)],
                         ids=["recurrent", "down", "up"])
def test_killing_rate_of_K(acceptance_line, mu, oracle):
    model = LevyModel.brownian(mu)
    cfg = SimConfig(1e-3, 15.0, seed=SEED, bridge_correction=True)
    lads = [extract_ladder(simulate_path(model, cfg.with_stream(i)), model) for i in range(4000)]
    char = estimate_ladder_char(lads, min_jumps=0)
    kappa = K_characteristics(model, char, n_mc=0).kappa_K
    ok = abs(kappa - oracle) <= 0.1 * oracle if oracle > 0 else kappa <= 1e-3
    assert acceptance_line(11, ok, f"BM mu={mu:g}: kappa_K={kappa:.4f} vs {oracle:g}")


@pytest.mark.parametrize("name", ["entrance-laws", "bv-jumpstart"])
def test_reports_are_reproducible(acceptance_line, tmp_path, name):
    docs = []
    for run in ("a", "b"):
        out = tmp_path / run
        main(["run", "--experiment", name, "--seed", str(SEED), "--out", str(out)])
        docs.append((out / "report.json").read_bytes())
    same = docs[0] == docs[1]
    keys = sorted(json.loads(docs[0]))
    assert acceptance_line(12, same, f"{name}: report.json identical over two runs "
                                     f"({len(docs[0])} bytes, keys {', '.join(keys)})")
