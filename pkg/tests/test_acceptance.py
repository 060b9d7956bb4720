"""Acceptance gate: the eight headline guarantees, one verdict line each.

Run with `pytest tests/test_acceptance.py -v -s` to see every verdict
line even when all criteria pass. Each test prints

    criterion N: PASS|FAIL - <what was checked> (<measured detail>)

and then asserts, so a failing criterion is visible both in the printed
line and in the pytest summary.
"""

import json
import time

import numpy as np
import pytest

from woexplain import (
    ContrastParams,
    ExplainerParams,
    AttributePartition,
    GaussianClassModel,
    bayes_decomposition,
    best_contrast,
    explain,
    fit,
    information_value,
    woe,
    woe_chain,
    woe_conditional,
)
from woexplain.cli import main

from oracles import joint_logpdf, random_model, random_ordered_partition


def verdict(number, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"criterion {number}: {status} - {description}{suffix}")
    assert ok, f"criterion {number}: {description}{suffix}"


@pytest.fixture(scope="module")
def full_model():
    """A fitted full-covariance model with n = 8 features and K = 5 classes."""
    rng = np.random.default_rng(42)
    blocks, labels = [], []
    for c in range(5):
        mean = rng.normal(0.0, 1.5, size=8)
        a = rng.normal(size=(8, 8))
        cov = a @ a.T / 8.0 + 0.5 * np.eye(8)
        blocks.append(rng.multivariate_normal(mean, cov, size=300))
        labels.extend([c] * 300)
    return fit(np.vstack(blocks), np.array(labels), mode="full")


def random_disjoint_sets(rng, n_classes):
    perm = [int(c) for c in rng.permutation(n_classes)]
    a_size = int(rng.integers(1, n_classes))
    b_size = int(rng.integers(1, n_classes - a_size + 1))
    return perm[:a_size], perm[a_size:a_size + b_size]


def test_criterion_1_bayes_identity(full_model):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        x = rng.normal(0.0, 2.0, size=8)
        a, b = random_disjoint_sets(rng, 5)
        prior, total, post = bayes_decomposition(a, b, x, full_model)
        worst = max(worst, abs(post - prior - total))
    elapsed = time.perf_counter() - start
    verdict(
        1, "Bayes identity |posterior - prior - woe| < 1e-9 on 1000 random inputs",
        worst < 1e-9 and elapsed < 10.0,
        f"max deviation {worst:.3e}, runtime {elapsed:.2f}s",
    )


def test_criterion_2_chain_additivity(full_model):
    rng = np.random.default_rng(2)
    worst_sum, worst_order = 0.0, 0.0
    for _ in range(200):
        x = rng.normal(0.0, 2.0, size=8)
        a, b = random_disjoint_sets(rng, 5)
        total = woe(a, b, x, full_model)
        part = random_ordered_partition(rng, range(8))
        first = sum(woe_chain(a, b, part, x, full_model))
        worst_sum = max(worst_sum, abs(first - total))
        reordered = [part[int(j)] for j in rng.permutation(len(part))]
        second = sum(woe_chain(a, b, reordered, x, full_model))
        worst_order = max(worst_order, abs(first - second))
    verdict(
        2, "chain scores sum to total woe and the sum is ordering-invariant (1e-9)",
        worst_sum < 1e-9 and worst_order < 1e-9,
        f"max partition deviation {worst_sum:.3e}, max ordering deviation {worst_order:.3e}",
    )


def test_criterion_3_naive_bayes_collapse():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        model = random_model(rng, int(rng.integers(2, 6)), 5, mode="diagonal")
        x = rng.normal(0.0, 2.0, size=5)
        a, b = (int(c) for c in rng.choice(model.n_classes, size=2, replace=False))
        coords = [int(i) for i in rng.permutation(5)]
        t_size = int(rng.integers(1, 5))
        target, rest = tuple(coords[:t_size]), coords[t_size:]
        marginal = woe_conditional([a], [b], target, (), x, model)
        for prefix in ((), tuple(rest[:1]), tuple(rest)):
            if not prefix and prefix != ():
                continue
            conditional = woe_conditional([a], [b], target, prefix, x, model)
            worst = max(worst, abs(conditional - marginal))
    verdict(
        3, "diagonal-model conditional woe ignores every prefix (singleton sets, 1e-12)",
        worst < 1e-12,
        f"max deviation {worst:.3e} over 100 cases x 3 prefixes",
    )


def subset_search_oracle(model, x, c_star, alpha):
    """Independent enumerator: scipy densities, hand-rolled mixture and max."""
    k = model.n_classes
    lls = np.array([joint_logpdf(model, c, range(model.n_features), x) for c in range(k)])
    logpri = np.log(model.priors)

    def side(labels):
        w, v = logpri[list(labels)], lls[list(labels)]
        m = (w + v).max()
        num = np.log(np.sum(np.exp(w + v - m))) + m
        mw = w.max()
        return num - (np.log(np.sum(np.exp(w - mw))) + mw)

    others = [c for c in range(k) if c != c_star]
    scored = []
    for mask in range(2 ** len(others)):
        u = tuple(sorted([c_star] + [o for j, o in enumerate(others) if mask >> j & 1]))
        if len(u) == k:
            continue
        rest = tuple(c for c in range(k) if c not in u)
        scored.append((u, side(u) - side(rest) - alpha * (len(u) - k / 2.0) ** 2))
    top = max(s for _, s in scored)
    return min((u for u, s in scored if s == top), key=lambda u: (len(u), u))


def test_criterion_4_contrast_search_equivalence():
    rng = np.random.default_rng(4)
    params = ContrastParams(alpha_reg=0.1)
    mismatches, instances = 0, 0
    for k in range(3, 9):
        for _ in range(100):
            model = random_model(rng, k, 2)
            x = rng.normal(0.0, 2.0, size=2)
            c_star = int(rng.integers(0, k))
            ours = tuple(best_contrast(range(k), c_star, x, model, params))
            oracle = subset_search_oracle(model, x, c_star, params.alpha_reg)
            instances += 1
            mismatches += ours != oracle
    verdict(
        4, "best_contrast equals a brute-force enumerator for K in 3..8",
        mismatches == 0,
        f"{mismatches} mismatches over {instances} instances",
    )


def test_criterion_5_closed_form_spot_checks():
    model = GaussianClassModel(
        means=np.array([[0.0], [1.0]]),
        covariances=np.array([[[1.0]], [[1.0]]]),
        priors=np.array([0.5, 0.5]),
        mode="full",
        feature_names=("x",),
    ).validate()
    worst = max(
        abs(woe(1, 0, [x], model) - (x - 0.5)) for x in (0.0, 0.5, 1.0, 3.0)
    )
    iv = information_value(0, 0, 1, model)
    verdict(
        5, "two-Gaussian woe = x - 0.5 (1e-12) and information value = 1.0 (1e-3)",
        worst < 1e-12 and abs(iv - 1.0) < 1e-3,
        f"max woe deviation {worst:.3e}, information value {iv:.6f}",
    )


def test_criterion_6_exhaustive_nested_explanations():
    rng = np.random.default_rng(6)
    start = time.perf_counter()
    failures = 0
    for _ in range(500):
        k = int(rng.integers(2, 7))
        model = random_model(rng, k, 2)
        x = rng.normal(0.0, 2.0, size=2)
        params = ExplainerParams(partition=AttributePartition(((0, 1),)))
        report = explain(x, model, params)
        ruled_out = [c for step in report.steps for c in step.contrast]
        universes = [len(s.entailed) + len(s.contrast) for s in report.steps]
        ok = (
            sorted(ruled_out + [report.predicted_class]) == list(range(k))
            and len(report.steps) <= k - 1
            and all(a > b for a, b in zip(universes, universes[1:]))
            and tuple(report.steps[-1].entailed) == (report.predicted_class,)
        )
        failures += not ok
    elapsed = time.perf_counter() - start
    verdict(
        6, "500 explain runs: contrasts partition the non-predicted classes, strictly nested",
        failures == 0,
        f"{failures} failures, runtime {elapsed:.2f}s",
    )


def test_criterion_7_thirty_feature_pipeline():
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    data = np.vstack([
        rng.normal(0.0, 1.0, size=(400, 30)),
        rng.normal(0.5, 1.2, size=(400, 30)),
    ])
    labels = np.array([0] * 400 + [1] * 400)
    model = fit(data, labels, mode="full")
    partition = AttributePartition(
        tuple(tuple(range(3 * k, 3 * k + 3)) for k in range(10)),
        names=tuple(f"attr{k}" for k in range(10)),
    )
    x = rng.normal(0.25, 1.0, size=30)
    report = explain(x, model, ExplainerParams(partition=partition))
    elapsed = time.perf_counter() - start

    step = report.steps[0]
    identity_dev = abs(step.prior_log_odds + step.total_woe - step.posterior_log_odds)
    totals = [step.total_woe]
    for policy, seed in (("fixed", 0), ("random", 1), ("random", 5)):
        other = explain(x, model, ExplainerParams(
            partition=partition, ordering_policy=policy, ordering_seed=seed,
        ))
        totals.append(other.steps[0].total_woe)
    ordering_dev = max(totals) - min(totals)
    verdict(
        7, "30-feature 10-attribute pipeline: identity and ordering invariance on its report",
        identity_dev < 1e-9 and ordering_dev < 1e-9 and elapsed < 5.0,
        f"identity deviation {identity_dev:.3e}, ordering spread {ordering_dev:.3e}, "
        f"fit+explain {elapsed:.2f}s",
    )


def test_criterion_8_byte_identical_runs(tmp_path):
    rng = np.random.default_rng(8)
    train = tmp_path / "train.csv"
    lines = [",".join(f"f{j}" for j in range(4)) + ",y"]
    for c in range(3):
        for row in rng.normal(1.2 * c, 1.0, size=(50, 4)):
            lines.append(",".join(repr(float(v)) for v in row) + f",{c}")
    train.write_text("\n".join(lines) + "\n", encoding="utf-8")

    models = [tmp_path / "m1.json", tmp_path / "m2.json"]
    for path in models:
        assert main(["fit", "--data", str(train), "--labels", "y",
                     "--out", str(path)]) == 0
    reports = [tmp_path / "r1.json", tmp_path / "r2.json"]
    for path in reports:
        assert main(["explain", "--model", str(models[0]),
                     "--input", "0.5,1.0,0.1,2.0", "--attr-size", "2",
                     "--ordering", "random", "--seed", "3",
                     "--out", str(path)]) == 0
    models_match = models[0].read_bytes() == models[1].read_bytes()
    reports_match = reports[0].read_bytes() == reports[1].read_bytes()
    json.loads(reports[0].read_text(encoding="utf-8"))
    verdict(
        8, "repeated fit and explain runs produce byte-identical JSON",
        models_match and reports_match,
        f"model bytes equal: {models_match}, report bytes equal: {reports_match}",
    )
