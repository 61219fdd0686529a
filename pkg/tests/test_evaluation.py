import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import make_dense_net
from eegattr import engine, models
from eegattr.attribution import MethodSpec, attribute, random_baseline_map
from eegattr.errors import ConfigError
from eegattr.evaluation import (
    SampleResult,
    aggregate,
    channel_deletion_curve,
    channel_sensitivity,
    deletion_curve,
    distribution,
    evaluate_sample,
    patch_sensitivity,
    patch_sensitivity_many,
    pearson,
)


class TestPearson:
    def test_exact_linearity(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_anti_linearity(self):
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_formula_example(self):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)

    def test_zero_variance_returns_none(self):
        assert pearson([1, 1, 1], [1, 2, 3]) is None
        assert pearson([1, 2, 3], [5, 5, 5]) is None

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            pearson([1, 2], [1, 2, 3])
        with pytest.raises(ConfigError):
            pearson([1], [2])

    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40),
           st.integers(0, 2**31))
    @settings(max_examples=60, deadline=None)
    def test_bounded_and_matches_direct_formula(self, xs, seed):
        ys = list(np.random.default_rng(seed).standard_normal(len(xs)))
        got = pearson(xs, ys)
        want = oracles.pearson_direct(xs, ys)
        if want is None:
            assert got is None
        else:
            assert got == pytest.approx(want, abs=1e-9)
            assert -1.0 - 1e-12 <= got <= 1.0 + 1e-12


def linear_net(seed=0, n=4, t=40):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((2, n * t)).astype(np.float32) * 0.2
    return make_dense_net(w, n, t)


class TestPatchSensitivity:
    def test_linear_model_grad_x_input_r_is_one(self):
        net = linear_net(seed=1)
        x = np.random.default_rng(1).standard_normal((4, 40)).astype(np.float32)
        cmap = attribute(net, x, None, MethodSpec("grad_x_input"))
        res = patch_sensitivity(net, x, None, cmap, trials=100, seed=3)
        assert res.fractions == (0.1, 0.2, 0.3, 0.4, 0.5)
        for r in res.r_values:
            assert r == pytest.approx(1.0, abs=1e-6)

    def test_random_map_bounded_and_reproducible(self, icnn_small):
        net, stats = icnn_small
        x = np.random.default_rng(2).standard_normal((5, 96)).astype(np.float32)
        cmap = random_baseline_map(5, 96, 7)
        r1 = patch_sensitivity(net, x, stats, cmap, trials=100, seed=9)
        r2 = patch_sensitivity(net, x, stats, cmap, trials=100, seed=9)
        assert r1 == r2
        for r in r1.r_values:
            assert r is None or -1.0 <= r <= 1.0

    def test_many_matches_single(self, icnn_small):
        net, stats = icnn_small
        x = np.random.default_rng(3).standard_normal((5, 96)).astype(np.float32)
        m1 = attribute(net, x, stats, MethodSpec("grad_x_input"))
        m2 = attribute(net, x, stats, MethodSpec("saliency"))
        both = patch_sensitivity_many(net, x, stats, {"a": m1, "b": m2}, trials=50, seed=4)
        assert both["a"] == patch_sensitivity(net, x, stats, m1, trials=50, seed=4)
        assert both["b"] == patch_sensitivity(net, x, stats, m2, trials=50, seed=4)

    def test_empty_patch_rejected(self):
        net = linear_net(seed=4, t=4)
        x = np.zeros((4, 4), np.float32)
        with pytest.raises(ConfigError, match="empty patch"):
            patch_sensitivity(net, x, None, np.zeros((4, 4)), fractions=(0.1,), trials=3)

    def test_map_shape_checked(self):
        net = linear_net(seed=5)
        with pytest.raises(ConfigError, match="shape"):
            patch_sensitivity(net, np.zeros((4, 40), np.float32), None, np.zeros((2, 2)))


class TestChannelSensitivity:
    def test_linear_model_r_is_one(self):
        # per-channel weights: channel sums of grad*input track the logit drop
        net = linear_net(seed=6)
        x = np.random.default_rng(6).standard_normal((4, 40)).astype(np.float32)
        cmap = attribute(net, x, None, MethodSpec("grad_x_input"))
        r = channel_sensitivity(net, x, None, cmap.values.mean(axis=1))
        assert r == pytest.approx(1.0, abs=1e-6)

    def test_constant_channel_map_undefined(self, icnn_small):
        net, stats = icnn_small
        x = np.random.default_rng(7).standard_normal((5, 96)).astype(np.float32)
        assert channel_sensitivity(net, x, stats, np.ones(5)) is None

    def test_seed_free_determinism(self, icnn_small):
        net, stats = icnn_small
        x = np.random.default_rng(8).standard_normal((5, 96)).astype(np.float32)
        cm = np.random.default_rng(9).standard_normal(5)
        assert channel_sensitivity(net, x, stats, cm) == \
            channel_sensitivity(net, x, stats, cm)

    def test_needs_two_channels(self):
        net = linear_net(seed=10, n=1)
        with pytest.raises(ConfigError):
            channel_sensitivity(net, np.zeros((1, 40), np.float32), None, np.zeros(1))


class TestDeletionCurve:
    def test_full_deletion_equals_zero_sample_probability(self, icnn_small):
        net, stats = icnn_small
        x = np.random.default_rng(11).standard_normal((5, 96)).astype(np.float32)
        c, _ = models.predict(net, x, stats)
        curve = deletion_curve(net, x, stats, np.random.default_rng(12).standard_normal((5, 96)))
        zero_probs = engine.forward(net, np.zeros_like(x), stats).probabilities
        assert curve.probabilities[-1] == pytest.approx(float(zero_probs[c]), abs=1e-7)
        assert len(curve.probabilities) == 100
        assert 0.0 <= curve.aupc <= 1.0
        assert curve.aupc == pytest.approx(float(np.mean(curve.probabilities)))

    def test_constant_map_deletes_in_lexicographic_order(self):
        # with a constant map the first deleted points must be channel 0 from t=0
        net = linear_net(seed=13, n=2, t=10)
        x = np.arange(20, dtype=np.float32).reshape(2, 10) + 1.0
        curve = deletion_curve(net, x, None, np.ones((2, 10)))
        # reconstruct expected: delete k = round(n*20/100) points row-major
        w = net.layer("dense").params["weight"].astype(np.float64)
        c, _ = models.predict(net, x)
        expected = []
        for n in range(1, 101):
            k = int(round(n * 20 / 100.0))
            xx = x.ravel().copy()
            xx[:k] = 0.0
            logits = w @ xx
            z = logits - logits.max()
            p = np.exp(z) / np.exp(z).sum()
            expected.append(p[c])
        assert np.abs(np.asarray(curve.probabilities) - expected).max() < 1e-5

    def test_curve_probabilities_in_unit_interval(self, icnn_small):
        net, stats = icnn_small
        x = np.random.default_rng(14).standard_normal((5, 96)).astype(np.float32)
        curve = deletion_curve(net, x, stats, np.abs(x))
        assert all(0.0 <= p <= 1.0 for p in curve.probabilities)

    def test_final_point_is_input_independent_up_to_predicted_class(self, icnn_small):
        # at n=100% every input has been zeroed, so the recorded probability
        # depends only on the net, the stats and the predicted class
        net, stats = icnn_small
        rng = np.random.default_rng(15)
        finals = {}
        for _ in range(4):
            x = rng.standard_normal((5, 96)).astype(np.float32)
            c, _ = models.predict(net, x, stats)
            curve = deletion_curve(net, x, stats, rng.standard_normal((5, 96)))
            finals.setdefault(c, set()).add(round(curve.probabilities[-1], 9))
        for vals in finals.values():
            assert len(vals) == 1


class TestChannelDeletion:
    def test_single_channel_equals_zero_sample(self):
        net = linear_net(seed=15, n=1)
        x = np.random.default_rng(15).standard_normal((1, 40)).astype(np.float32)
        c, _ = models.predict(net, x)
        curve = channel_deletion_curve(net, x, None, np.asarray([1.0]))
        zero_probs = engine.forward(net, np.zeros_like(x)).probabilities
        assert len(curve.probabilities) == 1
        assert curve.probabilities[0] == pytest.approx(float(zero_probs[c]), abs=1e-7)

    def test_uniform_map_deletes_in_index_order(self, icnn_small):
        net, stats = icnn_small
        x = np.random.default_rng(16).standard_normal((5, 96)).astype(np.float32)
        curve = channel_deletion_curve(net, x, stats, np.zeros(5))
        # cumulative deletion in index order: first step zeroes channel 0
        manual = x.copy()
        manual[0] = 0.0
        c, _ = models.predict(net, x, stats)
        p0 = engine.forward(net, manual, stats).probabilities[c]
        assert curve.probabilities[0] == pytest.approx(float(p0), abs=1e-7)

    def test_non_monotone_curves_are_legal(self, icnn_small):
        # deleting a channel may raise the probability; only bounds are asserted
        net, stats = icnn_small
        x = np.random.default_rng(17).standard_normal((5, 96)).astype(np.float32)
        curve = channel_deletion_curve(net, x, stats, np.random.default_rng(18).standard_normal(5))
        assert all(0.0 <= p <= 1.0 for p in curve.probabilities)

    def test_independent_mode_differs_from_cumulative(self, icnn_small):
        net, stats = icnn_small
        x = np.random.default_rng(19).standard_normal((5, 96)).astype(np.float32)
        cm = np.random.default_rng(20).standard_normal(5)
        cum = channel_deletion_curve(net, x, stats, cm, cumulative=True)
        ind = channel_deletion_curve(net, x, stats, cm, cumulative=False)
        assert cum.probabilities[0] == ind.probabilities[0]
        assert len(cum.probabilities) == len(ind.probabilities) == 5


def _result(method, rs, aupc=None, sample_id=0):
    return SampleResult(sample_id, "S00", method, 0, (0.1, 0.2), tuple(rs),
                        rs[0], aupc, None, None, None)


class TestAggregate:
    def test_single_sample_collapses_quantiles(self):
        summary = aggregate([_result("saliency", [0.5, 0.5], aupc=0.3)])
        d = summary.methods["saliency"].sensitivity_r
        assert d.minimum == d.q1 == d.median == d.q3 == d.maximum == 0.5

    def test_two_value_median(self):
        summary = aggregate([_result("m", [0.0, 1.0])])
        assert summary.methods["m"].sensitivity_r.median == pytest.approx(0.5)

    def test_quantiles_match_sort_oracle(self):
        rng = np.random.default_rng(21)
        values = rng.standard_normal(1000)
        d = distribution(values)
        q1, med, q3 = oracles.quantiles_sorted(values)
        assert d.q1 == pytest.approx(q1)
        assert d.median == pytest.approx(med)
        assert d.q3 == pytest.approx(q3)
        assert d.minimum == values.min() and d.maximum == values.max()

    def test_undefined_entries_excluded_and_counted(self):
        summary = aggregate([
            _result("m", [0.4, None]),
            _result("m", [None, None], sample_id=1),
        ])
        ms = summary.methods["m"]
        assert ms.sensitivity_r.count == 1
        assert ms.undefined_r >= 3

    def test_all_undefined_rejected(self):
        bad = SampleResult(0, "S00", "m", 0, (0.1,), (None,), None, None, None, None, None)
        with pytest.raises(ConfigError):
            aggregate([bad])
        with pytest.raises(ConfigError):
            aggregate([])

    def test_json_roundtrip(self):
        res = SampleResult(3, "S01", "saliency", 1, (0.1, 0.5), (0.25, None), 0.9,
                           0.4, (0.5, 0.3), 0.6, (0.7,))
        line = res.to_json_line()
        assert SampleResult.from_json_line(line) == res


class TestEvaluateSample:
    def test_matches_individual_calls(self, icnn_small):
        net, stats = icnn_small
        x = np.random.default_rng(22).standard_normal((5, 96)).astype(np.float32)
        cmap = attribute(net, x, stats, MethodSpec("grad_x_input"))
        results = evaluate_sample(net, stats, x, {"grad_x_input": cmap},
                                  trials=40, seed=23, sample_id=5, subject="S02")
        res = results[0]
        direct = patch_sensitivity(net, x, stats, cmap, trials=40, seed=23)
        assert res.sensitivity_r == direct.r_values
        direct_curve = deletion_curve(net, x, stats, cmap)
        assert res.aupc == pytest.approx(direct_curve.aupc)
        direct_ch = channel_sensitivity(net, x, stats, cmap.values.mean(axis=1))
        assert res.channel_r == pytest.approx(direct_ch)

    def test_deletion_restriction(self, icnn_small):
        net, stats = icnn_small
        x = np.random.default_rng(24).standard_normal((5, 96)).astype(np.float32)
        maps = {"a": np.abs(x), "b": -np.abs(x)}
        results = evaluate_sample(net, stats, x, maps, trials=10, seed=25,
                                  deletion_methods={"a"})
        by = {r.method: r for r in results}
        assert by["a"].aupc is not None
        assert by["b"].aupc is None
