import numpy as np
import pytest

from eegattr import models
from eegattr.attribution import MethodSpec, attribute
from eegattr.evaluation import channel_sensitivity, patch_sensitivity
from eegattr.pipeline import PipelineConfig, process
from eegattr.report import generate_report


@pytest.fixture()
def report_inputs(icnn_small):
    net, stats = icnn_small
    x = np.random.default_rng(30).standard_normal((5, 96)).astype(np.float32)
    cmap = attribute(net, x, stats, MethodSpec("grad_x_input"))
    channel_values = cmap.values.mean(axis=1)
    sens = patch_sensitivity(net, x, stats, cmap, trials=20, seed=31)
    ch_r = channel_sensitivity(net, x, stats, channel_values)
    return net, stats, x, cmap, channel_values, sens, ch_r


def build_report(report_inputs, config=None):
    net, stats, x, cmap, channel_values, sens, ch_r = report_inputs
    config = config or PipelineConfig()
    processed = process(cmap.values, channel_values, config)
    return generate_report(
        net, stats, x, "grad_x_input", processed, sens, ch_r, config,
        subject="S07", sample_id=42, true_label="spindle",
        channel_names=("A", "B", "C", "D", "E"), class_names=("spindle", "emg"),
    )


class TestReport:
    def test_structure_and_fields(self, report_inputs):
        rep = build_report(report_inputs)
        text = rep.to_text()
        lines = text.strip("\n").split("\n")
        assert len(lines) == 5
        assert lines[0].startswith("subject S07 sample 0042 label spindle")
        assert "model=interpretable_cnn" in lines[1]
        assert "method=grad_x_input" in lines[1]
        assert "window=5" in lines[1] and "thresholds=2.00/1.00" in lines[1]
        assert lines[2].startswith("sensitivity r:")
        assert lines[3].startswith("deletion: p=")
        assert lines[4].startswith("channel deletion: p=")
        assert 0.0 <= rep.deleted_portion <= 1.0
        for p in rep.probabilities:
            assert 0.0 <= p <= 1.0

    def test_byte_determinism(self, report_inputs):
        a = build_report(report_inputs).to_text()
        b = build_report(report_inputs).to_text()
        assert a.encode() == b.encode()

    def test_empty_highlight_mask_keeps_probability(self, report_inputs):
        cfg = PipelineConfig(sample_threshold=1e9, channel_threshold=1e9)
        rep = build_report(report_inputs, cfg)
        assert rep.deleted_portion == 0.0
        assert rep.top_channels == ()
        assert rep.deleted_channels == ()
        assert rep.deletion_probability == pytest.approx(rep.base_probability)
        assert rep.channel_deletion_probability == pytest.approx(rep.base_probability)
        assert "top channels: none" in rep.to_text()

    def test_top_channels_ranked_by_deleted_count(self, report_inputs):
        rep = build_report(report_inputs, PipelineConfig(sample_threshold=0.5))
        if len(rep.top_channels) >= 2:
            shares = [s for _, s in rep.top_channels]
            assert shares == sorted(shares, reverse=True)
        assert len(rep.top_channels) <= 3
        assert sum(s for _, s in rep.top_channels) <= 1.0 + 1e-9

    def test_deletion_uses_exactly_the_mask(self, report_inputs, icnn_small):
        net, stats = icnn_small
        _, _, x, cmap, channel_values, sens, ch_r = report_inputs
        cfg = PipelineConfig(sample_threshold=0.5)
        processed = process(cmap.values, channel_values, cfg)
        rep = generate_report(net, stats, x, "grad_x_input", processed, sens, ch_r, cfg)
        from eegattr import engine
        manual = x.copy()
        manual[processed.point_mask] = 0.0
        tr = engine.forward(net, manual, stats)
        c = int(np.argmax(engine.forward(net, x, stats).probabilities))
        assert rep.deletion_probability == pytest.approx(float(tr.probabilities[c]))
        assert rep.deleted_portion == pytest.approx(processed.point_mask.mean())

    def test_predicted_label_uses_class_names(self, report_inputs):
        rep = build_report(report_inputs)
        assert rep.predicted_label in ("spindle", "emg")
