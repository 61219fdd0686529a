import numpy as np
import pytest

import oracles
from eegattr import models
from eegattr.errors import ConfigError
from eegattr.synth import (
    ClassSpec,
    FeatureSpec,
    demo_classes,
    generate_dataset,
    split_leave_one_subject_out,
)
from eegattr.training import TrainConfig, train


def small_dataset(seed=0, spc=5, subjects=3, amplitude=2.5):
    classes = (
        ClassSpec("spindle", (FeatureSpec("alpha_spindle", amplitude=amplitude,
                                          channels=(1, 2), freq=10.0, duration=0.6),)),
        ClassSpec("emg", (FeatureSpec("emg_noise", amplitude=amplitude,
                                      channels=(3, 4), band=(30.0, 50.0), duration=0.6),)),
    )
    return generate_dataset(6, 128, 128.0, classes, spc, subjects, seed)


class TestGeneration:
    def test_sample_arithmetic(self):
        # 11 subjects x 2 classes x 50 per class = 1100
        ds = generate_dataset(4, 128, 128.0, demo_classes(4), 50, 11, seed=1)
        assert len(ds) == 1100
        assert ds.data.shape == (1100, 4, 128)

    def test_balanced_per_subject_and_class(self):
        ds = small_dataset(seed=2, spc=7, subjects=4)
        for subj in ds.subject_list():
            labels = [int(ds.labels[i]) for i in range(len(ds)) if ds.subjects[i] == subj]
            assert labels.count(0) == labels.count(1) == 7

    def test_deterministic_per_seed(self):
        a = small_dataset(seed=3)
        b = small_dataset(seed=3)
        assert np.array_equal(a.data, b.data)
        c = small_dataset(seed=4)
        assert not np.array_equal(a.data, c.data)

    def test_spindle_band_power_bump(self):
        ds = small_dataset(seed=5, spc=20)
        spindle = ds.data[ds.labels == 0]
        other = ds.data[ds.labels == 1]
        # 8-13 Hz power on a target channel of the spindle class vs the same
        # channel in the EMG class: > 3 dB (factor 2)
        p_spindle = np.mean([oracles.band_power(s[1], 128.0, 8, 13) for s in spindle])
        p_other = np.mean([oracles.band_power(s[1], 128.0, 8, 13) for s in other])
        assert p_spindle > 2.0 * p_other

    def test_emg_band_power_bump(self):
        ds = small_dataset(seed=6, spc=20)
        emg = ds.data[ds.labels == 1]
        other = ds.data[ds.labels == 0]
        p_emg = np.mean([oracles.band_power(s[3], 128.0, 30, 50) for s in emg])
        p_other = np.mean([oracles.band_power(s[3], 128.0, 30, 50) for s in other])
        assert p_emg > 2.0 * p_other

    def test_zero_amplitude_features_are_null_signal(self):
        # classes become statistically indistinguishable: held-out accuracy
        # lands near chance
        ds = small_dataset(seed=7, spc=40, subjects=3, amplitude=0.0)
        train_set, test_set = split_leave_one_subject_out(ds, "S00")
        net = models.build_interpretable_cnn(6, 128, 2, n_temporal_filters=4, seed=7)
        net, _ = train(net, train_set, TrainConfig(epochs=2, batch_size=40, seed=7))
        stats = models.compute_batch_stats(net, test_set.data)
        from eegattr import engine
        logits, _ = engine.logits_batch(net, test_set.data, stats)
        acc = float((logits.argmax(axis=1) == test_set.labels).mean())
        assert 0.3 <= acc <= 0.7

    def test_nyquist_violation_rejected(self):
        bad = ClassSpec("bad", (FeatureSpec("emg_noise", band=(30.0, 70.0)),))
        with pytest.raises(ConfigError, match="Nyquist"):
            generate_dataset(4, 64, 128.0, [bad], 2, 2, seed=0)
        bad2 = ClassSpec("bad", (FeatureSpec("alpha_spindle", freq=64.0),))
        with pytest.raises(ConfigError, match="Nyquist"):
            generate_dataset(4, 64, 128.0, [bad2], 2, 2, seed=0)

    def test_duration_must_fit(self):
        bad = ClassSpec("bad", (FeatureSpec("alpha_spindle", duration=2.0),))
        with pytest.raises(ConfigError, match="duration"):
            generate_dataset(4, 64, 128.0, [bad], 2, 2, seed=0)

    def test_feature_channel_bounds_checked(self):
        bad = ClassSpec("bad", (FeatureSpec("alpha_spindle", channels=(9,), duration=0.25),))
        with pytest.raises(ConfigError, match="channel"):
            generate_dataset(4, 64, 128.0, [bad], 2, 2, seed=0)

    def test_unknown_feature_kind_rejected(self):
        with pytest.raises(ConfigError, match="unknown feature kind"):
            FeatureSpec("sawtooth")

    def test_all_feature_kinds_generate(self):
        classes = (ClassSpec("mix", (
            FeatureSpec("alpha_spindle", channels=(0,), duration=0.5),
            FeatureSpec("blink_pulse", channels=(1,), duration=0.3),
            FeatureSpec("emg_noise", channels=(2,), duration=0.5),
            FeatureSpec("frn_transient", channels=(3,), latency=0.25),
            FeatureSpec("pink_background", channels=(0, 1)),
        )),)
        ds = generate_dataset(4, 128, 128.0, classes, 3, 2, seed=8)
        assert np.isfinite(ds.data).all()


class TestSplit:
    def test_partition(self):
        ds = small_dataset(seed=9, spc=4, subjects=11)
        train_set, test_set = split_leave_one_subject_out(ds, "S03")
        assert set(test_set.subjects) == {"S03"}
        assert "S03" not in set(train_set.subjects)
        assert len(set(train_set.subjects)) == 10

    def test_union_is_everything(self):
        ds = small_dataset(seed=10, spc=3, subjects=4)
        train_set, test_set = split_leave_one_subject_out(ds, "S01")
        ids = sorted(list(train_set.sample_ids) + list(test_set.sample_ids))
        assert ids == sorted(ds.sample_ids)

    def test_iterating_subjects_covers_each_once(self):
        ds = small_dataset(seed=11, spc=2, subjects=5)
        seen = []
        for subj in ds.subject_list():
            _, test_set = split_leave_one_subject_out(ds, subj)
            seen.extend(test_set.sample_ids)
        assert sorted(seen) == sorted(ds.sample_ids)

    def test_unknown_subject_rejected(self):
        ds = small_dataset(seed=12)
        with pytest.raises(ConfigError, match="unknown subject"):
            split_leave_one_subject_out(ds, "S99")
