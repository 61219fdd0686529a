import numpy as np
import pytest

from eegattr import engine, models
from eegattr.dataset_io import (
    MapsFile,
    default_layout,
    load_contribution_maps,
    load_dataset,
    load_layout,
    save_contribution_maps,
    save_dataset,
)
from eegattr.errors import ChecksumError, ConfigError, FormatError, ShapeError, VersionError
from eegattr.synth import demo_classes, generate_dataset
from eegattr.weights_io import load_weights, save_weights


@pytest.fixture()
def trained_icnn():
    return models.build_interpretable_cnn(4, 96, 2, n_temporal_filters=4, seed=21)


class TestWeights:
    def test_roundtrip_identical_outputs_on_100_inputs(self, trained_icnn, tmp_path):
        path = tmp_path / "w.eegw"
        save_weights(trained_icnn, path)
        loaded = load_weights(path)
        rng = np.random.default_rng(0)
        batch = rng.standard_normal((100, 4, 96)).astype(np.float32)
        stats = models.compute_batch_stats(trained_icnn, batch)
        a, _ = engine.logits_batch(trained_icnn, batch, stats)
        b, _ = engine.logits_batch(loaded, batch, stats)
        assert np.array_equal(a, b)

    def test_roundtrip_bit_exact_parameters(self, tmp_path):
        net = models.build_eegnet(4, 96, 3, f1=4, seed=22)
        path = tmp_path / "w.eegw"
        save_weights(net, path)
        loaded = load_weights(path)
        for l1, l2 in zip(net.layers, loaded.layers):
            for key in l1.params:
                assert np.array_equal(l1.params[key], l2.params[key]), (l1.name, key)

    def test_truncated_file_fails_checksum(self, trained_icnn, tmp_path):
        path = tmp_path / "w.eegw"
        save_weights(trained_icnn, path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-20])
        with pytest.raises(ChecksumError):
            load_weights(path)

    def test_manifest_channel_edit_fails_shape_check(self, trained_icnn, tmp_path):
        path = tmp_path / "w.eegw"
        save_weights(trained_icnn, path)
        raw = path.read_bytes()
        edited = raw.replace(b"channels 4\n", b"channels 5\n", 1)
        path.write_bytes(edited)
        with pytest.raises(ShapeError):
            load_weights(path)

    def test_version_bump_rejected(self, trained_icnn, tmp_path):
        path = tmp_path / "w.eegw"
        save_weights(trained_icnn, path)
        raw = path.read_bytes()
        path.write_bytes(raw.replace(b"EEGATTR-WEIGHTS 1\n", b"EEGATTR-WEIGHTS 9\n", 1))
        with pytest.raises(VersionError):
            load_weights(path)

    def test_single_bit_flip_in_blob_detected(self, trained_icnn, tmp_path):
        path = tmp_path / "w.eegw"
        save_weights(trained_icnn, path)
        raw = bytearray(path.read_bytes())
        sep = bytes(raw).find(b"\n---\n") + 5
        rng = np.random.default_rng(23)
        pos = sep + int(rng.integers(0, len(raw) - sep))
        raw[pos] ^= 1 << int(rng.integers(0, 8))
        path.write_bytes(bytes(raw))
        with pytest.raises(ChecksumError):
            load_weights(path)

    def test_non_builder_network_rejected(self, tmp_path):
        from conftest import make_dense_net
        net = make_dense_net(np.eye(2), 1, 2)
        with pytest.raises(FormatError):
            save_weights(net, tmp_path / "w.eegw")


class TestDatasets:
    def test_roundtrip_bit_exact(self, tmp_path):
        ds = generate_dataset(4, 128, 128.0, demo_classes(4), 5, 3, seed=24)
        path = tmp_path / "d.eegds"
        save_dataset(ds, path)
        loaded = load_dataset(path)
        assert np.array_equal(ds.data, loaded.data)
        assert np.array_equal(ds.labels, loaded.labels)
        assert loaded.subjects == ds.subjects
        assert loaded.channel_names == ds.channel_names
        assert loaded.class_names == ds.class_names
        assert loaded.rate == ds.rate

    def test_save_is_byte_deterministic(self, tmp_path):
        ds = generate_dataset(4, 128, 128.0, demo_classes(4), 5, 3, seed=25)
        p1, p2 = tmp_path / "a.eegds", tmp_path / "b.eegds"
        save_dataset(ds, p1)
        save_dataset(ds, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncation_detected(self, tmp_path):
        ds = generate_dataset(4, 128, 128.0, demo_classes(4), 3, 2, seed=26)
        path = tmp_path / "d.eegds"
        save_dataset(ds, path)
        path.write_bytes(path.read_bytes()[:-11])
        with pytest.raises(ChecksumError):
            load_dataset(path)

    def test_wrong_kind_rejected(self, tmp_path):
        ds = generate_dataset(4, 128, 128.0, demo_classes(4), 3, 2, seed=27)
        maps = MapsFile(ds.data[:2], "saliency", np.zeros(2, int),
                        ds.sample_ids[:2], ds.channel_names)
        path = tmp_path / "m.eegmap"
        save_contribution_maps(maps, path)
        with pytest.raises(FormatError, match="not a sample dataset"):
            load_dataset(path)

    def test_maps_roundtrip_with_method_header(self, tmp_path):
        rng = np.random.default_rng(28)
        maps = MapsFile(rng.standard_normal((3, 4, 16)).astype(np.float32),
                        "grad_x_input", np.asarray([0, 1, 0]),
                        np.asarray([5, 6, 9]), ("A", "B", "C", "D"))
        path = tmp_path / "m.eegmap"
        save_contribution_maps(maps, path)
        loaded = load_contribution_maps(path)
        assert loaded.method == "grad_x_input"
        assert np.array_equal(loaded.values, maps.values)
        assert np.array_equal(loaded.targets, maps.targets)
        assert np.array_equal(loaded.sample_ids, maps.sample_ids)

    def test_missing_separator_is_format_error(self, tmp_path):
        path = tmp_path / "x.eegds"
        path.write_bytes(b"EEGATTR-DATA 1\nchannels 4\n")
        with pytest.raises(FormatError):
            load_dataset(path)


class TestLayouts:
    def test_bundled_layout_loads_30_channels(self):
        layout = default_layout()
        assert len(layout.names) == 30
        assert layout.coords.shape == (30, 2)
        assert (np.linalg.norm(layout.coords, axis=1) <= 1.0 + 1e-9).all()

    def test_simple_line(self, tmp_path):
        path = tmp_path / "l.txt"
        path.write_text("# comment\nCZ 0.0 0.0\nFZ 0.0 0.4\n")
        layout = load_layout(path)
        assert layout.names == ("CZ", "FZ")
        assert np.allclose(layout.coords[0], [0.0, 0.0])

    def test_out_of_disc_coordinate_rejected(self, tmp_path):
        path = tmp_path / "l.txt"
        path.write_text("CZ 1.5 0.0\n")
        with pytest.raises(FormatError, match="unit circle"):
            load_layout(path)

    def test_duplicate_name_rejected(self, tmp_path):
        path = tmp_path / "l.txt"
        path.write_text("CZ 0.0 0.0\nCZ 0.1 0.1\n")
        with pytest.raises(FormatError, match="duplicate"):
            load_layout(path)

    def test_malformed_line_names_line_number(self, tmp_path):
        path = tmp_path / "l.txt"
        path.write_text("CZ 0.0 0.0\nbogus line here and more\n")
        with pytest.raises(FormatError, match="l.txt:2"):
            load_layout(path)

    def test_subset_by_names(self):
        layout = default_layout()
        sub = layout.subset(("CZ", "FZ"))
        assert sub.names == ("CZ", "FZ")
        with pytest.raises(ConfigError, match="no coordinates"):
            layout.subset(("NOPE",))
