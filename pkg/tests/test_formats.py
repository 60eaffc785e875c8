import json

import numpy as np
import pytest

from qnoiseprint.config import PRESETS, config_from_dict, parse_config, preset
from qnoiseprint.distributions import restrict_to_error_states, smooth
from qnoiseprint.errors import ConfigError, InvalidArgument
from qnoiseprint.fingerprinting import ClassifierConfig, Domain, Mode, train_fingerprint
from qnoiseprint.formats import (
    bitstring,
    distribution_csv,
    dumps_json,
    fingerprint_from_dict,
    fingerprint_to_dict,
    histogram_csv,
    kl_matrix_csv,
    parse_distribution_csv,
    parse_histogram_csv,
    parse_kl_matrix_csv,
    read_fingerprint,
    write_fingerprint,
    write_manifest,
    verify_manifest,
)
from qnoiseprint.quantum_sim import Counts, build_ghz_circuit, draw_device, sample_shots


def test_bitstring_msb_first():
    assert bitstring(1, 5) == "00001"
    assert bitstring(16, 5) == "10000"
    assert bitstring(6, 3) == "110"


class TestHistogramCSV:
    def test_layout(self):
        text = histogram_csv(Counts(2, [480, 20, 30, 470]))
        assert text == "bitstring,count\n00,480\n01,20\n10,30\n11,470\n"

    def test_round_trip(self):
        counts = sample_shots(draw_device(4, 3), build_ghz_circuit(4), 2000, 1)
        back = parse_histogram_csv(histogram_csv(counts))
        np.testing.assert_array_equal(back.histogram, counts.histogram)

    def test_sparse_rows_fill_zeros(self):
        back = parse_histogram_csv("bitstring,count\n000,5\n111,7\n")
        assert back.histogram.tolist() == [5, 0, 0, 0, 0, 0, 0, 7]

    @pytest.mark.parametrize("text", [
        "bits,count\n0,1\n",
        "bitstring,count\n0a,1\n",
        "bitstring,count\n01,1\n00,2\n",
        "bitstring,count\n",
        "bitstring,count\n01,1,2\n",
    ])
    def test_rejects_malformed(self, text):
        with pytest.raises(InvalidArgument):
            parse_histogram_csv(text)


class TestDistributionCSV:
    def test_twelve_digits(self):
        dist = smooth(Counts(2, [480, 20, 30, 470]))
        line = distribution_csv(dist).splitlines()[1]
        assert line == "00," + format(480.5 / 1002, ".12g")

    def test_full_round_trip(self):
        dist = smooth(Counts(3, [400, 3, 9, 1, 2, 0, 4, 381]))
        back = parse_distribution_csv(distribution_csv(dist))
        assert type(back) is type(dist)
        np.testing.assert_allclose(back.probs, dist.probs, rtol=1e-11)

    def test_error_state_round_trip(self):
        dist = restrict_to_error_states(smooth(Counts(3, [400, 3, 9, 1, 2, 0, 4, 381])))
        text = distribution_csv(dist)
        assert text.splitlines()[1].startswith("001,") and text.splitlines()[-1].startswith("110,")
        back = parse_distribution_csv(text)
        assert type(back) is type(dist)
        np.testing.assert_allclose(back.probs, dist.probs, rtol=1e-11)

    def test_partial_rows(self):
        with pytest.raises(InvalidArgument):
            parse_distribution_csv("bitstring,probability\n01,0.5\n11,0.5\n")


def test_kl_matrix_csv_round_trip():
    m = np.array([[0.0, 0.125, 1 / 3], [0.2, 0.0, 0.01], [1e-7, 2.5, 0.0]])
    text = kl_matrix_csv([1, 2, 3], m)
    assert text.splitlines()[0] == "node,1,2,3"
    ids, back = parse_kl_matrix_csv(text)
    assert ids == [1, 2, 3]
    np.testing.assert_allclose(back, m, rtol=1e-11)


class TestFingerprintEnvelope:
    @pytest.mark.parametrize("domain", list(Domain))
    def test_round_trip(self, tmp_path, domain):
        counts = sample_shots(draw_device(5, 8), build_ghz_circuit(5), 5000, 2)
        fp = train_fingerprint(3, counts, ClassifierConfig(domain=domain))
        path = write_fingerprint(tmp_path / "fp.json", fp, threshold=0.0123)
        back, threshold = read_fingerprint(path)
        assert (back.node_id, back.n, back.domain, back.alpha, back.training_shots) == (3, 5, domain, 0.5, 5000)
        assert threshold == 0.0123
        np.testing.assert_allclose(back.reference.probs, fp.reference.probs, rtol=1e-11)

    def test_schema(self):
        fp = train_fingerprint(1, Counts(2, [480, 20, 30, 470]))
        data = json.loads(dumps_json(fingerprint_to_dict(fp)))
        assert set(data) == {"format", "node_id", "n", "domain", "alpha", "training_shots",
                             "threshold", "distribution_csv"}
        assert data["threshold"] is None
        assert data["distribution_csv"].startswith("bitstring,probability\n")

    def test_wrong_format_tag(self):
        fp = train_fingerprint(1, Counts(2, [480, 20, 30, 470]))
        data = fingerprint_to_dict(fp)
        data["format"] = "something-else"
        with pytest.raises(InvalidArgument):
            fingerprint_from_dict(data)


def test_json_rounding_is_stable():
    text = dumps_json({"x": 0.1 + 0.2, "y": [np.float64(1 / 3)], "z": np.int64(4)})
    assert json.loads(text) == {"x": 0.3, "y": [0.333333333333], "z": 4}


class TestManifest:
    def test_verify_and_tamper(self, tmp_path):
        a = tmp_path / "a.csv"
        a.write_text("bitstring,count\n0,1\n1,2\n")
        write_manifest(tmp_path, {"m": 2}, 7, [a])
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["master_seed"] == 7 and manifest["rng"]
        assert manifest["artifacts"][0]["path"] == "a.csv"
        assert verify_manifest(tmp_path)
        a.write_text("bitstring,count\n0,2\n1,1\n")
        assert not verify_manifest(tmp_path)

    def test_missing_file_fails(self, tmp_path):
        a = tmp_path / "a.csv"
        a.write_text("x")
        write_manifest(tmp_path, {}, 0, [a])
        a.unlink()
        assert not verify_manifest(tmp_path)


class TestConfig:
    def test_minimal_defaults(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"m": 4, "master_seed": 42}')
        c = parse_config(path)
        assert (c.m, c.n, c.k, c.k_train, c.master_seed) == (4, 5, 1000, 10_000, 42)
        assert c.classifier.alpha == 0.5 and c.classifier.margin == 3
        assert c.classifier.mode is Mode.MIN_KL and c.classifier.domain is Domain.ERROR_ONLY
        assert c.adversary is None

    def test_single_node(self):
        with pytest.raises(ConfigError) as err:
            config_from_dict({"m": 1})
        assert err.value.field == "m"

    @pytest.mark.parametrize("data, field", [
        ({}, "m"),
        ({"m": 4, "colour": 1}, "colour"),
        ({"m": "4"}, "m"),
        ({"m": True}, "m"),
        ({"m": 4, "classifier": {"mode": "bayes"}}, "classifier.mode"),
        ({"m": 4, "classifier": {"gamma": 3}}, "classifier.gamma"),
        ({"m": 4, "classifier": {"alpha": "half"}}, "classifier.alpha"),
        ({"m": 4, "device_ranges": {"p1": [0.1]}}, "device_ranges.p1"),
        ({"m": 4, "adversary": {"claimed_id": 2}}, "adversary.verifier_id"),
        ({"m": 4, "adversary": {"claimed_id": 2, "verifier_id": 1, "identical": "yes"}}, "adversary.identical"),
        ({"m": 4, "neighbors": {"one": [2]}}, "neighbors.one"),
        ({"m": 4, "k": 1000, "k_train": 4000}, "k_train"),
    ])
    def test_field_paths(self, data, field):
        with pytest.raises(ConfigError) as err:
            config_from_dict(data)
        assert err.value.field == field

    def test_bad_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{m: 4")
        with pytest.raises(ConfigError):
            parse_config(bad)

    def test_presets(self):
        for name in PRESETS:
            c = preset(name)
            assert (c.m, c.n, c.k, c.k_train) == (4, 5, 1000, 10_000)
        with pytest.raises(ConfigError):
            preset("nope")
