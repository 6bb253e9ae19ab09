import math
import os
import struct

import numpy as np
import pytest

import pyaia


def test_f_measure_rows():
    assert round(pyaia.f_measure(0.28, 0.96), 2) == 0.43
    assert round(pyaia.f_measure(0.54, 0.37), 2) == 0.44
    assert pyaia.f_measure(0.0, 0.0) == 0.0


def test_logentropy_three_images():
    phi = np.array([[1, 1, 1], [0, 1, 1], [0, 0, 1]], dtype=np.uint8)
    w = pyaia.logentropy_weights(phi)
    assert w[0, 0] == 1.0
    assert abs(w[0, 1] - (1 - math.log(2) / math.log(3))) < 1e-12
    assert w[0, 2] == 0.0
    with pytest.raises(pyaia.DataError):
        pyaia.logentropy_weights(np.ones((1, 2), dtype=np.uint8))


def test_dtcwt_round_trip():
    rng = np.random.default_rng(3)
    for shape in [(32, 32), (64, 64), (32, 64)]:
        x = rng.uniform(0, 255, shape)
        assert np.abs(pyaia.dtcwt_round_trip(x, 4) - x).max() < 1e-6
        mats = pyaia.dtcwt_final_level(x, 4)
        assert len(mats) == 16
        assert all(m.shape == (shape[0] // 16, shape[1] // 16) for m in mats)


def test_dtcwt_matches_reference_package():
    os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "3")
    dtcwt = pytest.importorskip("dtcwt")
    rng = np.random.default_rng(11)
    x = rng.uniform(0, 255, (64, 64))
    reference = dtcwt.Transform2d("near_sym_b", "qshift_b").forward(x, nlevels=4).highpasses[3]
    ours = pyaia.dtcwt_final_level(x, 4)
    for o in range(6):
        band = ours[4 + 2 * o] + 1j * ours[5 + 2 * o]
        assert np.abs(band - reference[:, :, o]).max() < 1e-9


def test_svd_against_numpy():
    rng = np.random.default_rng(5)
    for _ in range(20):
        m = rng.uniform(-1, 1, (rng.integers(1, 17), rng.integers(1, 17)))
        ours = np.asarray(pyaia.svd_values(m))
        expected = np.linalg.svd(m, compute_uv=False)
        assert np.allclose(ours, expected, rtol=1e-10, atol=1e-12)


def test_lowlevel_descriptor_shape():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, (48, 40, 3), dtype=np.uint8)
    v = np.asarray(pyaia.extract_lowlevel(img))
    assert v.shape == (324,)
    assert np.isfinite(v).all()
    assert np.array_equal(v, np.asarray(pyaia.extract_lowlevel(img)))
    assert np.asarray(pyaia.fallback_descriptor(img)).shape == (112,)


def _exporter_bytes(source, metadata, ids, vectors):
    """Feature file laid out the way an external CNN exporter writes it."""
    out = bytearray(b"AIAFEAT\0")
    out += struct.pack("<I", 1)
    for text in (source, metadata):
        raw = text.encode()
        out += struct.pack("<I", len(raw)) + raw
    out += struct.pack("<IQ", vectors.shape[1], len(ids))
    for image_id, row in zip(ids, vectors):
        raw = image_id.encode()
        out += struct.pack("<I", len(raw)) + raw
        out += row.astype("<f8").tobytes()
    return bytes(out)


@pytest.mark.parametrize("source,dim", [("resnet50", 2048), ("vgg16", 4096)])
def test_exporter_file_contract(tmp_path, source, dim):
    rng = np.random.default_rng(dim)
    ids = ["images/a.jpg", "images/b.jpg", "images/c.jpg"]
    vectors = rng.standard_normal((3, dim))
    path = tmp_path / f"{source}.feat"
    original = _exporter_bytes(source, "model=" + source, ids, vectors)
    path.write_bytes(original)

    ingested = pyaia.ingest_features(path)
    assert ingested["source"] == source
    assert ingested["dim"] == dim
    assert ingested["warnings"] == []
    assert sorted(ingested["vectors"]) == ids
    assert np.array_equal(np.asarray(ingested["vectors"]["images/b.jpg"]), vectors[1])

    parsed = pyaia.read_feature_file(path)
    again = tmp_path / "again.feat"
    pyaia.write_feature_file(again, parsed["source"], parsed["metadata"], parsed["ids"], parsed["vectors"])
    assert again.read_bytes() == original


def test_cli_in_process(tmp_path):
    manifest = tmp_path / "m.tsv"
    manifest.write_text("@I1\tK1,K2,K3\n@I2\tK2,K3\n@I3\tK3\n")
    code, out, err = pyaia.run_cli(["weights", "--seed", "1", "--manifest", str(manifest),
                                    "--output_dir", str(tmp_path / "run")])
    assert code == 0, err
    assert "I1,K2,0.3691" in (tmp_path / "run" / "weights.csv").read_text()
    code, _, err = pyaia.run_cli(["weights", "--manifest", str(manifest)])
    assert code == 2
    assert "seed" in err
