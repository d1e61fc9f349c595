import numpy as np
import pytest
import scipy.sparse as sp

from fakenews.artifact import ModelArtifact, dumps, load_model, loads, save_model
from fakenews.errors import ArtifactError, ChecksumMismatch, UnknownModelKind, UnsupportedVersion
from fakenews.models import KINDS
from fakenews.vectorize import transform


def random_inputs(dim, n=100, seed=0):
    g = np.random.default_rng(seed)
    X = sp.random(n, dim, density=min(1.0, 20 / dim), random_state=g, format="csr")
    X.data = g.random(X.nnz)
    return X


def resign(data):
    import hashlib

    body = data.rstrip(b"\n").rpartition(b"\n")[0] + b"\n"
    return body + f"sha256 {hashlib.sha256(body).hexdigest()}\n".encode()


@pytest.fixture
def saved(trained, tmp_path):
    tfidf, _, _, models = trained
    paths = {}
    for kind, model in models.items():
        paths[kind] = save_model(ModelArtifact(kind, tfidf, model, {"note": kind}),
                                 tmp_path / f"{kind}.model")
    return paths


class TestRoundTrip:
    @pytest.mark.parametrize("kind", list(KINDS))
    def test_predictions_identical(self, trained, saved, kind):
        tfidf, _, _, models = trained
        art = load_model(saved[kind])
        assert art.kind == kind and art.config == {"note": kind}
        assert art.tfidf == tfidf
        X = random_inputs(tfidf.dim, seed=len(kind))
        la, sa = KINDS[kind].predict_many(models[kind], X)
        lb, sb = KINDS[kind].predict_many(art.model, X)
        assert np.array_equal(la, lb)
        assert sa.tobytes() == sb.tobytes()

    def test_text_pipeline_identical(self, trained, saved):
        tfidf, _, _, models = trained
        art = load_model(saved["logreg"])
        known = " ".join(tfidf.vocabulary.terms[:5])
        text = "some words from nowhere plus a few vocabulary terms " + known
        assert transform(art.tfidf, text) == transform(tfidf, text)

    def test_save_is_deterministic(self, trained):
        tfidf, _, _, models = trained
        a = dumps(ModelArtifact("forest", tfidf, models["forest"]))
        b = dumps(ModelArtifact("forest", tfidf, models["forest"]))
        assert a == b


class TestCorruption:
    def test_flipped_byte(self, saved):
        data = bytearray(saved["svm"].read_bytes())
        data[len(data) // 2] ^= 0x01
        with pytest.raises(ChecksumMismatch):
            loads(bytes(data))

    @pytest.mark.parametrize("offset", [0.1, 0.5, 0.9])
    def test_flipped_byte_every_kind(self, saved, offset):
        for path in saved.values():
            data = bytearray(path.read_bytes())
            data[int(len(data) * offset)] ^= 0x20
            with pytest.raises(ArtifactError):
                loads(bytes(data))

    def test_truncated(self, saved):
        data = saved["logreg"].read_bytes()
        with pytest.raises(ChecksumMismatch):
            loads(data[: len(data) // 3])

    def test_future_version(self, saved):
        data = saved["logreg"].read_bytes().replace(b"version 1\n", b"version 99\n", 1)
        with pytest.raises(UnsupportedVersion):
            loads(data)

    def test_unknown_kind(self, saved):
        data = saved["svm"].read_bytes().replace(b"kind svm\n", b"kind boosted\n", 1)
        with pytest.raises(UnknownModelKind):
            loads(resign(data))

    def test_bad_magic(self, saved):
        data = b"NOT-A-MODEL" + saved["svm"].read_bytes()[len(b"FAKENEWS-MODEL"):]
        with pytest.raises(ArtifactError, match="magic"):
            loads(resign(data))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ArtifactError):
            load_model(tmp_path / "none.model")
