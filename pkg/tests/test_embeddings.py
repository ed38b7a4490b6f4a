import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from dialseg import (
    DegenerateSimilarityWarning,
    Dialogue,
    HttpServiceProvider,
    LexicalHashProvider,
    PrecomputedFileProvider,
    ProjectionHead,
    cosine,
    read_embedding_file,
    write_embedding_jsonl,
    write_embedding_ueb1,
)
from dialseg.errors import (
    EmbeddingFileError,
    InvalidArgumentError,
    MissingEmbeddingError,
    TransportError,
)


class TestCosine:
    def test_self_similarity(self):
        v = np.array([0.3, -1.2, 4.0])
        assert cosine(v, v) == 1.0

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_hand_value(self):
        # (1,0) . (1,1) / (1 * sqrt(2))
        assert cosine(np.array([1.0, 0.0]), np.array([1.0, 1.0])) == pytest.approx(
            1 / np.sqrt(2), abs=1e-12
        )

    def test_zero_norm_warns_and_returns_zero(self):
        with pytest.warns(DegenerateSimilarityWarning):
            assert cosine(np.zeros(3), np.ones(3)) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            cosine(np.ones(2), np.ones(3))

    def test_symmetry_and_scale_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = rng.normal(size=8)
            b = rng.normal(size=8)
            lam = rng.uniform(0.1, 10.0)
            assert cosine(a, b) == cosine(b, a)
            assert cosine(lam * a, b) == pytest.approx(cosine(a, b), abs=1e-12)


class TestLexicalHash:
    def test_deterministic(self):
        p = LexicalHashProvider(d_base=64, seed=7)
        d = Dialogue("d", ("the same text", "another line"))
        first = p.embed_dialogue(d)
        second = p.embed_dialogue(d)
        for a, b in zip(first, second):
            assert np.array_equal(a.vector, b.vector)

    def test_identical_text_across_dialogues(self):
        p = LexicalHashProvider(d_base=64, seed=7)
        va = p.embed_dialogue(Dialogue("d1", ("a",)))[0]
        vb = p.embed_dialogue(Dialogue("d2", ("a",)))[0]
        assert va.key != vb.key
        assert np.array_equal(va.vector, vb.vector)

    def test_seed_changes_vectors(self):
        text = "tokens change buckets"
        v1 = LexicalHashProvider(64, seed=1).embed_text(text)
        v2 = LexicalHashProvider(64, seed=2).embed_text(text)
        assert not np.array_equal(v1, v2)

    def test_unit_norm(self):
        v = LexicalHashProvider(32, 0).embed_text("some words here")
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)

    def test_no_tokens_gives_zero_vector(self):
        v = LexicalHashProvider(32, 0).embed_text("!!! ???")
        assert np.all(v == 0.0)

    def test_keys_are_one_based(self):
        p = LexicalHashProvider(16, 0)
        keys = [e.key for e in p.embed_dialogue(Dialogue("dlg", ("x", "y")))]
        assert keys == ["dlg:1", "dlg:2"]


class TestProjectionHead:
    def test_identity(self):
        head = ProjectionHead(weight=np.eye(4), bias=np.zeros(4))
        e = np.array([1.0, -2.0, 0.5, 3.0])
        assert np.array_equal(head.project(e), e)

    def test_constant(self):
        head = ProjectionHead(weight=np.zeros((3, 4)), bias=np.full(3, 2.5))
        assert np.array_equal(head.project(np.ones(4)), np.full(3, 2.5))

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(5)
        head = ProjectionHead(weight=rng.normal(size=(3, 5)), bias=rng.normal(size=3))
        e = rng.normal(size=5)
        expected = np.zeros(3)
        for k in range(3):
            for j in range(5):
                expected[k] += head.weight[k][j] * e[j]
            expected[k] += head.bias[k]
        assert np.allclose(head.project(e), expected, atol=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(9)
        head = ProjectionHead(weight=rng.normal(size=(4, 6)), bias=rng.normal(size=4))
        e1, e2 = rng.normal(size=6), rng.normal(size=6)
        lhs = head.project(e1 + e2) - head.bias
        rhs = (head.project(e1) - head.bias) + (head.project(e2) - head.bias)
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_dimension_mismatch(self):
        head = ProjectionHead.initialize(8, 4, seed=0)
        with pytest.raises(InvalidArgumentError):
            head.project(np.ones(5))

    def test_initialize_bounds_and_determinism(self):
        h1 = ProjectionHead.initialize(16, 8, seed=3)
        h2 = ProjectionHead.initialize(16, 8, seed=3)
        assert np.array_equal(h1.weight, h2.weight)
        assert np.all(np.abs(h1.weight) <= 1 / np.sqrt(16))
        assert np.all(h1.bias == 0.0)

    def test_project_all_matches_project(self):
        rng = np.random.default_rng(2)
        head = ProjectionHead.initialize(6, 3, seed=1)
        mat = rng.normal(size=(5, 6))
        batch = head.project_all(mat)
        for row in range(5):
            assert np.allclose(batch[row], head.project(mat[row]), atol=1e-12)


class TestEmbeddingFiles:
    def test_jsonl_round_trip_bit_exact(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        rng = np.random.default_rng(0)
        items = [(f"d:{i}", rng.normal(size=6)) for i in range(1, 4)]
        write_embedding_jsonl(path, items)
        table = read_embedding_file(path)
        for key, vec in items:
            assert np.array_equal(table[key], np.asarray(vec))

    def test_jsonl_rejects_mixed_dims(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text('{"key": "a:1", "vec": [1.0, 2.0]}\n{"key": "a:2", "vec": [1.0]}\n')
        with pytest.raises(EmbeddingFileError):
            read_embedding_file(path)

    def test_jsonl_skips_comment_lines(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text('# header\n{"key": "a:1", "vec": [1.0, 2.0]}\n')
        assert "a:1" in read_embedding_file(path)

    def test_ueb1_round_trip(self, tmp_path):
        path = tmp_path / "emb.ueb1"
        rng = np.random.default_rng(1)
        items = [(f"dlg:{i}", rng.normal(size=5).astype(np.float32)) for i in range(1, 5)]
        write_embedding_ueb1(path, items)
        table = read_embedding_file(path)
        for key, vec in items:
            assert np.allclose(table[key], vec, atol=0)  # f32 stored exactly

    def test_provider_lookup_and_missing_key(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        write_embedding_jsonl(path, [("d:1", [1.0, 0.0]), ("d:2", [0.0, 1.0])])
        provider = PrecomputedFileProvider(path)
        assert provider.d_base == 2
        got = provider.embed_dialogue(Dialogue("d", ("x", "y")))
        assert np.array_equal(got[0].vector, [1.0, 0.0])
        with pytest.raises(MissingEmbeddingError, match="e:1"):
            provider.embed_dialogue(Dialogue("e", ("x",)))


class _EmbedHandler(BaseHTTPRequestHandler):
    fail = False

    def do_POST(self):
        if self.path != "/embed":
            self.send_error(404)
            return
        if self.fail:
            self.send_error(500)
            return
        length = int(self.headers["Content-Length"])
        texts = json.loads(self.rfile.read(length))["texts"]
        vectors = [[float(len(t)), 1.0] for t in texts]
        body = json.dumps({"vectors": vectors}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def embed_server():
    server = HTTPServer(("127.0.0.1", 0), _EmbedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestHttpProvider:
    def test_fetches_vectors_in_order(self, embed_server):
        provider = HttpServiceProvider(embed_server)
        got = provider.embed_dialogue(Dialogue("d", ("ab", "abcd")))
        assert np.array_equal(got[0].vector, [2.0, 1.0])
        assert np.array_equal(got[1].vector, [4.0, 1.0])
        assert provider.d_base == 2

    def test_non_200_is_transport_error(self, embed_server):
        _EmbedHandler.fail = True
        try:
            with pytest.raises(TransportError) as info:
                HttpServiceProvider(embed_server).embed_dialogue(Dialogue("d", ("x",)))
            assert info.value.status == 500
            assert embed_server in str(info.value)
        finally:
            _EmbedHandler.fail = False

    def test_unreachable_endpoint(self):
        with pytest.raises(TransportError):
            HttpServiceProvider("http://127.0.0.1:9", timeout=0.5).embed_dialogue(
                Dialogue("d", ("x",))
            )
