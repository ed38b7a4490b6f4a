"""Base utterance vectors and the trainable topic projection.

Providers turn utterance text into fixed-dimension base vectors e_i. A
ProjectionHead maps those to topic representations h_i; cosine similarity
between window means of h is the topic half of the relevance score.

Three providers are supported:

* LexicalHashProvider — deterministic feature hashing, no external assets.
* PrecomputedFileProvider — vectors read from a JSONL or binary "UEB1" file.
* HttpServiceProvider — vectors fetched from an embedding service.
"""

from __future__ import annotations

import abc
import json
import math
import re
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dialogue import Dialogue
from .errors import (
    EmbeddingFileError,
    InvalidArgumentError,
    MissingEmbeddingError,
    TransportError,
)
from .hashing import stable_hash64

_TOKEN_RE = re.compile(r"[a-z0-9]+")

UEB1_MAGIC = b"UEB1"


class DegenerateSimilarityWarning(UserWarning):
    """A cosine involving a zero-norm vector was coerced to 0."""


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity clamped to [-1, 1].

    Zero-norm inputs yield 0.0 and a DegenerateSimilarityWarning instead of
    an error, so one empty-token utterance cannot abort a batch run.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"cosine shape mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        warnings.warn(
            "zero-norm vector in cosine similarity; returning 0.0",
            DegenerateSimilarityWarning,
            stacklevel=2,
        )
        return 0.0
    if np.array_equal(a, b):
        return 1.0  # exact by definition; dot/norm rounding would undershoot
    return float(np.clip(float(a @ b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True, eq=False)
class BaseEmbedding:
    """A base vector for one utterance, keyed ``"<dialogue_id>:<index>"``."""

    key: str
    vector: np.ndarray


class EmbeddingProvider(abc.ABC):
    """Deterministic source of base vectors: same text and config, same vector."""

    @property
    @abc.abstractmethod
    def d_base(self) -> int | None:
        """Vector dimension, or None if unknown until the first call."""

    @abc.abstractmethod
    def _vectors(self, dialogue: Dialogue) -> list[np.ndarray]:
        ...

    def embed_dialogue(self, dialogue: Dialogue) -> list[BaseEmbedding]:
        """One base vector per utterance, in utterance order."""
        vectors = self._vectors(dialogue)
        if len(vectors) != len(dialogue):
            raise EmbeddingFileError(
                f"provider returned {len(vectors)} vectors for "
                f"{len(dialogue)} utterances of dialogue {dialogue.id!r}"
            )
        out = []
        dim = None
        for index, vec in enumerate(vectors, start=1):
            vec = np.asarray(vec, dtype=np.float64)
            if vec.ndim != 1:
                raise EmbeddingFileError(f"vector for {dialogue.id}:{index} is not 1-D")
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise EmbeddingFileError(
                    f"inconsistent dimensions in dialogue {dialogue.id!r}: "
                    f"{vec.shape[0]} vs {dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFileError(
                    f"non-finite entries in vector for {dialogue.id}:{index}"
                )
            out.append(BaseEmbedding(key=f"{dialogue.id}:{index}", vector=vec))
        return out

    def embed_matrix(self, dialogue: Dialogue) -> np.ndarray:
        """The (n, d_base) matrix of base vectors for ``dialogue``."""
        return np.stack([e.vector for e in self.embed_dialogue(dialogue)])


class LexicalHashProvider(EmbeddingProvider):
    """Feature-hashing bag of words over lowercased alphanumeric tokens.

    Each token is hashed (seeded, 64-bit) to one of ``d_base`` buckets; the
    bucket counts are weighted by 1/sqrt(token count) and L2-normalized.
    Utterances with no tokens map to the zero vector.
    """

    def __init__(self, d_base: int = 256, seed: int = 0):
        if d_base < 1:
            raise InvalidArgumentError(f"d_base must be >= 1, got {d_base}")
        self._d_base = int(d_base)
        self._seed = int(seed)

    @property
    def d_base(self) -> int:
        return self._d_base

    def embed_text(self, text: str) -> np.ndarray:
        tokens = _TOKEN_RE.findall(text.lower())
        vec = np.zeros(self._d_base, dtype=np.float64)
        if not tokens:
            return vec
        weight = 1.0 / math.sqrt(len(tokens))
        for token in tokens:
            vec[stable_hash64(token, self._seed) % self._d_base] += weight
        return vec / np.linalg.norm(vec)

    def _vectors(self, dialogue: Dialogue) -> list[np.ndarray]:
        return [self.embed_text(text) for text in dialogue.utterances]


class PrecomputedFileProvider(EmbeddingProvider):
    """Vectors loaded from a precomputed embedding file (JSONL or UEB1)."""

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._table = read_embedding_file(self._path)
        dims = {v.shape[0] for v in self._table.values()}
        self._d_base = dims.pop() if len(dims) == 1 else None
        if self._table and self._d_base is None:
            raise EmbeddingFileError(f"{self._path}: mixed vector dimensions")

    @property
    def d_base(self) -> int | None:
        return self._d_base

    def _vectors(self, dialogue: Dialogue) -> list[np.ndarray]:
        out = []
        for index in range(1, len(dialogue) + 1):
            key = f"{dialogue.id}:{index}"
            try:
                out.append(self._table[key])
            except KeyError:
                raise MissingEmbeddingError(key) from None
        return out


class HttpServiceProvider(EmbeddingProvider):
    """Vectors fetched from ``POST <endpoint>/embed``.

    Request body is ``{"texts": [...]}``; the service answers
    ``{"vectors": [[...], ...]}`` in the same order. Any non-200 response is
    a transport error.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self._endpoint = endpoint.rstrip("/")
        self._timeout = timeout
        self._d_base: int | None = None

    @property
    def d_base(self) -> int | None:
        return self._d_base

    def _vectors(self, dialogue: Dialogue) -> list[np.ndarray]:
        import requests

        url = f"{self._endpoint}/embed"
        try:
            response = requests.post(
                url, json={"texts": list(dialogue.utterances)}, timeout=self._timeout
            )
        except requests.RequestException as exc:
            raise TransportError(url, None, str(exc)) from exc
        if response.status_code != 200:
            raise TransportError(url, response.status_code)
        try:
            vectors = response.json()["vectors"]
        except (ValueError, KeyError) as exc:
            raise TransportError(url, response.status_code, "malformed response body") from exc
        arrays = [np.asarray(v, dtype=np.float64) for v in vectors]
        if arrays and self._d_base is None:
            self._d_base = arrays[0].shape[0]
        return arrays


@dataclass(eq=False)
class ProjectionHead:
    """Affine map from base vectors to topic representations: h = W e + bias.

    Mutated only by the trainer; everything else should work on a
    ``copy()`` snapshot.
    """

    weight: np.ndarray  # (d_topic, d_base)
    bias: np.ndarray  # (d_topic,)

    def __post_init__(self) -> None:
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.ndim != 1:
            raise InvalidArgumentError("weight must be 2-D and bias 1-D")
        if self.weight.shape[0] != self.bias.shape[0]:
            raise InvalidArgumentError(
                f"weight rows {self.weight.shape[0]} != bias length {self.bias.shape[0]}"
            )
        if not (np.all(np.isfinite(self.weight)) and np.all(np.isfinite(self.bias))):
            raise InvalidArgumentError("projection head parameters must be finite")

    @property
    def d_base(self) -> int:
        return self.weight.shape[1]

    @property
    def d_topic(self) -> int:
        return self.weight.shape[0]

    @classmethod
    def initialize(cls, d_base: int, d_topic: int = 64, seed: int = 0) -> "ProjectionHead":
        """Scaled-uniform weights in [-1/sqrt(d_base), +1/sqrt(d_base)], zero bias."""
        rng = np.random.default_rng(seed)
        scale = 1.0 / math.sqrt(d_base)
        weight = rng.uniform(-scale, scale, size=(d_topic, d_base))
        return cls(weight=weight, bias=np.zeros(d_topic))

    def project(self, vector: np.ndarray) -> np.ndarray:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.d_base,):
            raise InvalidArgumentError(
                f"expected base vector of dim {self.d_base}, got shape {vector.shape}"
            )
        return self.weight @ vector + self.bias

    def project_all(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != self.d_base:
            raise InvalidArgumentError(
                f"expected (n, {self.d_base}) base matrix, got shape {matrix.shape}"
            )
        return matrix @ self.weight.T + self.bias

    def copy(self) -> "ProjectionHead":
        return ProjectionHead(weight=self.weight.copy(), bias=self.bias.copy())


def read_embedding_file(path: str | Path) -> dict[str, np.ndarray]:
    """Load a precomputed embedding file, sniffing JSONL vs binary UEB1."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == UEB1_MAGIC:
        return _read_embedding_ueb1(path)
    return _read_embedding_jsonl(path)


def _read_embedding_jsonl(path: Path) -> dict[str, np.ndarray]:
    table: dict[str, np.ndarray] = {}
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                obj = json.loads(line)
                key = obj["key"]
                vec = np.asarray(obj["vec"], dtype=np.float64)
            except (ValueError, KeyError, TypeError) as exc:
                raise EmbeddingFileError(f"{path}:{lineno}: {exc}") from exc
            if vec.ndim != 1:
                raise EmbeddingFileError(f"{path}:{lineno}: vec is not a flat list")
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise EmbeddingFileError(
                    f"{path}:{lineno}: dimension {vec.shape[0]} != {dim}"
                )
            table[str(key)] = vec
    return table


def write_embedding_jsonl(
    path: str | Path, items: Iterable[tuple[str, Sequence[float]]]
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, vec in items:
            fh.write(json.dumps({"key": key, "vec": [float(x) for x in vec]}) + "\n")


def _read_embedding_ueb1(path: Path) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != UEB1_MAGIC or len(raw) < 12:
        raise EmbeddingFileError(f"{path}: not a UEB1 file")
    dim, count = struct.unpack_from("<II", raw, 4)
    offset = 12
    table: dict[str, np.ndarray] = {}
    for _ in range(count):
        if offset + 4 > len(raw):
            raise EmbeddingFileError(f"{path}: truncated record header")
        (key_len,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        end = offset + key_len + 4 * dim
        if end > len(raw):
            raise EmbeddingFileError(f"{path}: truncated record body")
        key = raw[offset : offset + key_len].decode("utf-8")
        offset += key_len
        vec = np.frombuffer(raw, dtype="<f4", count=dim, offset=offset)
        offset += 4 * dim
        table[key] = vec.astype(np.float64)
    return table


def write_embedding_ueb1(
    path: str | Path, items: Sequence[tuple[str, Sequence[float]]]
) -> None:
    dims = {len(vec) for _, vec in items}
    if len(dims) > 1:
        raise EmbeddingFileError(f"mixed vector dimensions: {sorted(dims)}")
    dim = dims.pop() if dims else 0
    with open(path, "wb") as fh:
        fh.write(UEB1_MAGIC)
        fh.write(struct.pack("<II", dim, len(items)))
        for key, vec in items:
            encoded = key.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(np.asarray(vec, dtype="<f4").tobytes())
