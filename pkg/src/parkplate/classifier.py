"""k-nearest-neighbor recognition over chain-code feature vectors."""
from __future__ import annotations

import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, FormatError, InvalidRatio, ModelEmpty, StratifyError
from .features import N_FEATURES, chain_code_features

MAGIC = "PARKPLATE-KNN"
VERSION = 1


@dataclass(frozen=True)
class LabeledSample:
    features: np.ndarray
    label: str


@dataclass
class KnnModel:
    samples: list[LabeledSample]
    alphabet: tuple[str, ...]
    k: int = 1
    feature_mode: str = "off"
    _matrix: np.ndarray = field(init=False, repr=False)
    _ranks: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.alphabet = tuple(self.alphabet)
        if self.k < 1:
            raise ValueError("k must be at least 1")
        rank = {a: i for i, a in enumerate(self.alphabet)}
        for s in self.samples:
            if s.label not in rank:
                raise ValueError(f"label {s.label!r} is not in the model alphabet")
            if len(s.features) != N_FEATURES:
                raise DimensionError(f"sample has {len(s.features)} features, expected {N_FEATURES}")
        if self.samples:
            self._matrix = np.array([s.features for s in self.samples], dtype=np.float64)
        else:
            self._matrix = np.zeros((0, N_FEATURES))
        self._ranks = np.array([rank[s.label] for s in self.samples], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.samples)

    def rank(self, label: str) -> int:
        return self.alphabet.index(label)


def euclidean_distance(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"vector shapes differ: {x.shape} vs {y.shape}")
    diff = x - y
    return math.sqrt(float(np.dot(diff, diff)))


def classify(model: KnnModel, q: Sequence[float]) -> tuple[str, float]:
    """Majority label of the k nearest samples and its confidence.

    Vote ties go to the label with the smaller mean distance, then to the label
    earlier in the alphabet. Confidence is ``(k - runner_up_votes) / k``.
    """
    if not model.samples:
        raise ModelEmpty("model has no samples")
    k = model.k
    if k > len(model.samples):
        raise ValueError(f"k={k} exceeds the {len(model.samples)} stored samples")
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (N_FEATURES,):
        raise DimensionError(f"query has shape {q.shape}, expected ({N_FEATURES},)")
    diff = model._matrix - q
    d2 = np.einsum("ij,ij->i", diff, diff)
    nearest = np.lexsort((model._ranks, d2))[:k]
    votes: Counter[int] = Counter()
    dist_sum: dict[int, float] = defaultdict(float)
    for i in nearest:
        r = int(model._ranks[i])
        votes[r] += 1
        dist_sum[r] += math.sqrt(d2[i])
    ordered = sorted(votes, key=lambda r: (-votes[r], dist_sum[r] / votes[r], r))
    winner = ordered[0]
    runner_up = votes[ordered[1]] if len(ordered) > 1 else 0
    return model.alphabet[winner], (k - runner_up) / k


def build_model(glyphs: Iterable[tuple[str, np.ndarray]], alphabet: Sequence[str],
                k: int = 1, feature_mode: str = "off") -> KnnModel:
    """Extract features from ``(label, 30x15 bits)`` pairs and store them."""
    normalize = feature_mode == "per-glyph"
    samples = [LabeledSample(chain_code_features(bits, normalize=normalize), label)
               for label, bits in glyphs]
    return KnnModel(samples, tuple(alphabet), k, feature_mode)


def split_train_test(corpus: Sequence, ratio: float = 0.7, seed: int = 0,
                     label_of=lambda s: s.label) -> tuple[list, list]:
    """Per-class stratified split; floor(ratio * n) (at least 1) of each class goes to train."""
    if not (0.0 < ratio < 1.0):
        raise InvalidRatio(f"train ratio must lie strictly between 0 and 1, got {ratio}")
    by_class: dict[str, list[int]] = defaultdict(list)
    for i, s in enumerate(corpus):
        by_class[label_of(s)].append(i)
    rng = random.Random(seed)
    train_idx: list[int] = []
    for label in sorted(by_class):
        idx = by_class[label]
        if len(idx) < 2:
            raise StratifyError(f"class {label!r} has a single sample")
        idx = idx[:]
        rng.shuffle(idx)
        n_train = min(max(1, math.floor(ratio * len(idx) + 1e-9)), len(idx) - 1)
        train_idx.extend(idx[:n_train])
    chosen = set(train_idx)
    train = [corpus[i] for i in sorted(chosen)]
    test = [corpus[i] for i in range(len(corpus)) if i not in chosen]
    return train, test


@dataclass
class EvalReport:
    total: int
    correct: int
    per_class: dict[str, tuple[int, int]]  # label -> (total, correct)
    confusion: dict[tuple[str, str], int]  # (truth, predicted) -> count

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def table(self, method: str = "Direction Chain Code") -> str:
        lines = ["Total Image | Technique | Correct character recognition | Percent Efficiency",
                 f"{self.total} | {method} | {self.correct} | {100 * self.accuracy:.2f}%"]
        return "\n".join(lines)

    def class_table(self) -> str:
        rows = ["label | total | correct | percent"]
        for label, (n, c) in self.per_class.items():
            rows.append(f"{label} | {n} | {c} | {100 * c / n:.2f}%")
        return "\n".join(rows)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "per_class": {k: {"total": n, "correct": c} for k, (n, c) in self.per_class.items()},
            "confusion": [{"truth": t, "predicted": p, "count": n}
                          for (t, p), n in sorted(self.confusion.items())],
        }


def evaluate(model: KnnModel, test: Sequence[LabeledSample]) -> EvalReport:
    if not test:
        raise ValueError("test set is empty")
    per_class: dict[str, list[int]] = {}
    confusion: Counter[tuple[str, str]] = Counter()
    correct = 0
    for s in test:
        pred, _ = classify(model, s.features)
        stats = per_class.setdefault(s.label, [0, 0])
        stats[0] += 1
        if pred == s.label:
            stats[1] += 1
            correct += 1
        confusion[(s.label, pred)] += 1
    order = {a: i for i, a in enumerate(model.alphabet)}
    per = {lab: (n, c) for lab, (n, c) in sorted(per_class.items(), key=lambda kv: order.get(kv[0], len(order)))}
    return EvalReport(len(test), correct, per, dict(confusion))


# -- persistence -------------------------------------------------------------

def _fmt(v: float) -> str:
    f = float(v)
    return str(int(f)) if f.is_integer() and abs(f) < 2 ** 53 else repr(f)


def dumps_model(model: KnnModel) -> str:
    lines = [MAGIC, f"version {VERSION}", f"k {model.k}", f"features {model.feature_mode}",
             "alphabet " + " ".join(model.alphabet), f"samples {len(model.samples)}"]
    for s in model.samples:
        lines.append(s.label + " " + " ".join(_fmt(v) for v in s.features))
    return "\n".join(lines) + "\n"


def save_model(model: KnnModel, path: str | Path) -> None:
    Path(path).write_bytes(dumps_model(model).encode("utf-8"))


def _number(tok: str) -> float | int:
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def loads_model(data: bytes) -> KnnModel:
    offset = 0
    lines: list[tuple[int, str]] = []
    for raw in data.split(b"\n")[:-1]:
        try:
            lines.append((offset, raw.decode("utf-8")))
        except UnicodeDecodeError:
            raise FormatError("line is not valid UTF-8", offset) from None
        offset += len(raw) + 1
    if not data.endswith(b"\n") and data:
        raise FormatError("file does not end with a newline (truncated?)", offset)

    def header(i: int, key: str) -> str:
        if i >= len(lines):
            raise FormatError(f"missing {key!r} header", len(data))
        off, text = lines[i]
        name, _, value = text.partition(" ")
        if name != key:
            raise FormatError(f"expected {key!r} header", off)
        return value

    if not lines or lines[0][1] != MAGIC:
        raise FormatError("bad magic", 0)
    try:
        version = int(header(1, "version"))
        if version != VERSION:
            raise FormatError(f"unsupported version {version}", lines[1][0])
        k = int(header(2, "k"))
        feature_mode = header(3, "features")
        alphabet = tuple(header(4, "alphabet").split())
        count = int(header(5, "samples"))
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"bad header value: {exc}", 0) from None
    body = lines[6:]
    if len(body) != count:
        raise FormatError(f"expected {count} samples, found {len(body)}", len(data))
    samples = []
    for off, text in body:
        parts = text.split(" ")
        if len(parts) != N_FEATURES + 1:
            raise FormatError(f"sample line has {len(parts) - 1} values", off)
        try:
            values = [_number(t) for t in parts[1:]]
        except ValueError:
            raise FormatError("non-numeric feature value", off) from None
        dtype = np.int64 if all(isinstance(v, int) for v in values) else np.float64
        samples.append(LabeledSample(np.array(values, dtype=dtype), parts[0]))
    try:
        return KnnModel(samples, alphabet, k, feature_mode)
    except ValueError as exc:
        raise FormatError(str(exc), 0) from None


def load_model(path: str | Path) -> KnnModel:
    return loads_model(Path(path).read_bytes())
