"""Right-turn prediction: a small online k-nearest-neighbours classifier.

Instances are (day, hour, event) triples labelled right-turn or straight.
The classifier starts from a hand-labelled bootstrap set, predicts with
k=3 under Euclidean distance, and appends each prediction back into its
store so later queries see it (self-training).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .core import Features, SeededRng, _require, validate_features


class TurnLabel(Enum):
    RIGHT_TURN = "+"
    STRAIGHT = "-"

    @classmethod
    def parse(cls, symbol: str) -> "TurnLabel":
        try:
            return cls(symbol)
        except ValueError:
            raise ValueError(f"turn label must be '+' or '-', got {symbol!r}") from None


@dataclass(frozen=True)
class KnnInstance:
    day: int
    hour: int
    event: int
    label: TurnLabel

    def __post_init__(self) -> None:
        validate_features(self.features)

    @property
    def features(self) -> Features:
        return (self.day, self.hour, self.event)


# Bootstrap training set the classifier ships with: five midweek daytime
# right-turns and four event-day non-turns.
_SEED_ROWS = (
    (1, 9, 0, "+"),
    (3, 10, 0, "+"),
    (4, 8, 0, "+"),
    (3, 8, 0, "+"),
    (4, 10, 0, "+"),
    (2, 20, 1, "-"),
    (5, 19, 1, "-"),
    (1, 4, 1, "-"),
    (2, 7, 1, "-"),
)


def seed_instances() -> list[KnnInstance]:
    return [KnnInstance(d, h, e, TurnLabel.parse(s)) for d, h, e, s in _SEED_ROWS]


class StoreFormatError(ValueError):
    """A persisted instance store failed to parse."""

    def __init__(self, path: Path, line_no: int | None, message: str) -> None:
        where = f"{path}" if line_no is None else f"{path}:{line_no}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line_no = line_no


@dataclass
class InstanceStore:
    """Ordered collection of labelled instances, optionally file-backed.

    Order matters: ties in distance are broken by store order, and the
    on-disk layout (one instance per line) round-trips byte-for-byte.
    """

    instances: list[KnnInstance] = field(default_factory=list)
    features_path: Path | None = None
    labels_path: Path | None = None

    def __len__(self) -> int:
        return len(self.instances)

    def append(self, instance: KnnInstance) -> None:
        """Add an instance, persisting it when the store is file-backed."""
        self.instances.append(instance)
        if self.features_path is not None and self.labels_path is not None:
            with open(self.features_path, "a", encoding="utf-8", newline="") as fh:
                fh.write(f"{instance.day} {instance.hour} {instance.event}\n")
            with open(self.labels_path, "a", encoding="utf-8", newline="") as fh:
                fh.write(f"{instance.label.value}\n")

    def save(self, features_path: Path | str, labels_path: Path | str) -> None:
        """Write the whole store and bind it to the given paths."""
        features_path = Path(features_path)
        labels_path = Path(labels_path)
        with open(features_path, "w", encoding="utf-8", newline="") as fh:
            for inst in self.instances:
                fh.write(f"{inst.day} {inst.hour} {inst.event}\n")
        with open(labels_path, "w", encoding="utf-8", newline="") as fh:
            for inst in self.instances:
                fh.write(f"{inst.label.value}\n")
        self.features_path = features_path
        self.labels_path = labels_path


def load_store(features_path: Path | str, labels_path: Path | str) -> InstanceStore:
    """Parse a persisted store. Blank lines are skipped; the two files must
    describe the same number of instances."""
    features_path = Path(features_path)
    labels_path = Path(labels_path)

    rows: list[tuple[int, tuple[int, int, int]]] = []
    with open(features_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3:
                raise StoreFormatError(features_path, line_no, f"expected 3 fields, got {len(parts)}")
            try:
                day, hour, event = (int(p) for p in parts)
            except ValueError:
                raise StoreFormatError(features_path, line_no, f"non-integer field in {line.strip()!r}") from None
            rows.append((line_no, (day, hour, event)))

    labels: list[TurnLabel] = []
    with open(labels_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            symbol = line.strip()
            if not symbol:
                continue
            try:
                labels.append(TurnLabel.parse(symbol))
            except ValueError:
                raise StoreFormatError(labels_path, line_no, f"bad label {symbol!r}") from None

    if len(rows) != len(labels):
        raise StoreFormatError(
            labels_path, None, f"{len(rows)} feature rows but {len(labels)} labels"
        )
    instances = []
    for (line_no, (day, hour, event)), label in zip(rows, labels):
        try:
            instances.append(KnnInstance(day, hour, event, label))
        except ValueError as exc:
            raise StoreFormatError(features_path, line_no, str(exc)) from None
    return InstanceStore(instances, features_path, labels_path)


def euclidean_distance(a: Features, b: Features) -> float:
    _require(len(a) == len(b), f"feature arity mismatch: {len(a)} vs {len(b)}")
    return math.dist(a, b)


def knn_predict(query: Features, store: InstanceStore, k: int = 3, rng: SeededRng | None = None) -> TurnLabel:
    """Majority label among the k nearest stored instances.

    The distance sort is stable, so equidistant instances keep store order
    and the neighbour list is truncated to exactly k. A tie between modal
    labels (impossible at k=3 with two classes, possible at even k) is
    broken uniformly at random among the tied labels in order of first
    appearance within the neighbours; that draw is the only randomness.
    """
    validate_features(query)
    _require(k >= 1, f"k must be >= 1, got {k}")
    _require(len(store) >= k, f"store has {len(store)} instances, need at least k={k}")

    ranked = sorted(store.instances, key=lambda inst: euclidean_distance(query, inst.features))
    neighbours = ranked[:k]

    votes = Counter(inst.label for inst in neighbours)
    best = max(votes.values())
    modal: list[TurnLabel] = []
    for inst in neighbours:
        if votes[inst.label] == best and inst.label not in modal:
            modal.append(inst.label)
    if len(modal) == 1:
        return modal[0]
    if rng is None:
        raise ValueError(f"{len(modal)}-way label tie at k={k} needs an rng to break it")
    return modal[rng.rand_int(0, len(modal) - 1)]


class TurnPredictor:
    """Per-group online classifier used by the slot scheduler.

    Lane groups A and B each get their own store (bootstrapped identically);
    every prediction is appended back into the group's store.
    """

    def __init__(self, k: int = 3, stores: dict[str, InstanceStore] | None = None) -> None:
        self.k = k
        self.stores = stores if stores is not None else {
            "A": InstanceStore(seed_instances()),
            "B": InstanceStore(seed_instances()),
        }

    def predict_and_record(self, features: Features, group: str, rng: SeededRng) -> TurnLabel:
        store = self.stores[group]
        label = knn_predict(features, store, self.k, rng)
        store.append(KnnInstance(*features, label))
        return label
