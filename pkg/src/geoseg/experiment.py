"""The desk-scale topology experiment.

Trains two identically configured local-window classifiers on seeded
phantom sets -- one on raw images, one on geodesic-preprocessed images --
then compares their post-processed label-2 Jaccard scores on a disjoint
test set. The preprocessing is the only difference between the two arms,
so the score gap isolates the value of the injected global information.

All seeds and parameters are frozen here; the reference configuration is
what the acceptance suite runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .classifier import LocalWindowClassifier, segment, train
from .metrics import class_jaccard
from .phantom import PhantomPair, PhantomSpec, generate_phantom
from .postprocess import enforce_topology
from .preprocess import geodesic_preprocess
from .tiling import CropSpec, grid_crops

__all__ = ["TopologyExperimentConfig", "PhantomScore", "TopologyExperimentResult", "run_topology_experiment"]


@dataclass(frozen=True)
class TopologyExperimentConfig:
    train_count: int = 100
    test_count: int = 50
    phantom: PhantomSpec = field(default_factory=PhantomSpec)
    train_seed_base: int = 1000
    test_seed_base: int = 9000
    radius: int = 5
    epochs: int = 2000
    learning_rate: float = 10.0
    subsample_rate: float = 0.04
    training_seed: int = 42
    pad_multiple: int = 16


@dataclass(frozen=True)
class PhantomScore:
    seed: int
    detached_layer: str
    jaccard_raw: float
    jaccard_pre: float

    @property
    def improvement(self) -> float:
        return self.jaccard_pre - self.jaccard_raw


@dataclass(frozen=True)
class TopologyExperimentResult:
    scores: list[PhantomScore]
    raw_history: list[float]
    pre_history: list[float]

    @property
    def wins(self) -> int:
        return sum(1 for s in self.scores if s.jaccard_pre > s.jaccard_raw)

    @property
    def mean_raw(self) -> float:
        return sum(s.jaccard_raw for s in self.scores) / len(self.scores)

    @property
    def mean_pre(self) -> float:
        return sum(s.jaccard_pre for s in self.scores) / len(self.scores)

    @property
    def mean_improvement(self) -> float:
        return self.mean_pre - self.mean_raw


def _phantom_set(cfg: TopologyExperimentConfig, base: int, count: int) -> list[PhantomPair]:
    """Seeded phantoms alternating unbroken/broken for an even mix."""
    pairs = []
    for i in range(count):
        layer = "unbroken" if i % 2 == 0 else "broken"
        spec = replace(cfg.phantom, seed=base + i, detached_layer=layer)
        pairs.append(generate_phantom(spec))
    return pairs


def _train_arm(cfg: TopologyExperimentConfig, phantoms: list[PhantomPair], preprocessed: bool):
    crop_spec = CropSpec(size=min(cfg.phantom.width, cfg.phantom.height))
    crops = []
    for pair in phantoms:
        image = geodesic_preprocess(pair.image) if preprocessed else pair.image
        crops.extend(grid_crops(image, pair.gt, crop_spec))
    clf = LocalWindowClassifier(radius=cfg.radius, channels=3, trained_on_preprocessed=preprocessed)
    return train(
        clf,
        crops,
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        subsample_rate=cfg.subsample_rate,
        seed=cfg.training_seed,
    )


def run_topology_experiment(cfg: TopologyExperimentConfig = TopologyExperimentConfig()) -> TopologyExperimentResult:
    train_set = _phantom_set(cfg, cfg.train_seed_base, cfg.train_count)
    test_set = _phantom_set(cfg, cfg.test_seed_base, cfg.test_count)

    clf_raw, raw_history = _train_arm(cfg, train_set, preprocessed=False)
    clf_pre, pre_history = _train_arm(cfg, train_set, preprocessed=True)

    scores = []
    for i, pair in enumerate(test_set):
        pred_raw = enforce_topology(segment(clf_raw, pair.image, cfg.pad_multiple))
        pred_pre = enforce_topology(
            segment(clf_pre, geodesic_preprocess(pair.image), cfg.pad_multiple)
        )
        scores.append(
            PhantomScore(
                seed=cfg.test_seed_base + i,
                detached_layer="unbroken" if i % 2 == 0 else "broken",
                jaccard_raw=class_jaccard(pred_raw, pair.gt, 2),
                jaccard_pre=class_jaccard(pred_pre, pair.gt, 2),
            )
        )
    return TopologyExperimentResult(scores=scores, raw_history=raw_history, pre_history=pre_history)
