"""Evaluation metric, cross-validation splits, and cached grid search.

Grid search walks the candidate pipelines stage by stage.  Every stage
output is memoized under a key built from the stage configuration, the
upstream result's key, and the split identity, so two candidates that
share a prefix share its computation.  An optional on-disk cache makes
results survive across runs; entries are evicted oldest-first once the
directory exceeds its byte budget.
"""

from __future__ import annotations

import hashlib
import itertools
import os
import pickle
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .augment import make_patches
from .convnet import ConvNetConfig, init_banks
from .pipeline import (
    FAKE_LABEL,
    LIVE_LABEL,
    PipelineConfig,
    TrainedPipeline,
    TransformConfig,
    extract_features,
    fit_pipeline,
    preprocess_image,
    resolve_components,
    seeded_extractor,
)
from .seeds import derive_seed
from .svm import SvmParams, decision_scores, train_smo
from .transform import Standardizer, fit_pca_randomized, project

__all__ = [
    "EvalReport",
    "ace",
    "five_by_two_splits",
    "GridStage",
    "GridSpec",
    "CandidateResult",
    "GridSearchResult",
    "grid_search",
    "default_runners",
    "fit_final",
    "CACHE_ENV_VAR",
]

CACHE_ENV_VAR = "LIVECHECK_CACHE_DIR"
DEFAULT_CACHE_BUDGET = 1 << 30  # one GiB

STAGE_PREPROCESS = "preprocess"
STAGE_EXTRACT = "extract"
STAGE_TRANSFORM = "transform"
STAGE_CLASSIFY = "classify"


# ---------------------------------------------------------------------------
# Metric


@dataclass(frozen=True)
class EvalReport:
    """Error rates with the raw counts they came from."""

    fpr: float
    fnr: float
    ace: float
    live_total: int
    fake_total: int
    live_wrong: int
    fake_wrong: int


def ace(predictions: np.ndarray, truth: np.ndarray) -> EvalReport:
    """Average classification error: mean of the per-class error rates.

    The false positive rate is the fraction of live samples called
    fake; the false negative rate is the fraction of fakes called live.
    Both classes must be present in ``truth``.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predictions.shape != truth.shape or predictions.ndim != 1:
        raise ValueError(f"mismatched shapes: {predictions.shape} vs {truth.shape}")
    for arr, what in ((predictions, "predictions"), (truth, "truth")):
        if not np.all(np.isin(arr, (LIVE_LABEL, FAKE_LABEL))):
            raise ValueError(f"{what} must contain only +1/-1 labels")
    live = truth == LIVE_LABEL
    fake = ~live
    live_total = int(live.sum())
    fake_total = int(fake.sum())
    if live_total == 0 or fake_total == 0:
        raise ValueError("truth must contain both classes")
    live_wrong = int((predictions[live] == FAKE_LABEL).sum())
    fake_wrong = int((predictions[fake] == LIVE_LABEL).sum())
    fpr = live_wrong / live_total
    fnr = fake_wrong / fake_total
    return EvalReport(
        fpr=fpr,
        fnr=fnr,
        ace=(fpr + fnr) / 2.0,
        live_total=live_total,
        fake_total=fake_total,
        live_wrong=live_wrong,
        fake_wrong=fake_wrong,
    )


# ---------------------------------------------------------------------------
# Cross-validation


def five_by_two_splits(labels: np.ndarray, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Five repetitions of stratified two-fold splitting.

    Each repetition shuffles within every class and deals one half to
    each fold; both (train, test) orientations of a repetition are
    returned, giving ten pairs.  When a class has an odd count the
    extra sample goes to the first or second fold alternately by class
    position, keeping fold sizes within one of each other.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] < 4:
        raise ValueError("need a 1-D label vector with at least 4 samples")
    classes = np.unique(labels)
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(5):
        fold_a: list[np.ndarray] = []
        fold_b: list[np.ndarray] = []
        for position, cls in enumerate(classes):
            members = np.flatnonzero(labels == cls)
            if members.size < 2:
                raise ValueError(f"class {cls!r} has fewer than 2 samples")
            shuffled = rng.permutation(members)
            half = (members.size + (1 if position % 2 == 0 else 0)) // 2
            fold_a.append(shuffled[:half])
            fold_b.append(shuffled[half:])
        a = np.sort(np.concatenate(fold_a))
        b = np.sort(np.concatenate(fold_b))
        pairs.append((a, b))
        pairs.append((b, a))
    return pairs


# ---------------------------------------------------------------------------
# Grid definition


@dataclass(frozen=True)
class GridStage:
    name: str
    candidates: tuple

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise ValueError(f"stage {self.name!r} has no candidates")


@dataclass(frozen=True)
class GridSpec:
    stages: tuple[GridStage, ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ValueError("grid needs at least one stage")
        names = [s.name for s in self.stages]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate stage names: {names}")

    @property
    def size(self) -> int:
        out = 1
        for stage in self.stages:
            out *= len(stage.candidates)
        return out


@dataclass
class CandidateResult:
    indices: tuple[int, ...]
    fold_aces: tuple[float, ...]
    mean_ace: float
    failed: bool = False
    message: str = ""


@dataclass
class GridSearchResult:
    grid: GridSpec
    candidates: list[CandidateResult]
    best_indices: tuple[int, ...]
    executions: dict[str, int] = field(default_factory=dict)
    cache_hits: dict[str, int] = field(default_factory=dict)

    def best_configs(self) -> tuple:
        return tuple(
            stage.candidates[i] for stage, i in zip(self.grid.stages, self.best_indices)
        )


# ---------------------------------------------------------------------------
# Cache plumbing


@dataclass
class _Failure:
    message: str


def config_digest(obj) -> str:
    """Stable digest of a configuration object via its canonical repr."""
    return hashlib.sha256(repr(obj).encode("utf-8")).hexdigest()


def _split_identity(split_index: int, train_idx: np.ndarray, test_idx: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(str(split_index).encode())
    h.update(np.asarray(train_idx, dtype=np.int64).tobytes())
    h.update(np.asarray(test_idx, dtype=np.int64).tobytes())
    return h.hexdigest()


def _stage_key(stage_name: str, cfg, upstream_key: str, split_id: str) -> str:
    material = "\x1f".join((stage_name, config_digest(cfg), upstream_key, split_id))
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


class DiskCache:
    """Pickle files under one directory with LRU eviction by mtime."""

    def __init__(self, root: str | Path, budget_bytes: int = DEFAULT_CACHE_BUDGET):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.budget = int(budget_bytes)

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.pkl"

    def get(self, key: str):
        path = self._path(key)
        if not path.is_file():
            return None
        try:
            with open(path, "rb") as fh:
                value = pickle.load(fh)
        except Exception:
            return None  # treat unreadable entries as misses
        os.utime(path, (time.time(), time.time()))
        return value

    def put(self, key: str, value) -> None:
        with open(self._path(key), "wb") as fh:
            pickle.dump(value, fh, protocol=pickle.HIGHEST_PROTOCOL)
        self._evict()

    def _evict(self) -> None:
        entries = [(p.stat().st_mtime, p.stat().st_size, p) for p in self.root.glob("*.pkl")]
        total = sum(size for _, size, _ in entries)
        for _, size, path in sorted(entries):
            if total <= self.budget:
                break
            path.unlink(missing_ok=True)
            total -= size


# ---------------------------------------------------------------------------
# Default stage runners


@dataclass
class StageContext:
    """Everything a stage runner may need besides its own config."""

    images: list
    labels: np.ndarray
    train_idx: np.ndarray
    test_idx: np.ndarray
    split_index: int
    root_seed: int
    augmented: bool


@dataclass
class _FeatureSplit:
    train_X: np.ndarray
    train_y: np.ndarray
    test_groups: list[np.ndarray]  # per test image, one row per patch


@dataclass
class _ProjectedSplit:
    train_Z: np.ndarray
    train_y: np.ndarray
    test_groups: list[np.ndarray]


def _run_preprocess(cfg, upstream, ctx: StageContext):
    return [preprocess_image(img, cfg) for img in ctx.images]


def _run_extract(cfg, pre_images, ctx: StageContext):
    extractor = seeded_extractor(cfg, ctx.root_seed)
    banks = init_banks(extractor) if isinstance(extractor, ConvNetConfig) else None

    def views(index: int) -> list[np.ndarray]:
        img = pre_images[index]
        return make_patches(img) if ctx.augmented else [img]

    train_rows = []
    train_y = []
    for i in ctx.train_idx:
        for view in views(int(i)):
            train_rows.append(extract_features(view, extractor, banks))
            train_y.append(ctx.labels[int(i)])
    lengths = {len(r) for r in train_rows}
    test_groups = []
    for i in ctx.test_idx:
        group = [extract_features(view, extractor, banks) for view in views(int(i))]
        lengths.update(len(r) for r in group)
        test_groups.append(np.vstack(group))
    if len(lengths) > 1:
        raise ValueError(f"feature lengths differ across images: {sorted(lengths)}")
    return _FeatureSplit(np.vstack(train_rows), np.asarray(train_y, dtype=np.float64), test_groups)


def _run_transform(cfg, bundle: _FeatureSplit, ctx: StageContext):
    standardizer = Standardizer.fit(bundle.train_X)
    Xs = standardizer.apply(bundle.train_X)
    k = resolve_components(cfg.pca_fraction, Xs.shape[1], Xs.shape[0])
    pca = fit_pca_randomized(
        Xs, k, seed=derive_seed(ctx.root_seed, "pca", ctx.split_index), whiten=cfg.whiten
    )
    return _ProjectedSplit(
        train_Z=project(pca, Xs),
        train_y=bundle.train_y,
        test_groups=[project(pca, standardizer.apply(g)) for g in bundle.test_groups],
    )


def _run_classify(cfg, bundle: _ProjectedSplit, ctx: StageContext):
    model, _ = train_smo(
        bundle.train_Z, bundle.train_y, cfg, seed=derive_seed(ctx.root_seed, "smo", ctx.split_index)
    )
    predictions = np.empty(len(bundle.test_groups))
    for pos, group in enumerate(bundle.test_groups):
        score = float(decision_scores(model, group).mean())
        predictions[pos] = LIVE_LABEL if score >= 0.0 else FAKE_LABEL
    return predictions


def default_runners() -> dict:
    return {
        STAGE_PREPROCESS: _run_preprocess,
        STAGE_EXTRACT: _run_extract,
        STAGE_TRANSFORM: _run_transform,
        STAGE_CLASSIFY: _run_classify,
    }


# ---------------------------------------------------------------------------
# Search engine


def _tiebreak_key(result: CandidateResult, configs: tuple):
    # Prefer cheaper models on equal error: fewer components, then a
    # smaller soft margin, then the earliest candidate.
    pca_fraction = np.inf
    soft_margin = np.inf
    for cfg in configs:
        if isinstance(cfg, TransformConfig):
            pca_fraction = cfg.pca_fraction
        elif isinstance(cfg, SvmParams):
            soft_margin = cfg.C
    return (result.mean_ace, pca_fraction, soft_margin, result.indices)


def grid_search(
    images: list,
    labels: np.ndarray,
    grid: GridSpec,
    seed: int,
    *,
    augmented: bool = False,
    splits: list[tuple[np.ndarray, np.ndarray]] | None = None,
    runners: dict | None = None,
    use_cache: bool = True,
    cache_dir: str | Path | None = None,
    cache_budget: int = DEFAULT_CACHE_BUDGET,
) -> GridSearchResult:
    """Score every stage combination with 5x2 cross-validation.

    Stage outputs are cached by (stage config, upstream key, split), so
    shared prefixes are computed once.  ``cache_dir`` (or the
    LIVECHECK_CACHE_DIR environment variable) adds a persistent layer.
    A candidate that raises on any split is scored with ACE 1.0 and
    flagged rather than aborting the search.  With caching on or off
    the returned tables are identical.

    Custom ``runners`` may replace any stage; a runner takes
    (config, upstream_value, StageContext) and the last stage must
    return +1/-1 predictions for the test fold.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if splits is None:
        splits = five_by_two_splits(labels, derive_seed(seed, "cv"))
    if runners is None:
        runners = default_runners()
    for stage in grid.stages:
        if stage.name not in runners:
            raise ValueError(f"no runner for stage {stage.name!r}")

    disk = None
    if use_cache:
        if cache_dir is None:
            cache_dir = os.environ.get(CACHE_ENV_VAR) or None
        if cache_dir is not None:
            disk = DiskCache(cache_dir, cache_budget)

    memo: dict[str, object] = {}
    executions = {stage.name: 0 for stage in grid.stages}
    hits = {stage.name: 0 for stage in grid.stages}

    def run_chain(combo: tuple[int, ...], ctx: StageContext, split_id: str):
        value = None
        upstream_key = split_id
        for stage, choice in zip(grid.stages, combo):
            cfg = stage.candidates[choice]
            key = _stage_key(stage.name, cfg, upstream_key, split_id)
            upstream_key = key
            if use_cache and key in memo:
                hits[stage.name] += 1
                value = memo[key]
                continue
            if disk is not None:
                cached = disk.get(key)
                if cached is not None:
                    hits[stage.name] += 1
                    memo[key] = cached
                    value = cached
                    continue
            if isinstance(value, _Failure):
                memo[key] = value  # propagate without executing downstream
                continue
            try:
                value = runners[stage.name](cfg, value, ctx)
                executions[stage.name] += 1
            except Exception as exc:  # scored, flagged, never fatal
                value = _Failure(f"{type(exc).__name__}: {exc}")
            if use_cache:
                memo[key] = value
            if disk is not None and not isinstance(value, _Failure):
                disk.put(key, value)
        return value

    combos = list(itertools.product(*[range(len(s.candidates)) for s in grid.stages]))
    fold_tables: dict[tuple[int, ...], list[float]] = {c: [] for c in combos}
    failures: dict[tuple[int, ...], str] = {}

    for split_index, (train_idx, test_idx) in enumerate(splits):
        ctx = StageContext(
            images=images,
            labels=labels,
            train_idx=np.asarray(train_idx),
            test_idx=np.asarray(test_idx),
            split_index=split_index,
            root_seed=seed,
            augmented=augmented,
        )
        split_id = _split_identity(split_index, ctx.train_idx, ctx.test_idx)
        truth = labels[ctx.test_idx]
        for combo in combos:
            outcome = run_chain(combo, ctx, split_id)
            if isinstance(outcome, _Failure):
                fold_tables[combo].append(1.0)
                failures.setdefault(combo, outcome.message)
            else:
                fold_tables[combo].append(ace(np.asarray(outcome), truth).ace)

    results = []
    for combo in combos:
        aces = tuple(fold_tables[combo])
        results.append(
            CandidateResult(
                indices=combo,
                fold_aces=aces,
                mean_ace=float(np.mean(aces)),
                failed=combo in failures,
                message=failures.get(combo, ""),
            )
        )

    def sort_key(result: CandidateResult):
        configs = tuple(
            stage.candidates[i] for stage, i in zip(grid.stages, result.indices)
        )
        return _tiebreak_key(result, configs)

    best = min(results, key=sort_key)
    return GridSearchResult(
        grid=grid,
        candidates=results,
        best_indices=best.indices,
        executions=executions,
        cache_hits=hits,
    )


def fit_final(images: list, labels: np.ndarray, config: PipelineConfig) -> TrainedPipeline:
    """Train one pipeline on the full training set."""
    return fit_pipeline(images, labels, config)
