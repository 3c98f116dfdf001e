"""Controllable-captioning evaluation metrics.

Content controllability comes from assignment-matched noun sets (soft IoU
and hallucination mass), diversity from distinct n-gram ratios and the
eigenstructure of a pairwise n-gram-similarity kernel, length control from
MAE and level precision; everything aggregates into coverage-band reports
and a harmonic-mean overall score.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .augment import ControlCaptionPair, length_level, word_count
from .embeddings import EmbeddingStore


class MetricError(Exception):
    pass


class LexiconMissingError(MetricError):
    pass


class LengthMismatchError(MetricError):
    pass


class DegenerateKernelError(MetricError):
    pass


class WrongSetSizeError(MetricError):
    pass


class NonPositiveValueError(MetricError):
    pass


# -- noun extraction ---------------------------------------------------------


class LexiconNounExtractor:
    """Nouns = case-folded tokens present in a lexicon file (one per line)."""

    def __init__(self, words: Iterable[str]):
        self.words = {w.strip().lower() for w in words if w.strip()}
        if not self.words:
            raise LexiconMissingError("empty noun lexicon")

    @classmethod
    def from_file(cls, path) -> "LexiconNounExtractor":
        try:
            with open(path) as f:
                return cls(f.readlines())
        except FileNotFoundError as e:
            raise LexiconMissingError(str(e)) from e

    def __call__(self, caption: str) -> Set[str]:
        return {tok for tok in caption.lower().split() if tok in self.words}


class PrecomputedNounExtractor:
    """Nouns read from precomputed per-caption annotations."""

    def __init__(self, table: Dict[str, Iterable[str]]):
        self.table = {k: {w.lower() for w in v} for k, v in table.items()}

    def __call__(self, caption: str) -> Set[str]:
        return self.table.get(caption, set())


def extract_nouns(caption: str, extractor) -> Set[str]:
    return set(extractor(caption))


# -- assignment matching -----------------------------------------------------


@dataclass
class MatchResult:
    assignment: List[Tuple[int, int]]
    intersection_mass: float
    iou: float
    hal: float


def hungarian_match(sim: np.ndarray) -> Tuple[List[Tuple[int, int]], float]:
    """Maximum-total-similarity injective assignment (exact)."""
    sim = np.asarray(sim, dtype=float)
    if sim.size == 0:
        return [], 0.0
    rows, cols = linear_sum_assignment(-sim)
    assignment = list(zip(rows.tolist(), cols.tolist()))
    return assignment, float(sim[rows, cols].sum())


def content_iou(
    generated: Set[str],
    control: Set[str],
    store: EmbeddingStore,
) -> MatchResult:
    """Soft IoU of the two noun sets plus the hallucinated-noun fraction.

    The intersection mass is the best assignment total over pairwise cosine
    similarities (negatives clipped to zero so the mass stays a mass).
    """
    gen = sorted(generated)
    ctl = sorted(control)
    if not gen and not ctl:
        return MatchResult([], 0.0, 0.0, 0.0)
    sim = np.zeros((len(gen), len(ctl)))
    for i, g in enumerate(gen):
        for j, c in enumerate(ctl):
            sim[i, j] = max(store.cosine(g, c), 0.0)
    assignment, mass = hungarian_match(sim)
    union = len(gen) + len(ctl) - mass
    iou = mass / union if union > 0 else 0.0
    hal = (len(gen) - mass) / len(gen) if gen else 0.0
    return MatchResult(assignment, mass, iou, max(0.0, min(1.0, hal)))


# -- diversity ---------------------------------------------------------------


def _ngrams(tokens: Sequence[str], n: int) -> Iterable[Tuple[str, ...]]:
    return zip(*[tokens[i:] for i in range(n)])


def distinct_ngram_diversity(captions: Sequence[str], n: int) -> float:
    """Distinct n-grams over the whole set divided by total word count."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    if not captions:
        raise ValueError("need at least one caption")
    grams = set()
    total = 0
    for caption in captions:
        tokens = caption.split()
        total += len(tokens)
        grams.update(_ngrams(tokens, n))
    return len(grams) / total if total else 0.0


def _tfidf_vectors(captions: Sequence[str], n: int) -> List[Counter]:
    docs = [Counter(_ngrams(c.split(), n)) for c in captions]
    df = Counter()
    for doc in docs:
        df.update(set(doc))
    k = len(captions)
    vectors = []
    for doc in docs:
        # Smoothed idf keeps identical caption sets on a nonzero rank-1 kernel.
        vectors.append(Counter({g: tf * (1.0 + math.log(k / df[g])) for g, tf in doc.items()}))
    return vectors


def _cosine_counter(a: Counter, b: Counter) -> float:
    na = math.sqrt(sum(x * x for x in a.values()))
    nb = math.sqrt(sum(x * x for x in b.values()))
    if na == 0 or nb == 0:
        return 0.0
    dot = sum(v * b[g] for g, v in a.items() if g in b)
    return dot / (na * nb)


def cider_kernel(captions: Sequence[str], max_n: int = 4) -> np.ndarray:
    """Pairwise caption similarity: TF-IDF n-gram cosine averaged over
    n = 1..max_n, with document frequencies from the caption set itself."""
    k = len(captions)
    per_n = [_tfidf_vectors(captions, n) for n in range(1, max_n + 1)]
    kernel = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            sims = [_cosine_counter(vecs[i], vecs[j]) for vecs in per_n]
            kernel[i, j] = kernel[j, i] = sum(sims) / max_n
    return kernel


def self_cider(captions: Sequence[str]) -> float:
    """Diversity of a caption set from the spectrum of its similarity kernel.

    r = sqrt(largest eigenvalue) / sum of sqrt eigenvalues of the normalized
    kernel; the score is -log(r)/log(K), clamped to [0, 1].  Identical sets
    score 0, pairwise-dissimilar sets score 1.
    """
    k = len(captions)
    if k < 2:
        raise ValueError("need at least 2 captions")
    kernel = cider_kernel(captions)
    diag = np.diag(kernel)
    if np.all(kernel == 0):
        raise DegenerateKernelError("all-zero similarity kernel")
    norm = np.sqrt(np.outer(np.where(diag > 0, diag, 1.0), np.where(diag > 0, diag, 1.0)))
    normalized = kernel / norm
    eigvals = np.clip(np.linalg.eigvalsh(normalized), 0.0, None)
    roots = np.sqrt(eigvals)
    r = roots.max() / roots.sum()
    score = -math.log(r) / math.log(k)
    return max(0.0, min(1.0, score))


def best5_diversity(caption_sets: Sequence[Sequence[str]], n: int, set_size: int = 10, subset_size: int = 5) -> float:
    """Per image, best distinct-n-gram diversity over all 5-caption subsets of
    its 10 captions; averaged over images."""
    if not caption_sets:
        raise ValueError("need at least one caption set")
    best_scores = []
    for captions in caption_sets:
        if len(captions) != set_size:
            raise WrongSetSizeError(f"expected {set_size} captions, got {len(captions)}")
        best = max(
            distinct_ngram_diversity(subset, n)
            for subset in itertools.combinations(captions, subset_size)
        )
        best_scores.append(best)
    return sum(best_scores) / len(best_scores)


# -- length ------------------------------------------------------------------


def length_metrics(targets: Sequence[int], outputs: Sequence[str]) -> Tuple[float, float]:
    """(L, LP): mean absolute word-count error and % of outputs hitting the
    target's coarse length level."""
    if len(targets) != len(outputs):
        raise LengthMismatchError(f"{len(targets)} targets vs {len(outputs)} outputs")
    if not targets:
        raise LengthMismatchError("empty input")
    errors = []
    hits = 0
    for target, output in zip(targets, outputs):
        count = word_count(output)
        errors.append(abs(target - count))
        if length_level(count) == length_level(target):
            hits += 1
    return sum(errors) / len(errors), 100.0 * hits / len(targets)


# -- aggregation -------------------------------------------------------------


def harmonic_mean(values: Sequence[float]) -> float:
    if not values:
        raise NonPositiveValueError("empty input")
    if any(v <= 0 for v in values):
        raise NonPositiveValueError(f"harmonic mean needs positive values, got {values}")
    return len(values) / sum(1.0 / v for v in values)


@dataclass
class CoverageBand:
    low: float
    high: float
    mean_iou: Optional[float]
    mean_hal: Optional[float]
    sample_percentage: float


@dataclass
class MetricReport:
    iou: float
    hal: float
    gruen: Optional[float]
    self_cider: Optional[float]
    d1: float
    d2: float
    length_mae: Optional[float]
    length_precision: Optional[float]
    harmonic: Optional[float]
    best5_d1: Optional[float]
    best5_d2: Optional[float]
    coverage_bands: List[CoverageBand] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "iou": self.iou,
            "hal": self.hal,
            "gruen": self.gruen,
            "self_cider": self.self_cider,
            "d1": self.d1,
            "d2": self.d2,
            "length_mae": self.length_mae,
            "length_precision": self.length_precision,
            "harmonic": self.harmonic,
            "best5_d1": self.best5_d1,
            "best5_d2": self.best5_d2,
            "coverage_bands": [
                {
                    "low": b.low,
                    "high": b.high,
                    "mean_iou": b.mean_iou,
                    "mean_hal": b.mean_hal,
                    "sample_percentage": b.sample_percentage,
                }
                for b in self.coverage_bands
            ],
        }


def coverage_band_report(
    coverages: Sequence[float],
    ious: Sequence[float],
    hals: Sequence[float],
    bands: int = 10,
) -> List[CoverageBand]:
    """Equal bands over [0,1] with per-band mean IoU/Hal and sample share."""
    if not (len(coverages) == len(ious) == len(hals)):
        raise LengthMismatchError("coverages, ious, hals must align")
    total = len(coverages)
    grouped: Dict[int, List[int]] = {i: [] for i in range(bands)}
    for idx, cov in enumerate(coverages):
        grouped[min(int(cov * bands), bands - 1)].append(idx)
    out = []
    for i in range(bands):
        members = grouped[i]
        out.append(
            CoverageBand(
                low=i / bands,
                high=(i + 1) / bands,
                mean_iou=sum(ious[m] for m in members) / len(members) if members else None,
                mean_hal=sum(hals[m] for m in members) / len(members) if members else None,
                sample_percentage=100.0 * len(members) / total if total else 0.0,
            )
        )
    return out


def evaluate_pairs(
    pairs: Sequence[ControlCaptionPair],
    store: EmbeddingStore,
    noun_extractor,
    bands: int = 10,
) -> MetricReport:
    """Full per-pair evaluation: nouns vs control labels, diversity over the
    caption set, length metrics from word-count targets, band breakdown."""
    if not pairs:
        raise MetricError("no pairs to evaluate")
    ious, hals, coverages = [], [], []
    for pair in pairs:
        nouns = extract_nouns(pair.caption, noun_extractor)
        control_nouns = {w.lower() for w in pair.control.entity_labels}
        match = content_iou(nouns, control_nouns, store)
        ious.append(match.iou)
        hals.append(match.hal)
        coverages.append(pair.control.coverage)
    captions = [p.caption for p in pairs]
    d1 = distinct_ngram_diversity(captions, 1)
    d2 = distinct_ngram_diversity(captions, 2)
    sc = self_cider(captions) if len(captions) >= 2 else None
    qualities = [p.quality for p in pairs if p.quality is not None]
    gruen = sum(qualities) / len(qualities) if qualities else None
    targeted = [p for p in pairs if p.control.word_count_target]
    if targeted:
        mae, precision = length_metrics(
            [p.control.word_count_target for p in targeted],
            [p.caption for p in targeted],
        )
    else:
        mae = precision = None
    mean_iou = sum(ious) / len(ious)
    mean_hal = sum(hals) / len(hals)
    harmonic = None
    if gruen and sc and mean_iou > 0:
        harmonic = harmonic_mean([mean_iou, gruen, sc])
    return MetricReport(
        iou=mean_iou,
        hal=mean_hal,
        gruen=gruen,
        self_cider=sc,
        d1=d1,
        d2=d2,
        length_mae=mae,
        length_precision=precision,
        harmonic=harmonic,
        best5_d1=None,
        best5_d2=None,
        coverage_bands=coverage_band_report(coverages, ious, hals, bands),
    )
