"""Ablation over identical-token classes: which part of the synthetic
dictionary carries the alignment signal."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .corpus import TokenClass
from .embeddings import EmbeddingSpace
from .lexicon import BilingualDictionary, TestDictionary, filter_by_class
from .mapper import SelfLearnConfig, apply_mapping, self_learn, solve_procrustes
from .refine import CrossLingualSpace, average_weighted
from .sentiment import SentimentDataset, eval_probe, train_probe
from .translate import precision_at_k

BASE = "base"
WEIGHTED = "weighted"

VARIANTS = (
    ("All", None),
    ("Numerals", {TokenClass.NUMERAL}),
    ("Emoji", {TokenClass.EMOJI}),   # emoticons grouped in by the filter
    ("Words", {TokenClass.WORD}),
)


@dataclass
class AblationCell:
    translation: Optional[object] = None
    sentiment: Optional[object] = None
    error: Optional[str] = None


@dataclass
class AblationRow:
    name: str
    n_pairs: int
    cells: dict = field(default_factory=dict)


@dataclass
class AblationTable:
    rows: list
    ks: tuple
    has_sentiment: bool


def _run_cell(
    src: EmbeddingSpace,
    tgt: EmbeddingSpace,
    dictionary: BilingualDictionary,
    test: TestDictionary,
    refine_weighted: bool,
    ks: tuple,
    retrieval: str,
    oov_as_wrong: bool,
    sentiment_train: Optional[SentimentDataset],
    sentiment_test: Optional[SentimentDataset],
    self_learn_config: Optional[SelfLearnConfig],
) -> AblationCell:
    try:
        if self_learn_config is not None:
            model = self_learn(src, tgt, dictionary, self_learn_config)
        else:
            model = solve_procrustes(src, tgt, dictionary)
        space = CrossLingualSpace(
            src=apply_mapping(model, src, side="src"),
            tgt=apply_mapping(model, tgt, side="tgt"),
        )
        if refine_weighted:
            space = average_weighted(space, dictionary)
        cell = AblationCell(
            translation=precision_at_k(
                space, test, ks=ks, retrieval=retrieval, oov_as_wrong=oov_as_wrong
            )
        )
        if sentiment_train is not None and sentiment_test is not None:
            probe = train_probe(sentiment_train, space.src)
            cell.sentiment = eval_probe(probe, sentiment_test, space.tgt)
        return cell
    except Exception as exc:  # per-cell failures become markers, not aborts
        return AblationCell(error=f"{type(exc).__name__}: {exc}")


def run_ablation(
    src: EmbeddingSpace,
    tgt: EmbeddingSpace,
    dictionary: BilingualDictionary,
    test: TestDictionary,
    ks: tuple = (1, 5, 10),
    retrieval: str = "cosine",
    oov_as_wrong: bool = False,
    sentiment_train: Optional[SentimentDataset] = None,
    sentiment_test: Optional[SentimentDataset] = None,
    self_learn_config: Optional[SelfLearnConfig] = None,
) -> AblationTable:
    """Run {All, Numerals, Emoji, Words} x {base, weighted} full pipelines.

    Per-cell failures (for instance an empty class subset) are recorded in
    the cell and do not abort the grid.
    """
    has_sentiment = sentiment_train is not None and sentiment_test is not None
    rows = []
    for name, keep in VARIANTS:
        variant = dictionary if keep is None else filter_by_class(dictionary, keep)
        row = AblationRow(name=name, n_pairs=len(variant))
        for model_name, weighted in ((BASE, False), (WEIGHTED, True)):
            row.cells[model_name] = _run_cell(
                src, tgt, variant, test, weighted, ks, retrieval,
                oov_as_wrong, sentiment_train, sentiment_test,
                self_learn_config,
            )
        rows.append(row)
    return AblationTable(rows=rows, ks=tuple(sorted(ks)), has_sentiment=has_sentiment)
