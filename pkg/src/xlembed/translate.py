"""Word-translation evaluation: exhaustive top-k retrieval and P@k."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lexicon import TestDictionary
from .refine import CrossLingualSpace
from .scoring import cosine_matrix, topk_mean, unit_rows

COSINE = "cosine"
CSLS = "csls"
CSLS_K = 10

_QUERY_CHUNK = 1024


@dataclass
class TranslationReport:
    p_at: dict                 # k -> percentage over covered entries, or None
    covered: int
    skipped: int
    total: int
    retrieval: str
    oov_as_wrong: bool
    per_query: Optional[list] = None   # (src, [(tgt, score), ...]) when requested

    @property
    def defined(self) -> bool:
        return all(v is not None for v in self.p_at.values())


def _ranked_topk(scores: np.ndarray, k: int) -> np.ndarray:
    """Top-k indices per row: descending score, ties to the lower index
    (higher-frequency token). Stable full sort keeps tie-breaking exact."""
    k = min(k, scores.shape[1])
    order = np.argsort(-scores, axis=1, kind="stable")
    return order[:, :k]


def _score_block(
    query_rows: np.ndarray,
    tgt_unit: np.ndarray,
    retrieval: str,
    r_src: Optional[np.ndarray],
) -> np.ndarray:
    cos = unit_rows(query_rows) @ tgt_unit.T
    if retrieval == COSINE:
        return cos
    r_tgt = topk_mean(cos, CSLS_K, axis=1)
    return 2.0 * cos - r_tgt[:, None] - r_src[None, :]


def _csls_src_penalty(space: CrossLingualSpace) -> np.ndarray:
    """r_S(y): mean cosine of each target row's 10 nearest source rows."""
    cos = cosine_matrix(space.tgt.matrix, space.src.matrix)
    return topk_mean(cos, CSLS_K, axis=1)


def translate_topk(
    space: CrossLingualSpace, query: str, k: int, retrieval: str = COSINE
) -> list[tuple[str, float]]:
    """Rank all target tokens for one source token."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if retrieval not in (COSINE, CSLS):
        raise ValueError(f"unknown retrieval mode {retrieval!r}")
    if query not in space.src.vocab.index:
        raise KeyError(f"query token {query!r} not in source vocabulary")
    row = space.src.matrix[space.src.vocab.index[query]][None, :]
    r_src = _csls_src_penalty(space) if retrieval == CSLS else None
    scores = _score_block(row, unit_rows(space.tgt.matrix), retrieval, r_src)
    top = _ranked_topk(scores, k)[0]
    return [(space.tgt.vocab.tokens[int(j)], float(scores[0, j])) for j in top]


def precision_at_k(
    space: CrossLingualSpace,
    test: TestDictionary,
    ks: tuple = (1, 5, 10),
    retrieval: str = COSINE,
    oov_as_wrong: bool = False,
    keep_per_query: bool = False,
) -> TranslationReport:
    """P@k over a gold dictionary.

    An entry counts correct at k iff any in-vocabulary gold target appears
    in the top-k candidates. Entries with out-of-vocabulary sources are
    skipped and reported unless oov_as_wrong, which counts them incorrect.
    """
    if retrieval not in (COSINE, CSLS):
        raise ValueError(f"unknown retrieval mode {retrieval!r}")
    ks = tuple(sorted(ks))
    src_vocab = space.src.vocab
    tgt_vocab = space.tgt.vocab

    covered_entries = [
        (s, golds) for s, golds in test.entries if s in src_vocab.index
    ]
    covered = len(covered_entries)
    skipped = len(test) - covered

    denominator = len(test) if oov_as_wrong else covered
    if denominator == 0:
        return TranslationReport(
            p_at={k: None for k in ks},
            covered=covered,
            skipped=skipped,
            total=len(test),
            retrieval=retrieval,
            oov_as_wrong=oov_as_wrong,
            per_query=[] if keep_per_query else None,
        )

    kmax = max(ks)
    gold_idx = [
        np.array(
            [tgt_vocab.index[t] for t in golds if t in tgt_vocab.index],
            dtype=np.int64,
        )
        for _, golds in covered_entries
    ]
    query_idx = np.array(
        [src_vocab.index[s] for s, _ in covered_entries], dtype=np.int64
    )

    tgt_unit = unit_rows(space.tgt.matrix)
    r_src = _csls_src_penalty(space) if retrieval == CSLS else None

    hits = {k: 0 for k in ks}
    per_query = [] if keep_per_query else None
    for start in range(0, covered, _QUERY_CHUNK):
        block_idx = query_idx[start : start + _QUERY_CHUNK]
        scores = _score_block(
            space.src.matrix[block_idx], tgt_unit, retrieval, r_src
        )
        top = _ranked_topk(scores, kmax)
        for bi in range(top.shape[0]):
            golds = gold_idx[start + bi]
            for k in ks:
                if np.isin(top[bi, : min(k, top.shape[1])], golds).any():
                    hits[k] += 1
            if keep_per_query:
                per_query.append(
                    (
                        covered_entries[start + bi][0],
                        [
                            (tgt_vocab.tokens[int(j)], float(scores[bi, j]))
                            for j in top[bi]
                        ],
                    )
                )

    p_at = {k: 100.0 * hits[k] / denominator for k in ks}
    return TranslationReport(
        p_at=p_at,
        covered=covered,
        skipped=skipped,
        total=len(test),
        retrieval=retrieval,
        oov_as_wrong=oov_as_wrong,
        per_query=per_query,
    )
