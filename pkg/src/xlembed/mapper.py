"""Orthogonal mapping between embedding spaces.

solve_procrustes computes the closed-form minimizer of ||XW - Y||_F over
orthogonal W from the SVD of X^T Y; self_learn wraps it in the standard
induce-and-resolve loop; reweight rescales the shared space along the
correlation directions of the dictionary.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .embeddings import EmbeddingSpace
from .lexicon import BilingualDictionary
from .scoring import cosine_matrix, csls_matrix

COSINE = "cosine"
CSLS = "csls"


@dataclass
class SelfLearnConfig:
    induce_vocab_cutoff: int = 20000
    retrieval: str = COSINE
    max_iters: int = 50
    tol: float = 1e-6
    csls_k: int = 10


@dataclass
class AlignmentModel:
    """Orthogonal map W (applied to source rows as x @ W) plus optional
    correlation re-weighting factors and self-learning diagnostics."""

    w: np.ndarray
    s: float = 0.0
    singular_values: Optional[np.ndarray] = None
    reweight_u: Optional[np.ndarray] = None
    reweight_v: Optional[np.ndarray] = None
    iterations: int = 1
    dict_cosines: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    @property
    def reweighted(self) -> bool:
        return self.singular_values is not None


def _fix_svd_signs(u: np.ndarray, vt: np.ndarray) -> None:
    # Resolve SVD sign ambiguity: largest-magnitude entry of each U column
    # made non-negative, V flipped to keep the product unchanged.
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            vt[j, :] = -vt[j, :]


def _svd_cross(x: np.ndarray, y: np.ndarray):
    m = x.T @ y
    try:
        u, sig, vt = np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            "SVD of the dictionary cross-covariance failed to converge "
            f"(matrix norm {np.linalg.norm(m):.3e}, shape {m.shape})"
        ) from exc
    _fix_svd_signs(u, vt)
    return u, sig, vt


def _check_pair(src: EmbeddingSpace, tgt: EmbeddingSpace, dictionary) -> None:
    if src.dim != tgt.dim:
        raise ValueError(
            f"dimension mismatch: source d={src.dim}, target d={tgt.dim}"
        )
    if len(dictionary) == 0:
        raise ValueError("seed dictionary is empty")


def _mean_pair_cosine(x: np.ndarray, y: np.ndarray) -> float:
    num = np.einsum("ij,ij->i", x, y)
    den = np.linalg.norm(x, axis=1) * np.linalg.norm(y, axis=1)
    den[den == 0.0] = 1.0
    return float(np.mean(num / den))


def solve_procrustes(
    src: EmbeddingSpace, tgt: EmbeddingSpace, dictionary: BilingualDictionary
) -> AlignmentModel:
    """Closed-form orthogonal alignment on the dictionary pairs.

    Duplicate pairs contribute once per occurrence, i.e. multiplicity acts
    as a weight.
    """
    _check_pair(src, tgt, dictionary)
    x = src.matrix[dictionary.src_indices]
    y = tgt.matrix[dictionary.tgt_indices]
    u, _, vt = _svd_cross(x, y)
    w = u @ vt
    return AlignmentModel(
        w=w, iterations=1, dict_cosines=[_mean_pair_cosine(x @ w, y)]
    )


def _induce_pairs(
    src_top: np.ndarray,
    tgt_top: np.ndarray,
    w: np.ndarray,
    retrieval: str,
    csls_k: int,
    seed_pairs: np.ndarray,
) -> np.ndarray:
    """Union of src->tgt and tgt->src nearest-neighbor pairs plus seeds,
    deduplicated and lexicographically sorted (deterministic)."""
    cos = cosine_matrix(src_top @ w, tgt_top)
    scores = csls_matrix(cos, csls_k) if retrieval == CSLS else cos
    fwd = np.argmax(scores, axis=1)
    bwd = np.argmax(scores, axis=0)
    n_src = scores.shape[0]
    n_tgt = scores.shape[1]
    pairs = np.concatenate(
        [
            np.stack([np.arange(n_src), fwd], axis=1),
            np.stack([bwd, np.arange(n_tgt)], axis=1),
            seed_pairs,
        ]
    )
    return np.unique(pairs, axis=0)


def self_learn(
    src: EmbeddingSpace,
    tgt: EmbeddingSpace,
    seed: BilingualDictionary,
    config: Optional[SelfLearnConfig] = None,
) -> AlignmentModel:
    """Iterative alignment: solve, induce a larger dictionary over the most
    frequent tokens of each side, repeat until the mean dictionary cosine
    stops improving. Deterministic; returns the best-scoring model."""
    cfg = config or SelfLearnConfig()
    _check_pair(src, tgt, seed)
    if cfg.retrieval not in (COSINE, CSLS):
        raise ValueError(f"unknown retrieval mode {cfg.retrieval!r}")
    if cfg.max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    cutoff = min(cfg.induce_vocab_cutoff, len(src.vocab), len(tgt.vocab))
    src_top = src.matrix[:cutoff]
    tgt_top = tgt.matrix[:cutoff]

    seed_pairs_all = np.stack([seed.src_indices, seed.tgt_indices], axis=1)
    in_range = (seed_pairs_all[:, 0] < cutoff) & (seed_pairs_all[:, 1] < cutoff)
    seed_pairs = seed_pairs_all[in_range]
    if len(seed_pairs) < len(seed_pairs_all):
        warnings.warn(
            f"{len(seed_pairs_all) - len(seed_pairs)} seed pairs fall outside "
            f"the induction cutoff ({cutoff}) and are not re-included"
        )

    cur_src = seed.src_indices
    cur_tgt = seed.tgt_indices
    history: list[float] = []
    best_w = None
    best_score = -np.inf
    iterations = 0
    for _ in range(cfg.max_iters):
        iterations += 1
        u, _, vt = _svd_cross(src.matrix[cur_src], tgt.matrix[cur_tgt])
        w = u @ vt
        induced = _induce_pairs(
            src_top, tgt_top, w, cfg.retrieval, cfg.csls_k, seed_pairs
        )
        score = _mean_pair_cosine(src_top[induced[:, 0]] @ w, tgt_top[induced[:, 1]])
        history.append(score)
        if score > best_score:
            best_score = score
            best_w = w
        if len(history) >= 2 and score - history[-2] < cfg.tol:
            break
        cur_src = induced[:, 0]
        cur_tgt = induced[:, 1]

    return AlignmentModel(
        w=best_w, iterations=iterations, dict_cosines=history
    )


def reweight(
    model: AlignmentModel,
    src: EmbeddingSpace,
    tgt: EmbeddingSpace,
    dictionary: BilingualDictionary,
    s: float = 0.5,
) -> tuple[EmbeddingSpace, EmbeddingSpace]:
    """Rescale both sides along the dictionary correlation directions.

    With U Sig V^T the SVD of the cross-covariance of the aligned
    dictionary rows, source rows map to x @ W @ U * sig**s and target rows
    to y @ V * sig**s. s=0 applies a pure rotation (cross-space cosines
    unchanged); s=1 amplifies components in proportion to their singular
    value.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"re-weighting exponent s={s} outside [0, 1]")
    _check_pair(src, tgt, dictionary)
    x = src.matrix[dictionary.src_indices] @ model.w
    y = tgt.matrix[dictionary.tgt_indices]
    u, sig, vt = _svd_cross(x, y)
    model.s = s
    model.singular_values = sig
    model.reweight_u = u
    model.reweight_v = vt.T
    scale = sig**s
    src_matrix = src.matrix @ model.w @ (u * scale)
    tgt_matrix = tgt.matrix @ (vt.T * scale)
    src_out = EmbeddingSpace(vocab=src.vocab, matrix=src_matrix)
    tgt_out = EmbeddingSpace(vocab=tgt.vocab, matrix=tgt_matrix)
    return src_out, tgt_out


def apply_mapping(
    model: AlignmentModel, space: EmbeddingSpace, side: str = "src"
) -> EmbeddingSpace:
    """Map a whole space into the shared coordinates.

    side="src" applies W (plus the re-weighting factors when enabled);
    side="tgt" applies the target-side re-weighting factors, or is the
    identity for a plain orthogonal model.
    """
    if space.dim != model.dim:
        raise ValueError(
            f"dimension mismatch: space d={space.dim}, model d={model.dim}"
        )
    if side not in ("src", "tgt"):
        raise ValueError(f"side must be 'src' or 'tgt', got {side!r}")
    if model.reweighted:
        if model.reweight_u is None or model.reweight_v is None:
            raise ValueError(
                "model carries singular values but no re-weighting factors; "
                "re-weighted models cannot be applied after deserialization"
            )
        scale = model.singular_values**model.s
        if side == "src":
            m = model.w @ (model.reweight_u * scale)
        else:
            m = model.reweight_v * scale
        return EmbeddingSpace(vocab=space.vocab, matrix=space.matrix @ m)
    if side == "tgt":
        return space
    return EmbeddingSpace(
        vocab=space.vocab,
        matrix=space.matrix @ model.w,
        unit_rows=space.unit_rows,
        mean_centered=space.mean_centered,
    )


def save_model(model: AlignmentModel, path) -> None:
    """Text format: header `d s`, d rows of W, then the d singular values
    when re-weighting is enabled. The re-weighting factor matrices are not
    persisted; saved models reproduce the orthogonal map only."""
    d = model.dim
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{d} {model.s:.17g}\n")
        for row in model.w:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
        if model.singular_values is not None:
            fh.write(" ".join(f"{v:.17g}" for v in model.singular_values) + "\n")


def load_model(path) -> AlignmentModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: line 1: expected header `d s`")
        d = int(header[0])
        s = float(header[1])
        rows = []
        for lineno in range(2, d + 2):
            fields = fh.readline().split()
            if len(fields) != d:
                raise ValueError(
                    f"{path}: line {lineno}: expected {d} floats"
                )
            rows.append([float(v) for v in fields])
        rest = fh.readline().split()
        sig = np.array([float(v) for v in rest]) if rest else None
    return AlignmentModel(
        w=np.array(rows, dtype=np.float64), s=s, singular_values=sig
    )
