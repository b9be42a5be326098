"""Dense embedding spaces: word2vec-text I/O and normalization.

All arithmetic is float64; files carry 6 decimal places. A space couples a
Vocabulary with a row-per-token matrix, so vocabulary index i always
addresses matrix row i.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .corpus import Vocabulary, classify_token, read_vocab_tsv

UNIT_ROWS = "unit"
CENTER_COLUMNS = "center"
DEFAULT_NORMALIZE = (UNIT_ROWS, CENTER_COLUMNS, UNIT_ROWS)


class EmbeddingFormatError(ValueError):
    """Raised for malformed embedding files; message names the line."""


@dataclass(frozen=True)
class EmbeddingSpace:
    vocab: Vocabulary
    matrix: np.ndarray
    unit_rows: bool = False
    mean_centered: bool = False

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise ValueError("embedding matrix must be 2-dimensional")
        if self.matrix.shape[0] != len(self.vocab):
            raise ValueError(
                f"matrix has {self.matrix.shape[0]} rows for "
                f"{len(self.vocab)} vocabulary tokens"
            )
        if not np.isfinite(self.matrix).all():
            raise ValueError("embedding matrix contains non-finite values")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def row(self, token: str) -> np.ndarray:
        return self.matrix[self.vocab.index[token]]


def make_space(tokens, matrix, freqs=None) -> EmbeddingSpace:
    """Convenience constructor; frequencies default to a descending proxy."""
    matrix = np.asarray(matrix, dtype=np.float64)
    n = len(tokens)
    if freqs is None:
        freqs = np.arange(n, 0, -1, dtype=np.int64)
    vocab = Vocabulary(
        tokens=list(tokens),
        freqs=np.asarray(freqs, dtype=np.int64),
        classes=[classify_token(t) for t in tokens],
    )
    return EmbeddingSpace(vocab=vocab, matrix=matrix)


def load_embeddings(path, expected_dim=None, vocab_tsv=None) -> EmbeddingSpace:
    """Parse a word2vec text file (header `n d`, rows `token v1 .. vd`).

    Frequencies come from the sidecar vocabulary TSV when given; without a
    sidecar the file rank serves as a proxy (frequency := n - rank, so the
    first row gets n). Duplicate tokens keep the first occurrence.
    """
    tokens: list[str] = []
    rows: list[np.ndarray] = []
    seen = {}
    with open(path, encoding="utf-8", errors="replace") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise EmbeddingFormatError(
                f"{path}: line 1: expected header 'n d', got {header.strip()!r}"
            )
        try:
            n, d = int(parts[0]), int(parts[1])
        except ValueError:
            raise EmbeddingFormatError(
                f"{path}: line 1: non-integer header fields {header.strip()!r}"
            ) from None
        if d < 1 or n < 0:
            raise EmbeddingFormatError(f"{path}: line 1: invalid header n={n} d={d}")
        if expected_dim is not None and d != expected_dim:
            raise EmbeddingFormatError(
                f"{path}: line 1: dimension {d} does not match expected {expected_dim}"
            )
        for lineno in range(2, n + 2):
            line = fh.readline()
            if not line:
                raise EmbeddingFormatError(
                    f"{path}: line {lineno}: file ends before {n} rows were read"
                )
            fields = line.rstrip("\n").split(" ")
            # tolerate a trailing space, common in the wild
            if fields and fields[-1] == "":
                fields = fields[:-1]
            if len(fields) != d + 1:
                raise EmbeddingFormatError(
                    f"{path}: line {lineno}: expected token plus {d} values, "
                    f"got {len(fields)} fields"
                )
            tok = fields[0]
            try:
                vec = np.array(fields[1:], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(
                    f"{path}: line {lineno}: unparseable float value"
                ) from None
            if not np.isfinite(vec).all():
                raise EmbeddingFormatError(
                    f"{path}: line {lineno}: non-finite value for token {tok!r}"
                )
            if tok in seen:
                warnings.warn(
                    f"{path}: line {lineno}: duplicate token {tok!r}, keeping first"
                )
                continue
            seen[tok] = True
            tokens.append(tok)
            rows.append(vec)

    matrix = np.vstack(rows) if rows else np.zeros((0, d), dtype=np.float64)
    if vocab_tsv is not None:
        side = read_vocab_tsv(vocab_tsv)
        freqs = np.array(
            [side.freqs[side.index[t]] if t in side.index else 0 for t in tokens],
            dtype=np.int64,
        )
        classes = [
            side.classes[side.index[t]] if t in side.index else classify_token(t)
            for t in tokens
        ]
    else:
        freqs = np.arange(len(tokens), 0, -1, dtype=np.int64)
        classes = [classify_token(t) for t in tokens]
    vocab = Vocabulary(tokens=tokens, freqs=freqs, classes=classes)
    return EmbeddingSpace(vocab=vocab, matrix=matrix)


def save_embeddings(space: EmbeddingSpace, path) -> None:
    """Write word2vec text format with 6 decimal places."""
    with open(path, "w", encoding="utf-8") as fh:
        n, d = space.matrix.shape
        fh.write(f"{n} {d}\n")
        for tok, row in zip(space.vocab.tokens, space.matrix):
            fh.write(tok + " " + " ".join(f"{v:.6f}" for v in row) + "\n")


def normalize(space: EmbeddingSpace, steps=DEFAULT_NORMALIZE) -> EmbeddingSpace:
    """Apply normalization steps in order; returns a new space.

    Steps: "unit" scales every row to Euclidean norm 1 (zero rows are an
    error naming the token); "center" subtracts the column means.
    """
    matrix = space.matrix.copy()
    unit_rows = space.unit_rows
    mean_centered = space.mean_centered
    for step in steps:
        if step == UNIT_ROWS:
            norms = np.linalg.norm(matrix, axis=1)
            zero = np.flatnonzero(norms == 0.0)
            if zero.size:
                tok = space.vocab.tokens[int(zero[0])]
                raise ValueError(
                    f"cannot unit-normalize: zero-norm row for token {tok!r}"
                )
            matrix /= norms[:, None]
            unit_rows, mean_centered = True, False
        elif step == CENTER_COLUMNS:
            matrix -= matrix.mean(axis=0)
            unit_rows, mean_centered = False, True
        else:
            raise ValueError(f"unknown normalization step {step!r}")
    return replace(
        space, matrix=matrix, unit_rows=unit_rows, mean_centered=mean_centered
    )
