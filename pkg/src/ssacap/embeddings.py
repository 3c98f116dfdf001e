"""Word-embedding table loaded from "word v1 ... vd" text files."""

from __future__ import annotations

import logging
from typing import Dict, Optional

import numpy as np

log = logging.getLogger(__name__)


class EmbeddingError(Exception):
    pass


class DimensionMismatchError(EmbeddingError):
    pass


class EmptyFileError(EmbeddingError):
    pass


class EmbeddingStore:
    """Case-folded word -> vector table for cosine-similarity queries."""

    def __init__(self, table: Dict[str, np.ndarray]):
        if not table:
            raise EmptyFileError("no embeddings")
        dims = {v.shape[0] for v in table.values()}
        if len(dims) != 1:
            raise DimensionMismatchError(f"mixed dimensions {sorted(dims)}")
        self.dimension = dims.pop()
        self.table = {w.lower(): np.asarray(v, dtype=float) for w, v in table.items()}

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.table

    def __len__(self) -> int:
        return len(self.table)

    def vector(self, word: str) -> Optional[np.ndarray]:
        return self.table.get(word.lower())

    def cosine(self, a: str, b: str) -> float:
        """Cosine similarity; identical strings score 1 even out of vocabulary.

        A missing word is treated as similarity 0 and logged, not fatal.
        """
        if a.lower() == b.lower():
            return 1.0
        va, vb = self.vector(a), self.vector(b)
        if va is None or vb is None:
            missing = a if va is None else b
            log.warning("no embedding for %r; treating similarity as 0", missing)
            return 0.0
        na, nb = np.linalg.norm(va), np.linalg.norm(vb)
        if na == 0 or nb == 0:
            return 0.0
        return float(np.dot(va, vb) / (na * nb))


def load_embeddings(path) -> EmbeddingStore:
    table: Dict[str, np.ndarray] = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            word, values = parts[0], parts[1:]
            if not values:
                raise DimensionMismatchError(f"{path}:{lineno}: no vector for {word!r}")
            vec = np.asarray([float(x) for x in values])
            if table:
                dim = next(iter(table.values())).shape[0]
                if vec.shape[0] != dim:
                    raise DimensionMismatchError(
                        f"{path}:{lineno}: dimension {vec.shape[0]} != {dim}"
                    )
            table[word] = vec
    if not table:
        raise EmptyFileError(f"{path}: empty embedding file")
    return EmbeddingStore(table)
