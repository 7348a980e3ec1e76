"""NT-Xent contrastive loss over batches of positive pairs."""

from typing import List, Optional, Union

import numpy as np
from scipy.special import logsumexp

from src.models import EmbeddingBatch, Temperature


class NTXentLoss:
    """Normalized temperature-scaled cross entropy.

    For rows i and j of a batch of 2N embeddings::

        l(i, j) = -log( exp(s_ij / tau) / sum_{k != i} exp(s_ik / tau) )

    where s is cosine similarity. The positive term k = j is part of the
    denominator.
    """

    DEFAULT_TEMPERATURE = 0.5

    class ZeroNormError(ValueError):
        """Raised when a similarity involves a zero vector."""

        pass

    class PairIndexError(IndexError):
        """Raised when a pair index lies outside the batch or i == j."""

        pass

    def __init__(self, temperature: Optional[Union[Temperature, float]] = None):
        if temperature is None:
            temperature = Temperature(self.DEFAULT_TEMPERATURE)
        elif not isinstance(temperature, Temperature):
            temperature = Temperature(float(temperature))
        self.temperature = temperature

    @property
    def tau(self) -> float:
        return self.temperature.tau

    @classmethod
    def cosine_similarity(cls, a: np.ndarray, b: np.ndarray) -> float:
        """dot(a, b) / (|a| |b|), clipped to [-1, 1].

        Raises:
            ZeroNormError: If either vector is zero
        """
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise ValueError(f"Vectors differ in shape: {a.shape} vs {b.shape}")
        norm_a = np.linalg.norm(a)
        norm_b = np.linalg.norm(b)
        if norm_a == 0.0 or norm_b == 0.0:
            raise cls.ZeroNormError("cosine similarity is undefined for a zero vector")
        return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))

    @staticmethod
    def similarity_matrix(batch: EmbeddingBatch) -> np.ndarray:
        """Full 2N x 2N cosine similarity matrix."""
        unit = batch.vectors / np.linalg.norm(batch.vectors, axis=1, keepdims=True)
        return np.clip(unit @ unit.T, -1.0, 1.0)

    def _log_probabilities(self, batch: EmbeddingBatch) -> np.ndarray:
        logits = self.similarity_matrix(batch) / self.tau
        np.fill_diagonal(logits, -np.inf)
        # logsumexp subtracts the row maximum before exponentiating
        return logits - logsumexp(logits, axis=1, keepdims=True)

    def pair_loss(self, batch: EmbeddingBatch, i: int, j: int) -> float:
        """Loss of the ordered pair (i, j).

        Raises:
            PairIndexError: If i or j is out of range, or i == j
        """
        rows = batch.rows
        for name, index in (("i", i), ("j", j)):
            if not 0 <= index < rows:
                raise self.PairIndexError(f"{name}={index} is outside a batch of {rows} rows")
        if i == j:
            raise self.PairIndexError(f"i and j must differ, both are {i}")
        logits = self.similarity_matrix(batch)[i] / self.tau
        logits[i] = -np.inf
        return float(max(0.0, logsumexp(logits) - logits[j]))

    def pair_losses(self, batch: EmbeddingBatch) -> List[dict]:
        """Per-pair losses l(2m, 2m+1) and l(2m+1, 2m)."""
        log_prob = self._log_probabilities(batch)
        losses = []
        for m in range(batch.pair_count):
            a, b = 2 * m, 2 * m + 1
            losses.append(
                {
                    "pair": m,
                    "loss_ab": float(max(0.0, -log_prob[a, b])),
                    "loss_ba": float(max(0.0, -log_prob[b, a])),
                }
            )
        return losses

    def batch_loss(self, batch: EmbeddingBatch) -> float:
        """Mean of l(2m, 2m+1) and l(2m+1, 2m) over all 2N ordered pairs."""
        log_prob = self._log_probabilities(batch)
        anchors = np.arange(batch.rows)
        partners = anchors ^ 1
        return float(max(0.0, -np.mean(log_prob[anchors, partners])))
