"""Reproducible random sources.

A :class:`RandomStream` is addressed by ``(seed, stream_id)``; ``stream_id``
may be a tuple of non-negative integers so that experiments can derive
sub-streams hierarchically (cell, block, ...). Streams are backed by numpy's
PCG64 seeded through ``SeedSequence(seed, spawn_key=stream_id)``, which
gives statistically independent streams for distinct keys.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .linalg import gram_schmidt_batch

GENERATOR_NAME = "numpy.PCG64/SeedSequence"

_MASK64 = (1 << 64) - 1


def stable_key(text: str) -> int:
    """64-bit key derived from a string; identical across runs and platforms."""
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


class RandomStream:
    def __init__(self, seed: int, stream_id: int | tuple[int, ...] = 0):
        if isinstance(stream_id, int):
            stream_id = (stream_id,)
        self.seed = int(seed) & _MASK64
        self.stream_id = tuple(int(s) & _MASK64 for s in stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        self.rng = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"

    def substream(self, *keys: int) -> "RandomStream":
        """Independent stream keyed by this stream's id extended with ``keys``."""
        return RandomStream(self.seed, self.stream_id + tuple(keys))

    @property
    def metadata(self) -> dict:
        return {"generator": GENERATOR_NAME, "seed": self.seed,
                "stream_id": list(self.stream_id)}

    # batch samplers -------------------------------------------------------

    def normal(self, size=None):
        return self.rng.standard_normal(size)

    def chi(self, d: int, size=None):
        # chi(d) = sqrt(Gamma(d/2, scale=2))
        if d < 1:
            raise ValueError("d must be >= 1")
        return np.sqrt(2.0 * self.rng.standard_gamma(d / 2.0, size))

    def sphere(self, d: int, size: int | None = None):
        n = 1 if size is None else size
        z = self.rng.standard_normal((n, d))
        norm = np.linalg.norm(z, axis=1)
        while np.any(norm == 0.0):
            bad = norm == 0.0
            z[bad] = self.rng.standard_normal((int(bad.sum()), d))
            norm = np.linalg.norm(z, axis=1)
        u = z / norm[:, None]
        return u[0] if size is None else u

    def haar(self, d: int, size: int | None = None):
        """Haar-distributed orthogonal matrices, shape (size, d, d).

        Gram-Schmidt of a Gaussian matrix with the positive-pivot convention.
        Degenerate draws (probability zero) are replaced by fresh ones.
        """
        n = 1 if size is None else size
        g = self.rng.standard_normal((n, d, d))
        q, ok = gram_schmidt_batch(g, raise_on_degenerate=False)
        while not ok.all():
            bad = np.flatnonzero(~ok)
            q_new, ok_new = gram_schmidt_batch(
                self.rng.standard_normal((bad.size, d, d)), raise_on_degenerate=False)
            q[bad] = q_new
            ok[bad] = ok_new
        return q[0] if size is None else q


def sample_normal(s: RandomStream) -> float:
    return float(s.normal())


def sample_chi(s: RandomStream, d: int) -> float:
    return float(s.chi(d))


def sample_sphere(s: RandomStream, d: int) -> np.ndarray:
    return s.sphere(d)


def sample_haar_orthogonal(s: RandomStream, d: int) -> np.ndarray:
    return s.haar(d)
