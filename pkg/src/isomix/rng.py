"""Counter-based random streams.

Every replication of a simulation owns a substream addressed by
``(seed, index)``.  The k-th uniform of that substream is a pure function of
``(seed, index, k)`` (two rounds of the SplitMix64 finalizer), so the draws a
replication sees never depend on how replications are grouped into batches,
on thread count, or on which estimator is being evaluated.

A :class:`StreamBatch` holds many substreams at once and keeps a separate
cursor per row, which lets rejection samplers consume a variable number of
uniforms per replication while staying reproducible.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INDEX_SALT = np.uint64(0xD1B54A32D192ED03)
_MASK64 = (1 << 64) - 1


def _fmix(x: np.ndarray) -> np.ndarray:
    """SplitMix64 output function, vectorized over uint64 arrays."""
    x = x ^ (x >> np.uint64(30))
    x = x * _M1
    x = x ^ (x >> np.uint64(27))
    x = x * _M2
    return x ^ (x >> np.uint64(31))


def _seed_key(seed: int) -> np.uint64:
    if seed < 0 or seed > _MASK64:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    with np.errstate(over="ignore"):
        return _fmix(np.asarray(np.uint64(seed) + _GOLDEN, dtype=np.uint64))[()]


def _row_keys(key: np.uint64, index: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return _fmix(key ^ _fmix(index * _INDEX_SALT + _GOLDEN))


def _uniforms(row_key: np.ndarray, cursor: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        bits = _fmix(row_key + (cursor + np.uint64(1)) * _GOLDEN)
    # 53 high bits, shifted by half an ulp: values lie strictly inside (0, 1)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


class StreamBatch:
    """A block of independent substreams ``(seed, i)`` for ``i`` in ``indices``."""

    def __init__(self, seed: int, indices) -> None:
        self.seed = int(seed)
        self.indices = np.ascontiguousarray(np.asarray(indices, dtype=np.uint64).reshape(-1))
        self._keys = _row_keys(_seed_key(self.seed), self.indices)
        self.cursor = np.zeros(self.indices.shape, dtype=np.uint64)

    @classmethod
    def range(cls, seed: int, start: int, stop: int) -> "StreamBatch":
        return cls(seed, np.arange(start, stop, dtype=np.uint64))

    def __len__(self) -> int:
        return self.indices.size

    def uniform(self, rows=None) -> np.ndarray:
        """One uniform per selected row; advances only those rows' cursors."""
        if rows is None:
            u = _uniforms(self._keys, self.cursor)
            self.cursor += np.uint64(1)
            return u
        rows = np.asarray(rows)
        u = _uniforms(self._keys[rows], self.cursor[rows])
        self.cursor[rows] += np.uint64(1)
        return u

    def normal(self, rows=None) -> np.ndarray:
        # Box-Muller, cosine branch only: two uniforms per normal
        u1 = self.uniform(rows)
        u2 = self.uniform(rows)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def exponential(self, rows=None) -> np.ndarray:
        return -np.log(self.uniform(rows))

    def gamma(self, shape: float, rows=None) -> np.ndarray:
        """Exact standard gamma draws (Marsaglia-Tsang squeeze/rejection).

        For ``shape < 1`` the draw is ``G(shape + 1) * U**(1/shape)``, with
        the boosting uniform consumed first.
        """
        if shape <= 0:
            raise ValueError("gamma shape must be positive")
        all_rows = np.arange(len(self)) if rows is None else np.asarray(rows)
        boost = None
        a = shape
        if shape < 1.0:
            boost = self.uniform(all_rows) ** (1.0 / shape)
            a = shape + 1.0
        d = a - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        out = np.empty(all_rows.size)
        pending = np.arange(all_rows.size)
        while pending.size:
            rows_now = all_rows[pending]
            x = self.normal(rows_now)
            u = self.uniform(rows_now)
            v = (1.0 + c * x) ** 3
            with np.errstate(invalid="ignore", divide="ignore"):
                ok = (v > 0) & (
                    (u < 1.0 - 0.0331 * x**4)
                    | (np.log(u) < 0.5 * x * x + d * (1.0 - v + np.log(v)))
                )
            out[pending[ok]] = d * v[ok]
            pending = pending[~ok]
        if boost is not None:
            out *= boost
        return out


class RandomStream(StreamBatch):
    """A single substream; the scalar face of :class:`StreamBatch`."""

    def __init__(self, seed: int, index: int = 0) -> None:
        super().__init__(seed, [index])

    def split(self, count: int) -> list["RandomStream"]:
        """Child streams keyed off this stream's own seed and index."""
        with np.errstate(over="ignore"):
            child_seed = int(_fmix(np.asarray(self._keys[0] ^ _INDEX_SALT))[()])
        return [RandomStream(child_seed, i) for i in range(count)]
