"""Reproducible random streams.

Every random quantity is drawn from a Philox counter-based generator.  A task
is identified by ``(seed, key...)`` and gets its own stream through
:class:`numpy.random.SeedSequence` spawn keys, so work split into chunks
produces the same numbers no matter how many threads execute the chunks.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DomainError

__all__ = ["check_seed", "stream", "chunk_sizes", "map_chunks"]


def check_seed(seed):
    """Validate a 64-bit unsigned seed and return it as ``int``."""
    try:
        value = int(seed)
    except (TypeError, ValueError):
        raise DomainError(f"seed must be an integer, got {seed!r}") from None
    if value != seed or not 0 <= value < 2**64:
        raise DomainError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return value


def stream(seed, *key):
    """Independent ``Generator`` for the task labelled ``key`` under ``seed``."""
    seq = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def chunk_sizes(total, chunk):
    """Split ``total`` items into consecutive chunks of at most ``chunk``."""
    total = int(total)
    chunk = int(chunk)
    if total < 0 or chunk < 1:
        raise DomainError("total must be >= 0 and chunk >= 1")
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn, total, chunk, seed, key=(), threads=1):
    """Run ``fn(rng, size, index)`` over chunks and return results in order.

    Chunk ``i`` always uses ``stream(seed, *key, i)``; the result list is in
    chunk order, so any reduction over it is independent of ``threads``.
    """
    sizes = chunk_sizes(total, chunk)
    jobs = [(stream(seed, *key, i), size, i) for i, size in enumerate(sizes)]
    threads = max(1, int(threads))
    if threads == 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
