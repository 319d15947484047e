import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .tools.misc import DomainError, worker_count

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 50_000


@dataclass(frozen=True)
class ChunkMoments:
    """
    Count, mean and sum of squared deviations of one block of samples. Blocks
    combine with the pairwise update of Chan, Golub and LeVeque.
    """

    count: int
    mean: float
    m2: float

    @classmethod
    def from_values(cls, values) -> "ChunkMoments":
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size == 0:
            return cls(0, 0.0, 0.0)
        mean = math.fsum(values) / values.size
        return cls(values.size, mean, math.fsum((values - mean) ** 2))

    def merge(self, other: "ChunkMoments") -> "ChunkMoments":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta**2 * self.count * other.count / count
        return ChunkMoments(count, mean, m2)


def mc_accumulate(chunks: Iterable) -> tuple[float, float]:
    """
    Merges per-chunk samples (arrays) or ChunkMoments, in the order given, into
    the sample mean and its standard error s / sqrt(n).

    :param chunks: The chunks, each an array of per-sample values or a ChunkMoments.
    :type chunks: Iterable
    :return: (mean, stderr).
    :rtype: tuple
    """

    total = ChunkMoments(0, 0.0, 0.0)
    for chunk in chunks:
        if not isinstance(chunk, ChunkMoments):
            chunk = ChunkMoments.from_values(chunk)
        total = total.merge(chunk)
    if total.count < 2:
        raise DomainError(f"requires at least 2 samples, got {total.count}")
    variance = max(total.m2, 0.0) / (total.count - 1)
    return total.mean, math.sqrt(variance / total.count)


def plan_chunks(n_samples: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[int]:
    """Chunk sizes; chunk i always draws from RNG stream i."""
    if n_samples < 2:
        raise DomainError(f"requires n_samples >= 2, got {n_samples}")
    if chunk_size < 1:
        raise DomainError(f"requires chunk_size >= 1, got {chunk_size}")
    full, rest = divmod(n_samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def handle_batch_parallel(
    worker: Callable,
    task,
    n_samples: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    progress=None,
    workers: int | None = None,
) -> list[ChunkMoments]:
    """
    Runs worker(task, seed, stream, size) over every chunk and returns the results
    in chunk order, whatever order the processes finish in.

    :param worker: A picklable module-level function returning ChunkMoments.
    :type worker: Callable
    :param task: Picklable description of the integrand.
    :param n_samples: Total number of samples.
    :type n_samples: int
    :param seed: The run seed.
    :type seed: int
    :param chunk_size: Samples per chunk.
    :type chunk_size: int
    :param progress: Optional object with update(processed, total).
    :param workers: Process count; defaults to worker_count().
    :type workers: int
    :return: One ChunkMoments per chunk.
    :rtype: list
    """

    sizes = plan_chunks(n_samples, chunk_size)
    total = len(sizes)
    workers = workers or worker_count()
    results: list[ChunkMoments | None] = [None] * total

    if workers == 1 or total == 1:
        for stream, size in enumerate(sizes):
            results[stream] = worker(task, seed, stream, size)
            if progress:
                progress.update(stream + 1, total)
        return results

    logger.info("sampling %d chunks on %d processes", total, min(workers, total))
    with ProcessPoolExecutor(max_workers=min(workers, total)) as executor:
        futures = {
            executor.submit(worker, task, seed, stream, size): stream
            for stream, size in enumerate(sizes)
        }
        for i, future in enumerate(as_completed(futures), 1):
            try:
                results[futures[future]] = future.result()
            except Exception as e:
                logger.error("chunk %d failed: %s", futures[future], e)
                raise

            if progress:
                progress.update(i, total)
    return results
