"""Chunked sample-parallel execution with deterministic reduction order."""

from concurrent.futures import ProcessPoolExecutor

from .rng import worker_count


def chunks(samples, size):
    return [(start, min(size, samples - start)) for start in range(0, samples, size)]


def run_chunks(fn, samples, size, *args, workers=None):
    """Evaluate fn(start, count, *args) over sample chunks; results come back in
    chunk order whatever the worker count."""
    jobs = chunks(samples, size)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) == 1:
        return [fn(start, count, *args) for start, count in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, start, count, *args) for start, count in jobs]
        return [f.result() for f in futures]
