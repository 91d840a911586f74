"""Fan-out of independent verification jobs."""

import concurrent.futures

from tqdm import tqdm

from .utils import log_failures, logger


@log_failures
def run_job(func, args):
    """Run one job; always returns a list of reports"""
    result = func(*args)
    return list(result) if isinstance(result, (list, tuple)) else [result]


class VerificationRunner:
    """
    Run jobs (top-level function, argument tuple) on a process pool.

    Results come back in submission order whatever the completion order, so
    reports are deterministic. With one worker everything runs in-process.
    """

    def __init__(self, max_workers=1, progress=True):
        if max_workers < 1:
            raise ValueError(f"Need at least one worker, got {max_workers}")
        self.max_workers = max_workers
        self.progress = progress

    def run(self, jobs, desc="Verifying"):
        jobs = list(jobs)
        logger.info(f"Running {len(jobs)} jobs on {self.max_workers} worker(s)")
        bar = tqdm(total=len(jobs), desc=desc, disable=not self.progress)
        try:
            if self.max_workers == 1:
                results = []
                for func, args in jobs:
                    results.append(run_job(func, args))
                    bar.update(1)
            else:
                results = [None] * len(jobs)
                with concurrent.futures.ProcessPoolExecutor(max_workers=self.max_workers) as executor:
                    futures = {
                        executor.submit(run_job, func, args): position
                        for position, (func, args) in enumerate(jobs)
                    }
                    for future in concurrent.futures.as_completed(futures):
                        results[futures[future]] = future.result()
                        bar.update(1)
        finally:
            bar.close()
        return [report for batch in results for report in batch]
