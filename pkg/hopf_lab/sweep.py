"""
Amplitude sweeps: one limit-cycle search plus Floquet analysis per lam.

Rows are farmed out to worker processes, one Queue pair per worker; the
system and Hopf data are pickled once per worker and every row is
independent, so the table comes back in grid order whatever the worker count.
"""
import logging
import pickle
import re
from dataclasses import dataclass
from multiprocessing import Process, Queue
from typing import Optional

import numpy as np

from .config import Tolerances, worker_count
from .dynamics import find_limit_cycle, monodromy
from .errors import HopfLabError
from .model import jacobian

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    r: Optional[float]
    period: Optional[float]
    mu2: Optional[float]
    status: str
    trivial_multiplier_error: Optional[float] = None
    trivial_stable: Optional[bool] = None
    exchange_of_stability: Optional[bool] = None


def _status(exc):
    """NoCycleFound -> no-cycle, ShootingFailure -> shooting-failure, ..."""
    name = type(exc).__name__
    if name == "NoCycleFound":
        return "no-cycle"
    return re.sub(r"(?<!^)(?=[A-Z])", "-", name).lower()


def cycle_direction(classification):
    if classification is not None and classification.stability_cycle == "stable":
        return "forward"
    return "backward"


def guess_amplitude(prediction, lam, spec):
    r = prediction.amplitude_at(lam) if prediction is not None else None
    return r if r else max(abs(lam - spec.lambda0), 1e-3)


def sweep_row(sys, lam, spec, prediction=None, classification=None, tol=None):
    tol = tol or Tolerances()
    lead = float(np.max(np.linalg.eigvals(jacobian(sys, lam)).real))
    trivial_stable = lead < 0
    try:
        cycle = find_limit_cycle(sys, lam, guess_amplitude(prediction, lam, spec), cycle_direction(classification),
                                 spec=spec, tol=tol)
        floquet = monodromy(sys, lam, cycle)
    except HopfLabError as exc:
        logger.info("lam=%.6g: %s (%s)", lam, _status(exc), exc)
        return SweepRow(float(lam), None, None, None, _status(exc), trivial_stable=trivial_stable)
    exchange = None
    if floquet.mu2 is not None:
        exchange = (floquet.mu2 > 0) != trivial_stable
    return SweepRow(float(lam), cycle.amplitude_r, cycle.period_T, floquet.mu2, "ok",
                    float(abs(floquet.multipliers[floquet.trivial_index] - 1)),
                    trivial_stable, exchange)


class SweepPool:
    def __init__(self, sys, spec, prediction, classification, tol, workers):
        self.workers = []
        self.to_worker = []
        self.from_worker = []
        payload = pickle.dumps((sys, spec, prediction, classification, tol))
        for _ in range(workers):
            to_q = Queue()
            from_q = Queue()
            p = Process(target=SweepPool._worker, args=(payload, to_q, from_q))
            p.start()
            self.workers.append(p)
            self.to_worker.append(to_q)
            self.from_worker.append(from_q)
        logger.info("started %d sweep worker(s)", workers)

    def run(self, grid):
        # round-robin, then collect per worker in submission order
        assigned = [[] for _ in self.workers]
        for index, lam in enumerate(grid):
            w = index % len(self.workers)
            assigned[w].append(index)
            self.to_worker[w].put({"cmd": "row", "index": index, "lam": float(lam)})
        rows = [None] * len(grid)
        for w, indices in enumerate(assigned):
            for _ in indices:
                index, row = self.from_worker[w].get()
                rows[index] = row
        return rows

    def shutdown(self):
        for q in self.to_worker:
            q.put("TERMINATE")
        for p in self.workers:
            p.join()

    @staticmethod
    def _worker(payload, to_q, from_q):
        sys, spec, prediction, classification, tol = pickle.loads(payload)
        while True:
            msg = to_q.get()
            if msg == "TERMINATE":
                break
            if msg["cmd"] == "row":
                try:
                    row = sweep_row(sys, msg["lam"], spec, prediction, classification, tol)
                except Exception as exc:
                    # every request is answered
                    logger.error("lam=%.6g: worker error %s: %s", msg["lam"], type(exc).__name__, exc)
                    row = SweepRow(msg["lam"], None, None, None, "worker-error")
                from_q.put((msg["index"], row))


def amplitude_sweep(sys, grid, spec, prediction=None, classification=None, tol=None, workers=None):
    tol = tol or Tolerances()
    grid = [float(lam) for lam in grid]
    workers = workers or worker_count(len(grid))
    if workers == 1:
        rows = [sweep_row(sys, lam, spec, prediction, classification, tol) for lam in grid]
    else:
        pool = SweepPool(sys, spec, prediction, classification, tol, workers)
        try:
            rows = pool.run(grid)
        finally:
            pool.shutdown()
    found = sum(row.status == "ok" for row in rows)
    logger.info("sweep over %d value(s) of lam found %d cycle(s)", len(grid), found)
    return rows


def linear_grid(start, stop, count):
    return list(np.linspace(start, stop, int(count)))
