"""Simulated bulk-synchronous master/worker execution with a communication ledger.

Every round broadcasts one d-vector to each worker and gathers one d-vector
back. Tasks own disjoint state; the merge runs after a barrier, in
ascending worker order, so results do not depend on how tasks were scheduled.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from .exceptions import ConfigError, RoundAbortedError

DIRECTIONS = ("up", "down", "both")


@dataclass(frozen=True)
class Message:
    kind: str  # "broadcast_w" or "reduce_delta_w"
    round: int
    worker: int
    payload_len: int

    def __post_init__(self):
        if self.kind not in ("broadcast_w", "reduce_delta_w"):
            raise ValueError(f"unknown message kind {self.kind!r}")
        if self.round < 1:
            raise ValueError("rounds are numbered from 1")


@dataclass
class CommLedger:
    vectors_up: int = 0
    vectors_down: int = 0
    coordinate_updates: int = 0
    per_round: list = field(default_factory=list)

    def record(self, messages, updates):
        up = down = 0
        for msg in messages:
            if msg.kind == "reduce_delta_w":
                up += 1
            else:
                down += 1
        self.vectors_up += up
        self.vectors_down += down
        self.coordinate_updates += updates
        self.per_round.append((up, down))

    @property
    def rounds(self):
        return len(self.per_round)

    def vectors(self, direction="both"):
        if direction == "up":
            return self.vectors_up
        if direction == "down":
            return self.vectors_down
        if direction == "both":
            return self.vectors_up + self.vectors_down
        raise ConfigError(f"count direction must be one of {DIRECTIONS}")

    def to_dict(self):
        d = asdict(self)
        d["per_round"] = [list(r) for r in self.per_round]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["vectors_up"], d["vectors_down"], d["coordinate_updates"],
                   [tuple(r) for r in d["per_round"]])


def ledger_report(ledger, direction="both"):
    vecs = ledger.vectors(direction)
    return {
        "rounds": ledger.rounds,
        "vectors_up": ledger.vectors_up,
        "vectors_down": ledger.vectors_down,
        "vectors": vecs,
        "count_direction": direction,
        "coordinate_updates": ledger.coordinate_updates,
        "updates_per_vector": ledger.coordinate_updates / vecs if vecs else 0.0,
        "per_round": [list(r) for r in ledger.per_round],
    }


def ledger_to_json(ledger):
    return json.dumps(ledger.to_dict(), sort_keys=True)


def ledger_from_json(text):
    return CommLedger.from_dict(json.loads(text))


@dataclass(frozen=True)
class CostModel:
    """Synthetic clock: seconds per communicated vector and per coordinate update.

    The defaults are illustrative only (network latency several orders of
    magnitude above a memory access); no real timing is implied.
    """

    latency_per_vector: float = 2.5e-4
    time_per_update: float = 1e-7

    def elapsed(self, vectors, updates, K=1):
        # workers compute concurrently, so per-round compute is shared K ways
        return vectors * self.latency_per_vector + updates * self.time_per_update / K


class Runtime:
    """Runs one bulk-synchronous round at a time.

    Parameters
    ----------
    K : int
        Number of workers.
    d : int
        Length of every communicated vector.
    executor : {"serial", "threads"}
    n_jobs : int, optional
        Thread count for ``executor="threads"`` (defaults to K).
    """

    def __init__(self, K, d, executor="serial", n_jobs=None):
        if K < 1:
            raise ConfigError("K must be >= 1")
        if executor not in ("serial", "threads"):
            raise ConfigError(f"unknown executor {executor!r}")
        self.K = K
        self.d = d
        self.executor = executor
        self.n_jobs = n_jobs or K
        self.ledger = CommLedger()
        self._round = 0
        self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def _run_all(self, tasks, rnd):
        if self.executor == "serial":
            results = []
            for k, task in enumerate(tasks):
                try:
                    results.append(task())
                except Exception as exc:
                    raise RoundAbortedError(rnd, k, exc) from exc
            return results
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=self.n_jobs)
        futures = [self._pool.submit(task) for task in tasks]
        results = []
        failure = None
        for k, fut in enumerate(futures):
            try:
                results.append(fut.result())
            except Exception as exc:
                if failure is None:
                    failure = (k, exc)
        if failure is not None:
            raise RoundAbortedError(rnd, failure[0], failure[1]) from failure[1]
        return results

    def execute_round(self, tasks, merge):
        """Broadcast, run K tasks, barrier, then ``merge(results)`` in worker order.

        ``tasks`` is a list of K zero-argument callables that read the
        broadcast snapshot they closed over. Each must return an object with a
        ``delta_w`` of length d (the only thing sent back to the master) and a
        ``steps`` count of coordinate updates performed. On any task failure
        nothing is merged and the ledger is unchanged.
        """
        if len(tasks) != self.K:
            raise ConfigError(f"expected {self.K} tasks, got {len(tasks)}")
        rnd = self._round + 1
        down = [Message("broadcast_w", rnd, k, self.d) for k in range(self.K)]
        results = self._run_all(tasks, rnd)
        up = []
        for k, res in enumerate(results):
            payload = len(res.delta_w)
            if payload != self.d:
                raise RoundAbortedError(rnd, k, ValueError(f"payload length {payload} != {self.d}"))
            up.append(Message("reduce_delta_w", rnd, k, payload))
        merged = merge(results)
        self._round = rnd
        self.ledger.record(down + up, sum(int(getattr(r, "steps", 0)) for r in results))
        return merged
