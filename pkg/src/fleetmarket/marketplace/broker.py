"""Push-side message broker.

Packages are fetched from the vault at routing time (while consent
holds) and queued; a single worker thread delivers them to the
subscribed target in FIFO order, which preserves per-(agreement,
vehicle, channel) sequence order. Failed deliveries are retried with
exponential backoff and parked in a dead-letter queue after the last
attempt. Delivery is at-least-once: a target crash after a successful
hand-off can lead to a replay, never to a silent loss.
"""

from __future__ import annotations

import queue
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Protocol

from ..model import DataPackage


class PushTarget(Protocol):
    def deliver(self, pkg: DataPackage) -> None: ...


class SubscriptionQueue:
    """Default push target: an in-memory stream the provider polls."""

    def __init__(self) -> None:
        self._items: deque[DataPackage] = deque()
        self._cond = threading.Condition()

    def deliver(self, pkg: DataPackage) -> None:
        with self._cond:
            self._items.append(pkg)
            self._cond.notify_all()

    def poll(self, max_items: int = 100, timeout_s: float = 0.0) -> list[DataPackage]:
        deadline = time.monotonic() + timeout_s
        with self._cond:
            while not self._items:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return []
                self._cond.wait(remaining)
            out = []
            while self._items and len(out) < max_items:
                out.append(self._items.popleft())
            return out

    def __len__(self) -> int:
        with self._cond:
            return len(self._items)


@dataclass(frozen=True)
class _Task:
    agreement_id: str
    pkg: DataPackage


class Broker:
    def __init__(
        self,
        on_delivered: Callable[[str, DataPackage], None],
        on_dead_letter: Callable[[str, DataPackage, int, str], None],
        max_attempts: int = 4,
        base_delay_s: float = 0.01,
    ):
        self._on_delivered = on_delivered
        self._on_dead_letter = on_dead_letter
        self._max_attempts = max_attempts
        self._base_delay_s = base_delay_s
        self._targets: dict[str, PushTarget] = {}
        self._queue: queue.Queue[_Task] = queue.Queue()
        self._stop = threading.Event()
        self._worker = threading.Thread(target=self._run, name="broker", daemon=True)
        self._worker.start()

    def register(self, agreement_id: str, target: PushTarget | None = None) -> PushTarget:
        target = target or SubscriptionQueue()
        self._targets[agreement_id] = target
        return target

    def unregister(self, agreement_id: str) -> None:
        self._targets.pop(agreement_id, None)

    def target(self, agreement_id: str) -> PushTarget | None:
        return self._targets.get(agreement_id)

    def submit(self, agreement_id: str, pkg: DataPackage) -> None:
        self._queue.put(_Task(agreement_id, pkg))

    def drain(self) -> None:
        """Block until every queued delivery is finished (or dead-lettered)."""
        self._queue.join()

    def close(self) -> None:
        self._stop.set()
        self._queue.put(_Task("", None))  # type: ignore[arg-type]
        self._worker.join(timeout=5)

    def _run(self) -> None:
        while True:
            task = self._queue.get()
            try:
                if self._stop.is_set() and task.pkg is None:
                    return
                self._deliver(task)
            finally:
                self._queue.task_done()

    def _deliver(self, task: _Task) -> None:
        # A terminated agreement keeps in-flight work; only new routing stops.
        target = self._targets.get(task.agreement_id)
        if target is None:
            self._on_dead_letter(task.agreement_id, task.pkg, 0, "no subscription target")
            return
        error = ""
        for attempt in range(1, self._max_attempts + 1):
            try:
                target.deliver(task.pkg)
            except Exception as exc:  # target failures are data, not bugs
                error = str(exc) or type(exc).__name__
                if attempt < self._max_attempts:
                    time.sleep(self._base_delay_s * (2 ** (attempt - 1)))
                continue
            self._on_delivered(task.agreement_id, task.pkg)
            return
        self._on_dead_letter(task.agreement_id, task.pkg, self._max_attempts, error)
