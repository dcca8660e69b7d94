"""Fork-join worker pool used by the transform stages.

The pool implements spawn/join semantics with dynamic load balancing:
pool threads pull the oldest pending task (breadth-first, so large
subtrees migrate to idle workers), while a thread blocked in join() helps
by running the newest pending task instead of sleeping.  A joined task
that has not started yet is reclaimed and run by the joining thread
itself, so recursion never deadlocks regardless of pool size.

The calling thread counts as one worker: a pool created for T workers
starts T-1 threads.  Correctness of client code must not depend on which
worker runs which task; the stages only ever write disjoint buffer
regions, so results are identical under any schedule.
"""

import collections
import threading

_PENDING = 0
_RUNNING = 1
_DONE = 2


class Task:
    __slots__ = ("_fn", "_args", "_state", "_exc")

    def __init__(self, fn, args):
        self._fn = fn
        self._args = args
        self._state = _PENDING
        self._exc = None


class WorkerPool:
    """A fixed set of workers executing spawned tasks until shutdown."""

    def __init__(self, workers: int):
        if workers < 1:
            raise ValueError("worker count must be >= 1")
        self.workers = workers
        self._cv = threading.Condition()
        self._pending = collections.deque()
        self._shutdown = False
        self._local = threading.local()
        self._threads = []
        for slot in range(workers - 1):
            t = threading.Thread(
                target=self._thread_main, args=(slot,),
                name=f"efft-worker-{slot}", daemon=True,
            )
            t.start()
            self._threads.append(t)

    def current_slot(self) -> int:
        """Stable worker index of the calling thread, in [0, workers).

        Pool threads occupy slots 0..workers-2; any other thread (the
        handle's current owner) maps to the last slot.
        """
        return getattr(self._local, "slot", self.workers - 1)

    def spawn(self, fn, *args) -> Task:
        """Queue fn(*args) for parallel execution; returns a joinable task."""
        task = Task(fn, args)
        with self._cv:
            self._pending.append(task)
            self._cv.notify()
        return task

    def join(self, task: Task) -> None:
        """Wait for task, executing other pending work while blocked."""
        while True:
            with self._cv:
                if task._state == _DONE:
                    break
                if task._state == _PENDING:
                    self._pending.remove(task)
                    task._state = _RUNNING
                    claimed = task
                elif self._pending:
                    claimed = self._pending.pop()
                    claimed._state = _RUNNING
                else:
                    self._cv.wait()
                    continue
            self._run(claimed)
        if task._exc is not None:
            raise task._exc

    def parallel_for(self, chunks, body) -> None:
        """Run body(*chunk) for every chunk, first chunk inline."""
        chunks = list(chunks)
        if not chunks:
            return
        tasks = [self.spawn(body, *chunk) for chunk in chunks[1:]]
        body(*chunks[0])
        for task in tasks:
            self.join(task)

    def shutdown(self) -> None:
        with self._cv:
            self._shutdown = True
            self._cv.notify_all()
        for t in self._threads:
            t.join()
        self._threads = []

    def _thread_main(self, slot: int) -> None:
        self._local.slot = slot
        while True:
            with self._cv:
                while not self._pending and not self._shutdown:
                    self._cv.wait()
                if self._shutdown and not self._pending:
                    return
                task = self._pending.popleft()
                task._state = _RUNNING
            self._run(task)

    def _run(self, task: Task) -> None:
        try:
            task._fn(*task._args)
        except BaseException as exc:
            task._exc = exc
        with self._cv:
            task._state = _DONE
            self._cv.notify_all()


def chunk_ranges(start: int, stop: int, step: int, max_chunks: int):
    """Split [start, stop) into at most max_chunks ranges on step boundaries.

    Returns (lo, hi) pairs covering the range exactly; every boundary is a
    multiple of step away from start, so tiles are never split mid-tile.
    """
    total = stop - start
    if total <= 0:
        return []
    tiles = -(-total // step)
    nchunks = max(1, min(max_chunks, tiles))
    per_chunk = -(-tiles // nchunks) * step
    out = []
    lo = start
    while lo < stop:
        hi = min(lo + per_chunk, stop)
        out.append((lo, hi))
        lo = hi
    return out
