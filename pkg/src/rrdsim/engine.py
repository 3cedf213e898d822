"""Discrete-event kernel with an integer microsecond clock.

Events fire in (time, insertion order). Randomness comes from numpy
``SeedSequence`` substreams keyed by (node id, purpose), so a node's draws do
not depend on how many other nodes exist.
"""
import heapq
import itertools

import numpy as np

US_PER_SECOND = 1_000_000


class SchedulingError(RuntimeError):
    pass


class Event:
    __slots__ = ("fire_at", "seq", "kind", "target", "fn", "args", "cancelled", "fired")

    def __init__(self, fire_at, seq, kind, target, fn, args):
        self.fire_at = fire_at
        self.seq = seq
        self.kind = kind
        self.target = target
        self.fn = fn
        self.args = args
        self.cancelled = False
        self.fired = False

    @property
    def pending(self):
        return not (self.cancelled or self.fired)

    def __repr__(self):
        return f"Event({self.fire_at}, #{self.seq}, {self.kind}, target={self.target})"


class Simulator:
    """Single-threaded event loop.

    ``trace=True`` keeps a log of every dispatched event as
    ``(fire_at, seq, kind, target)`` tuples.
    """

    def __init__(self, seed=0, trace=False):
        self.seed = int(seed)
        self.now = 0
        self._queue = []
        self._seq = itertools.count()
        self.trace = [] if trace else None
        self.dispatched = 0

    def schedule(self, at, fn, *args, kind="timer", target=None):
        at = int(at)
        if at < self.now:
            raise SchedulingError(f"cannot schedule {kind} at {at} us, clock is already at {self.now} us")
        ev = Event(at, next(self._seq), kind, target, fn, args)
        heapq.heappush(self._queue, (at, ev.seq, ev))
        return ev

    def schedule_in(self, delay, fn, *args, kind="timer", target=None):
        return self.schedule(self.now + delay, fn, *args, kind=kind, target=target)

    @staticmethod
    def cancel(ev):
        if ev is None or not ev.pending:
            return False
        ev.cancelled = True
        return True

    def run_until(self, end):
        end = int(end)
        if end < self.now:
            raise SchedulingError(f"run_until({end}) is before now ({self.now})")
        queue = self._queue
        trace = self.trace
        while queue and queue[0][0] <= end:
            at, _, ev = heapq.heappop(queue)
            if ev.cancelled:
                continue
            self.now = at
            ev.fired = True
            self.dispatched += 1
            if trace is not None:
                trace.append((at, ev.seq, ev.kind, ev.target))
            ev.fn(*ev.args)
        self.now = end

    def rng(self, *key):
        """Independent generator for ``key`` (e.g. ``(node_id, purpose)``)."""
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return np.random.Generator(np.random.PCG64(ss))
