import heapq
import itertools


class EventLoop:
    """Virtual-clock scheduler; ties run in scheduling order."""

    def __init__(self):
        self.now = 0.0
        self._heap = []
        self._seq = itertools.count()

    def at(self, t, fn, *args):
        if t < self.now:
            t = self.now
        heapq.heappush(self._heap, (t, next(self._seq), fn, args))

    def after(self, dt, fn, *args):
        self.at(self.now + dt, fn, *args)

    def every(self, period, fn, start=None):
        def tick():
            fn(self.now)
            self.after(period, tick)

        self.at(period if start is None else start, tick)

    def run(self, until):
        heap = self._heap
        while heap and heap[0][0] <= until:
            t, _, fn, args = heapq.heappop(heap)
            self.now = t
            fn(*args)
        self.now = until
