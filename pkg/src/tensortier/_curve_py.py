"""Pure-Python backend for the step-curve core.

Semantics here are the reference; the compiled backend in _curvecore.pyx
mirrors this class method for method.
"""

from bisect import bisect_right


class StepCurve:
    """Integer piecewise-constant function on [0, horizon).

    Segment i covers [times[i], times[i+1]), the last one running to the
    horizon. Adjacent equal-valued segments are kept merged so breakpoints()
    is canonical and equality is structural.
    """

    __slots__ = ("horizon", "_times", "_vals")

    def __init__(self, horizon=0):
        if horizon < 0:
            raise ValueError("horizon must be >= 0")
        self.horizon = horizon
        self._times = [0]
        self._vals = [0]

    def copy(self):
        c = StepCurve.__new__(StepCurve)
        c.horizon = self.horizon
        c._times = self._times[:]
        c._vals = self._vals[:]
        return c

    def _seg(self, t):
        return bisect_right(self._times, t) - 1

    def _split(self, t):
        """Ensure a breakpoint at t (0 <= t <= horizon); return its index."""
        if t >= self.horizon:
            return len(self._times)
        i = self._seg(t)
        if self._times[i] == t:
            return i
        self._times.insert(i + 1, t)
        self._vals.insert(i + 1, self._vals[i])
        return i + 1

    def _merge_at(self, k):
        if 0 < k < len(self._times) and self._vals[k] == self._vals[k - 1]:
            del self._times[k]
            del self._vals[k]

    def add(self, t0, t1, delta):
        """Add delta on [t0, t1), clipped to the domain."""
        t0 = max(t0, 0)
        t1 = min(t1, self.horizon)
        if t0 >= t1 or delta == 0:
            return
        i = self._split(t0)
        j = self._split(t1)
        for k in range(i, j):
            self._vals[k] += delta
        # interior adjacencies are unchanged by a uniform delta; only the
        # window edges can need re-merging
        self._merge_at(j)
        self._merge_at(i)

    def value_at(self, t):
        if not 0 <= t < self.horizon:
            raise ValueError(f"time {t} outside [0, {self.horizon})")
        return self._vals[self._seg(t)]

    def max_over(self, t0, t1):
        """Max value on [t0, t1) clipped to the domain; 0 if empty."""
        t0 = max(t0, 0)
        t1 = min(t1, self.horizon)
        if t0 >= t1:
            return 0
        k = self._seg(t0)
        best = self._vals[k]
        k += 1
        n = len(self._times)
        while k < n and self._times[k] < t1:
            if self._vals[k] > best:
                best = self._vals[k]
            k += 1
        return best

    def max_value(self):
        if self.horizon == 0:
            return 0
        return max(self._vals)

    def area(self):
        """Integral of the curve over the whole domain."""
        total = 0
        n = len(self._times)
        for k in range(n):
            end = self._times[k + 1] if k + 1 < n else self.horizon
            total += self._vals[k] * (end - self._times[k])
        return total

    def overflow_area(self, cap):
        """Integral of max(0, value - cap) over the whole domain."""
        total = 0
        n = len(self._times)
        for k in range(n):
            if self._vals[k] > cap:
                end = self._times[k + 1] if k + 1 < n else self.horizon
                total += (self._vals[k] - cap) * (end - self._times[k])
        return total

    def window_overflow_area(self, cap, clamp, t0, t1):
        """Integral of min(clamp, max(0, value - cap)) over [t0, t1)."""
        t0 = max(t0, 0)
        t1 = min(t1, self.horizon)
        if t0 >= t1:
            return 0
        total = 0
        n = len(self._times)
        k = self._seg(t0)
        while k < n and self._times[k] < t1:
            over = self._vals[k] - cap
            if over > 0:
                if over > clamp:
                    over = clamp
                end = self._times[k + 1] if k + 1 < n else self.horizon
                total += over * (min(end, t1) - max(self._times[k], t0))
            k += 1
        return total

    def earliest_below(self, cap, lo, hi):
        """Smallest t in [lo, hi] such that max_over(t, hi) <= cap.

        hi always qualifies (empty suffix), so a result exists.
        """
        if not (0 <= lo <= hi <= self.horizon):
            raise ValueError("window outside domain")
        if lo == hi:
            return lo
        k = self._seg(hi - 1)
        while True:
            if self._vals[k] > cap:
                end = self._times[k + 1] if k + 1 < len(self._times) else self.horizon
                return min(end, hi)
            if self._times[k] <= lo:
                return lo
            k -= 1

    def breakpoints(self):
        """Canonical (time, value) pairs; empty for a zero-length domain."""
        if self.horizon == 0:
            return []
        return list(zip(self._times, self._vals))

    def segments(self):
        """List of (start, end, value) triples covering the domain."""
        out = []
        n = len(self._times)
        for k in range(n):
            end = self._times[k + 1] if k + 1 < n else self.horizon
            if end > self._times[k]:
                out.append((self._times[k], end, self._vals[k]))
        return out

    def __eq__(self, other):
        if not isinstance(other, StepCurve):
            return NotImplemented
        return self.horizon == other.horizon and self.breakpoints() == other.breakpoints()

    def __repr__(self):
        return f"StepCurve(horizon={self.horizon}, breakpoints={self.breakpoints()})"
