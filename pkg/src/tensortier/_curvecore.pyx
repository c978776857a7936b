# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the step-curve core.

Mirrors tensortier._curve_py.StepCurve method for method. Values and times
are int64; callers stay within that range (the planner's byte*microsecond
integrals do at the scales this package simulates).
"""

from libc.stdint cimport int64_t
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy, memmove


cdef class StepCurve:
    cdef int64_t* _times
    cdef int64_t* _vals
    cdef Py_ssize_t _n
    cdef Py_ssize_t _cap
    cdef readonly int64_t horizon

    def __cinit__(self, horizon=0):
        if horizon < 0:
            raise ValueError("horizon must be >= 0")
        self.horizon = horizon
        self._cap = 8
        self._times = <int64_t*> malloc(self._cap * sizeof(int64_t))
        self._vals = <int64_t*> malloc(self._cap * sizeof(int64_t))
        if self._times == NULL or self._vals == NULL:
            raise MemoryError()
        self._n = 1
        self._times[0] = 0
        self._vals[0] = 0

    def __dealloc__(self):
        free(self._times)
        free(self._vals)

    cdef int _reserve(self, Py_ssize_t need) except -1:
        cdef Py_ssize_t cap = self._cap
        cdef int64_t* nt
        cdef int64_t* nv
        if need <= cap:
            return 0
        while cap < need:
            cap *= 2
        nt = <int64_t*> malloc(cap * sizeof(int64_t))
        nv = <int64_t*> malloc(cap * sizeof(int64_t))
        if nt == NULL or nv == NULL:
            free(nt)
            free(nv)
            raise MemoryError()
        memcpy(nt, self._times, self._n * sizeof(int64_t))
        memcpy(nv, self._vals, self._n * sizeof(int64_t))
        free(self._times)
        free(self._vals)
        self._times = nt
        self._vals = nv
        self._cap = cap
        return 0

    cdef Py_ssize_t _seg(self, int64_t t):
        # index of the segment containing t: upper_bound(times, t) - 1
        cdef Py_ssize_t lo = 0, hi = self._n, mid
        while lo < hi:
            mid = (lo + hi) >> 1
            if self._times[mid] <= t:
                lo = mid + 1
            else:
                hi = mid
        return lo - 1

    cdef Py_ssize_t _split(self, int64_t t) except -1:
        cdef Py_ssize_t i
        if t >= self.horizon:
            return self._n
        i = self._seg(t)
        if self._times[i] == t:
            return i
        self._reserve(self._n + 1)
        memmove(self._times + i + 2, self._times + i + 1,
                (self._n - i - 1) * sizeof(int64_t))
        memmove(self._vals + i + 2, self._vals + i + 1,
                (self._n - i - 1) * sizeof(int64_t))
        self._times[i + 1] = t
        self._vals[i + 1] = self._vals[i]
        self._n += 1
        return i + 1

    cdef void _merge_at(self, Py_ssize_t k):
        if 0 < k < self._n and self._vals[k] == self._vals[k - 1]:
            memmove(self._times + k, self._times + k + 1,
                    (self._n - k - 1) * sizeof(int64_t))
            memmove(self._vals + k, self._vals + k + 1,
                    (self._n - k - 1) * sizeof(int64_t))
            self._n -= 1

    def copy(self):
        cdef StepCurve c = StepCurve.__new__(StepCurve, self.horizon)
        c._reserve(self._n)
        memcpy(c._times, self._times, self._n * sizeof(int64_t))
        memcpy(c._vals, self._vals, self._n * sizeof(int64_t))
        c._n = self._n
        return c

    def add(self, int64_t t0, int64_t t1, int64_t delta):
        """Add delta on [t0, t1), clipped to the domain."""
        cdef Py_ssize_t i, j, k
        if t0 < 0:
            t0 = 0
        if t1 > self.horizon:
            t1 = self.horizon
        if t0 >= t1 or delta == 0:
            return
        i = self._split(t0)
        j = self._split(t1)
        for k in range(i, j):
            self._vals[k] += delta
        self._merge_at(j)
        self._merge_at(i)

    def value_at(self, int64_t t):
        if not 0 <= t < self.horizon:
            raise ValueError(f"time {t} outside [0, {self.horizon})")
        return self._vals[self._seg(t)]

    def max_over(self, int64_t t0, int64_t t1):
        """Max value on [t0, t1) clipped to the domain; 0 if empty."""
        cdef Py_ssize_t k
        cdef int64_t best
        if t0 < 0:
            t0 = 0
        if t1 > self.horizon:
            t1 = self.horizon
        if t0 >= t1:
            return 0
        k = self._seg(t0)
        best = self._vals[k]
        k += 1
        while k < self._n and self._times[k] < t1:
            if self._vals[k] > best:
                best = self._vals[k]
            k += 1
        return best

    def max_value(self):
        cdef Py_ssize_t k
        cdef int64_t best
        if self.horizon == 0:
            return 0
        best = self._vals[0]
        for k in range(1, self._n):
            if self._vals[k] > best:
                best = self._vals[k]
        return best

    def area(self):
        """Integral of the curve over the whole domain."""
        cdef Py_ssize_t k
        cdef int64_t total = 0, end
        for k in range(self._n):
            end = self._times[k + 1] if k + 1 < self._n else self.horizon
            total += self._vals[k] * (end - self._times[k])
        return total

    def overflow_area(self, int64_t cap):
        """Integral of max(0, value - cap) over the whole domain."""
        cdef Py_ssize_t k
        cdef int64_t total = 0, end
        for k in range(self._n):
            if self._vals[k] > cap:
                end = self._times[k + 1] if k + 1 < self._n else self.horizon
                total += (self._vals[k] - cap) * (end - self._times[k])
        return total

    def window_overflow_area(self, int64_t cap, int64_t clamp,
                             int64_t t0, int64_t t1):
        """Integral of min(clamp, max(0, value - cap)) over [t0, t1)."""
        cdef Py_ssize_t k
        cdef int64_t total = 0, over, end, a, b
        if t0 < 0:
            t0 = 0
        if t1 > self.horizon:
            t1 = self.horizon
        if t0 >= t1:
            return 0
        k = self._seg(t0)
        while k < self._n and self._times[k] < t1:
            over = self._vals[k] - cap
            if over > 0:
                if over > clamp:
                    over = clamp
                end = self._times[k + 1] if k + 1 < self._n else self.horizon
                b = end if end < t1 else t1
                a = self._times[k] if self._times[k] > t0 else t0
                total += over * (b - a)
            k += 1
        return total

    def earliest_below(self, int64_t cap, int64_t lo, int64_t hi):
        """Smallest t in [lo, hi] such that max_over(t, hi) <= cap."""
        cdef Py_ssize_t k
        cdef int64_t end
        if not (0 <= lo <= hi <= self.horizon):
            raise ValueError("window outside domain")
        if lo == hi:
            return lo
        k = self._seg(hi - 1)
        while True:
            if self._vals[k] > cap:
                end = self._times[k + 1] if k + 1 < self._n else self.horizon
                return end if end < hi else hi
            if self._times[k] <= lo:
                return lo
            k -= 1

    def breakpoints(self):
        """Canonical (time, value) pairs; empty for a zero-length domain."""
        cdef Py_ssize_t k
        if self.horizon == 0:
            return []
        return [(self._times[k], self._vals[k]) for k in range(self._n)]

    def segments(self):
        """List of (start, end, value) triples covering the domain."""
        cdef Py_ssize_t k
        cdef int64_t end
        out = []
        for k in range(self._n):
            end = self._times[k + 1] if k + 1 < self._n else self.horizon
            if end > self._times[k]:
                out.append((self._times[k], end, self._vals[k]))
        return out

    def __eq__(self, other):
        if not isinstance(other, StepCurve):
            return NotImplemented
        return (self.horizon == (<StepCurve> other).horizon
                and self.breakpoints() == (<StepCurve> other).breakpoints())

    def __repr__(self):
        return f"StepCurve(horizon={self.horizon}, breakpoints={self.breakpoints()})"
