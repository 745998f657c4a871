# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Packed GF(2) matrix kernels.

A d x d matrix over F2 (d <= 8) is one uint64: row i lives in bits
[i*d, i*d + d) and bit j of that row is the entry (i, j).  Zero never encodes
an invertible matrix, so it doubles as the empty-slot marker of the hash set.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.stdint cimport uint64_t
from libc.stdlib cimport calloc, free

cnp.import_array()

cdef extern from *:
    """
    static inline int oddform_ctz(unsigned long long x) { return __builtin_ctzll(x); }
    static inline void oddform_prefetch(const void* p) { __builtin_prefetch(p, 1, 1); }
    """
    int oddform_ctz(unsigned long long x) nogil
    void oddform_prefetch(const void* p) nogil


cdef inline uint64_t pmul(uint64_t a, uint64_t b, int d) noexcept nogil:
    """Product a*b of packed matrices."""
    cdef uint64_t m = (<uint64_t>1 << d) - 1
    cdef uint64_t out = 0, r, ai
    cdef int i, k
    for i in range(d):
        ai = (a >> (i * d)) & m
        r = 0
        while ai:
            k = oddform_ctz(ai)
            r ^= (b >> (k * d)) & m
            ai &= ai - 1
        out |= r << (i * d)
    return out


cdef inline uint64_t pmul_tab(uint64_t x, const uint64_t* tab, int d) noexcept nogil:
    """x * g where tab[v] is the row vector v times g."""
    cdef uint64_t m = (<uint64_t>1 << d) - 1
    cdef uint64_t out = 0
    cdef int i
    for i in range(d):
        out |= tab[(x >> (i * d)) & m] << (i * d)
    return out


def row_tables(const uint64_t[::1] gens, int d):
    """For every generator g the table v -> v*g over all row vectors v."""
    cdef Py_ssize_t ng = gens.shape[0], j
    cdef int v, k
    cdef uint64_t m = (<uint64_t>1 << d) - 1, acc
    tabs = np.zeros((ng, 1 << d), dtype=np.uint64)
    cdef uint64_t[:, ::1] t = tabs
    for j in range(ng):
        for v in range(1 << d):
            acc = 0
            for k in range(d):
                if (v >> k) & 1:
                    acc ^= (gens[j] >> (k * d)) & m
            t[j, v] = acc
    return tabs


cdef inline uint64_t mix(uint64_t x) noexcept nogil:
    x ^= x >> 33
    x *= <uint64_t>0xff51afd7ed558ccd
    x ^= x >> 33
    x *= <uint64_t>0xc4ceb9fe1a85ec53
    x ^= x >> 33
    return x


cdef class _HashSet:
    cdef uint64_t* slots
    cdef Py_ssize_t cap
    cdef Py_ssize_t size

    def __cinit__(self, Py_ssize_t expected):
        cdef Py_ssize_t c = 1 << 12
        while c < 2 * expected:
            c <<= 1
        self.cap = c
        self.size = 0
        self.slots = <uint64_t*>calloc(c, sizeof(uint64_t))
        if self.slots == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self.slots)

    cdef int insert(self, uint64_t key) noexcept nogil:
        """Insert key; returns 1 if it was new."""
        cdef Py_ssize_t mask = self.cap - 1
        cdef Py_ssize_t h = <Py_ssize_t>(mix(key) & <uint64_t>mask)
        while self.slots[h] != 0:
            if self.slots[h] == key:
                return 0
            h = (h + 1) & mask
        self.slots[h] = key
        self.size += 1
        return 1

    cdef int insert_at(self, uint64_t key, Py_ssize_t h) noexcept nogil:
        """Insert key starting the probe at slot h (its precomputed hash)."""
        cdef Py_ssize_t mask = self.cap - 1
        while self.slots[h] != 0:
            if self.slots[h] == key:
                return 0
            h = (h + 1) & mask
        self.slots[h] = key
        self.size += 1
        return 1

    cdef int grow(self) except -1:
        cdef Py_ssize_t old = self.cap, i
        cdef uint64_t* prev = self.slots
        self.cap = old * 2
        self.size = 0
        self.slots = <uint64_t*>calloc(self.cap, sizeof(uint64_t))
        if self.slots == NULL:
            self.slots = prev
            self.cap = old
            raise MemoryError()
        for i in range(old):
            if prev[i] != 0:
                self.insert(prev[i])
        free(prev)
        return 0


def mul_left(uint64_t g, const uint64_t[::1] xs, int d, int threads=1):
    """g * x for every x."""
    cdef Py_ssize_t n = xs.shape[0], i
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
        o[i] = pmul(g, xs[i], d)
    return out


def mul_right(const uint64_t[::1] xs, uint64_t g, int d, int threads=1):
    """x * g for every x."""
    cdef Py_ssize_t n = xs.shape[0], i
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
        o[i] = pmul(xs[i], g, d)
    return out


def mul_pairs(const uint64_t[::1] xs, const uint64_t[::1] ys, int d, int threads=1):
    """Elementwise x_i * y_i."""
    cdef Py_ssize_t n = xs.shape[0], i
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
        o[i] = pmul(xs[i], ys[i], d)
    return out


def bfs(const uint64_t[::1] gens, const uint64_t[::1] visited, const uint64_t[::1] frontier,
        int d, Py_ssize_t budget, int threads=1, Py_ssize_t block=65536):
    """Saturate ``visited`` under right multiplication by ``gens``.

    ``frontier`` lists the elements of ``visited`` whose products are still
    unexplored.  Products of a frontier block are computed in parallel; the
    inserts run sequentially in a fixed order, so the result does not depend
    on the thread count.  Returns ``(sorted elements, budget_hit)``.
    """
    cdef Py_ssize_t ng = gens.shape[0], i, j, k, nb, nf
    cdef _HashSet hs = _HashSet(max(visited.shape[0], 1024))
    for i in range(visited.shape[0]):
        hs.insert(visited[i])
    cur = np.ascontiguousarray(frontier, dtype=np.uint64)
    cdef uint64_t[::1] cf
    cdef uint64_t[::1] buf
    cdef uint64_t[::1] nxtv
    cdef Py_ssize_t nn
    cdef bint hit = False
    cdef uint64_t p
    prod = np.empty(block * max(ng, 1), dtype=np.uint64)
    hashes = np.empty(block * max(ng, 1), dtype=np.intp)
    buf = prod
    cdef Py_ssize_t[::1] hv = hashes
    cdef Py_ssize_t mask, total
    cdef Py_ssize_t AHEAD = 16
    tabs = row_tables(gens, d)
    cdef const uint64_t[:, ::1] tv = tabs
    while cur.shape[0] > 0 and not hit and ng > 0:
        cf = cur
        nf = cf.shape[0]
        nxt = np.empty(16, dtype=np.uint64)
        nxtv = nxt
        nn = 0
        for k in range(0, nf, block):
            nb = min(block, nf - k)
            total = nb * ng
            while 2 * (hs.size + total) > hs.cap:
                hs.grow()
            mask = hs.cap - 1
            for i in prange(nb, nogil=True, num_threads=threads, schedule="static"):
                for j in range(ng):
                    buf[i * ng + j] = pmul_tab(cf[k + i], &tv[j, 0], d)
                    hv[i * ng + j] = <Py_ssize_t>(mix(buf[i * ng + j]) & <uint64_t>mask)
            for i in range(total):
                if i + AHEAD < total:
                    oddform_prefetch(&hs.slots[hv[i + AHEAD]])
                p = buf[i]
                if hs.insert_at(p, hv[i]):
                    if nn == nxtv.shape[0]:
                        nxt = np.resize(nxt, 2 * nn)
                        nxtv = nxt
                    nxtv[nn] = p
                    nn += 1
                    if hs.size > budget:
                        hit = True
                        break
            if hit:
                break
        cur = nxt[:nn].copy()
    out = np.empty(hs.size, dtype=np.uint64)
    cdef uint64_t[::1] ov = out
    j = 0
    for i in range(hs.cap):
        if hs.slots[i] != 0:
            ov[j] = hs.slots[i]
            j += 1
    out.sort()
    return out, bool(hit)


def orbit(const uint64_t[::1] conj_l, const uint64_t[::1] conj_r, uint64_t start, int d,
          Py_ssize_t budget):
    """Orbit of ``start`` under x -> conj_l[j] * x * conj_r[j]; returns sorted array."""
    cdef Py_ssize_t ng = conj_l.shape[0], j, head = 0, n = 1
    cdef _HashSet hs = _HashSet(1024)
    hs.insert(start)
    queue = np.empty(1024, dtype=np.uint64)
    cdef uint64_t[::1] qv = queue
    qv[0] = start
    cdef uint64_t x, y
    while head < n:
        x = qv[head]
        head += 1
        for j in range(ng):
            y = pmul(pmul(conj_l[j], x, d), conj_r[j], d)
            if 2 * (hs.size + 1) > hs.cap:
                hs.grow()
            if hs.insert(y):
                if n == qv.shape[0]:
                    queue = np.resize(queue, 2 * n)
                    qv = queue
                qv[n] = y
                n += 1
                if n > budget:
                    out = np.sort(queue[:n])
                    return out, True
    return np.sort(queue[:n]), False
