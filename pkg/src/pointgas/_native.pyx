# cython: boundscheck=False, wraparound=False, cdivision=True
"""Native kernels for block-dynamics updates and pair-energy sums.

This module must stay behaviorally identical to backend/reference.py: both
consume the same counter-based streams in the same order, and the test suite
checks chain outputs for bit-for-bit agreement.  The chain loop runs without
the GIL so worker threads overlap.
"""

from libc.math cimport exp, sqrt, fmod, INFINITY, isinf
from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t, int64_t

import numpy as np

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

# ---------------------------------------------------------------------------
# Philox4x64-10 matching numpy's stream (counter pre-incremented per block).

cdef uint64_t M0 = <uint64_t>0xD2E7470EE14C6C93
cdef uint64_t M1 = <uint64_t>0xCA5A826395121157
cdef uint64_t W0 = <uint64_t>0x9E3779B97F4A7C15
cdef uint64_t W1 = <uint64_t>0xBB67AE8584CAA73B
cdef uint64_t DOMAIN = <uint64_t>0x706F696E74676173

cdef double U53 = 1.0 / 9007199254740992.0  # 2^-53


cdef inline void philox_block(uint64_t c0, uint64_t c1, uint64_t c2, uint64_t c3,
                              uint64_t k0, uint64_t k1, uint64_t* out) noexcept nogil:
    cdef u128 p
    cdef uint64_t hi0, lo0, hi1, lo1
    cdef uint64_t t0 = c0, t1 = c1, t2 = c2, t3 = c3
    cdef int r
    for r in range(10):
        p = (<u128>M0) * t0
        lo0 = <uint64_t>p
        hi0 = <uint64_t>(p >> 64)
        p = (<u128>M1) * t2
        lo1 = <uint64_t>p
        hi1 = <uint64_t>(p >> 64)
        t0 = hi1 ^ t1 ^ k0
        t1 = lo1
        t2 = hi0 ^ t3 ^ k1
        t3 = lo0
        k0 = k0 + W0
        k1 = k1 + W1
    out[0] = t0
    out[1] = t1
    out[2] = t2
    out[3] = t3


cdef struct Stream:
    uint64_t k0, k1, c1, c2, c3, blk
    int pos
    uint64_t buf[4]


cdef inline void stream_init(Stream* s, uint64_t seed, uint64_t pid,
                             uint64_t chain, uint64_t step) noexcept nogil:
    s.k0 = seed
    s.k1 = DOMAIN
    s.c1 = step
    s.c2 = chain
    s.c3 = pid
    s.blk = 0
    s.pos = 4


cdef inline uint64_t next_u64(Stream* s) noexcept nogil:
    cdef uint64_t x
    if s.pos >= 4:
        s.blk += 1
        philox_block(s.blk, s.c1, s.c2, s.c3, s.k0, s.k1, s.buf)
        s.pos = 0
    x = s.buf[s.pos]
    s.pos += 1
    return x


cdef inline double u01(Stream* s) noexcept nogil:
    return <double>(next_u64(s) >> 11) * U53


def philox_raw(counter, key, int n):
    """Raw outputs for the given start counter and key (test hook)."""
    cdef uint64_t c0 = counter[0], c1 = counter[1], c2 = counter[2], c3 = counter[3]
    cdef uint64_t k0 = key[0], k1 = key[1]
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] view = out
    cdef uint64_t buf[4]
    cdef int i = 0, blk = 0
    while i < n:
        blk += 1
        philox_block(c0 + <uint64_t>blk, c1, c2, c3, k0, k1, buf)
        for j in range(4):
            if i < n:
                view[i] = buf[j]
                i += 1
    return out


# ---------------------------------------------------------------------------
# Packed model.

cdef struct CPack:
    int dim, geom_kind, pot_kind
    double pot_r, pot_a, act_bound
    const double* lo
    const double* hi
    const double* tab_r
    const double* tab_v
    int n_tab
    const double* masks
    int n_masks, mrow
    const double* tilts
    int n_tilts

MAXDIM = 16


cdef inline double c_phi(const CPack* pk, double s) noexcept nogil:
    cdef int i
    if s >= pk.pot_r:
        return 0.0
    if pk.pot_kind == 0:
        return 0.0
    if pk.pot_kind == 1:
        return INFINITY
    if pk.pot_kind == 2:
        return pk.pot_a
    for i in range(pk.n_tab):
        if s < pk.tab_r[i]:
            return pk.tab_v[i]
    return 0.0


cdef inline double c_dist(const CPack* pk, const double* p, const double* q) noexcept nogil:
    cdef double acc = 0.0, v, side
    cdef int i
    for i in range(pk.dim):
        v = q[i] - p[i]
        if pk.geom_kind == 1:
            side = pk.hi[i]
            v = fmod(v + 0.5 * side, side)
            if v < 0.0:
                v += side
            v -= 0.5 * side
        acc += v * v
    return sqrt(acc)


cdef double c_rel_activity(const CPack* pk, const double* x) noexcept nogil:
    cdef int m, i, code, d = pk.dim
    cdef const double* row
    cdef const double* a
    cdef const double* b
    cdef double s, log_f, dd, p
    cdef bint inside
    for m in range(pk.n_masks):
        row = pk.masks + m * pk.mrow
        code = <int>row[0]
        a = row + 2
        b = row + 2 + d
        if code == 0 or code == 5:
            inside = True
            for i in range(d):
                if not (a[i] <= x[i] < b[i]):
                    inside = False
                    break
            if inside != (code == 0):
                return 0.0
        elif code == 1:
            s = 0.0
            for i in range(d):
                s += a[i] * x[i]
            if s < b[0]:
                return 0.0
        elif code == 2:
            s = 0.0
            for i in range(d):
                s += a[i] * x[i]
            if not (b[0] <= s <= b[1]):
                return 0.0
        else:
            inside = c_dist(pk, a, x) <= b[0]
            if inside != (code == 3):
                return 0.0
    log_f = 0.0
    for m in range(pk.n_tilts):
        row = pk.tilts + m * (d + 1)
        dd = c_dist(pk, row, x)
        if dd < row[d]:
            p = c_phi(pk, dd)
            if isinf(p):
                return 0.0
            log_f -= p
    return exp(log_f)


cdef int c_poisson(Stream* st, double mu, int* out) noexcept nogil:
    cdef double limit, p
    cdef int k = 0
    if mu <= 0.0:
        out[0] = 0
        return 0
    if mu > 700.0:
        return 2
    limit = exp(-mu)
    p = 1.0
    while True:
        p *= u01(st)
        if p <= limit:
            out[0] = k
            return 0
        k += 1


cdef double c_pair_energy(const CPack* pk, const double* pts, int n) noexcept nogil:
    cdef double total = 0.0
    cdef int i, j
    for i in range(n):
        for j in range(i + 1, n):
            total += c_phi(pk, c_dist(pk, pts + i * pk.dim, pts + j * pk.dim))
            if isinf(total):
                return INFINITY
    return total


cdef double c_cross(const CPack* pk, const double* ys, int ny,
                    const double* xs, int nx) noexcept nogil:
    cdef double total = 0.0
    cdef int i, j
    for i in range(ny):
        for j in range(nx):
            total += c_phi(pk, c_dist(pk, ys + i * pk.dim, xs + j * pk.dim))
            if isinf(total):
                return INFINITY
    return total


# status codes: 0 ok, 1 rejection guard, 2 poisson mean too large, 3 alloc
cdef int c_block_update(const CPack* pk, double** buf_io, int* n_io, int* cap_io,
                        double L, Stream* st, uint64_t max_rejects,
                        double** scratch_io, int* scratch_cap,
                        double* diag_mu) noexcept nogil:
    cdef int d = pk.dim
    cdef double y[16]
    cdef double starts[16]
    cdef double lens[16]
    cdef double x[16]
    cdef double* cur = buf_io[0]
    cdef double* nxt = scratch_io[0]
    cdef int n = n_io[0]
    cdef double u, side, vol, mu, h, prob
    cdef double* tmp
    cdef int i, j, k, nk, np_, need, status
    cdef uint64_t attempt

    for i in range(d):
        u = u01(st)
        if pk.geom_kind == 1:
            y[i] = u * pk.hi[i]
        else:
            y[i] = pk.lo[i] + u * (pk.hi[i] - pk.lo[i])

    # survivors (points outside the update ball), preserving order
    if scratch_cap[0] < n:
        free(nxt)
        scratch_cap[0] = 2 * n + 64
        nxt = <double*>malloc(scratch_cap[0] * d * sizeof(double))
        scratch_io[0] = nxt
        if nxt == NULL:
            return 3
    nk = 0
    for i in range(n):
        if c_dist(pk, y, cur + i * d) > L:
            for j in range(d):
                nxt[nk * d + j] = cur[i * d + j]
            nk += 1

    vol = 1.0
    for i in range(d):
        if pk.geom_kind == 1:
            side = pk.hi[i]
            if 2.0 * L >= side:
                starts[i] = 0.0
                lens[i] = side
            else:
                starts[i] = fmod(y[i] - L, side)
                if starts[i] < 0.0:
                    starts[i] += side
                lens[i] = 2.0 * L
        else:
            starts[i] = pk.lo[i] if pk.lo[i] > y[i] - L else y[i] - L
            lens[i] = (pk.hi[i] if pk.hi[i] < y[i] + L else y[i] + L) - starts[i]
        vol *= lens[i]
    mu = pk.act_bound * vol
    diag_mu[0] = mu

    for attempt in range(max_rejects):
        status = c_poisson(st, mu, &k)
        if status != 0:
            return status
        if scratch_cap[0] < nk + k:
            need = 2 * (nk + k) + 64
            tmp = <double*>malloc(need * d * sizeof(double))
            if tmp == NULL:
                return 3
            for i in range(nk * d):
                tmp[i] = nxt[i]
            free(nxt)
            nxt = tmp
            scratch_io[0] = nxt
            scratch_cap[0] = need
        np_ = 0
        for i in range(k):
            for j in range(d):
                u = u01(st)
                x[j] = starts[j] + u * lens[j]
                if pk.geom_kind == 1:
                    side = pk.hi[j]
                    if x[j] >= side:
                        x[j] -= side
            u = u01(st)
            if c_dist(pk, y, x) <= L and u < c_rel_activity(pk, x):
                for j in range(d):
                    nxt[(nk + np_) * d + j] = x[j]
                np_ += 1
        h = c_pair_energy(pk, nxt + nk * d, np_)
        if not isinf(h):
            h += c_cross(pk, nxt + nk * d, np_, nxt, nk)
        u = u01(st)
        prob = 0.0 if isinf(h) else exp(-h)
        if u < prob:
            # commit: swap buffers
            buf_io[0] = nxt
            scratch_io[0] = cur
            i = cap_io[0]
            cap_io[0] = scratch_cap[0]
            scratch_cap[0] = i
            n_io[0] = nk + np_
            return 0
    return 1


cdef int fill_pack(CPack* pk, int dim, int geom_kind,
                   double[::1] lo, double[::1] hi,
                   int pot_kind, double pot_r, double pot_a,
                   double[::1] tab_r, double[::1] tab_v,
                   double act_bound, double[:, ::1] masks,
                   double[:, ::1] tilts) except -1:
    if dim < 1 or dim > MAXDIM:
        raise ValueError(f"dim must be in [1, {MAXDIM}]")
    pk.dim = dim
    pk.geom_kind = geom_kind
    pk.pot_kind = pot_kind
    pk.pot_r = pot_r
    pk.pot_a = pot_a
    pk.act_bound = act_bound
    pk.lo = &lo[0]
    pk.hi = &hi[0]
    pk.n_tab = tab_r.shape[0]
    pk.tab_r = &tab_r[0] if pk.n_tab else NULL
    pk.tab_v = &tab_v[0] if pk.n_tab else NULL
    pk.n_masks = masks.shape[0]
    pk.mrow = masks.shape[1]
    pk.masks = &masks[0, 0] if pk.n_masks else NULL
    pk.n_tilts = tilts.shape[0]
    pk.tilts = &tilts[0, 0] if pk.n_tilts else NULL
    return 0


def chain_run(int dim, int geom_kind, double[::1] lo, double[::1] hi,
              int pot_kind, double pot_r, double pot_a,
              double[::1] tab_r, double[::1] tab_v,
              double act_bound, double[:, ::1] masks, double[:, ::1] tilts,
              double[:, ::1] x0, double L,
              uint64_t step0, uint64_t nsteps,
              uint64_t seed, uint64_t chain, uint64_t pid,
              uint64_t max_rejects):
    cdef CPack pk
    fill_pack(&pk, dim, geom_kind, lo, hi, pot_kind, pot_r, pot_a,
              tab_r, tab_v, act_bound, masks, tilts)
    cdef int n = x0.shape[0]
    cdef int cap = 2 * n + 64
    cdef int scap = cap
    cdef double* buf = <double*>malloc(cap * dim * sizeof(double))
    cdef double* scratch = <double*>malloc(scap * dim * sizeof(double))
    if buf == NULL or scratch == NULL:
        free(buf)
        free(scratch)
        raise MemoryError()
    cdef int i, j, status = 0
    for i in range(n):
        for j in range(dim):
            buf[i * dim + j] = x0[i, j]
    cdef Stream st
    cdef uint64_t s
    cdef double diag_mu = 0.0
    with nogil:
        for s in range(step0, step0 + nsteps):
            stream_init(&st, seed, pid, chain, s)
            status = c_block_update(&pk, &buf, &n, &cap, L, &st, max_rejects,
                                    &scratch, &scap, &diag_mu)
            if status != 0:
                break
    if status != 0:
        free(buf)
        free(scratch)
        if status == 1:
            raise RuntimeError(
                f"block update rejected {max_rejects} proposals; "
                f"mean proposal size {diag_mu:.3g}")
        if status == 2:
            raise ValueError(f"proposal mean {diag_mu:.3g} too large for exact Poisson sampling")
        raise MemoryError()
    out = np.empty((n, dim), dtype=float)
    cdef double[:, ::1] view = out
    for i in range(n):
        for j in range(dim):
            view[i, j] = buf[i * dim + j]
    free(buf)
    free(scratch)
    return out


def total_energy(int dim, int geom_kind, double[::1] lo, double[::1] hi,
                 int pot_kind, double pot_r, double pot_a,
                 double[::1] tab_r, double[::1] tab_v,
                 double act_bound, double[:, ::1] masks, double[:, ::1] tilts,
                 double[:, ::1] pts):
    cdef CPack pk
    fill_pack(&pk, dim, geom_kind, lo, hi, pot_kind, pot_r, pot_a,
              tab_r, tab_v, act_bound, masks, tilts)
    if pts.shape[0] == 0:
        return 0.0
    cdef double out
    with nogil:
        out = c_pair_energy(&pk, &pts[0, 0], pts.shape[0])
    return out


def cross_energy(int dim, int geom_kind, double[::1] lo, double[::1] hi,
                 int pot_kind, double pot_r, double pot_a,
                 double[::1] tab_r, double[::1] tab_v,
                 double act_bound, double[:, ::1] masks, double[:, ::1] tilts,
                 double[:, ::1] a, double[:, ::1] b):
    cdef CPack pk
    fill_pack(&pk, dim, geom_kind, lo, hi, pot_kind, pot_r, pot_a,
              tab_r, tab_v, act_bound, masks, tilts)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return 0.0
    cdef double out
    with nogil:
        out = c_cross(&pk, &a[0, 0], a.shape[0], &b[0, 0], b.shape[0])
    return out


def added_energy_many(int dim, int geom_kind, double[::1] lo, double[::1] hi,
                      int pot_kind, double pot_r, double pot_a,
                      double[::1] tab_r, double[::1] tab_v,
                      double act_bound, double[:, ::1] masks, double[:, ::1] tilts,
                      double[:, ::1] pts, double[:, ::1] vs):
    cdef CPack pk
    fill_pack(&pk, dim, geom_kind, lo, hi, pot_kind, pot_r, pot_a,
              tab_r, tab_v, act_bound, masks, tilts)
    out = np.zeros(vs.shape[0], dtype=float)
    cdef double[::1] view = out
    cdef int i, n = pts.shape[0], m = vs.shape[0]
    if n == 0 or m == 0:
        return out
    with nogil:
        for i in range(m):
            view[i] = c_cross(&pk, &vs[i, 0], 1, &pts[0, 0], n)
    return out


def rel_activity_many(int dim, int geom_kind, double[::1] lo, double[::1] hi,
                      int pot_kind, double pot_r, double pot_a,
                      double[::1] tab_r, double[::1] tab_v,
                      double act_bound, double[:, ::1] masks, double[:, ::1] tilts,
                      double[:, ::1] xs):
    cdef CPack pk
    fill_pack(&pk, dim, geom_kind, lo, hi, pot_kind, pot_r, pot_a,
              tab_r, tab_v, act_bound, masks, tilts)
    out = np.zeros(xs.shape[0], dtype=float)
    cdef double[::1] view = out
    cdef int i
    with nogil:
        for i in range(xs.shape[0]):
            view[i] = c_rel_activity(&pk, &xs[i, 0])
    return out


def min_pair_distance(int dim, int geom_kind, double[::1] lo, double[::1] hi,
                      int pot_kind, double pot_r, double pot_a,
                      double[::1] tab_r, double[::1] tab_v,
                      double act_bound, double[:, ::1] masks, double[:, ::1] tilts,
                      double[:, ::1] pts):
    cdef CPack pk
    fill_pack(&pk, dim, geom_kind, lo, hi, pot_kind, pot_r, pot_a,
              tab_r, tab_v, act_bound, masks, tilts)
    cdef double best = INFINITY
    cdef double d_
    cdef int i, j, n = pts.shape[0]
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d_ = c_dist(&pk, &pts[i, 0], &pts[j, 0])
                if d_ < best:
                    best = d_
    return best
