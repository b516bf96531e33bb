# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; semantics are defined by ``logrec._fallback``."""

from libc.stdlib cimport malloc, realloc, free
from libc.stdint cimport uint64_t, int64_t
from time import perf_counter

cdef enum:
    UNK = -1
    FALSE = 0
    TRUE = 1
    CHECK_EVERY = 64


cdef int* _ints(object seq, Py_ssize_t extra=0) except NULL:
    cdef Py_ssize_t k, m = len(seq)
    cdef int* out = <int*>malloc((m + extra + 1) * sizeof(int))
    if out == NULL:
        raise MemoryError()
    for k in range(m):
        out[k] = seq[k]
    return out


cdef void _build_incidence(int n, int m, int* src, int* dst, int** start_out, int** lst_out):
    cdef int* start = <int*>malloc((n + 1) * sizeof(int))
    cdef int* fill = <int*>malloc((n + 1) * sizeof(int))
    cdef int* lst = <int*>malloc((2 * m + 1) * sizeof(int))
    cdef int c, k
    for k in range(n + 1):
        start[k] = 0
    for c in range(m):
        start[src[c] + 1] += 1
        if dst[c] != src[c]:
            start[dst[c] + 1] += 1
    for k in range(n):
        start[k + 1] += start[k]
    for k in range(n):
        fill[k] = start[k]
    for c in range(m):
        lst[fill[src[c]]] = c
        fill[src[c]] += 1
        if dst[c] != src[c]:
            lst[fill[dst[c]]] = c
            fill[dst[c]] += 1
    free(fill)
    start_out[0] = start
    lst_out[0] = lst


cdef class _Engine:
    cdef int n, m, n_true, n_unk
    cdef int* src
    cdef int* dst
    cdef char* is_prec
    cdef int* inc_start
    cdef int* inc
    cdef signed char* b
    cdef int* lb
    cdef int* ub
    cdef int* tr_kind
    cdef int* tr_k
    cdef int* tr_old
    cdef Py_ssize_t tr_len, tr_cap
    cdef int* queue
    cdef int q_head, q_tail
    cdef char* inq

    def __cinit__(self, int n, dep_src, dep_dst, prec_src, prec_dst):
        cdef int md = len(dep_src)
        cdef int c, k
        self.n = n
        self.m = md + len(prec_src)
        self.src = _ints(list(dep_src) + list(prec_src))
        self.dst = _ints(list(dep_dst) + list(prec_dst))
        # 0 = dependency, 1 = precedence, 2 = precedence whose reverse pair also exists
        self.is_prec = <char*>malloc(self.m + 1)
        pairs = set(zip(prec_src, prec_dst))
        for c in range(self.m):
            self.is_prec[c] = 1 if c >= md else 0
            if c >= md and (self.dst[c], self.src[c]) in pairs:
                self.is_prec[c] = 2
        _build_incidence(n, self.m, self.src, self.dst, &self.inc_start, &self.inc)
        self.b = <signed char*>malloc(n + 1)
        self.lb = <int*>malloc((n + 1) * sizeof(int))
        self.ub = <int*>malloc((n + 1) * sizeof(int))
        for k in range(n):
            self.b[k] = UNK
            self.lb[k] = 1
            self.ub[k] = n
        self.n_true = 0
        self.n_unk = n
        self.tr_cap = 1024
        self.tr_len = 0
        self.tr_kind = <int*>malloc(self.tr_cap * sizeof(int))
        self.tr_k = <int*>malloc(self.tr_cap * sizeof(int))
        self.tr_old = <int*>malloc(self.tr_cap * sizeof(int))
        # each constraint is queued at most once, so a ring of size m+1 suffices
        self.queue = <int*>malloc((self.m + 1) * sizeof(int))
        self.q_head = 0
        self.q_tail = 0
        self.inq = <char*>malloc(self.m + 1)
        for c in range(self.m):
            self.inq[c] = 0

    def __dealloc__(self):
        free(self.src); free(self.dst); free(self.is_prec)
        free(self.inc_start); free(self.inc)
        free(self.b); free(self.lb); free(self.ub)
        free(self.tr_kind); free(self.tr_k); free(self.tr_old)
        free(self.queue); free(self.inq)

    cdef inline void _push(self, int kind, int k, int old) noexcept:
        if self.tr_len == self.tr_cap:
            self.tr_cap *= 2
            self.tr_kind = <int*>realloc(self.tr_kind, self.tr_cap * sizeof(int))
            self.tr_k = <int*>realloc(self.tr_k, self.tr_cap * sizeof(int))
            self.tr_old = <int*>realloc(self.tr_old, self.tr_cap * sizeof(int))
        self.tr_kind[self.tr_len] = kind
        self.tr_k[self.tr_len] = k
        self.tr_old[self.tr_len] = old
        self.tr_len += 1

    cdef inline void _touch(self, int k) noexcept:
        cdef int e, c
        for e in range(self.inc_start[k], self.inc_start[k + 1]):
            c = self.inc[e]
            if not self.inq[c]:
                self.inq[c] = 1
                self.queue[self.q_tail] = c
                self.q_tail += 1
                if self.q_tail > self.m:
                    self.q_tail = 0

    cdef inline bint set_bool(self, int k, int v) noexcept:
        cdef int cur = self.b[k]
        if cur == v:
            return True
        if cur != UNK:
            return False
        self._push(0, k, UNK)
        self.b[k] = v
        self.n_unk -= 1
        if v == TRUE:
            self.n_true += 1
        self._touch(k)
        return True

    cdef inline bint set_lb(self, int k, int v) noexcept:
        if self.b[k] == FALSE or v <= self.lb[k]:
            return True
        if v > self.ub[k]:
            return self.set_bool(k, FALSE)
        self._push(1, k, self.lb[k])
        self.lb[k] = v
        self._touch(k)
        return True

    cdef inline bint set_ub(self, int k, int v) noexcept:
        if self.b[k] == FALSE or v >= self.ub[k]:
            return True
        if v < self.lb[k]:
            return self.set_bool(k, FALSE)
        self._push(2, k, self.ub[k])
        self.ub[k] = v
        self._touch(k)
        return True

    cdef bint revise(self, int c) noexcept:
        cdef int i = self.src[c]
        cdef int j = self.dst[c]
        cdef signed char* b = self.b
        if not self.is_prec[c]:
            if b[i] == TRUE:
                return self.set_bool(j, TRUE)
            if b[j] == FALSE:
                return self.set_bool(i, FALSE)
            return True
        if i == j:
            return self.set_bool(i, FALSE)
        if b[i] == FALSE or b[j] == FALSE:
            return True
        if self.is_prec[c] == 2:
            if b[i] == TRUE:
                return self.set_bool(j, FALSE)
            if b[j] == TRUE:
                return self.set_bool(i, FALSE)
            return True
        if b[i] == TRUE and not self.set_lb(j, self.lb[i] + 1):
            return False
        if b[j] == TRUE and not self.set_ub(i, self.ub[j] - 1):
            return False
        if b[i] != FALSE and b[j] != FALSE and self.lb[i] >= self.ub[j]:
            if b[i] == TRUE:
                return self.set_bool(j, FALSE)
            if b[j] == TRUE:
                return self.set_bool(i, FALSE)
        return True

    cdef void enqueue_all(self) noexcept:
        cdef int c
        for c in range(self.m):
            if not self.inq[c]:
                self.inq[c] = 1
                self.queue[self.q_tail] = c
                self.q_tail += 1
                if self.q_tail > self.m:
                    self.q_tail = 0

    cdef bint propagate(self) noexcept:
        cdef int c
        while self.q_head != self.q_tail:
            c = self.queue[self.q_head]
            self.q_head += 1
            if self.q_head > self.m:
                self.q_head = 0
            self.inq[c] = 0
            if not self.revise(c):
                while self.q_head != self.q_tail:
                    self.inq[self.queue[self.q_head]] = 0
                    self.q_head += 1
                    if self.q_head > self.m:
                        self.q_head = 0
                return False
        return True

    cdef inline bint assign(self, int k, int v) noexcept:
        return self.set_bool(k, v) and self.propagate()

    cdef void undo(self, Py_ssize_t mark) noexcept:
        cdef int kind, k
        while self.tr_len > mark:
            self.tr_len -= 1
            kind = self.tr_kind[self.tr_len]
            k = self.tr_k[self.tr_len]
            if kind == 0:
                if self.b[k] == TRUE:
                    self.n_true -= 1
                self.n_unk += 1
                self.b[k] = self.tr_old[self.tr_len]
            elif kind == 1:
                self.lb[k] = self.tr_old[self.tr_len]
            else:
                self.ub[k] = self.tr_old[self.tr_len]


cdef int _bound(_Engine eng, int n_mutex, int* mx_a, int* mx_b, long long* stamp, long long tick) noexcept:
    # at most one end of each matched pair can be accepted
    cdef int ub = eng.n_true + eng.n_unk
    cdef int e, i, j
    for e in range(n_mutex):
        i = mx_a[e]
        j = mx_b[e]
        if eng.b[i] == UNK and eng.b[j] == UNK and stamp[i] != tick and stamp[j] != tick:
            stamp[i] = tick
            stamp[j] = tick
            ub -= 1
    return ub


def bb_search(int n, dep_src, dep_dst, prec_src, prec_dst, order,
              bint stop_at_first, long long node_limit, double time_limit, cancel):
    cdef int sp = 0
    cdef int best = -1
    cdef long long nodes = 0
    cdef long long ticks = 0
    cdef bint descend = True
    cdef int v, k, idx, n_mutex, root_bound
    cdef _Engine eng
    cdef int* mx_a
    cdef int* mx_b
    cdef long long* stamp
    cdef int* ord_
    cdef int* st_var
    cdef Py_ssize_t* st_mark
    cdef char* st_stage
    t0 = perf_counter()
    eng = _Engine(n, dep_src, dep_dst, prec_src, prec_dst)
    eng.enqueue_all()
    eng.propagate()
    pairs = set(zip(prec_src, prec_dst))
    mutex = sorted({(min(i, j), max(i, j)) for i, j in pairs if i != j and (j, i) in pairs})
    n_mutex = len(mutex)
    mx_a = _ints([i for i, _ in mutex])
    mx_b = _ints([j for _, j in mutex])
    stamp = <long long*>malloc((n + 1) * sizeof(long long))
    for k in range(n):
        stamp[k] = 0
    root_bound = _bound(eng, n_mutex, mx_a, mx_b, stamp, -1)
    ord_ = _ints(order)
    st_var = <int*>malloc((n + 1) * sizeof(int))
    st_mark = <Py_ssize_t*>malloc((n + 1) * sizeof(Py_ssize_t))
    st_stage = <char*>malloc(n + 1)
    best_acc = None
    incumbents = []
    reason = "exhausted"
    try:
        while True:
            if descend:
                if node_limit >= 0 and nodes >= node_limit:
                    reason = "node_limit"
                    break
                ticks += 1
                if ticks % CHECK_EVERY == 0:
                    if time_limit >= 0 and perf_counter() - t0 >= time_limit:
                        reason = "time_limit"
                        break
                    if cancel is not None and cancel():
                        reason = "cancelled"
                        break
                if eng.n_true + eng.n_unk <= best or (
                        n_mutex > 0 and _bound(eng, n_mutex, mx_a, mx_b, stamp, ticks) <= best):
                    descend = False
                    continue
                v = -1
                for idx in range(n):
                    k = ord_[idx]
                    if eng.b[k] == UNK:
                        v = k
                        break
                if v < 0:
                    best = eng.n_true
                    best_acc = [1 if eng.b[k] == TRUE else 0 for k in range(n)]
                    incumbents.append((best, perf_counter() - t0, nodes))
                    if stop_at_first:
                        reason = "first"
                        break
                    descend = False
                    continue
                st_var[sp] = v
                st_mark[sp] = eng.tr_len
                st_stage[sp] = 1
                sp += 1
                nodes += 1
                if not eng.assign(v, TRUE):
                    descend = False
                continue
            if sp == 0:
                break
            eng.undo(st_mark[sp - 1])
            if st_stage[sp - 1] == 1 and eng.n_true + eng.n_unk - 1 > best:
                if node_limit >= 0 and nodes >= node_limit:
                    reason = "node_limit"
                    break
                st_stage[sp - 1] = 2
                nodes += 1
                if eng.assign(st_var[sp - 1], FALSE):
                    descend = True
            else:
                sp -= 1
    finally:
        free(ord_); free(st_var); free(st_mark); free(st_stage)
        free(mx_a); free(mx_b); free(stamp)
    return best_acc, incumbents, nodes, reason, root_bound


cdef inline uint64_t _sm_next(uint64_t* state) noexcept:
    cdef uint64_t z
    state[0] += 0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef class _Ls:
    cdef int n, m, nbad
    cdef long long evaluation
    cdef int* src
    cdef int* dst
    cdef int* inc_start
    cdef int* inc
    cdef int* pos
    cdef long long* err
    cdef long long* aerr
    cdef int* cnt
    cdef int* touched
    cdef char* removed

    def __cinit__(self, int n, src, dst, pos):
        cdef int c, k
        cdef long long e
        self.n = n
        self.m = len(src)
        self.src = _ints(src)
        self.dst = _ints(dst)
        _build_incidence(n, self.m, self.src, self.dst, &self.inc_start, &self.inc)
        self.pos = _ints(pos)
        self.err = <long long*>malloc((self.m + 1) * sizeof(long long))
        self.aerr = <long long*>malloc((n + 1) * sizeof(long long))
        self.cnt = <int*>malloc((n + 1) * sizeof(int))
        self.touched = <int*>malloc((n + 1) * sizeof(int))
        self.removed = <char*>malloc(n + 1)
        for k in range(n):
            self.aerr[k] = 0
        self.evaluation = 0
        for c in range(self.m):
            e = self._err(c)
            self.err[c] = e
            self.evaluation += e
            self.aerr[self.src[c]] += e
            if self.dst[c] != self.src[c]:
                self.aerr[self.dst[c]] += e
        self.nbad = 0
        for k in range(n):
            if self.aerr[k] > 0:
                self.nbad += 1

    def __dealloc__(self):
        free(self.src); free(self.dst); free(self.inc_start); free(self.inc)
        free(self.pos); free(self.err); free(self.aerr)
        free(self.cnt); free(self.touched); free(self.removed)

    cdef inline long long _err(self, int c) noexcept:
        cdef int ps = self.pos[self.src[c]]
        cdef int pd = self.pos[self.dst[c]]
        if ps < pd:
            return 0
        return 1 + ps - pd

    cdef long long delta(self, int i, int q) noexcept:
        cdef int old = self.pos[i]
        cdef long long d = 0
        cdef int e, c
        self.pos[i] = q
        for e in range(self.inc_start[i], self.inc_start[i + 1]):
            c = self.inc[e]
            d += self._err(c) - self.err[c]
        self.pos[i] = old
        return d

    cdef inline void _bump(self, int k, long long d) noexcept:
        cdef long long before = self.aerr[k]
        cdef long long after = before + d
        self.aerr[k] = after
        if before == 0 and after > 0:
            self.nbad += 1
        elif before > 0 and after == 0:
            self.nbad -= 1

    cdef void apply(self, int i, int q) noexcept:
        cdef int e, c, s, t
        cdef long long ne, d
        self.pos[i] = q
        for e in range(self.inc_start[i], self.inc_start[i + 1]):
            c = self.inc[e]
            ne = self._err(c)
            d = ne - self.err[c]
            if d != 0:
                self.err[c] = ne
                self.evaluation += d
                s = self.src[c]
                t = self.dst[c]
                self._bump(s, d)
                if t != s:
                    self._bump(t, d)

    cdef bint best_move(self, int i, long long* d_out, int* q_out) noexcept:
        cdef int p = self.pos[i]
        cdef bint has_m = p > 1
        cdef bint has_p = p < self.n
        cdef long long dm = 0, dp = 0
        if has_m:
            dm = self.delta(i, p - 1)
        if has_p:
            dp = self.delta(i, p + 1)
        if not has_m and not has_p:
            return False
        if not has_m or (has_p and dp < dm):
            d_out[0] = dp
            q_out[0] = p + 1
        else:
            d_out[0] = dm
            q_out[0] = p - 1
        return True

    cdef int cost(self) noexcept:
        cdef int n = self.n
        cdef int c, s, t, k, idx, e, o
        cdef int ntouched = 0, survivors = n, best_k, best_c
        for k in range(n):
            self.cnt[k] = 0
            self.removed[k] = 0
        for c in range(self.m):
            if self.err[c] > 0:
                s = self.src[c]
                t = self.dst[c]
                self.cnt[s] += 1
                if t != s:
                    self.cnt[t] += 1
        for k in range(n):
            if self.cnt[k] > 0:
                self.touched[ntouched] = k
                ntouched += 1
        while True:
            best_k = -1
            best_c = 0
            for idx in range(ntouched):
                k = self.touched[idx]
                if not self.removed[k] and self.cnt[k] > best_c:
                    best_c = self.cnt[k]
                    best_k = k
            if best_k < 0:
                return survivors
            self.removed[best_k] = 1
            survivors -= 1
            for e in range(self.inc_start[best_k], self.inc_start[best_k + 1]):
                c = self.inc[e]
                if self.err[c] > 0:
                    o = self.dst[c] if self.src[c] == best_k else self.src[c]
                    if o != best_k and not self.removed[o]:
                        self.cnt[o] -= 1

    cdef list positions(self):
        return [self.pos[k] for k in range(self.n)]


cdef object _interrupted(object t0, double time_limit, object cancel):
    if time_limit >= 0 and perf_counter() - t0 >= time_limit:
        return "time_limit"
    if cancel is not None and cancel():
        return "cancelled"
    return None


def ls_run(int n, prec_src, prec_dst, init_pos, bint tabu, long long max_iterations,
           int tabu_max, seed, double time_limit, cancel):
    t0 = perf_counter()
    cdef _Ls st = _Ls(n, prec_src, prec_dst, init_pos)
    cdef uint64_t rng = (<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    cdef int best_cost = st.cost()
    cdef int c, i, q, old, pick, pick_q, p
    cdef long long d, pick_d
    cdef long long it = 0, sweeps = 0
    cdef bint moved
    cdef long long* tabu_until = NULL
    best_pos = st.positions()
    trace = [(0, st.evaluation, n - st.nbad, best_cost, perf_counter() - t0)]
    reason = "local_optimum"
    stopped = None

    while st.evaluation > 0:
        if not tabu and sweeps >= max_iterations:
            stopped = "iteration_limit"
            break
        moved = False
        for i in range(n):
            if tabu and it >= max_iterations:
                stopped = "iteration_limit"
                break
            it += 1
            if it % CHECK_EVERY == 0:
                stopped = _interrupted(t0, time_limit, cancel)
                if stopped:
                    break
            if st.best_move(i, &d, &q) and d < 0:
                st.apply(i, q)
                moved = True
                c = st.cost()
                if c > best_cost:
                    best_cost = c
                    best_pos = st.positions()
                    trace.append((it, st.evaluation, n - st.nbad, c, perf_counter() - t0))
        if moved:
            sweeps += 1
        if stopped or not moved:
            break
    if stopped:
        reason = stopped
    elif st.evaluation == 0:
        reason = "optimal"

    if tabu and not stopped and st.evaluation > 0:
        reason = "iteration_limit"
        tabu_until = <long long*>malloc((n + 1) * sizeof(long long))
        try:
            for i in range(n):
                tabu_until[i] = 0
            while st.evaluation > 0:
                if it >= max_iterations:
                    break
                it += 1
                if it % CHECK_EVERY == 0:
                    stopped = _interrupted(t0, time_limit, cancel)
                    if stopped:
                        reason = stopped
                        break
                pick = -1
                pick_d = 0
                pick_q = 0
                for i in range(n):
                    if st.best_move(i, &d, &q) and d < 0:
                        if pick >= 0 and d >= pick_d:
                            continue
                        if tabu_until[i] > it:
                            old = st.pos[i]
                            st.apply(i, q)
                            c = st.cost()
                            st.apply(i, old)
                            if c <= best_cost:
                                continue
                        pick = i
                        pick_d = d
                        pick_q = q
                    elif tabu_until[i] <= it:
                        tabu_until[i] = it + 1 + 1 + <long long>(_sm_next(&rng) % <uint64_t>tabu_max)
                if pick < 0:
                    if n < 2:
                        break
                    pick = <int>(_sm_next(&rng) % <uint64_t>n)
                    p = st.pos[pick]
                    if p == 1:
                        pick_q = 2
                    elif p == n:
                        pick_q = n - 1
                    elif _sm_next(&rng) % 2 == 0:
                        pick_q = p - 1
                    else:
                        pick_q = p + 1
                st.apply(pick, pick_q)
                c = st.cost()
                if c > best_cost:
                    best_cost = c
                    best_pos = st.positions()
                    trace.append((it, st.evaluation, n - st.nbad, c, perf_counter() - t0))
            if st.evaluation == 0:
                reason = "optimal"
        finally:
            free(tabu_until)
    return best_pos, trace, it, sweeps, st.positions(), st.evaluation, reason
