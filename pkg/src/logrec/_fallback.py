"""Pure-Python kernels.

These are the reference semantics for the compiled ``_native`` module:
both must return identical results (values, witnesses, node counts,
traces) for identical inputs.  Only wall-clock fields may differ.
"""

from time import perf_counter

UNK = -1
FALSE = 0
TRUE = 1

_MASK = (1 << 64) - 1
_CHECK_EVERY = 64


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & _MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, k):
        return self.next() % k


class Engine:
    """Bounds/boolean propagation over the reified precedence model."""

    def __init__(self, n, dep_src, dep_dst, prec_src, prec_dst):
        self.n = n
        md = len(dep_src)
        self.src = list(dep_src) + list(prec_src)
        self.dst = list(dep_dst) + list(prec_dst)
        self.is_prec = [False] * md + [True] * len(prec_src)
        self.m = len(self.src)
        # precedences whose reverse pair also exists: the two ends exclude each other
        pairs = set(zip(prec_src, prec_dst))
        self.mutex = [False] * md + [(j, i) in pairs for i, j in zip(prec_src, prec_dst)]
        self.inc = [[] for _ in range(n)]
        for c in range(self.m):
            s, d = self.src[c], self.dst[c]
            self.inc[s].append(c)
            if d != s:
                self.inc[d].append(c)
        self.b = [UNK] * n
        self.lb = [1] * n
        self.ub = [n] * n
        self.trail = []
        self.n_true = 0
        self.n_unk = n
        self.queue = []
        self.head = 0
        self.inq = [False] * self.m

    def _touch(self, k):
        inq = self.inq
        for c in self.inc[k]:
            if not inq[c]:
                inq[c] = True
                self.queue.append(c)

    def set_bool(self, k, v):
        cur = self.b[k]
        if cur == v:
            return True
        if cur != UNK:
            return False
        self.trail.append((0, k, UNK))
        self.b[k] = v
        self.n_unk -= 1
        if v == TRUE:
            self.n_true += 1
        self._touch(k)
        return True

    def set_lb(self, k, v):
        if self.b[k] == FALSE or v <= self.lb[k]:
            return True
        if v > self.ub[k]:
            return self.set_bool(k, FALSE)
        self.trail.append((1, k, self.lb[k]))
        self.lb[k] = v
        self._touch(k)
        return True

    def set_ub(self, k, v):
        if self.b[k] == FALSE or v >= self.ub[k]:
            return True
        if v < self.lb[k]:
            return self.set_bool(k, FALSE)
        self.trail.append((2, k, self.ub[k]))
        self.ub[k] = v
        self._touch(k)
        return True

    def revise(self, c):
        i, j = self.src[c], self.dst[c]
        b = self.b
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
        if self.mutex[c]:
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

    def enqueue_all(self):
        for c in range(self.m):
            if not self.inq[c]:
                self.inq[c] = True
                self.queue.append(c)

    def propagate(self):
        q = self.queue
        inq = self.inq
        while self.head < len(q):
            c = q[self.head]
            self.head += 1
            inq[c] = False
            if not self.revise(c):
                for c2 in q[self.head:]:
                    inq[c2] = False
                q.clear()
                self.head = 0
                return False
        q.clear()
        self.head = 0
        return True

    def assign(self, k, v):
        return self.set_bool(k, v) and self.propagate()

    def undo(self, mark):
        trail = self.trail
        while len(trail) > mark:
            kind, k, old = trail.pop()
            if kind == 0:
                if self.b[k] == TRUE:
                    self.n_true -= 1
                self.n_unk += 1
                self.b[k] = old
            elif kind == 1:
                self.lb[k] = old
            else:
                self.ub[k] = old


def bb_search(n, dep_src, dep_dst, prec_src, prec_dst, order,
              stop_at_first, node_limit, time_limit, cancel):
    """Depth-first branch-and-bound over acceptance booleans.

    Returns ``(best, incumbents, nodes, stop_reason, root_bound)`` where
    ``best`` is a 0/1 list, ``incumbents`` holds ``(value, seconds, nodes)``
    per improvement and ``stop_reason`` is one of ``exhausted``, ``first``,
    ``node_limit``, ``time_limit``, ``cancelled``.
    """
    t0 = perf_counter()
    eng = Engine(n, dep_src, dep_dst, prec_src, prec_dst)
    eng.enqueue_all()
    eng.propagate()
    b = eng.b
    # each unordered mutually exclusive pair, used for the matching bound
    mutex_pairs = sorted({(min(i, j), max(i, j)) for i, j in zip(prec_src, prec_dst)
                          if i != j and (j, i) in set(zip(prec_src, prec_dst))})
    stamp = [0] * n

    def bound(tick):
        # at most one end of each matched pair can be accepted
        ub = eng.n_true + eng.n_unk
        for i, j in mutex_pairs:
            if b[i] == UNK and b[j] == UNK and stamp[i] != tick and stamp[j] != tick:
                stamp[i] = stamp[j] = tick
                ub -= 1
        return ub

    root_bound = bound(-1)
    best = -1
    best_acc = None
    incumbents = []
    nodes = 0
    ticks = 0
    stack = []
    descend = True
    reason = "exhausted"
    while True:
        if descend:
            if node_limit >= 0 and nodes >= node_limit:
                reason = "node_limit"
                break
            ticks += 1
            if ticks % _CHECK_EVERY == 0:
                if time_limit >= 0 and perf_counter() - t0 >= time_limit:
                    reason = "time_limit"
                    break
                if cancel is not None and cancel():
                    reason = "cancelled"
                    break
            if eng.n_true + eng.n_unk <= best or (mutex_pairs and bound(ticks) <= best):
                descend = False
                continue
            v = -1
            for k in order:
                if b[k] == UNK:
                    v = k
                    break
            if v < 0:
                best = eng.n_true
                best_acc = [1 if x == TRUE else 0 for x in b]
                incumbents.append((best, perf_counter() - t0, nodes))
                if stop_at_first:
                    reason = "first"
                    break
                descend = False
                continue
            stack.append([v, len(eng.trail), 1])
            nodes += 1
            if not eng.assign(v, TRUE):
                descend = False
            continue
        if not stack:
            break
        frame = stack[-1]
        eng.undo(frame[1])
        if frame[2] == 1 and eng.n_true + eng.n_unk - 1 > best:
            if node_limit >= 0 and nodes >= node_limit:
                reason = "node_limit"
                break
            frame[2] = 2
            nodes += 1
            if eng.assign(frame[0], FALSE):
                descend = True
        else:
            stack.pop()
    return best_acc, incumbents, nodes, reason, root_bound


class _LsCore:
    def __init__(self, n, src, dst, pos):
        self.n = n
        self.src = list(src)
        self.dst = list(dst)
        self.m = len(self.src)
        self.inc = [[] for _ in range(n)]
        for c in range(self.m):
            s, d = self.src[c], self.dst[c]
            self.inc[s].append(c)
            if d != s:
                self.inc[d].append(c)
        self.pos = list(pos)
        self.err = [self._err(c) for c in range(self.m)]
        self.aerr = [0] * n
        self.evaluation = 0
        for c in range(self.m):
            e = self.err[c]
            self.evaluation += e
            self.aerr[self.src[c]] += e
            if self.dst[c] != self.src[c]:
                self.aerr[self.dst[c]] += e
        self.nbad = sum(1 for a in self.aerr if a > 0)

    def _err(self, c):
        ps, pd = self.pos[self.src[c]], self.pos[self.dst[c]]
        return 0 if ps < pd else 1 + ps - pd

    def delta(self, i, q):
        old = self.pos[i]
        self.pos[i] = q
        d = 0
        for c in self.inc[i]:
            d += self._err(c) - self.err[c]
        self.pos[i] = old
        return d

    def _bump(self, k, d):
        before = self.aerr[k]
        after = before + d
        self.aerr[k] = after
        if before == 0 and after > 0:
            self.nbad += 1
        elif before > 0 and after == 0:
            self.nbad -= 1

    def apply(self, i, q):
        self.pos[i] = q
        for c in self.inc[i]:
            ne = self._err(c)
            d = ne - self.err[c]
            if d:
                self.err[c] = ne
                self.evaluation += d
                s, t = self.src[c], self.dst[c]
                self._bump(s, d)
                if t != s:
                    self._bump(t, d)

    def best_move(self, i):
        """(delta, new_position) of the better +-1 move, decrement on ties."""
        p = self.pos[i]
        dm = self.delta(i, p - 1) if p > 1 else None
        dp = self.delta(i, p + 1) if p < self.n else None
        if dm is None and dp is None:
            return None, 0
        if dm is None or (dp is not None and dp < dm):
            return dp, p + 1
        return dm, p - 1

    def cost(self):
        n = self.n
        cnt = [0] * n
        for c in range(self.m):
            if self.err[c] > 0:
                s, t = self.src[c], self.dst[c]
                cnt[s] += 1
                if t != s:
                    cnt[t] += 1
        touched = [k for k in range(n) if cnt[k] > 0]
        removed = [False] * n
        survivors = n
        while True:
            best_k = -1
            best_c = 0
            for k in touched:
                if not removed[k] and cnt[k] > best_c:
                    best_c = cnt[k]
                    best_k = k
            if best_k < 0:
                return survivors
            removed[best_k] = True
            survivors -= 1
            for c in self.inc[best_k]:
                if self.err[c] > 0:
                    o = self.dst[c] if self.src[c] == best_k else self.src[c]
                    if o != best_k and not removed[o]:
                        cnt[o] -= 1


def ls_run(n, prec_src, prec_dst, init_pos, tabu, max_iterations, tabu_max,
           seed, time_limit, cancel):
    """Descent, optionally followed by the Tabu phase.

    Returns ``(best_pos, trace, iterations, sweeps, final_pos,
    final_evaluation, stop_reason)``; trace rows are
    ``(iteration, evaluation, value, cost, seconds)``.
    """
    t0 = perf_counter()
    st = _LsCore(n, prec_src, prec_dst, init_pos)
    rng = SplitMix64(seed)
    best_cost = st.cost()
    best_pos = list(st.pos)
    trace = [(0, st.evaluation, n - st.nbad, best_cost, perf_counter() - t0)]
    it = 0
    sweeps = 0
    reason = "local_optimum"

    def note():
        nonlocal best_cost, best_pos
        c = st.cost()
        if c > best_cost:
            best_cost = c
            best_pos = list(st.pos)
            trace.append((it, st.evaluation, n - st.nbad, c, perf_counter() - t0))

    def interrupted():
        if time_limit >= 0 and perf_counter() - t0 >= time_limit:
            return "time_limit"
        if cancel is not None and cancel():
            return "cancelled"
        return None

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
            if it % _CHECK_EVERY == 0:
                stopped = interrupted()
                if stopped:
                    break
            d, q = st.best_move(i)
            if d is not None and d < 0:
                st.apply(i, q)
                moved = True
                note()
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
        tabu_until = [0] * n
        while st.evaluation > 0:
            if it >= max_iterations:
                break
            it += 1
            if it % _CHECK_EVERY == 0:
                stopped = interrupted()
                if stopped:
                    reason = stopped
                    break
            pick = -1
            pick_d = 0
            pick_q = 0
            for i in range(n):
                d, q = st.best_move(i)
                if d is not None and d < 0:
                    if pick >= 0 and d >= pick_d:
                        continue
                    if tabu_until[i] > it:
                        old = st.pos[i]
                        st.apply(i, q)
                        c = st.cost()
                        st.apply(i, old)
                        if c <= best_cost:
                            continue
                    pick, pick_d, pick_q = i, d, q
                elif tabu_until[i] <= it:
                    tabu_until[i] = it + 1 + 1 + rng.below(tabu_max)
            if pick < 0:
                if n < 2:
                    break
                pick = rng.below(n)
                p = st.pos[pick]
                if p == 1:
                    pick_q = 2
                elif p == n:
                    pick_q = n - 1
                else:
                    pick_q = p - 1 if rng.below(2) == 0 else p + 1
            st.apply(pick, pick_q)
            note()
        if st.evaluation == 0:
            reason = "optimal"
    return best_pos, trace, it, sweeps, list(st.pos), st.evaluation, reason
