"""Exact piecewise-linear self-maps of [0,1] over the rationals.

A PLMap is a strictly increasing breakpoint sequence starting at 0 and
ending at 1 together with values in [0,1]; evaluation interpolates
linearly.  Maps are normalized on construction (consecutive collinear
segments merged) so equality is syntactic, and they are immutable, so
instances may be shared freely across threads and all operations here
are pure functions.

Composition, iteration, preimages, image windows, sup-distance, slope
statistics, the locally-eventually-onto index, and the iteration
modulus eta are all decided exactly; nothing in this module rounds.
"""

from __future__ import annotations

import hashlib
import json
from bisect import bisect_left, bisect_right, insort

from ._rat import ONE, ZERO, rat, rat_from_str, rat_to_str

DEFAULT_SEGMENT_CAP = 2_000_000

__all__ = [
    "PLMap",
    "IntervalSet",
    "DEFAULT_SEGMENT_CAP",
    "compose",
    "iterate",
    "preimage",
    "image_of_interval",
    "sup_dist",
    "slope_range",
    "leo_index",
    "eta_for_iterate",
    "identity_map",
    "tent_map",
    "window_attains",
    "min_window_image_length",
    "window_inclusion_holds",
]


def _canonical(xs, ys):
    """Drop interior points that are collinear with their neighbors."""
    n = len(xs)
    if n <= 2:
        return list(xs), list(ys)
    cx = [xs[0]]
    cy = [ys[0]]
    for i in range(1, n - 1):
        x0, y0 = cx[-1], cy[-1]
        x1, y1 = xs[i], ys[i]
        x2, y2 = xs[i + 1], ys[i + 1]
        # collinear iff (y1-y0)*(x2-x1) == (y2-y1)*(x1-x0)
        if (y1 - y0) * (x2 - x1) != (y2 - y1) * (x1 - x0):
            cx.append(x1)
            cy.append(y1)
    cx.append(xs[-1])
    cy.append(ys[-1])
    return cx, cy


class PLMap:
    """Continuous piecewise-linear map [0,1] -> [0,1], exact and immutable."""

    __slots__ = ("xs", "ys", "_hash_cache", "_minmax_tree", "_bucket_index")

    def __init__(self, breakpoints, values, *, _skip_checks=False):
        xs = [rat(x) for x in breakpoints]
        ys = [rat(y) for y in values]
        if not _skip_checks:
            if len(xs) != len(ys):
                raise ValueError("breakpoints and values must have equal length")
            if len(xs) < 2:
                raise ValueError("need at least the two endpoint breakpoints")
            if xs[0] != ZERO or xs[-1] != ONE:
                raise ValueError("breakpoints must start at 0 and end at 1")
            for i in range(len(xs) - 1):
                if xs[i] >= xs[i + 1]:
                    raise ValueError("breakpoints must be strictly increasing")
            for y in ys:
                if y < ZERO or y > ONE:
                    raise ValueError("values must lie in [0,1]")
        xs, ys = _canonical(xs, ys)
        object.__setattr__(self, "xs", tuple(xs))
        object.__setattr__(self, "ys", tuple(ys))
        object.__setattr__(self, "_hash_cache", None)
        object.__setattr__(self, "_minmax_tree", None)
        object.__setattr__(self, "_bucket_index", None)

    def __setattr__(self, name, value):
        raise AttributeError("PLMap is immutable")

    # -- basic structure ------------------------------------------------

    @property
    def segments(self) -> int:
        return len(self.xs) - 1

    def __eq__(self, other):
        return isinstance(other, PLMap) and self.xs == other.xs and self.ys == other.ys

    def __hash__(self):
        return hash((self.xs, self.ys))

    def __repr__(self):
        return f"PLMap(segments={self.segments})"

    def eval(self, x):
        x = rat(x)
        if x < ZERO or x > ONE:
            raise ValueError(f"eval outside domain: {x}")
        xs, ys = self.xs, self.ys
        i = bisect_right(xs, x) - 1
        if i >= len(xs) - 1:
            return ys[-1]
        x0, x1 = xs[i], xs[i + 1]
        y0, y1 = ys[i], ys[i + 1]
        if x == x0:
            return y0
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    __call__ = eval

    def is_onto(self) -> bool:
        return min(self.ys) == ZERO and max(self.ys) == ONE

    # -- lazily built indexes -------------------------------------------

    def _tree(self):
        """Segment tree of (min,max) over breakpoint values, for O(log n) range hulls."""
        t = self._minmax_tree
        if t is None:
            n = len(self.ys)
            size = 1
            while size < n:
                size *= 2
            mins = [None] * (2 * size)
            maxs = [None] * (2 * size)
            for i, y in enumerate(self.ys):
                mins[size + i] = y
                maxs[size + i] = y
            for i in range(size - 1, 0, -1):
                l, r = 2 * i, 2 * i + 1
                ml = mins[l]
                mr = mins[r]
                mins[i] = ml if mr is None or (ml is not None and ml <= mr) else mr
                xl = maxs[l]
                xr = maxs[r]
                maxs[i] = xl if xr is None or (xl is not None and xl >= xr) else xr
            t = (size, mins, maxs)
            object.__setattr__(self, "_minmax_tree", t)
        return t

    def _range_hull(self, i: int, j: int):
        """(min, max) of values ys[i..j] inclusive."""
        size, mins, maxs = self._tree()
        lo = i + size
        hi = j + size + 1
        best_min = None
        best_max = None
        while lo < hi:
            if lo & 1:
                if best_min is None or mins[lo] < best_min:
                    best_min = mins[lo]
                if best_max is None or maxs[lo] > best_max:
                    best_max = maxs[lo]
                lo += 1
            if hi & 1:
                hi -= 1
                if best_min is None or mins[hi] < best_min:
                    best_min = mins[hi]
                if best_max is None or maxs[hi] > best_max:
                    best_max = maxs[hi]
            lo >>= 1
            hi >>= 1
        return best_min, best_max

    _N_BUCKETS = 128

    def _buckets(self):
        """Value-space buckets listing segments whose value span meets each bucket."""
        b = self._bucket_index
        if b is None:
            nb = self._N_BUCKETS
            buckets = [[] for _ in range(nb)]
            ys = self.ys
            for i in range(len(ys) - 1):
                lo, hi = (ys[i], ys[i + 1]) if ys[i] <= ys[i + 1] else (ys[i + 1], ys[i])
                k0 = (lo.numerator * nb) // lo.denominator
                k1 = (hi.numerator * nb) // hi.denominator
                if k0 >= nb:
                    k0 = nb - 1
                if k1 >= nb:
                    k1 = nb - 1
                for k in range(k0, k1 + 1):
                    buckets[k].append(i)
            b = buckets
            object.__setattr__(self, "_bucket_index", b)
        return b

    def _segments_hitting(self, y):
        """Indices of segments whose closed value span contains y, ascending."""
        nb = self._N_BUCKETS
        k = (y.numerator * nb) // y.denominator
        if k >= nb:
            k = nb - 1
        ys = self.ys
        out = []
        for i in self._buckets()[k]:
            a, b = ys[i], ys[i + 1]
            if (a <= y <= b) or (b <= y <= a):
                out.append(i)
        return out

    # -- serialization ---------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "breakpoints": [rat_to_str(x) for x in self.xs],
            "values": [rat_to_str(y) for y in self.ys],
        }

    @classmethod
    def from_json_obj(cls, obj) -> "PLMap":
        return cls(
            [rat_from_str(s) for s in obj["breakpoints"]],
            [rat_from_str(s) for s in obj["values"]],
        )

    def content_hash(self) -> str:
        h = self._hash_cache
        if h is None:
            blob = json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))
            h = hashlib.sha256(blob.encode()).hexdigest()
            object.__setattr__(self, "_hash_cache", h)
        return h


class IntervalSet:
    """Finite union of disjoint closed intervals (points are degenerate)."""

    __slots__ = ("components",)

    def __init__(self, raw):
        comps = sorted((rat(a), rat(b)) for a, b in raw)
        merged = []
        for a, b in comps:
            if a > b:
                a, b = b, a
            if merged and a <= merged[-1][1]:
                if b > merged[-1][1]:
                    merged[-1] = (merged[-1][0], b)
            else:
                merged.append((a, b))
        self.components = tuple(merged)

    def __bool__(self):
        return bool(self.components)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.components == other.components

    def __repr__(self):
        parts = ", ".join(
            rat_to_str(a) if a == b else f"[{rat_to_str(a)},{rat_to_str(b)}]"
            for a, b in self.components
        )
        return f"IntervalSet({parts})"

    def min(self):
        return self.components[0][0]

    def max(self):
        return self.components[-1][1]

    def contains(self, x) -> bool:
        x = rat(x)
        for a, b in self.components:
            if a <= x <= b:
                return True
            if a > x:
                return False
        return False

    def max_gap(self):
        """Largest open gap between consecutive components (None if < 2)."""
        g = None
        for i in range(len(self.components) - 1):
            d = self.components[i + 1][0] - self.components[i][1]
            if g is None or d > g:
                g = d
        return g

    def to_json_obj(self):
        return [[rat_to_str(a), rat_to_str(b)] for a, b in self.components]


# ---------------------------------------------------------------------------
# canonical example maps


def identity_map() -> PLMap:
    return PLMap([ZERO, ONE], [ZERO, ONE])


def tent_map() -> PLMap:
    return PLMap([ZERO, rat(1, 2), ONE], [ZERO, ONE, ZERO])


# ---------------------------------------------------------------------------
# operations


def compose(outer: PLMap, inner: PLMap, cap: int = DEFAULT_SEGMENT_CAP) -> PLMap:
    """Exact PL representation of outer(inner(x)).

    Breakpoints are inner's breakpoints refined by the inner-preimages of
    outer's breakpoints; between consecutive refined points the composite
    is affine, so interpolation is exact.  Raises BreakpointBudgetError if
    the refinement would exceed ``cap`` segments.
    """
    from .errors import BreakpointBudgetError

    oxs = outer.xs
    ixs, iys = inner.xs, inner.ys
    new_xs = []
    new_ys = []

    def emit(x, y):
        if not new_xs or new_xs[-1] != x:
            new_xs.append(x)
            new_ys.append(y)

    budget = cap + 1
    for i in range(len(ixs) - 1):
        x0, x1 = ixs[i], ixs[i + 1]
        y0, y1 = iys[i], iys[i + 1]
        emit(x0, outer.eval(y0))
        if y0 != y1:
            if y0 < y1:
                lo_i = bisect_right(oxs, y0)
                hi_i = bisect_left(oxs, y1)
                rng = range(lo_i, hi_i)
            else:
                lo_i = bisect_right(oxs, y1)
                hi_i = bisect_left(oxs, y0)
                rng = range(hi_i - 1, lo_i - 1, -1)
            dx = x1 - x0
            dy = y1 - y0
            for j in rng:
                b = oxs[j]
                t = x0 + (b - y0) * dx / dy
                emit(t, outer.ys[j])
        if len(new_xs) > budget:
            raise BreakpointBudgetError(
                f"compose would exceed segment cap {cap}"
            )
    emit(ixs[-1], outer.eval(iys[-1]))
    m = PLMap(new_xs, new_ys, _skip_checks=True)
    if m.segments > cap:
        raise BreakpointBudgetError(f"compose result has {m.segments} segments > cap {cap}")
    return m


def iterate(m: PLMap, n: int, cap: int = DEFAULT_SEGMENT_CAP) -> PLMap:
    """Exact n-th iterate of m (n >= 1)."""
    if n < 1:
        raise ValueError("iterate requires n >= 1")
    acc = m
    for _ in range(n - 1):
        acc = compose(m, acc, cap=cap)
    return acc


def preimage(m: PLMap, y) -> IntervalSet:
    """Exact {x : m(x) = y} as an IntervalSet (flat segments give intervals)."""
    y = rat(y)
    if y < ZERO or y > ONE:
        raise ValueError("preimage level outside [0,1]")
    xs, ys = m.xs, m.ys
    parts = []
    for i in m._segments_hitting(y):
        y0, y1 = ys[i], ys[i + 1]
        x0, x1 = xs[i], xs[i + 1]
        if y0 == y1:
            parts.append((x0, x1))
        else:
            t = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            parts.append((t, t))
    return IntervalSet(parts)


def image_of_interval(m: PLMap, a, b):
    """Exact image [min, max] of m over [a,b]."""
    a, b = rat(a), rat(b)
    if a > b:
        raise ValueError("image_of_interval requires a <= b")
    if a < ZERO or b > ONE:
        raise ValueError("interval outside [0,1]")
    va, vb = m.eval(a), m.eval(b)
    lo, hi = (va, vb) if va <= vb else (vb, va)
    xs = m.xs
    i = bisect_right(xs, a)
    j = bisect_left(xs, b) - 1
    if i <= j:
        tmin, tmax = m._range_hull(i, j)
        if tmin < lo:
            lo = tmin
        if tmax > hi:
            hi = tmax
    return lo, hi


def _merged_breakpoints(m1: PLMap, m2: PLMap):
    xs = []
    i = j = 0
    a, b = m1.xs, m2.xs
    while i < len(a) or j < len(b):
        if j >= len(b) or (i < len(a) and a[i] <= b[j]):
            x = a[i]
            i += 1
            if j < len(b) and b[j] == x:
                j += 1
        else:
            x = b[j]
            j += 1
        xs.append(x)
    return xs


def sup_dist(m1: PLMap, m2: PLMap):
    """Exact sup over [0,1] of |m1 - m2| (attained on the common refinement)."""
    best = ZERO
    # difference is PL with breakpoints in the union, so max |diff| is at a
    # union breakpoint; walk both maps in lockstep to avoid n log n evals.
    i = j = 0
    xs1, ys1, xs2, ys2 = m1.xs, m1.ys, m2.xs, m2.ys

    def val(xs, ys, k, x):
        x0, x1 = xs[k], xs[k + 1]
        return ys[k] + (ys[k + 1] - ys[k]) * (x - x0) / (x1 - x0)

    for x in _merged_breakpoints(m1, m2):
        while i < len(xs1) - 2 and xs1[i + 1] <= x:
            i += 1
        while j < len(xs2) - 2 and xs2[j + 1] <= x:
            j += 1
        v1 = ys1[i] if xs1[i] == x else (ys1[i + 1] if xs1[i + 1] == x else val(xs1, ys1, i, x))
        v2 = ys2[j] if xs2[j] == x else (ys2[j + 1] if xs2[j + 1] == x else val(xs2, ys2, j, x))
        d = v1 - v2 if v1 >= v2 else v2 - v1
        if d > best:
            best = d
    return best


def slope_range(m: PLMap):
    """(min |slope|, max |slope|, no-flat-segment flag), exact."""
    min_s = None
    max_s = None
    all_nonflat = True
    for i in range(len(m.xs) - 1):
        dy = m.ys[i + 1] - m.ys[i]
        if dy < ZERO:
            dy = -dy
        s = dy / (m.xs[i + 1] - m.xs[i])
        if s == ZERO:
            all_nonflat = False
        if min_s is None or s < min_s:
            min_s = s
        if max_s is None or s > max_s:
            max_s = s
    return min_s, max_s, all_nonflat


def window_attains(m: PLMap, level, ell) -> bool:
    """Does every window [x, x+ell] (x in [0, 1-ell]) contain a point with m = level?

    Decided exactly via the preimage of ``level``: the condition fails
    iff the preimage misses [0, ell] or [1-ell, 1] or leaves an open gap
    longer than ell.
    """
    ell = rat(ell)
    z = preimage(m, level)
    if not z:
        return False
    if z.min() > ell:
        return False
    if z.max() < ONE - ell:
        return False
    g = z.max_gap()
    return g is None or g <= ell


def leo_index(m: PLMap, ell, max_n: int = 32, cap: int = DEFAULT_SEGMENT_CAP):
    """Least n with m^n([x, x+ell]) = [0,1] for every window, or None.

    A window's image is [0,1] iff it attains both 0 and 1, so the sweep
    reduces to exact gap analysis of the preimages of 0 and 1 of each
    iterate.  Raises BreakpointBudgetError if an iterate would exceed
    ``cap`` before an index is found.
    """
    ell = rat(ell)
    if not (ZERO < ell <= ONE):
        raise ValueError("leo_index requires 0 < ell <= 1")
    acc = m
    for n in range(1, max_n + 1):
        if window_attains(acc, ZERO, ell) and window_attains(acc, ONE, ell):
            return n
        if n < max_n:
            acc = compose(m, acc, cap=cap)
    return None


def eta_for_iterate(m: PLMap, n: int, eps):
    """Perturbation budget eta: sup|m - F| < eta forces sup|m^n - F^n| < eps.

    Uses the recursion eta(1, e) = e, eta(n, e) = min(e/2, eta(n-1, (e/2)/L))
    with L the exact maximum |slope| of m (so |m(a)-m(b)| <= L|a-b|).
    """
    eps = rat(eps)
    if n < 1:
        raise ValueError("eta_for_iterate requires n >= 1")
    if eps <= ZERO:
        raise ValueError("eps must be positive")
    _, L, _ = slope_range(m)
    if L == ZERO:
        return eps  # constant map: iterates never amplify
    e = eps
    etas = [e]
    for _ in range(n - 1):
        e = (e / 2) / L
        etas.append(e)
    eta = etas[-1]
    for e in reversed(etas[:-1]):
        half = e / 2
        eta = half if half < eta else eta
    return eta


# ---------------------------------------------------------------------------
# exact sliding-window sweeps
#
# The routines below decide for-all-x statements about the extremes of m
# over the moving window [x, x+ell].  Between consecutive "cell" points
# (breakpoints and breakpoints shifted by ell) the two window endpoints
# m(x), m(x+ell) are affine in x and the set of interior breakpoints is
# constant, so the window max is max(affine, affine, const) and the
# window min is min(affine, affine, const).  The extremum of any
# objective built from these over a cell is attained at the cell ends or
# at a crossing of two of the participating lines; enumerating those
# finitely many x decides the continuum statement exactly.


def _sliding_cells(m: PLMap, ell):
    """Yield (x_lo, x_hi, a1, a2, C, D) cell descriptions.

    a1, a2 are (slope, value_at_x_lo) pairs for m(x) and m(x+ell); C, D
    are the constant max/min over breakpoints strictly inside the window
    (None when the window interior holds no breakpoint).
    """
    hi_x = ONE - ell
    if hi_x == ZERO:
        # single window [0,1]
        lo, hi = image_of_interval(m, ZERO, ONE)
        yield ZERO, ZERO, (ZERO, m.ys[0]), (ZERO, m.ys[-1]), lo, hi
        return
    pts = {ZERO, hi_x}
    for bp in m.xs:
        if ZERO < bp < hi_x:
            pts.add(bp)
        s = bp - ell
        if ZERO < s < hi_x:
            pts.add(s)
    ordered = sorted(pts)
    xs, ys = m.xs, m.ys
    for k in range(len(ordered) - 1):
        a, b = ordered[k], ordered[k + 1]
        mid = (a + b) / 2
        i = bisect_right(xs, mid) - 1
        if i >= len(xs) - 1:
            i = len(xs) - 2
        j = bisect_right(xs, mid + ell) - 1
        if j >= len(xs) - 1:
            j = len(xs) - 2
        s1 = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
        s2 = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j])
        a1 = (s1, ys[i] + s1 * (a - xs[i]))
        a2 = (s2, ys[j] + s2 * (a + ell - xs[j]))
        k0 = bisect_right(xs, mid)
        k1 = bisect_left(xs, mid + ell) - 1
        if k0 <= k1:
            lo_const, hi_const = m._range_hull(k0, k1)
        else:
            lo_const = hi_const = None
        yield a, b, a1, a2, lo_const, hi_const


def _cell_candidates(a, b, a1, a2, lo_const, hi_const):
    """x values in [a,b] where the window-extreme piece structure can change."""
    out = [a, b]
    s1, v1 = a1
    s2, v2 = a2

    def cross_lines(sa, va, sb, vb):
        if sa == sb:
            return None
        t = a + (vb - va) / (sa - sb)
        return t if a < t < b else None

    def cross_const(s, v, c):
        if s == ZERO:
            return None
        t = a + (c - v) / s
        return t if a < t < b else None

    t = cross_lines(s1, v1, s2, v2)
    if t is not None:
        out.append(t)
    for c in (lo_const, hi_const):
        if c is not None:
            for s, v in (a1, a2):
                t = cross_const(s, v, c)
                if t is not None:
                    out.append(t)
    return out


def _window_extremes(x, a, a1, a2, lo_const, hi_const):
    s1, v1 = a1
    s2, v2 = a2
    e1 = v1 + s1 * (x - a)
    e2 = v2 + s2 * (x - a)
    lo = e1 if e1 <= e2 else e2
    hi = e1 if e1 >= e2 else e2
    if lo_const is not None and lo_const < lo:
        lo = lo_const
    if hi_const is not None and hi_const > hi:
        hi = hi_const
    return lo, hi


def min_window_image_length(m: PLMap, ell):
    """Exact min over x in [0, 1-ell] of (max - min of m on [x, x+ell])."""
    ell = rat(ell)
    if not (ZERO < ell <= ONE):
        raise ValueError("min_window_image_length requires 0 < ell <= 1")
    best = None
    for a, b, a1, a2, lo_c, hi_c in _sliding_cells(m, ell):
        for x in _cell_candidates(a, b, a1, a2, lo_c, hi_c):
            lo, hi = _window_extremes(x, a, a1, a2, lo_c, hi_c)
            d = hi - lo
            if best is None or d < best:
                best = d
    return best


def window_inclusion_holds(m: PLMap, gamma) -> bool:
    """Exact decision of: [x, x+gamma] subset of m([x, x+gamma]) for all x.

    Equivalent to window-max >= x + gamma and window-min <= x for every
    window of length exactly gamma; longer intervals inherit both bounds
    from the length-gamma windows at their two ends.
    """
    gamma = rat(gamma)
    if not (ZERO < gamma <= ONE):
        raise ValueError("window_inclusion_holds requires 0 < gamma <= 1")
    for a, b, a1, a2, lo_c, hi_c in _sliding_cells(m, gamma):
        for x in _cell_candidates(a, b, a1, a2, lo_c, hi_c):
            lo, hi = _window_extremes(x, a, a1, a2, lo_c, hi_c)
            if hi < x + gamma or lo > x:
                return False
    return True
