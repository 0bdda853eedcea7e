"""Exact crookedness decisions and machine-checkable certificates.

A map f is delta-crooked between a and b when every parameter pair
(c, d) with f(c) = a, f(d) = b admits c' between c and d and then d'
between c' and d with |b - f(c')| <= delta and |a - f(d')| <= delta.
For a PL map this is decidable: the quantifier over the continuum of
pairs reduces to finitely many "minimal" oriented pairs built from
adjacent preimage-component endpoints (a witness for a sub-pair serves
every enclosing pair), and the witness search inside one oriented pair
is a first-entry scan over the finitely many segments between them.

Global ("between every pair") crookedness quantifies over a continuum
of value pairs and is NOT decided here; certify_crooked produces
evidence - an exhaustive sweep of critical-value pairs with margins
plus exact random sampling - and says so in the certificate.  Every
reported counterexample is independently re-checkable.

All functions are pure; sampling is reproducible under DetRNG seeds.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Optional, Tuple

from ._rat import ONE, ZERO, rat, rat_from_str, rat_to_str
from ._rng import DetRNG
from .plmap import PLMap, preimage

__all__ = [
    "crooked_between",
    "crooked_witness",
    "certify_crooked",
    "certify_small_folds",
    "CrookednessCertificate",
    "SmallFoldsCertificate",
    "TransferCertificate",
]


# ---------------------------------------------------------------------------
# the exact decision


def _first_in_band(f: PLMap, c, d, lo, hi):
    """First parameter t of the oriented closed segment [c, d] with f(t) in [lo, hi].

    Orientation runs from c to d (either direction); returns None when
    the band is never met.  Exact.
    """
    xs, ys = f.xs, f.ys

    def seg_value(i, x):
        x0, x1 = xs[i], xs[i + 1]
        return ys[i] + (ys[i + 1] - ys[i]) * (x - x0) / (x1 - x0)

    def in_band(v):
        return lo <= v <= hi

    if c == d:
        return c if in_band(f.eval(c)) else None

    forward = c < d
    if forward:
        i = bisect_right(xs, c) - 1
        if i >= len(xs) - 1:
            i = len(xs) - 2
    else:
        i = bisect_left(xs, c) - 1
        if i < 0:
            i = 0

    t_prev = c
    v_prev = f.eval(c)
    if in_band(v_prev):
        return c
    while True:
        if forward:
            t_next = xs[i + 1] if xs[i + 1] < d else d
            v_next = ys[i + 1] if t_next == xs[i + 1] else seg_value(i, t_next)
        else:
            t_next = xs[i] if xs[i] > d else d
            v_next = ys[i] if t_next == xs[i] else seg_value(i, t_next)
        # affine piece from (t_prev, v_prev) to (t_next, v_next)
        if v_next != v_prev:
            # first entry into [lo, hi] along this piece
            target = None
            if v_prev < lo <= v_next:
                target = lo
            elif v_prev > hi >= v_next:
                target = hi
            if target is not None:
                t = t_prev + (t_next - t_prev) * (target - v_prev) / (v_next - v_prev)
                return t
        if in_band(v_next):
            return t_next
        if t_next == d:
            return None
        if forward:
            i += 1
        else:
            i -= 1
        t_prev, v_prev = t_next, v_next


def crooked_witness(f: PLMap, c, d, a, b, delta):
    """Witness pair (c', d') for the crookedness condition on the oriented pair (c, d).

    c' is the first parameter from c toward d with |f - b| <= delta; d'
    the first after it with |f - a| <= delta.  The first-entry choice is
    complete: any later usable c' only shrinks the range left for d'.
    Returns None when no witness exists.
    """
    a, b, delta = rat(a), rat(b), rat(delta)
    lo_b, hi_b = b - delta, b + delta
    c1 = _first_in_band(f, c, d, lo_b, hi_b)
    if c1 is None:
        return None
    lo_a, hi_a = a - delta, a + delta
    d1 = _first_in_band(f, c1, d, lo_a, hi_a)
    if d1 is None:
        return None
    return c1, d1


def crooked_between(f: PLMap, a, b, delta, with_counterexample: bool = True):
    """Exact decision of: f is delta-crooked between a and b.

    Returns (True, None) or (False, (c, d)) with a re-checkable
    counterexample pair.  The scan visits each minimal oriented pair:
    adjacent preimage components of a and b with no other preimage point
    between them.
    """
    a, b, delta = rat(a), rat(b), rat(delta)
    for v in (a, b, delta):
        if v < ZERO or v > ONE:
            raise ValueError("crooked_between arguments must lie in [0,1]")
    if a == b:
        return True, None
    comp_a = preimage(f, a).components
    comp_b = preimage(f, b).components
    if not comp_a or not comp_b:
        return True, None
    tagged = [(lo, hi, 0) for lo, hi in comp_a] + [(lo, hi, 1) for lo, hi in comp_b]
    tagged.sort()
    for k in range(len(tagged) - 1):
        lo0, hi0, r0 = tagged[k]
        lo1, hi1, r1 = tagged[k + 1]
        if r0 == r1:
            continue
        if r0 == 0:
            c, d = hi0, lo1  # scan rightward from the a-point
        else:
            c, d = lo1, hi0  # a-point on the right; scan leftward
        if crooked_witness(f, c, d, a, b, delta) is None:
            return False, (c, d)
    return True, None


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class CrookednessCertificate:
    """Evidence record for (scope-restricted) crookedness of one map.

    ``passed=False`` always carries a counterexample (a, b, c, d) that
    crooked_between re-rejects.  A certificate is evidence, not proof,
    unless the scope was a finite explicit pair list.
    """

    map_hash: str
    method: str  # exhaustive-pairs | critical-values-plus-margin | random-sample
    delta: object
    scope: str  # "all" or "within <beta>"
    pairs_checked: int
    pair_source: str
    passed: bool
    counterexample: Optional[Tuple]  # (a, b, c, d)
    seed: Optional[int]

    def to_json_obj(self):
        obj = {
            "kind": "crookedness",
            "map_hash": self.map_hash,
            "method": self.method,
            "delta": rat_to_str(self.delta),
            "scope": self.scope,
            "pairs_checked": self.pairs_checked,
            "pair_source": self.pair_source,
            "passed": self.passed,
            "seed": self.seed,
        }
        if self.counterexample is not None:
            obj["counterexample"] = [rat_to_str(v) for v in self.counterexample]
        return obj


@dataclass(frozen=True)
class SmallFoldsCertificate:
    """Certified (lambda, beta, xi) triple for the small-folds definition."""

    lam: object
    beta: object
    xi: object
    inner: CrookednessCertificate

    @property
    def passed(self) -> bool:
        return self.inner.passed

    def to_json_obj(self):
        return {
            "kind": "small-folds",
            "lambda": rat_to_str(self.lam),
            "beta": rat_to_str(self.beta),
            "xi": rat_to_str(self.xi),
            "passed": self.passed,
            "inner": self.inner.to_json_obj(),
        }


@dataclass(frozen=True)
class TransferCertificate:
    """Crookedness of outer transferred to outer∘inner.

    If f is xi-crooked between a and b then so is f∘g for every
    continuous g: preimages under f∘g of a and b map through g into
    preimages under f, and witnesses pull back by continuity.  The
    record ties a base certificate to the composite map's hash so the
    inheritance chain stays auditable.
    """

    composite_hash: str
    base: object  # CrookednessCertificate | SmallFoldsCertificate
    note: str

    @property
    def passed(self) -> bool:
        return self.base.passed

    def to_json_obj(self):
        return {
            "kind": "composition-transfer",
            "composite_hash": self.composite_hash,
            "note": self.note,
            "passed": self.passed,
            "base": self.base.to_json_obj(),
        }


def _critical_values(f: PLMap, delta, value_cap: int = 160):
    """Distinct map values at breakpoints, widened by +-delta and +-delta/2."""
    vals = sorted(set(f.ys))
    if len(vals) > value_cap:
        step = (len(vals) - 1) / (value_cap - 1)
        vals = [vals[round(i * step)] for i in range(value_cap)]
        vals = sorted(set(vals))
    half = delta / 2
    out = set()
    for v in vals:
        for w in (v, v - delta, v + delta, v - half, v + half):
            if ZERO <= w <= ONE:
                out.add(w)
    return sorted(out)


def _in_scope(a, b, scope_beta):
    if a == b:
        return False
    if scope_beta is None:
        return True
    gap = a - b if a >= b else b - a
    return gap < scope_beta


def certify_crooked(
    f: PLMap,
    delta,
    scope=None,
    budget: int = 1000,
    seed: int = 0,
    tier1_cap: int = 4000,
    pairs=None,
) -> CrookednessCertificate:
    """Two-tier crookedness certification.

    Tier 1 sweeps ordered pairs from the critical-value set of f
    (breakpoint values, widened by +-delta and +-delta/2), restricted to
    the scope; when the sweep would exceed ``tier1_cap`` pairs a
    deterministic seeded subsample of that size is used and recorded.
    Tier 2 checks ``budget`` additional random exact pairs (denominators
    bounded by 2**16).  Passing ``pairs`` instead checks exactly that
    list and nothing else (method "exhaustive-pairs").

    scope: None for all pairs, or an exact beta for pairs with |a-b| < beta.
    """
    delta = rat(delta)
    if delta <= ZERO:
        raise ValueError("delta must be positive")
    scope_beta = None if scope is None else rat(scope)
    scope_str = "all" if scope_beta is None else f"within {rat_to_str(scope_beta)}"
    h = f.content_hash()
    checked = 0

    def check(a, b):
        nonlocal checked
        checked += 1
        ok, ce = crooked_between(f, a, b, delta)
        if not ok:
            return (a, b, ce[0], ce[1])
        return None

    if pairs is not None:
        for a, b in pairs:
            bad = check(rat(a), rat(b))
            if bad is not None:
                return CrookednessCertificate(
                    h, "exhaustive-pairs", delta, scope_str, checked,
                    f"explicit list of {len(pairs)} pairs", False, bad, None,
                )
        return CrookednessCertificate(
            h, "exhaustive-pairs", delta, scope_str, checked,
            f"explicit list of {len(pairs)} pairs", True, None, None,
        )

    vals = _critical_values(f, delta)
    n = len(vals)
    tier1_pairs = []
    total = 0
    for i in range(n):
        for j in range(n):
            if i != j and _in_scope(vals[i], vals[j], scope_beta):
                total += 1
    rng = DetRNG(seed).split("tier1")
    if total <= tier1_cap:
        for i in range(n):
            for j in range(n):
                if i != j and _in_scope(vals[i], vals[j], scope_beta):
                    tier1_pairs.append((vals[i], vals[j]))
        tier1_desc = f"all {total} in-scope critical-value pairs ({n} values)"
    else:
        seen = set()
        while len(tier1_pairs) < tier1_cap:
            i = rng.randint(n)
            j = rng.randint(n)
            if i == j or (i, j) in seen:
                continue
            seen.add((i, j))
            if _in_scope(vals[i], vals[j], scope_beta):
                tier1_pairs.append((vals[i], vals[j]))
            if len(seen) >= 4 * tier1_cap + total:
                break
        tier1_desc = (
            f"seeded sample of {len(tier1_pairs)} of {total} in-scope "
            f"critical-value pairs ({n} values)"
        )

    for a, b in tier1_pairs:
        bad = check(a, b)
        if bad is not None:
            return CrookednessCertificate(
                h, "critical-values-plus-margin", delta, scope_str, checked,
                tier1_desc, False, bad, seed,
            )

    rng2 = DetRNG(seed).split("tier2")
    done = 0
    while done < budget:
        a = rng2.rational()
        if scope_beta is None:
            b = rng2.rational()
        else:
            off = rng2.rational_in(-scope_beta, scope_beta)
            b = a + off
            if b < ZERO or b > ONE:
                continue
        if not _in_scope(a, b, scope_beta):
            continue
        done += 1
        bad = check(a, b)
        if bad is not None:
            return CrookednessCertificate(
                h, "random-sample", delta, scope_str, checked,
                tier1_desc + f" + {done} random pairs (den <= 2^16)",
                False, bad, seed,
            )

    method = "critical-values-plus-margin" if budget == 0 else "random-sample"
    return CrookednessCertificate(
        h, method, delta, scope_str, checked,
        tier1_desc + (f" + {done} random pairs (den <= 2^16)" if budget else ""),
        True, None, seed,
    )


def certify_small_folds(
    f: PLMap, lam, beta, xi, budget: int = 1000, seed: int = 0, tier1_cap: int = 4000
) -> SmallFoldsCertificate:
    """Certify: for all |a-b| < beta, f is xi-crooked between a and b.

    The definitional inequalities 0 < beta < lambda and 0 < xi < beta/4
    are enforced, not assumed.
    """
    lam, beta, xi = rat(lam), rat(beta), rat(xi)
    if not (ZERO < beta < lam):
        raise ValueError("small folds requires 0 < beta < lambda")
    if not (ZERO < xi < beta / 4):
        raise ValueError("small folds requires 0 < xi < beta/4")
    inner = certify_crooked(f, xi, scope=beta, budget=budget, seed=seed, tier1_cap=tier1_cap)
    return SmallFoldsCertificate(lam, beta, xi, inner)
