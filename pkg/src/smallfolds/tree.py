"""Finite metric trees with exact rational edge lengths.

Trees are combinatorial (no embedding): nodes, edges with positive
rational lengths, points addressed as (edge, offset).  Between any two
points there is a unique arc; the decomposition routine peels the tree
into arcs A_0..A_k hanging off earlier arcs at attachment points p_i,
exactly the structure the factorization construction consumes.

Everything is immutable after construction and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ._rat import ZERO, rat, rat_from_str, rat_to_str
from .errors import TreeStructureError

__all__ = [
    "MetricTree",
    "TreePoint",
    "TreeArc",
    "ArcDecomposition",
    "arc",
    "endpoints",
    "branch_points",
    "tree_distance",
    "ai_decomposition",
]


@dataclass(frozen=True)
class TreePoint:
    """A point on a tree: offset along an edge, canonicalized at nodes."""

    edge: str
    offset: object  # exact rational in [0, edge length]

    def __repr__(self):
        return f"TreePoint({self.edge}@{rat_to_str(self.offset)})"


class MetricTree:
    """Connected acyclic graph with positive rational edge lengths."""

    def __init__(self, edges: Dict[str, Tuple[str, str, object]]):
        """edges: edge id -> (node a, node b, length)."""
        if not edges:
            raise TreeStructureError("a tree needs at least one edge")
        self.edges = {}
        nodes = set()
        for eid, (a, b, ln) in sorted(edges.items()):
            ln = rat(ln)
            if ln <= ZERO:
                raise TreeStructureError(f"edge {eid} has nonpositive length")
            if a == b:
                raise TreeStructureError(f"edge {eid} is a self-loop")
            self.edges[eid] = (a, b, ln)
            nodes.add(a)
            nodes.add(b)
        self.nodes = sorted(nodes)
        if len(self.edges) != len(self.nodes) - 1:
            raise TreeStructureError("edge count must be node count - 1")
        self.adj: Dict[str, List[Tuple[str, str]]] = {n: [] for n in self.nodes}
        for eid, (a, b, _) in self.edges.items():
            self.adj[a].append((eid, b))
            self.adj[b].append((eid, a))
        for n in self.adj:
            self.adj[n].sort()
        # connectivity
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            u = stack.pop()
            for _, v in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != len(self.nodes):
            raise TreeStructureError("graph is not connected")

    # -- points ----------------------------------------------------------

    def node_point(self, node: str) -> TreePoint:
        """Canonical TreePoint for a node: lowest incident edge id."""
        eid, _ = self.adj[node][0]
        a, b, ln = self.edges[eid]
        return TreePoint(eid, ZERO if a == node else ln)

    def canonical(self, p: TreePoint) -> TreePoint:
        a, b, ln = self.edges[p.edge]
        off = rat(p.offset)
        if off < ZERO or off > ln:
            raise ValueError(f"offset outside edge {p.edge}")
        if off == ZERO:
            return self.node_point(a)
        if off == ln:
            return self.node_point(b)
        return TreePoint(p.edge, off)

    def node_of(self, p: TreePoint) -> Optional[str]:
        """Node name when p sits on a node, else None."""
        a, b, ln = self.edges[p.edge]
        if rat(p.offset) == ZERO:
            return a
        if rat(p.offset) == ln:
            return b
        return None

    def degree(self, node: str) -> int:
        return len(self.adj[node])

    # -- serialization ----------------------------------------------------

    def to_json_obj(self):
        return {
            "nodes": list(self.nodes),
            "edges": [
                {"id": eid, "a": a, "b": b, "length": rat_to_str(ln)}
                for eid, (a, b, ln) in sorted(self.edges.items())
            ],
        }

    @classmethod
    def from_json_obj(cls, obj) -> "MetricTree":
        return cls(
            {e["id"]: (e["a"], e["b"], rat_from_str(e["length"])) for e in obj["edges"]}
        )


def endpoints(t: MetricTree) -> List[TreePoint]:
    """Degree-1 nodes, as canonical points, in node order."""
    return [t.node_point(n) for n in t.nodes if t.degree(n) == 1]


def branch_points(t: MetricTree) -> List[TreePoint]:
    """Nodes of degree >= 3, as canonical points, in node order."""
    return [t.node_point(n) for n in t.nodes if t.degree(n) >= 3]


@dataclass(frozen=True)
class TreeArc:
    """Oriented simple path: segments (edge, off_from, off_to), off order = direction."""

    segments: Tuple[Tuple[str, object, object], ...]
    length: object

    def reversed(self) -> "TreeArc":
        return TreeArc(
            tuple((e, b, a) for e, a, b in reversed(self.segments)), self.length
        )

    @property
    def degenerate(self) -> bool:
        return self.length == ZERO


def _node_path(t: MetricTree, start: str, goal: str) -> List[Tuple[str, str]]:
    """List of (edge, next_node) from start to goal (unique in a tree)."""
    if start == goal:
        return []
    parent = {start: None}
    stack = [start]
    while stack:
        u = stack.pop()
        if u == goal:
            break
        for eid, v in t.adj[u]:
            if v not in parent:
                parent[v] = (u, eid)
                stack.append(v)
    path = []
    u = goal
    while parent[u] is not None:
        pu, eid = parent[u]
        path.append((eid, u))
        u = pu
    path.reverse()
    return path


def arc(t: MetricTree, x: TreePoint, y: TreePoint) -> TreeArc:
    """The unique arc from x to y, oriented x -> y (degenerate allowed)."""
    x = t.canonical(x)
    y = t.canonical(y)
    if x == y:
        return TreeArc((), ZERO)
    # same-edge interior shortcut
    if x.edge == y.edge:
        nx, ny = t.node_of(x), t.node_of(y)
        if nx is None or ny is None:
            seg = (x.edge, rat(x.offset), rat(y.offset))
            d = rat(y.offset) - rat(x.offset)
            return TreeArc((seg,), d if d > ZERO else -d)
    segs: List[Tuple[str, object, object]] = []
    total = ZERO

    def push(eid, o0, o1):
        nonlocal total
        if o0 == o1:
            return
        segs.append((eid, o0, o1))
        total += o1 - o0 if o1 > o0 else o0 - o1

    nx = t.node_of(x)
    ny = t.node_of(y)
    if nx is not None and ny is not None:
        path = _node_path(t, nx, ny)
        u = nx
        for eid, v in path:
            a, b, ln = t.edges[eid]
            push(eid, ZERO if u == a else ln, ln if u == a else ZERO)
            u = v
    elif nx is None and ny is None:
        a, b, ln = t.edges[x.edge]
        # choose exit side by testing which node path reaches y's edge nodes
        ya, yb, yln = t.edges[y.edge]
        pa = _node_path(t, a, ya)
        # does the path from a to ya use x's own edge? then exit via b.
        uses_own = any(eid == x.edge for eid, _ in pa)
        if uses_own:
            exit_node, exit_off = b, ln
        else:
            exit_node, exit_off = a, ZERO
        push(x.edge, rat(x.offset), exit_off)
        enter_a = _node_path(t, exit_node, ya)
        uses_y = any(eid == y.edge for eid, _ in enter_a)
        enter_node = yb if uses_y else ya
        path = _node_path(t, exit_node, enter_node)
        u = exit_node
        for eid, v in path:
            ea, eb, eln = t.edges[eid]
            push(eid, ZERO if u == ea else eln, eln if u == ea else ZERO)
            u = v
        push(y.edge, ZERO if enter_node == ya else yln, rat(y.offset))
    else:
        if nx is None:
            rev = arc(t, y, x)
            return rev.reversed()
        # x is a node, y interior
        ya, yb, yln = t.edges[y.edge]
        pa = _node_path(t, nx, ya)
        uses_y = any(eid == y.edge for eid, _ in pa)
        enter_node = yb if uses_y else ya
        path = _node_path(t, nx, enter_node)
        u = nx
        for eid, v in path:
            ea, eb, eln = t.edges[eid]
            push(eid, ZERO if u == ea else eln, eln if u == ea else ZERO)
            u = v
        push(y.edge, ZERO if enter_node == ya else yln, rat(y.offset))
    return TreeArc(tuple(segs), total)


def tree_distance(t: MetricTree, x: TreePoint, y: TreePoint):
    return arc(t, x, y).length


def arc_point_at(t: MetricTree, a: TreeArc, dist) -> TreePoint:
    """Point at exact distance ``dist`` along the oriented arc."""
    dist = rat(dist)
    if dist < ZERO or dist > a.length:
        raise ValueError("distance outside arc")
    if not a.segments:
        raise ValueError("degenerate arc has no interior points")
    remaining = dist
    for eid, o0, o1 in a.segments:
        seg_len = o1 - o0 if o1 > o0 else o0 - o1
        if remaining <= seg_len:
            off = o0 + remaining if o1 > o0 else o0 - remaining
            return t.canonical(TreePoint(eid, off))
        remaining -= seg_len
    return t.canonical(TreePoint(a.segments[-1][0], a.segments[-1][2]))


def _merge_intervals(ivs):
    ivs = sorted(ivs)
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


class _Coverage:
    """Per-edge closed-interval bookkeeping of the region arcs cover."""

    def __init__(self, t: MetricTree):
        self.t = t
        self.by_edge: Dict[str, List[Tuple[object, object]]] = {e: [] for e in t.edges}

    def add_arc(self, a: TreeArc):
        for eid, o0, o1 in a.segments:
            lo, hi = (o0, o1) if o0 <= o1 else (o1, o0)
            self.by_edge[eid] = _merge_intervals(self.by_edge[eid] + [(lo, hi)])

    def covers_point(self, p: TreePoint) -> bool:
        p = self.t.canonical(p)
        node = self.t.node_of(p)
        candidates = [p]
        if node is not None:
            for eid, other in self.t.adj[node]:
                a, b, ln = self.t.edges[eid]
                candidates.append(TreePoint(eid, ZERO if a == node else ln))
        for q in candidates:
            off = rat(q.offset)
            for lo, hi in self.by_edge[q.edge]:
                if lo <= off <= hi:
                    return True
        return False

    def first_covered_on_arc(self, a: TreeArc):
        """(distance, point) of the first covered point along the arc, or None."""
        walked = ZERO
        for eid, o0, o1 in a.segments:
            ivs = self.by_edge[eid]
            seg_len = o1 - o0 if o1 > o0 else o0 - o1
            best = None
            if o1 > o0:
                for lo, hi in ivs:
                    if hi < o0 or lo > o1:
                        continue
                    entry = lo if lo > o0 else o0
                    d = entry - o0
                    if best is None or d < best[0]:
                        best = (d, TreePoint(eid, entry))
            else:
                for lo, hi in ivs:
                    if hi < o1 or lo > o0:
                        continue
                    entry = hi if hi < o0 else o0
                    d = o0 - entry
                    if best is None or d < best[0]:
                        best = (d, TreePoint(eid, entry))
            if best is not None:
                return walked + best[0], self.t.canonical(best[1])
            walked += seg_len
        return None

    def fully_covers(self) -> bool:
        for eid, (a, b, ln) in self.t.edges.items():
            ivs = self.by_edge[eid]
            if len(ivs) != 1 or ivs[0][0] != ZERO or ivs[0][1] != ln:
                return False
        return True


@dataclass(frozen=True)
class ArcDecomposition:
    """Arcs A_0..A_k with A_i meeting the earlier union exactly at p_i."""

    tree: MetricTree
    base: TreePoint  # p_0
    arcs: Tuple[TreeArc, ...]  # A_i oriented p_i -> q_i
    attach: Tuple[TreePoint, ...]  # p_i (attach[0] == base)
    tips: Tuple[TreePoint, ...]  # q_i

    def __len__(self):
        return len(self.arcs)

    def parent_arc_index(self, i: int) -> int:
        """l(i): least j with p_i on A_j (0 for i = 0 by convention)."""
        if i == 0:
            return 0
        p = self.attach[i]
        for j in range(i):
            if _arc_contains_point(self.tree, self.arcs[j], p):
                return j
        raise VerifyDecompositionError(f"attachment point of arc {i} not on any earlier arc")


class VerifyDecompositionError(TreeStructureError):
    pass


def _arc_contains_point(t: MetricTree, a: TreeArc, p: TreePoint) -> bool:
    p = t.canonical(p)
    node = t.node_of(p)
    reps = [p]
    if node is not None:
        for eid, other in t.adj[node]:
            ea, eb, ln = t.edges[eid]
            reps.append(TreePoint(eid, ZERO if ea == node else ln))
    for q in reps:
        off = rat(q.offset)
        for eid, o0, o1 in a.segments:
            if eid != q.edge:
                continue
            lo, hi = (o0, o1) if o0 <= o1 else (o1, o0)
            if lo <= off <= hi:
                return True
    return False


def _arc_prefix(t: MetricTree, a: TreeArc, dist) -> TreeArc:
    """Initial sub-arc of exact length ``dist``."""
    dist = rat(dist)
    segs = []
    total = ZERO
    remaining = dist
    for eid, o0, o1 in a.segments:
        seg_len = o1 - o0 if o1 > o0 else o0 - o1
        if remaining <= ZERO:
            break
        if remaining >= seg_len:
            segs.append((eid, o0, o1))
            total += seg_len
            remaining -= seg_len
        else:
            end = o0 + remaining if o1 > o0 else o0 - remaining
            segs.append((eid, o0, end))
            total += remaining
            remaining = ZERO
            break
    return TreeArc(tuple(segs), total)


def ai_decomposition(
    t: MetricTree, p0: TreePoint, order: Sequence[TreePoint]
) -> ArcDecomposition:
    """Arc decomposition rooted at endpoint p0, peeling tips in the given order.

    A_0 runs from p0 to the first tip; each later A_i runs from the first
    already-covered point on the way from its tip (that point is p_i) out
    to the tip q_i.  The two defining invariants - each new arc meets the
    union of earlier ones exactly in p_i, and the arcs cover the tree -
    are re-verified exactly before returning.
    """
    p0 = t.canonical(p0)
    eps = {(e.edge, rat(e.offset)) for e in endpoints(t)}
    if (p0.edge, rat(p0.offset)) not in eps:
        raise ValueError("p0 must be an endpoint of the tree")
    tips = [t.canonical(q) for q in order]
    want = {(q.edge, rat(q.offset)) for q in tips}
    rest = eps - {(p0.edge, rat(p0.offset))}
    if want != rest or len(tips) != len(rest):
        raise ValueError("order must enumerate the remaining endpoints exactly once")

    cov = _Coverage(t)
    arcs: List[TreeArc] = []
    attach: List[TreePoint] = []
    a0 = arc(t, p0, tips[0])
    arcs.append(a0)
    attach.append(p0)
    cov.add_arc(a0)
    for q in tips[1:]:
        walk = arc(t, q, p0)
        hit = cov.first_covered_on_arc(walk)
        if hit is None:
            raise VerifyDecompositionError("no covered point found walking toward base")
        dist, p_i = hit
        a_i = _arc_prefix(t, walk, dist).reversed()
        arcs.append(a_i)
        attach.append(p_i)
        cov.add_arc(a_i)

    deco = ArcDecomposition(t, p0, tuple(arcs), tuple(attach), tuple(tips))
    _verify_decomposition(deco)
    return deco


def _verify_decomposition(d: ArcDecomposition):
    t = d.tree
    cov = _Coverage(t)
    cov.add_arc(d.arcs[0])
    for i in range(1, len(d.arcs)):
        a_i = d.arcs[i]
        p_i = d.attach[i]
        # intersection of A_i with the earlier union must be exactly {p_i}
        for eid, o0, o1 in a_i.segments:
            lo, hi = (o0, o1) if o0 <= o1 else (o1, o0)
            for clo, chi in cov.by_edge[eid]:
                ilo = lo if lo > clo else clo
                ihi = hi if hi < chi else chi
                if ilo > ihi:
                    continue
                if ilo != ihi:
                    raise VerifyDecompositionError(
                        f"arc {i} overlaps earlier arcs in a nondegenerate set"
                    )
                pt = t.canonical(TreePoint(eid, ilo))
                if pt != t.canonical(p_i):
                    raise VerifyDecompositionError(
                        f"arc {i} touches earlier arcs away from its attachment point"
                    )
        if not cov.covers_point(p_i):
            raise VerifyDecompositionError(f"attachment point of arc {i} not covered")
        # p_i must not be an endpoint of the tree
        node = t.node_of(t.canonical(p_i))
        if node is not None and t.degree(node) == 1:
            raise VerifyDecompositionError(f"attachment point of arc {i} is a tree endpoint")
        cov.add_arc(a_i)
    if not cov.fully_covers():
        raise VerifyDecompositionError("arcs do not cover the tree")


# -- convenience constructors used across tests and demos ------------------


def single_edge_tree(length=1) -> MetricTree:
    return MetricTree({"e0": ("u", "v", rat(length))})


def y_tree(l1=1, l2=1, l3=1) -> MetricTree:
    return MetricTree(
        {
            "e1": ("hub", "tip1", rat(l1)),
            "e2": ("hub", "tip2", rat(l2)),
            "e3": ("hub", "tip3", rat(l3)),
        }
    )


def h_tree() -> MetricTree:
    return MetricTree(
        {
            "e1": ("h1", "tip1", rat(1)),
            "e2": ("h1", "tip2", rat(1)),
            "bridge": ("h1", "h2", rat(1)),
            "e3": ("h2", "tip3", rat(1)),
            "e4": ("h2", "tip4", rat(1)),
        }
    )


def random_tree(n_edges: int, seed: int) -> MetricTree:
    """Random tree with dyadic edge lengths, deterministic under seed."""
    from ._rng import DetRNG

    rng = DetRNG(seed)
    edges = {}
    for i in range(n_edges):
        parent = 0 if i == 0 else rng.randint(i + 1)
        ln = rat(1 + rng.randint(8), 8)
        edges[f"e{i}"] = (f"n{parent}", f"n{i + 1}", ln)
    return MetricTree(edges)
