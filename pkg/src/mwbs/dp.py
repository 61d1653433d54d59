"""Configuration algebra and the exact bottom-up solver.

A configuration describes, for one vertex on a noose, the clockwise
pattern of in- and out-edge blocks inside the noose; the six possible
patterns are the strings i, o, io, oi, oio, ioi.  Two facts drive the
solver: a vertex whose inside pattern collapses to a substring of the
assigned configuration realizes it (empty blocks are allowed), and two
configurations merge into a bimodal vertex exactly when their
concatenation collapses to a substring of oio or ioi.

The solver walks a validated decomposition bottom-up.  Each arc gets a
table mapping every assignment of configurations to the arc's middle set
to the minimum weight of edges deleted strictly inside the arc, plus
back-pointers for reconstruction.  Weights are handled as exact integers
after rescaling by the common denominator; infeasible entries are an
explicit None, never a large number.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .decomposition import (
    ArcBoundary,
    RootedDecomposition,
    SphereCutDecomposition,
    validate_decomposition,
)
from .errors import DecompositionError
from .oracle import scaled_int_weights
from .plane import Instance, Solution, make_solution

CONFIGS = ("i", "o", "io", "oi", "oio", "ioi")
CONFIG_INDEX = {c: k for k, c in enumerate(CONFIGS)}


def collapse(letters: str) -> str:
    out = []
    for ch in letters:
        if not out or out[-1] != ch:
            out.append(ch)
    return "".join(out)


def compatible(x: str, y: str) -> bool:
    """Whether two configurations merge into a bimodal cyclic pattern:
    their concatenation, collapsed, is a substring of oio or ioi.  The
    concatenation order does not matter."""
    merged = collapse(x + y)
    return merged in "oio" or merged in "ioi"


def compatible_wrt(x: str, y: str, target: str) -> bool:
    """Whether x followed by y (order matters) collapses to a substring of
    the target configuration."""
    return collapse(x + y) in target


def realizes(pattern: str, config: str) -> bool:
    """Whether a dart direction sequence fits a configuration, i.e. its
    collapse is a substring of the configuration (empty always fits)."""
    p = collapse(pattern)
    return p == "" or p in config


_COMPAT = [[compatible(a, b) for b in CONFIGS] for a in CONFIGS]
_COMPAT_WRT = [[[compatible_wrt(a, b, t) for t in CONFIGS] for b in CONFIGS]
               for a in CONFIGS]
_POW6 = [6 ** k for k in range(20)]


@dataclass
class DPTable:
    """Per-arc table: one entry per configuration assignment on the middle
    set.

    Assignments are encoded in mixed radix: the vertex at position k of
    ``mid`` contributes config_index * 6**k.  ``costs`` holds the minimum
    scaled deleted weight (None if infeasible); ``back`` holds the leaf
    keep-flag or the chosen pair of child entry codes."""
    boundary: ArcBoundary
    mid: tuple[int, ...]
    costs: list[Optional[int]]
    back: list
    kind: str               # "leaf" or "join"
    edge: Optional[int] = None

    def assignment_of_code(self, code: int) -> dict[int, str]:
        return {v: CONFIGS[(code // _POW6[k]) % 6] for k, v in enumerate(self.mid)}

    def code_of_assignment(self, assignment: dict[int, str]) -> int:
        if sorted(assignment) != sorted(self.mid):
            raise KeyError(f"assignment domain must be exactly {self.mid}")
        return sum(CONFIG_INDEX[assignment[v]] * _POW6[k]
                   for k, v in enumerate(self.mid))

    def cost(self, assignment: dict[int, str]) -> Optional[int]:
        return self.costs[self.code_of_assignment(assignment)]


def leaf_table(instance: Instance, boundary: ArcBoundary, int_weights=None) -> DPTable:
    """Table for an arc whose inside is a single edge.

    Keeping the edge realizes an assignment iff each middle-set endpoint's
    configuration contains the letter of the edge's dart there (o at the
    tail, i at the head); deleting it realizes everything at cost w(e).
    Every entry is feasible."""
    if int_weights is None:
        int_weights, _ = scaled_int_weights(instance.weights)
    if len(boundary.inside_edges) != 1:
        raise DecompositionError("leaf_table needs a single-edge boundary")
    (e,) = boundary.inside_edges
    t, h = instance.graph.edges[e]
    mid = boundary.mid
    if not set(mid) <= {t, h}:
        raise DecompositionError("leaf boundary mid must consist of the edge endpoints")
    letters = {t: "o", h: "i"}
    size = _POW6[len(mid)]
    costs: list[Optional[int]] = [None] * size
    back = [False] * size
    w = int_weights[e]
    for code in range(size):
        ok = True
        c = code
        for v in mid:
            if letters[v] not in CONFIGS[c % 6]:
                ok = False
            c //= 6
        costs[code] = 0 if ok else w
        back[code] = ok
    return DPTable(boundary, mid, costs, back, "leaf", edge=e)


def _first_child_at(parent: ArcBoundary, b1: ArcBoundary, b2: ArcBoundary, v: int) -> int:
    """Which child's inside-dart run starts the parent run at v (1 or 2).

    The two child runs tile the parent run; clockwise from the outside
    gap, the child owning the parent run's first dart comes first."""
    s3 = parent.runs[v][0]
    if b1.runs[v][0] == s3:
        return 1
    if b2.runs[v][0] == s3:
        return 2
    raise DecompositionError(f"child runs at vertex {v} do not tile the parent run")


def join_tables(instance: Instance, parent: ArcBoundary, b1: ArcBoundary,
                b2: ArcBoundary, t1: DPTable, t2: DPTable,
                int_weights=None, loose: bool = False) -> DPTable:
    """Combine two child tables into the parent arc's table.

    Constraints per vertex: present in only one child, its configuration
    is forced to the parent's; shared by both children and on the parent
    middle set, the two child configurations taken in clockwise run order
    must be compatible with respect to the parent's; shared by both
    children but interior to the parent, they must be plain compatible,
    which certifies the vertex's cyclic bimodality once it disappears
    from all middle sets.  Only shared vertices are enumerated (a pair of
    configurations each), so a parent entry costs at most 6**(2*shared).

    ``loose`` ignores the refinement and enumerates all child entry pairs;
    it exists for differential testing."""
    if int_weights is None:
        int_weights, _ = scaled_int_weights(instance.weights)
    if b1.inside_edges | b2.inside_edges != parent.inside_edges or \
            (b1.inside_edges & b2.inside_edges):
        raise DecompositionError("child arcs must partition the parent inside")
    m1, m2, m3 = t1.mid, t2.mid, parent.mid
    set1, set2, set3 = set(m1), set(m2), set(m3)
    shared = tuple(sorted(set1 & set2))
    shared_set = set(shared)
    if not (set3 <= set1 | set2 and set1 - shared_set <= set3
            and set2 - shared_set <= set3):
        raise DecompositionError("arc middle sets are inconsistent")
    pos1 = {v: k for k, v in enumerate(m1)}
    pos2 = {v: k for k, v in enumerate(m2)}
    pos3 = {v: k for k, v in enumerate(m3)}
    size3 = _POW6[len(m3)]

    if loose:
        return _join_loose(parent, b1, b2, t1, t2)

    forced1 = [(pos3[v], _POW6[pos1[v]]) for v in m1 if v not in shared_set]
    forced2 = [(pos3[v], _POW6[pos2[v]]) for v in m2 if v not in shared_set]
    interior = [v for v in shared if v not in set3]
    on_parent = [v for v in shared if v in set3]
    order_first = {v: _first_child_at(parent, b1, b2, v) for v in on_parent}

    # valid child-configuration pairs per shared vertex; for vertices on the
    # parent middle set the valid set depends on the parent configuration
    inter_pairs = [(x1, x2) for x1 in range(6) for x2 in range(6) if _COMPAT[x1][x2]]
    bnd_pairs: dict[int, list[list[tuple[int, int]]]] = {}
    for v in on_parent:
        per_target = []
        for tgt in range(6):
            pairs = []
            for x1 in range(6):
                for x2 in range(6):
                    first, second = (x1, x2) if order_first[v] == 1 else (x2, x1)
                    if _COMPAT_WRT[first][second][tgt]:
                        pairs.append((x1, x2))
            per_target.append(pairs)
        bnd_pairs[v] = per_target

    on_positions = [pos3[v] for v in on_parent]
    rest_positions = [k for k in range(len(m3)) if k not in on_positions]
    c1, c2 = t1.costs, t2.costs
    costs: list[Optional[int]] = [None] * size3
    back: list = [None] * size3

    for outer in itertools.product(range(6), repeat=len(on_parent)):
        # combos valid for this choice of parent configs at shared vertices
        choice_lists = []
        for v in interior:
            choice_lists.append([(x1 * _POW6[pos1[v]], x2 * _POW6[pos2[v]])
                                 for x1, x2 in inter_pairs])
        for v, tgt in zip(on_parent, outer):
            choice_lists.append([(x1 * _POW6[pos1[v]], x2 * _POW6[pos2[v]])
                                 for x1, x2 in bnd_pairs[v][tgt]])
        combos = [(sum(d1 for d1, _ in pick), sum(d2 for _, d2 in pick))
                  for pick in itertools.product(*choice_lists)]
        outer_code = sum(t * _POW6[p] for t, p in zip(outer, on_positions))
        for inner in itertools.product(range(6), repeat=len(rest_positions)):
            code3 = outer_code + sum(x * _POW6[p] for x, p in zip(inner, rest_positions))
            base1 = 0
            base2 = 0
            if forced1 or forced2:
                cfg3 = [(code3 // _POW6[k]) % 6 for k in range(len(m3))]
                base1 = sum(cfg3[p] * w for p, w in forced1)
                base2 = sum(cfg3[p] * w for p, w in forced2)
            best = None
            best_bp = None
            for d1, d2 in combos:
                a = c1[base1 + d1]
                if a is None:
                    continue
                b = c2[base2 + d2]
                if b is None:
                    continue
                total = a + b
                if best is None or total < best:
                    best = total
                    best_bp = (base1 + d1, base2 + d2)
            costs[code3] = best
            back[code3] = best_bp
    return DPTable(parent, m3, costs, back, "join")


def _join_loose(parent: ArcBoundary, b1: ArcBoundary, b2: ArcBoundary,
                t1: DPTable, t2: DPTable) -> DPTable:
    """Reference join enumerating every pair of child entries."""
    m1, m2, m3 = t1.mid, t2.mid, parent.mid
    set3 = set(m3)
    shared = sorted(set(m1) & set(m2))
    order_first = {v: _first_child_at(parent, b1, b2, v)
                   for v in shared if v in set3}
    pos1 = {v: k for k, v in enumerate(m1)}
    pos2 = {v: k for k, v in enumerate(m2)}
    pos3 = {v: k for k, v in enumerate(m3)}
    size3 = _POW6[len(m3)]
    costs: list[Optional[int]] = [None] * size3
    back: list = [None] * size3
    for code3 in range(size3):
        cfg3 = [(code3 // _POW6[k]) % 6 for k in range(len(m3))]
        best, best_bp = None, None
        for code1 in range(len(t1.costs)):
            a = t1.costs[code1]
            if a is None:
                continue
            cfg1 = [(code1 // _POW6[k]) % 6 for k in range(len(m1))]
            if any(v not in shared and cfg1[pos1[v]] != cfg3[pos3[v]] for v in m1):
                continue
            for code2 in range(len(t2.costs)):
                b = t2.costs[code2]
                if b is None:
                    continue
                cfg2 = [(code2 // _POW6[k]) % 6 for k in range(len(m2))]
                if any(v not in shared and cfg2[pos2[v]] != cfg3[pos3[v]] for v in m2):
                    continue
                ok = True
                for v in shared:
                    x1, x2 = cfg1[pos1[v]], cfg2[pos2[v]]
                    if v in set3:
                        first, second = (x1, x2) if order_first[v] == 1 else (x2, x1)
                        if not _COMPAT_WRT[first][second][cfg3[pos3[v]]]:
                            ok = False
                            break
                    elif not _COMPAT[x1][x2]:
                        ok = False
                        break
                if not ok:
                    continue
                total = a + b
                if best is None or total < best:
                    best, best_bp = total, (code1, code2)
        costs[code3] = best
        back[code3] = best_bp
    return DPTable(parent, m3, costs, back, "join")


def solve_dp(instance: Instance, dec: SphereCutDecomposition,
             root_leaf: Optional[int] = None, loose: bool = False) -> Solution:
    """Exact optimum via bottom-up tables over a validated decomposition.

    An arbitrary mapped leaf is the root (lowest node id by default; the
    optimum is invariant under the choice).  With the root edge deleted,
    any boundary assignment of the root-adjacent arc serves; with it kept,
    the assignment is pinned to ioi at the root edge's head and oio at its
    tail, which the single outside dart then completes to a bimodal
    pattern.  The reconstructed subgraph is re-verified before returning."""
    g = instance.graph
    if not g.is_connected():
        raise DecompositionError("solve_dp expects a connected graph")
    if g.edge_count < 2:
        raise DecompositionError("graphs with fewer than 2 edges go to star_solve")
    report = validate_decomposition(g, dec)
    if not report.ok:
        raise DecompositionError("invalid decomposition: " + "; ".join(report.violations))
    if root_leaf is None:
        root_leaf = min(dec.leaf_map)
    rooted = RootedDecomposition(g, dec, root_leaf)
    int_w, scale = scaled_int_weights(instance.weights)

    boundaries: dict[int, ArcBoundary] = {}
    tables: dict[int, DPTable] = {}
    for node in rooted.post_order:
        boundary = rooted.boundary(node)
        boundaries[node] = boundary
        kids = rooted.children[node]
        if not kids:
            tables[node] = leaf_table(instance, boundary, int_w)
        else:
            a, b = kids
            tables[node] = join_tables(instance, boundary, boundaries[a],
                                       boundaries[b], tables[a], tables[b],
                                       int_w, loose=loose)

    top = rooted.children[root_leaf][0]
    ttop = tables[top]
    e_r = dec.leaf_map[root_leaf]
    tail_r, head_r = g.edges[e_r]

    delete_cost, delete_code = None, None
    for code, c in enumerate(ttop.costs):
        if c is None:
            continue
        if delete_cost is None or c < delete_cost:
            delete_cost, delete_code = c, code
    if delete_cost is not None:
        delete_cost += int_w[e_r]

    pinned = {head_r: "ioi", tail_r: "oio"}
    keep_code = ttop.code_of_assignment(
        {v: pinned[v] for v in ttop.mid})
    keep_cost = ttop.costs[keep_code]

    if delete_cost is None and keep_cost is None:
        raise DecompositionError("no feasible root entry; decomposition unusable")
    if keep_cost is not None and (delete_cost is None or keep_cost <= delete_cost):
        root_cost, root_code, root_deletes = keep_cost, keep_code, set()
    else:
        root_cost, root_code, root_deletes = delete_cost, delete_code, {e_r}

    deleted = set(root_deletes)
    stack = [(top, root_code)]
    while stack:
        node, code = stack.pop()
        table = tables[node]
        if table.kind == "leaf":
            if not table.back[code]:
                deleted.add(table.edge)
        else:
            bp = table.back[code]
            if bp is None:
                raise DecompositionError("reconstruction hit an infeasible entry")
            a, b = rooted.children[node]
            stack.append((a, bp[0]))
            stack.append((b, bp[1]))
    kept = set(range(g.edge_count)) - deleted
    solution = make_solution(instance, kept, "dp")
    if solution.deleted_weight != Fraction(root_cost, scale):
        raise DecompositionError(
            "reconstructed deletion weight disagrees with the table optimum")
    return solution
