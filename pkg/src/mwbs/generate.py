"""Seeded random instance generation.

Instances are built as combinatorial objects only: a random planar
triangulation is grown by repeatedly inserting a fresh vertex into a
randomly chosen triangular face and wiring its three new darts into the
rotation system at the exact face corners.  Optionally the edge set is
subsampled (keeping a spanning tree, so connectivity is preserved), then
every edge is oriented by a seeded biased coin and given a seeded rational
weight.  Identical parameters always yield byte-identical documents.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import FormatError
from .plane import HEAD, TAIL, Instance, PlaneDigraph, dart, dart_edge, dart_end


@dataclass(frozen=True)
class GenParams:
    n: int
    seed: int
    orientation_bias: Fraction = Fraction(1, 2)
    weight_lo: Fraction = Fraction(1)
    weight_hi: Fraction = Fraction(9)
    density: str = "triangulation"      # "triangulation" | "sparse"
    sparse_p: Fraction = Fraction(1, 2)  # chord keep probability for "sparse"

    def validate(self):
        if self.n < 1:
            raise FormatError("n must be at least 1")
        if not (0 <= self.orientation_bias <= 1):
            raise FormatError("orientation_bias must lie in [0, 1]")
        if self.weight_lo <= 0 or self.weight_hi < self.weight_lo:
            raise FormatError("weight range must satisfy 0 < lo <= hi")
        if self.density not in ("triangulation", "sparse"):
            raise FormatError(f"unknown density {self.density!r}")
        if not (0 <= self.sparse_p <= 1):
            raise FormatError("sparse_p must lie in [0, 1]")


def _trace_faces(edge_count: int, rotation: list[list[int]]) -> list[list[int]]:
    dart_vertex = {}
    dart_pos = {}
    for v, row in enumerate(rotation):
        for pos, d in enumerate(row):
            dart_vertex[d] = v
            dart_pos[d] = pos
    faces = []
    seen = {}
    for start in range(2 * edge_count):
        if start in seen:
            continue
        face = []
        d = start
        while d not in seen:
            seen[d] = True
            face.append(d)
            t = d ^ 1
            v = dart_vertex[t]
            row = rotation[v]
            d = row[(dart_pos[t] + 1) % len(row)]
        faces.append(face)
    return faces


def _grow_triangulation(n: int, rng: random.Random):
    """Rotation system of a random planar triangulation on n >= 3 vertices.

    Edges are undirected here, stored as (a, b) with dart 2e+0 at a and
    2e+1 at b.  Each insertion picks a face, splits it into three, and
    keeps every face a triangle, so the Euler count is invariant."""
    edges = [(0, 1), (1, 2), (2, 0)]
    rotation = [
        [dart(0, 0), dart(2, 1)],
        [dart(1, 0), dart(0, 1)],
        [dart(2, 0), dart(1, 1)],
    ]
    for x in range(3, n):
        faces = _trace_faces(len(edges), rotation)
        face = faces[rng.randrange(len(faces))]
        corners = list(face)
        hosts = [edges[dart_edge(d)][dart_end(d)] for d in corners]
        u1, u2, u3 = hosts
        base = len(edges)
        # edge base+k joins host k+1 and x; new dart at the host sits in the
        # face corner, which is immediately before the face dart there
        g = [dart(base, 0), dart(base + 1, 0), dart(base + 2, 0)]
        h = [dart(base, 1), dart(base + 1, 1), dart(base + 2, 1)]
        edges.extend([(u1, x), (u2, x), (u3, x)])
        for k, (host, d) in enumerate(zip(hosts, corners)):
            rotation[host].insert(rotation[host].index(d), g[k])
        rotation.append([h[0], h[2], h[1]])
    return edges, rotation


def _spanning_tree(n: int, edges, order) -> set[int]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = set()
    for e in order:
        a, b = edges[e]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            tree.add(e)
    return tree


def _coin(rng: random.Random, p: Fraction) -> bool:
    if p == 1:
        return True
    return rng.randrange(p.denominator) < p.numerator


def _random_weight(rng: random.Random, lo: Fraction, hi: Fraction) -> Fraction:
    for _ in range(64):
        q = rng.randint(1, 6)
        lo_n = -((-lo.numerator * q) // lo.denominator)   # ceil(lo*q)
        hi_n = (hi.numerator * q) // hi.denominator       # floor(hi*q)
        if lo_n <= hi_n:
            return Fraction(rng.randint(lo_n, hi_n), q)
    raise FormatError(f"weight range [{lo}, {hi}] contains no small rational")


def gen_instance(params: GenParams) -> Instance:
    """Deterministically generate an instance from params."""
    params.validate()
    rng = random.Random(params.seed)
    n = params.n
    if n == 1:
        und_edges, rotation = [], [[]]
    elif n == 2:
        und_edges, rotation = [(0, 1)], [[dart(0, 0)], [dart(0, 1)]]
    else:
        und_edges, rotation = _grow_triangulation(n, rng)

    keep = list(range(len(und_edges)))
    if params.density == "sparse" and len(und_edges) > 1:
        order = list(range(len(und_edges)))
        rng.shuffle(order)
        tree = _spanning_tree(n, und_edges, order)
        keep = [e for e in range(len(und_edges))
                if e in tree or _coin(rng, params.sparse_p)]

    emap = {e: j for j, e in enumerate(keep)}
    # orient: decision per kept edge, in old id order, on (min, max) endpoints
    directed = []
    for e in keep:
        a, b = und_edges[e]
        lo, hi = min(a, b), max(a, b)
        directed.append((lo, hi) if _coin(rng, params.orientation_bias) else (hi, lo))

    new_rotation = []
    for row in rotation:
        new_row = []
        for d in row:
            e = dart_edge(d)
            if e not in emap:
                continue
            endpoint = und_edges[e][dart_end(d)]
            tail, _head = directed[emap[e]]
            new_row.append(dart(emap[e], TAIL if endpoint == tail else HEAD))
        new_rotation.append(new_row)

    weights = tuple(_random_weight(rng, params.weight_lo, params.weight_hi)
                    for _ in keep)
    graph = PlaneDigraph(n, directed, new_rotation)
    return Instance(graph, weights)


def planted_star_instance(n: int, seed: int, stars: int,
                          weight_lo: Fraction = Fraction(1),
                          weight_hi: Fraction = Fraction(9)) -> Instance:
    """A bimodal host with a controlled number of non-bimodal vertices.

    The host is a random spanning tree of a triangulation, oriented away
    from vertex 0 (which makes every vertex bimodal: one in-edge at most).
    At up to ``stars`` pairwise non-adjacent high-degree vertices the
    incident edge directions are re-dealt alternately around the rotation,
    with the phase chosen so the parent edge keeps pointing inward; that
    turns exactly those vertices non-bimodal and nobody else."""
    rng = random.Random(seed)
    if n < 8:
        raise FormatError("planted instances need n >= 8")
    und_edges, rotation = _grow_triangulation(n, rng)
    order = list(range(len(und_edges)))
    rng.shuffle(order)
    tree = sorted(_spanning_tree(n, und_edges, order))
    emap = {e: j for j, e in enumerate(tree)}

    # parent orientation via BFS from 0 over tree edges
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(n)}
    for e in tree:
        a, b = und_edges[e]
        adj[a].append((b, e))
        adj[b].append((a, e))
    parent_edge = {0: None}
    queue = [0]
    directed: dict[int, tuple[int, int]] = {}
    while queue:
        v = queue.pop(0)
        for u, e in adj[v]:
            if u not in parent_edge:
                parent_edge[u] = e
                directed[emap[e]] = (v, u)
                queue.append(u)

    new_rotation = []
    for row in rotation:
        new_row = []
        for d in row:
            e = dart_edge(d)
            if e not in emap:
                continue
            endpoint = und_edges[e][dart_end(d)]
            tail, _ = directed[emap[e]]
            new_row.append(dart(emap[e], TAIL if endpoint == tail else HEAD))
        new_rotation.append(new_row)

    # choose plant sites: non-adjacent tree vertices of degree >= 4
    degree = [len(new_rotation[v]) for v in range(n)]
    sites: list[int] = []
    blocked: set[int] = set()
    for v in sorted(range(1, n), key=lambda v: (-degree[v], v)):
        if degree[v] >= 4 and v not in blocked and len(sites) < stars:
            sites.append(v)
            blocked.add(v)
            blocked.update(u for u, _ in adj[v])
    for v in sites:
        row = new_rotation[v]
        pe = emap[parent_edge[v]]
        parent_pos = next(j for j, d in enumerate(row) if dart_edge(d) == pe)
        for j, d in enumerate(row):
            e = dart_edge(d)
            want_in = (j - parent_pos) % 2 == 0  # parent dart stays incoming
            t, h = directed[e]
            other = h if t == v else t
            directed[e] = (other, v) if want_in else (v, other)
    # rebuild darts with final orientations
    final_rotation = []
    for v, row in enumerate(new_rotation):
        final_row = []
        for d in row:
            e = dart_edge(d)
            tail, _ = directed[e]
            final_row.append(dart(e, TAIL if v == tail else HEAD))
        final_rotation.append(final_row)
    edges = [directed[j] for j in range(len(tree))]
    weights = tuple(_random_weight(rng, weight_lo, weight_hi) for _ in tree)
    graph = PlaneDigraph(n, edges, final_rotation)
    instance = Instance(graph, weights)
    assert set(graph.bad_vertices()) == set(sites)
    return instance
