"""Layer-based approximation schemes (shifting technique).

Both schemes partition each component's vertices into breadth-first
layers.  The maximization scheme deletes, for one residue class of layer
indices, every edge joining consecutive layers there; whatever remains
falls apart into bands of few layers, is solved exactly, and the union of
the band optima is bimodal.  Some residue loses at most a 1/t fraction of
the optimum, so the best residue is a (1 - eps)-approximation with
t = ceil(1/eps).

The minimization scheme cannot simply delete boundary edges (deleting is
what is being charged), so boundary edges are copied into both adjacent
bands as pendant edges on split degree-one vertices.  Solving each band
exactly and deleting every edge with a deleted copy yields a feasible
deletion set of cost at most (1 + 2/t) times the optimum; t = ceil(2/eps)
gives the (1 + eps) guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import EmbeddingError, FormatError
from .kernel import solve_subexponential
from .plane import (
    Instance,
    format_weight,
    PlaneDigraph,
    Solution,
    dart,
    dart_edge,
    dart_end,
    make_solution,
    subgraph_by_edges,
)


@dataclass(frozen=True)
class LayerDecomposition:
    """Vertices grouped by undirected breadth-first distance from a root."""
    root: int
    layers: tuple[tuple[int, ...], ...]
    layer_of: tuple[int, ...]

    def boundary_edges(self, graph: PlaneDigraph, t: int, residue: int) -> set[int]:
        """Edges between layers j and j+1 with j = residue (mod t)."""
        out = set()
        for e, (u, v) in enumerate(graph.edges):
            lo, hi = sorted((self.layer_of[u], self.layer_of[v]))
            if hi - lo == 1 and lo % t == residue:
                out.add(e)
        return out


def bfs_layers(graph: PlaneDigraph, root: int) -> LayerDecomposition:
    """Undirected BFS distance classes from the root (graph must be
    connected); no edge ever skips a layer."""
    n = graph.vertex_count
    dist = [-1] * n
    dist[root] = 0
    queue = [root]
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        for d in graph.rotation[v]:
            u = graph.other_endpoint(d)
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    if any(x < 0 for x in dist):
        raise EmbeddingError("bfs_layers needs a connected graph")
    layers: list[list[int]] = [[] for _ in range(max(dist) + 1)]
    for v in range(n):
        layers[dist[v]].append(v)
    return LayerDecomposition(root, tuple(tuple(l) for l in layers), tuple(dist))


def _check_epsilon(eps) -> Fraction:
    eps = Fraction(eps)
    if not (0 < eps <= 1):
        raise FormatError("epsilon must satisfy 0 < eps <= 1")
    return eps


def eptas_max(instance: Instance, eps) -> tuple[Solution, dict]:
    """Keep at least a (1 - eps) fraction of the optimal weight.

    Per component and residue class: drop the residue's inter-layer edges,
    solve the rest exactly, take the best residue (lowest index on ties).
    The report records the per-residue values and the guarantee factor."""
    eps = _check_epsilon(eps)
    t = math.ceil(1 / eps)
    g = instance.graph
    kept: set[int] = set()
    residue_totals = [Fraction(0)] * t
    chosen: list[int] = []
    for verts, comp_edges in g.components():
        if not comp_edges:
            continue
        sub, _vids, eids = subgraph_by_edges(instance, comp_edges)
        layers = bfs_layers(sub.graph, 0)
        best_kept: Optional[set[int]] = None
        best_value: Optional[Fraction] = None
        best_residue = 0
        for i in range(t):
            cut = layers.boundary_edges(sub.graph, t, i)
            remainder = [e for e in range(sub.graph.edge_count) if e not in cut]
            value = Fraction(0)
            kept_here: set[int] = set()
            if remainder:
                piece, _pvids, peids = subgraph_by_edges(sub, remainder)
                sol = solve_subexponential(piece)
                value = sol.kept_weight
                kept_here = {peids[j] for j in sol.kept_edges}
            residue_totals[i] += value
            if best_value is None or value > best_value:
                best_value, best_kept, best_residue = value, kept_here, i
        kept.update(eids[j] for j in best_kept)
        chosen.append(best_residue)
    solution = make_solution(instance, kept, "eptas-max")
    report = {
        "epsilon": format_weight(eps),
        "shift_width": t,
        "guarantee_factor": format_weight(1 - Fraction(1, t)),
        "per_residue_kept": [format_weight(w) for w in residue_totals],
        "chosen_residues": chosen,
    }
    return solution, report


@dataclass(frozen=True)
class SplitLayerGraph:
    """One band of consecutive layers with boundary vertices split to
    degree one.  ``vertex_ids`` maps band vertices to originals (-1 for
    split copies); ``edge_orig`` maps band edges to original edge ids.
    Interior vertices keep their rotation unchanged."""
    instance: Instance
    band: tuple[int, int]              # inclusive layer range
    vertex_ids: tuple[int, ...]
    edge_orig: tuple[int, ...]


def split_layer_graphs(instance: Instance, layers: LayerDecomposition,
                       residue: int, t: int) -> list[SplitLayerGraph]:
    """Cut the layer sequence after indices = residue (mod t) and build one
    graph per band.  Every edge across a cut appears as a pendant copy in
    both adjacent bands; every other edge appears exactly once."""
    g = instance.graph
    depth = len(layers.layers)
    cuts = [c for c in range(residue, depth - 1, t)]
    bounds = []
    lo = 0
    for c in cuts:
        bounds.append((lo, c))
        lo = c + 1
    bounds.append((lo, depth - 1))
    out = []
    for lo, hi in bounds:
        real = sorted(v for layer in layers.layers[lo:hi + 1] for v in layer)
        if not real:
            continue
        vmap = {v: j for j, v in enumerate(real)}
        vertex_ids = list(real)
        edges: list[tuple[int, int]] = []
        weights: list[Fraction] = []
        edge_orig: list[int] = []
        emap: dict[int, int] = {}
        rotation: list[list[int]] = [[] for _ in real]

        def band_edge(e: int) -> int:
            if e not in emap:
                emap[e] = len(edges)
                edges.append(g.edges[e])   # endpoints fixed later
                weights.append(instance.weights[e])
                edge_orig.append(e)
            return emap[e]

        pending_fix: list[tuple[int, int, int]] = []  # (band edge, end, band vertex)
        for v in real:
            for d in g.rotation[v]:
                e = dart_edge(d)
                u = g.other_endpoint(d)
                if u in vmap:
                    be = band_edge(e)
                    pending_fix.append((be, dart_end(d), vmap[v]))
                    rotation[vmap[v]].append(dart(be, dart_end(d)))
                else:
                    lu, lv = layers.layer_of[u], layers.layer_of[v]
                    clo = min(lu, lv)
                    if abs(lu - lv) != 1 or clo % t != residue:
                        raise EmbeddingError("edge leaves the band without crossing a cut")
                    be = len(edges)
                    edges.append((0, 0))
                    weights.append(instance.weights[e])
                    edge_orig.append(e)
                    split = len(vertex_ids)
                    vertex_ids.append(-1)
                    rotation.append([dart(be, dart_end(d) ^ 1)])
                    pending_fix.append((be, dart_end(d), vmap[v]))
                    pending_fix.append((be, dart_end(d) ^ 1, split))
                    rotation[vmap[v]].append(dart(be, dart_end(d)))
        fixed: list[list[int]] = [[-1, -1] for _ in edges]
        for be, end, bv in pending_fix:
            fixed[be][end] = bv
        band_instance = Instance(
            PlaneDigraph(len(vertex_ids), [tuple(p) for p in fixed], rotation),
            tuple(weights))
        out.append(SplitLayerGraph(band_instance, (lo, hi),
                                   tuple(vertex_ids), tuple(edge_orig)))
    return out


def eptas_min(instance: Instance, eps) -> tuple[set[int], Fraction, dict]:
    """Deletion set of weight at most (1 + eps) times the minimum.

    Per component and residue: solve every band exactly and delete each
    original edge with at least one deleted copy.  Feasibility of the
    combined deletion is unconditional; only the cost is approximate."""
    eps = _check_epsilon(eps)
    t = math.ceil(2 / eps)
    g = instance.graph
    deleted: set[int] = set()
    total = Fraction(0)
    chosen: list[int] = []
    per_residue: list[Fraction] = [Fraction(0)] * t
    for verts, comp_edges in g.components():
        if not comp_edges:
            continue
        sub, _vids, eids = subgraph_by_edges(instance, comp_edges)
        layers = bfs_layers(sub.graph, 0)
        best_f: Optional[set[int]] = None
        best_cost: Optional[Fraction] = None
        best_residue = 0
        for i in range(t):
            bands = split_layer_graphs(sub, layers, i, t)
            f: set[int] = set()
            for band in bands:
                sol = solve_subexponential(band.instance)
                for be in range(band.instance.graph.edge_count):
                    if be not in sol.kept_edges:
                        f.add(band.edge_orig[be])
            cost = sum((sub.weights[e] for e in f), Fraction(0))
            kept_check = set(range(sub.graph.edge_count)) - f
            if sub.graph.bad_vertices(kept_check):
                raise EmbeddingError("mapped-back deletion set is not feasible")
            per_residue[i] += cost
            if best_cost is None or cost < best_cost:
                best_cost, best_f, best_residue = cost, f, i
        deleted.update(eids[e] for e in best_f)
        total += best_cost
        chosen.append(best_residue)
    report = {
        "epsilon": format_weight(eps),
        "shift_width": t,
        "guarantee_factor": format_weight(1 + Fraction(2, t)),
        "per_residue_cost": [format_weight(w) for w in per_residue],
        "chosen_residues": chosen,
    }
    return deleted, total, report
