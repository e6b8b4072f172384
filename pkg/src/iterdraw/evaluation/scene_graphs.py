"""Scene graphs over detections and the relational similarity metric."""

from __future__ import annotations

from typing import Dict, Tuple

from ..core.types import (BEHIND, CENTER, IN_FRONT_OF, LEFT_OF, RIGHT_OF,
                          DetectionSet, SceneGraph)


def build_scene_graph(det: DetectionSet, canvas_side: int) -> SceneGraph:
    """Vertices are detected classes plus the image center; directed edges
    come from strict coordinate comparisons (ties emit no edge)."""
    positions: Dict[int, Tuple[float, float]] = {
        c: det.centroids[c] for c in det.detected()}
    positions[CENTER] = (canvas_side / 2.0, canvas_side / 2.0)
    vertices = frozenset(positions)
    edges = set()
    items = sorted(positions.items())
    for i, (a, (ax, ay)) in enumerate(items):
        for b, (bx, by) in items[i + 1:]:
            if ax < bx:
                edges.add((a, b, LEFT_OF))
                edges.add((b, a, RIGHT_OF))
            elif ax > bx:
                edges.add((a, b, RIGHT_OF))
                edges.add((b, a, LEFT_OF))
            if ay < by:
                edges.add((a, b, BEHIND))
                edges.add((b, a, IN_FRONT_OF))
            elif ay > by:
                edges.add((a, b, IN_FRONT_OF))
                edges.add((b, a, BEHIND))
    return SceneGraph(vertices=vertices, edges=frozenset(edges))


def rel_sim(gt_graph: SceneGraph, gen_graph: SceneGraph) -> float:
    """Recall-weighted fraction of ground-truth relational edges recovered,
    restricted to vertices common to both graphs (plus the center)."""
    gt_objects = gt_graph.object_vertices
    gen_objects = gen_graph.object_vertices
    common = gt_objects & gen_objects
    recall = len(common) / len(gt_objects) if gt_objects else 1.0
    keep = common | {CENTER}
    gt_edges = {e for e in gt_graph.edges if e[0] in keep and e[1] in keep}
    gen_edges = {e for e in gen_graph.edges if e[0] in keep and e[1] in keep}
    if not gt_edges:
        return 0.0 if not common else recall
    return recall * len(gen_edges & gt_edges) / len(gt_edges)
