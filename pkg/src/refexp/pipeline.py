"""Relation selection: threshold, per-category maxima, resemblance pruning, pick.

The stages run in a fixed order. A relation survives when no equally-typed
object pair offers the same category among the confident competitors; the
most informative survivor becomes the expression.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mlp import MlpModel
from .networks import score_scene
from .scene import (PipelineConfig, ReferringExpression, Scene, SpatialRelation,
                    render_phrase)


class EmptyCandidatesError(Exception):
    """No unambiguous relation is left for the target object."""


@dataclass(frozen=True)
class RelationSets:
    """Intermediate sets of the selection procedure, all deterministic tuples."""

    above_threshold: tuple[SpatialRelation, ...]
    from_target: tuple[SpatialRelation, ...]
    best_per_category: tuple[SpatialRelation, ...]
    competitors: tuple[SpatialRelation, ...]


def _sort_key(rel: SpatialRelation) -> tuple:
    return (rel.target_id, rel.reference_id, rel.category.index)


def _preference(rel: SpatialRelation) -> tuple:
    # Highest confidence wins; ties fall to the lowest reference id, then to
    # the canonical category order.
    return (rel.confidence, -rel.reference_id, -rel.category.index)


def build_candidate_sets(relations, target_id: int, cfg: PipelineConfig = PipelineConfig()) -> RelationSets:
    """Threshold the scored relations and reduce them to per-category maxima.

    The probability test is strictly greater-than, so a relation sitting
    exactly at the threshold is excluded.
    """
    above = tuple(sorted((r for r in relations if r.probability > cfg.presence_threshold),
                         key=_sort_key))
    from_target = tuple(r for r in above if r.target_id == target_id)
    best: dict[tuple, SpatialRelation] = {}
    for rel in above:
        key = (rel.target_id, rel.category)
        held = best.get(key)
        if held is None or _preference(rel) > _preference(held):
            best[key] = rel
    best_per_category = tuple(sorted(best.values(), key=_sort_key))
    competitors = tuple(r for r in best_per_category if r.target_id != target_id)
    return RelationSets(above, from_target, best_per_category, competitors)


def eliminate_ambiguous(sets: RelationSets, scene: Scene) -> tuple[SpatialRelation, ...]:
    """Drop every target relation that a competitor mirrors type-for-type.

    A single pass against the original competitor set; removals never cascade.
    """
    type_of = {obj.id: obj.type_name for obj in scene.objects}
    taken = {(type_of[r.target_id], type_of[r.reference_id], r.category) for r in sets.competitors}
    return tuple(r for r in sets.from_target
                 if (type_of[r.target_id], type_of[r.reference_id], r.category) not in taken)


def select_relation(candidates) -> SpatialRelation:
    """Most confident candidate; deterministic tie-breaks; error when empty."""
    candidates = tuple(candidates)
    if not candidates:
        raise EmptyCandidatesError("every candidate relation was pruned or below threshold")
    return max(candidates, key=_preference)


def describe(rpn: MlpModel, rin: MlpModel, scene: Scene, target_id: int,
             cfg: PipelineConfig = PipelineConfig()) -> ReferringExpression:
    """Full pipeline: score the scene, prune ambiguity, render the phrase."""
    scene.object_by_id(target_id)
    relations = score_scene(rpn, rin, scene)
    sets = build_candidate_sets(relations, target_id, cfg)
    pruned = eliminate_ambiguous(sets, scene)
    chosen = select_relation(pruned)
    target = scene.object_by_id(chosen.target_id)
    reference = scene.object_by_id(chosen.reference_id)
    return ReferringExpression(chosen.target_id, chosen.reference_id, chosen.category,
                               render_phrase(target, reference, chosen.category))


def describe_oracle(rpn: MlpModel, rin: MlpModel, scene: Scene, target_id: int,
                    cfg: PipelineConfig = PipelineConfig()) -> ReferringExpression:
    """Brute-force re-derivation of describe, kept deliberately naive.

    Shares only the scene scoring with the main path; the selection logic is
    re-implemented with plain loops as a cross-check.
    """
    scene.object_by_id(target_id)
    threshold = cfg.presence_threshold
    held: dict[tuple, SpatialRelation] = {}
    for rel in score_scene(rpn, rin, scene):
        if rel.probability > threshold:
            held[(rel.target_id, rel.reference_id, rel.category)] = rel

    ids = scene.object_ids()
    best: dict[tuple, SpatialRelation] = {}
    for i in ids:
        for cat in sorted({c for (_, _, c) in held}, key=lambda c: c.index):
            winner = None
            for j in ids:
                rel = held.get((i, j, cat))
                if rel is None:
                    continue
                if winner is None:
                    winner = rel
                elif rel.confidence > winner.confidence:
                    winner = rel
                elif rel.confidence == winner.confidence and rel.reference_id < winner.reference_id:
                    winner = rel
            if winner is not None:
                best[(i, cat)] = winner

    def type_name(oid: int) -> str:
        return scene.object_by_id(oid).type_name

    survivors = []
    for (i, j, cat), rel in held.items():
        if i != target_id:
            continue
        mirrored = False
        for (u, ucat), comp in best.items():
            if u == target_id:
                continue
            if (ucat is cat and type_name(u) == type_name(i)
                    and type_name(comp.reference_id) == type_name(j)):
                mirrored = True
                break
        if not mirrored:
            survivors.append(rel)

    if not survivors:
        raise EmptyCandidatesError("every candidate relation was pruned or below threshold")
    chosen = survivors[0]
    for rel in survivors[1:]:
        if rel.confidence > chosen.confidence:
            chosen = rel
        elif rel.confidence == chosen.confidence:
            if rel.reference_id < chosen.reference_id:
                chosen = rel
            elif rel.reference_id == chosen.reference_id and rel.category.index < chosen.category.index:
                chosen = rel
    target = scene.object_by_id(chosen.target_id)
    reference = scene.object_by_id(chosen.reference_id)
    return ReferringExpression(chosen.target_id, chosen.reference_id, chosen.category,
                               render_phrase(target, reference, chosen.category))
