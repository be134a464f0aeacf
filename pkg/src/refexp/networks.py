"""Feature encoding and the two learned scorers.

The presence net maps an object pair to a distribution over the six
categories; the informativeness net maps a pair plus a one-hot category to a
confidence that the relation helps a listener. Inputs are box geometry
normalized by the image size, so models transfer across image dimensions.
"""

from __future__ import annotations

import numpy as np

from .mlp import LayerSpec, MlpModel
from .scene import CATEGORIES, RelationCategory, Scene, SpatialRelation

PAIR_FEATURE_DIM = 8
# Pair features plus the six-way one-hot. The sources print "12" for this
# dimension while also pinning the 8-real pair prefix and the 6-way one-hot
# suffix; the composition wins and the stated hidden sizes are kept.
RIN_FEATURE_DIM = PAIR_FEATURE_DIM + len(CATEGORIES)

RPN_DIMS = (PAIR_FEATURE_DIM, 32, 16, len(CATEGORIES))
RIN_DIMS = (RIN_FEATURE_DIM, 64, 16, 8, 1)


class NetworkShapeError(ValueError):
    """A model does not have the architecture an operation requires."""


def rpn_layer_specs() -> list[LayerSpec]:
    return [
        LayerSpec(RPN_DIMS[0], RPN_DIMS[1], "relu"),
        LayerSpec(RPN_DIMS[1], RPN_DIMS[2], "relu"),
        LayerSpec(RPN_DIMS[2], RPN_DIMS[3], "softmax"),
    ]


def rin_layer_specs() -> list[LayerSpec]:
    return [
        LayerSpec(RIN_DIMS[0], RIN_DIMS[1], "relu"),
        LayerSpec(RIN_DIMS[1], RIN_DIMS[2], "relu"),
        LayerSpec(RIN_DIMS[2], RIN_DIMS[3], "relu"),
        LayerSpec(RIN_DIMS[3], RIN_DIMS[4], "sigmoid"),
    ]


def _check_shape(model: MlpModel, dims: tuple[int, ...], activations: tuple[str, ...], name: str) -> None:
    if model.layer_dims != dims or tuple(model.activations) != activations:
        raise NetworkShapeError(
            f"{name} model must have layers {'/'.join(map(str, dims))} with activations "
            f"{', '.join(activations)}; got {'/'.join(map(str, model.layer_dims))} with "
            f"{', '.join(model.activations)}")


def validate_rpn(model: MlpModel) -> None:
    _check_shape(model, RPN_DIMS, ("relu", "relu", "softmax"), "presence")


def validate_rin(model: MlpModel) -> None:
    _check_shape(model, RIN_DIMS, ("relu", "relu", "relu", "sigmoid"), "informativeness")


def encode_pair(scene: Scene, target_id: int, reference_id: int) -> np.ndarray:
    """Normalized (x, y, w, h) of target then reference, clamped into [0, 1]."""
    if target_id == reference_id:
        raise ValueError("target and reference must be distinct objects")
    target = scene.object_by_id(target_id)
    reference = scene.object_by_id(reference_id)
    w, h = scene.image_width, scene.image_height
    raw = np.array([
        target.box.x / w, target.box.y / h, target.box.w / w, target.box.h / h,
        reference.box.x / w, reference.box.y / h, reference.box.w / w, reference.box.h / h,
    ])
    return np.clip(raw, 0.0, 1.0)


def encode_relation(scene: Scene, target_id: int, reference_id: int,
                    category: RelationCategory) -> np.ndarray:
    """Pair features followed by the one-hot category vector."""
    features = np.zeros(RIN_FEATURE_DIM)
    features[:PAIR_FEATURE_DIM] = encode_pair(scene, target_id, reference_id)
    features[PAIR_FEATURE_DIM + category.index] = 1.0
    return features


def rpn_probabilities(model: MlpModel, scene: Scene, target_id: int,
                      reference_id: int) -> dict[RelationCategory, float]:
    validate_rpn(model)
    out = model.forward(encode_pair(scene, target_id, reference_id))
    return {cat: float(out[cat.index]) for cat in CATEGORIES}


def rin_confidence(model: MlpModel, scene: Scene, target_id: int, reference_id: int,
                   category: RelationCategory) -> float:
    validate_rin(model)
    return float(model.forward(encode_relation(scene, target_id, reference_id, category))[0])


def score_scene(rpn: MlpModel, rin: MlpModel, scene: Scene) -> list[SpatialRelation]:
    """Every ordered pair crossed with every category, scored by both nets.

    Output order is (target_id, reference_id, category index), so the result
    is independent of the storage order of the scene's objects.
    """
    validate_rpn(rpn)
    validate_rin(rin)
    ids = scene.object_ids()
    if len(ids) < 2:
        raise ValueError("scene must contain at least 2 objects")
    pairs = [(a, b) for a in ids for b in ids if a != b]

    pair_features = np.stack([encode_pair(scene, a, b) for a, b in pairs])
    probabilities = rpn.forward_batch(pair_features)

    n_cat = len(CATEGORIES)
    rin_features = np.zeros((len(pairs) * n_cat, RIN_FEATURE_DIM))
    rin_features[:, :PAIR_FEATURE_DIM] = np.repeat(pair_features, n_cat, axis=0)
    rin_features[:, PAIR_FEATURE_DIM:] = np.tile(np.eye(n_cat), (len(pairs), 1))
    confidences = rin.forward_batch(rin_features)[:, 0]

    relations = []
    for p, (a, b) in enumerate(pairs):
        for cat in CATEGORIES:
            relations.append(SpatialRelation(
                a, b, cat,
                probability=float(probabilities[p, cat.index]),
                confidence=float(confidences[p * n_cat + cat.index]),
            ))
    return relations
