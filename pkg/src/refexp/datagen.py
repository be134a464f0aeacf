"""Training-data construction: annotation extraction and synthetic generation.

Two sources feed the scorers: relationship annotations in the common visual
genome JSON layout, and seeded synthetic scenes labeled by the box rules.
Datasets are balanced per category with caps applied by seeded sampling, and
every emitted feature vector re-derives bit-exactly from its source boxes.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .networks import encode_pair, encode_relation
from .rules import rule_holds, rule_margins
from .scene import (CATEGORIES, BoundingBox, RelationCategory, Scene, SceneFormatError,
                    SceneObject, clamp_box, scene_from_json, scene_to_json)

logger = logging.getLogger(__name__)


class DatasetFormatError(ValueError):
    """An annotation or dataset file is malformed."""


@dataclass(frozen=True, eq=False)
class RpnSample:
    features: np.ndarray  # 8 pair features
    label: RelationCategory


@dataclass(frozen=True, eq=False)
class RinSample:
    features: np.ndarray  # pair features plus one-hot category
    label: bool


DEFAULT_TYPE_POOL = ("book", "cup", "mouse", "bottle", "plate", "bowl",
                     "keyboard", "phone", "laptop", "vase", "ball", "remote")


@dataclass(frozen=True)
class SceneGenSpec:
    """Knobs for the seeded synthetic scene generator."""

    object_type_pool: tuple[str, ...] = DEFAULT_TYPE_POOL
    min_objects: int = 3
    max_objects: int = 7
    duplicate_type_probability: float = 0.5
    image_width: float = 640.0
    image_height: float = 480.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "object_type_pool", tuple(self.object_type_pool))
        if self.min_objects < 2 or self.max_objects < self.min_objects:
            raise ValueError("need min_objects >= 2 and max_objects >= min_objects")
        if len(self.object_type_pool) < self.max_objects:
            raise ValueError("object_type_pool must hold at least max_objects distinct types")
        if not (0.0 <= self.duplicate_type_probability <= 1.0):
            raise ValueError("duplicate_type_probability must lie in [0, 1]")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image dimensions must be positive")


def _random_scene(spec: SceneGenSpec, rng: np.random.Generator) -> Scene:
    n = int(rng.integers(spec.min_objects, spec.max_objects + 1))
    names = [str(t) for t in rng.choice(np.asarray(spec.object_type_pool), size=n, replace=False)]
    if rng.random() < spec.duplicate_type_probability:
        # the ambiguity driver: force at least one repeated type
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        names[j] = names[i]
    objects = []
    for oid in range(n):
        w = rng.uniform(0.05, 0.35) * spec.image_width
        h = rng.uniform(0.05, 0.35) * spec.image_height
        x = rng.uniform(0.0, spec.image_width - w)
        y = rng.uniform(0.0, spec.image_height - h)
        objects.append(SceneObject(oid, names[oid], BoundingBox(x, y, w, h)))
    return Scene(spec.image_width, spec.image_height, tuple(objects))


def generate_scenes(spec: SceneGenSpec, count: int) -> list[Scene]:
    """Seeded batch of synthetic scenes; identical spec and count reproduce bits."""
    if count <= 0:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(spec.seed)
    return [_random_scene(spec, rng) for _ in range(count)]


def _share(total: int, buckets: int) -> list[int]:
    base, rem = divmod(total, buckets)
    return [base + 1 if i < rem else base for i in range(buckets)]


_SCENE_BUDGET = 200_000

# emission filters: only clear cases enter the datasets, so the mapping from
# features to label is single-valued and the learnability bars are honest
RPN_MARGIN_GAP = 0.08
RIN_NEAR_DISTANCE = 0.30
RIN_FAR_DISTANCE = 0.40


def _clear_dominant(scene: Scene, target: SceneObject,
                    reference: SceneObject) -> RelationCategory | None:
    """Dominant firing rule, but only when it beats the runner-up cleanly."""
    margins = rule_margins(target.box, reference.box,
                           scene.image_width, scene.image_height)
    if not margins:
        return None
    ordered = sorted(margins.items(), key=lambda kv: (-kv[1], kv[0].index))
    runner_up = ordered[1][1] if len(ordered) > 1 else 0.0
    if ordered[0][1] - runner_up < RPN_MARGIN_GAP:
        return None
    return ordered[0][0]


def _archetype_pair_scene(spec: SceneGenSpec, rng: np.random.Generator,
                          archetype: int) -> Scene:
    """Two-object scene exercising one relation axis at a random image position.

    0: side-by-side boxes (left/right), 1: stacked boxes (in-front/behind),
    2: x-nested boxes with nested y spans (on-top/at-bottom). Keeps the
    thresholded region well covered at every position and adjacency scale.
    """
    W, H = spec.image_width, spec.image_height
    if archetype == 0:
        w = rng.uniform(0.04, 0.20) * W
        h = rng.uniform(0.04, 0.20) * H
        gap = rng.uniform(0.02, 0.50) * W
        x0 = rng.uniform(0.0, max(W - 2 * w - gap, 1.0))
        y = rng.uniform(0.0, H - h)
        boxes = (BoundingBox(x0, y, w, h), BoundingBox(x0 + w + gap, y, w, h))
    elif archetype == 1:
        w = rng.uniform(0.04, 0.20) * W
        h = rng.uniform(0.04, 0.20) * H
        gap = rng.uniform(0.02, 0.50) * H
        x = rng.uniform(0.0, W - w)
        y0 = rng.uniform(0.0, max(H - 2 * h - gap, 1.0))
        boxes = (BoundingBox(x, y0, w, h), BoundingBox(x, y0 + h + gap, w, h))
    else:
        outer_w = rng.uniform(0.22, 0.35) * W
        slack_l = rng.uniform(0.03, 0.08) * W
        slack_r = rng.uniform(0.03, 0.08) * W
        inner_w = outer_w - slack_l - slack_r
        outer_h = rng.uniform(0.22, 0.35) * H
        inner_h = rng.uniform(0.3, 0.7) * outer_h
        x0 = rng.uniform(0.0, W - outer_w)
        y0 = rng.uniform(0.0, H - outer_h)
        inner_y = y0 + rng.uniform(0.0, outer_h - inner_h)
        boxes = (BoundingBox(x0, y0, outer_w, outer_h),
                 BoundingBox(x0 + slack_l, inner_y, inner_w, inner_h))
    return Scene(W, H, (SceneObject(0, "object", boxes[0]),
                        SceneObject(1, "object", boxes[1])))


def synth_rpn_dataset(spec: SceneGenSpec, n: int) -> list[RpnSample]:
    """Rule-labeled pair samples, balanced across the six categories.

    Each ordered pair with a clearly dominant firing rule contributes that
    category until its share of n is filled; near-tie pairs are not emitted.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    quotas = dict(zip(CATEGORIES, _share(n, len(CATEGORIES))))
    pools: dict[RelationCategory, list[RpnSample]] = {cat: [] for cat in CATEGORIES}
    rng = np.random.default_rng(spec.seed)
    for step in range(_SCENE_BUDGET):
        if all(len(pools[cat]) >= quotas[cat] for cat in CATEGORIES):
            break
        # alternate cluttered scenes with targeted two-box scenes
        if step % 2 == 0:
            scene = _random_scene(spec, rng)
        else:
            scene = _archetype_pair_scene(spec, rng, (step // 2) % 3)
        for target in scene.objects:
            for reference in scene.objects:
                if target.id == reference.id:
                    continue
                cat = _clear_dominant(scene, target, reference)
                if cat is None or len(pools[cat]) >= quotas[cat]:
                    continue
                pools[cat].append(RpnSample(encode_pair(scene, target.id, reference.id), cat))
    if not all(len(pools[cat]) >= quotas[cat] for cat in CATEGORIES):
        raise RuntimeError("scene budget exhausted before the dataset was balanced")
    return [sample for cat in CATEGORIES for sample in pools[cat]]


def synth_rin_dataset(spec: SceneGenSpec, n: int) -> list[RinSample]:
    """Nearest-reference informativeness samples, balanced per category and label.

    For each target and category, the rule-satisfying reference closest to the
    target (normalized center distance) is informative; other satisfiers are
    not. Only clear cases are emitted: informative ones within
    RIN_NEAR_DISTANCE, uninformative ones beyond RIN_FAR_DISTANCE. The band
    between keeps the two labels apart in feature space.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    per_category = _share(n, len(CATEGORIES))
    quotas: dict[tuple[RelationCategory, bool], int] = {}
    for cat, share in zip(CATEGORIES, per_category):
        quotas[(cat, True)] = share - share // 2
        quotas[(cat, False)] = share // 2
    pools: dict[tuple[RelationCategory, bool], list[RinSample]] = {key: [] for key in quotas}
    rng = np.random.default_rng(spec.seed)
    for _ in range(_SCENE_BUDGET):
        if all(len(pools[key]) >= quotas[key] for key in quotas):
            break
        scene = _random_scene(spec, rng)
        for target in scene.objects:
            tx, ty = target.box.center()

            def distance(obj: SceneObject) -> float:
                ox, oy = obj.box.center()
                return float(np.hypot((tx - ox) / scene.image_width,
                                      (ty - oy) / scene.image_height))

            for cat in CATEGORIES:
                satisfiers = [o for o in scene.objects if o.id != target.id
                              and rule_holds(target.box, o.box, cat)]
                if not satisfiers:
                    continue
                nearest = min(satisfiers, key=lambda o: (distance(o), o.id))
                for obj in satisfiers:
                    label = obj.id == nearest.id
                    if label and distance(obj) > RIN_NEAR_DISTANCE:
                        continue
                    if not label and distance(obj) < RIN_FAR_DISTANCE:
                        continue
                    if len(pools[(cat, label)]) >= quotas[(cat, label)]:
                        continue
                    pools[(cat, label)].append(
                        RinSample(encode_relation(scene, target.id, obj.id, cat), label))
    if not all(len(pools[key]) >= quotas[key] for key in quotas):
        raise RuntimeError("scene budget exhausted before the dataset was balanced")
    return [sample for cat in CATEGORIES for label in (True, False)
            for sample in pools[(cat, label)]]


def mirrored_duplicate_scenes(count: int, seed: int = 0, image_width: float = 640.0,
                              image_height: float = 480.0,
                              type_pool: tuple[str, ...] = DEFAULT_TYPE_POOL) -> list[Scene]:
    """Ambiguous evaluation scenes built around a mirrored duplicate pair.

    Each scene is a single row of four boxes with equal sizes and a shared y,
    so only the left/right rules can fire. Two objects share a type (ids 0 and
    2) and each sits just left of its own landmark of a second type (ids 1 and
    3), so every landmark relation of one twin is mirrored by the other.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    if len(type_pool) < 2:
        raise ValueError("type_pool must hold at least 2 types")
    rng = np.random.default_rng(seed)
    scenes = []
    for _ in range(count):
        duplicate_type, landmark_type = (str(t) for t in
                                         rng.choice(np.asarray(type_pool), size=2, replace=False))
        # box sizes and gaps sized so every in-row relation has a wide margin
        w = rng.uniform(50.0, 80.0)
        h = rng.uniform(50.0, 80.0)
        y = rng.uniform(60.0, image_height - 60.0 - h)
        near_gap_left = rng.uniform(22.0, 38.0)
        near_gap_right = rng.uniform(22.0, 38.0)
        far_gap = rng.uniform(140.0, 190.0)
        x0 = rng.uniform(20.0, 40.0)
        xs = [x0,
              x0 + w + near_gap_left,
              x0 + 2 * w + near_gap_left + far_gap,
              x0 + 3 * w + near_gap_left + far_gap + near_gap_right]
        types = (duplicate_type, landmark_type, duplicate_type, landmark_type)
        scenes.append(Scene(image_width, image_height,
                            tuple(SceneObject(i, types[i], BoundingBox(xs[i], y, w, h))
                                  for i in range(4))))
    return scenes


# --- visual-genome style annotation files --------------------------------------

DEFAULT_PREDICATE_SYNONYMS: dict[str, RelationCategory] = {
    "to the right of": RelationCategory.RIGHT,
    "right of": RelationCategory.RIGHT,
    "on the right of": RelationCategory.RIGHT,
    "on the right side of": RelationCategory.RIGHT,
    "to the left of": RelationCategory.LEFT,
    "left of": RelationCategory.LEFT,
    "on the left of": RelationCategory.LEFT,
    "on the left side of": RelationCategory.LEFT,
    "on top of": RelationCategory.ON_TOP,
    "on the top of": RelationCategory.ON_TOP,
    "atop": RelationCategory.ON_TOP,
    "above": RelationCategory.ON_TOP,
    "on": RelationCategory.ON_TOP,
    "at the bottom of": RelationCategory.AT_BOTTOM,
    "below": RelationCategory.AT_BOTTOM,
    "beneath": RelationCategory.AT_BOTTOM,
    "under": RelationCategory.AT_BOTTOM,
    "underneath": RelationCategory.AT_BOTTOM,
    "in front of": RelationCategory.IN_FRONT,
    "front of": RelationCategory.IN_FRONT,
    "behind": RelationCategory.BEHIND,
    "in back of": RelationCategory.BEHIND,
    "at the back of": RelationCategory.BEHIND,
}


def normalize_predicate(predicate: str) -> str:
    return " ".join(str(predicate).split()).lower()


def load_synonym_map(path: str) -> dict[str, RelationCategory]:
    """JSON object mapping predicate phrases to category names."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"synonym map is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DatasetFormatError("synonym map must be a JSON object")
    by_value = {cat.value: cat for cat in CATEGORIES}
    mapping = {}
    for predicate, name in doc.items():
        if name not in by_value:
            raise DatasetFormatError(f"synonym map value {name!r} is not a relation category")
        mapping[normalize_predicate(predicate)] = by_value[name]
    return mapping


def _require(condition: bool, where: str, problem: str) -> None:
    if not condition:
        raise DatasetFormatError(f"{where}: {problem}")


def _endpoint_box(entry: object, where: str) -> tuple[float, float, float, float]:
    _require(isinstance(entry, dict), where, "must be a JSON object")
    values = []
    for key in ("x", "y", "w", "h"):
        v = entry.get(key)
        _require(not isinstance(v, bool) and isinstance(v, (int, float)),
                 f"{where}.{key}", f"must be a number, got {v!r}")
        values.append(float(v))
    return tuple(values)


def read_vg_annotations(path: str) -> list[dict]:
    """Parse and structurally validate an annotation file; extras are tolerated."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"annotation file is not valid JSON: {exc}") from None
    _require(isinstance(doc, list), "file", "top level must be a JSON array of images")
    images = []
    for i, image in enumerate(doc):
        where = f"images[{i}]"
        _require(isinstance(image, dict), where, "must be a JSON object")
        for key in ("image_id", "width", "height", "relationships"):
            _require(key in image, f"{where}.{key}", "missing")
        width, height = image["width"], image["height"]
        for name, v in (("width", width), ("height", height)):
            _require(not isinstance(v, bool) and isinstance(v, (int, float)) and v > 0,
                     f"{where}.{name}", f"must be a positive number, got {v!r}")
        _require(isinstance(image["relationships"], list), f"{where}.relationships",
                 "must be a list")
        relationships = []
        for j, rel in enumerate(image["relationships"]):
            rwhere = f"{where}.relationships[{j}]"
            _require(isinstance(rel, dict), rwhere, "must be a JSON object")
            for key in ("predicate", "subject", "object"):
                _require(key in rel, f"{rwhere}.{key}", "missing")
            _require(isinstance(rel["predicate"], str), f"{rwhere}.predicate", "must be a string")
            relationships.append({
                "predicate": rel["predicate"],
                "subject": _endpoint_box(rel["subject"], f"{rwhere}.subject"),
                "object": _endpoint_box(rel["object"], f"{rwhere}.object"),
            })
        images.append({"image_id": image["image_id"], "width": float(width),
                       "height": float(height), "relationships": relationships})
    return images


def _clamped(raw: tuple[float, float, float, float], width: float,
             height: float) -> BoundingBox | None:
    try:
        box, _ = clamp_box(*raw, width, height)
        return box
    except SceneFormatError:
        return None


def _capped(rng: np.random.Generator, samples: list, cap: int) -> list:
    if len(samples) <= cap:
        return list(samples)
    picked = sorted(rng.permutation(len(samples))[:cap])
    return [samples[k] for k in picked]


def extract_rpn_dataset(path: str, synonym_map: dict[str, RelationCategory] | None = None,
                        per_class_cap: int = 990, seed: int = 0) -> list[RpnSample]:
    """Presence samples from annotated relationships, capped per category.

    The annotated subject is the target, the annotated object the reference.
    Unmapped predicates are skipped and counted; an empty file yields an empty
    dataset with a warning.
    """
    if per_class_cap <= 0:
        raise ValueError("per_class_cap must be positive")
    synonyms = DEFAULT_PREDICATE_SYNONYMS if synonym_map is None else synonym_map
    pools: dict[RelationCategory, list[RpnSample]] = {cat: [] for cat in CATEGORIES}
    skipped = 0
    dropped_boxes = 0
    for image in read_vg_annotations(path):
        for rel in image["relationships"]:
            cat = synonyms.get(normalize_predicate(rel["predicate"]))
            if cat is None:
                skipped += 1
                continue
            subject = _clamped(rel["subject"], image["width"], image["height"])
            reference = _clamped(rel["object"], image["width"], image["height"])
            if subject is None or reference is None:
                dropped_boxes += 1
                continue
            scene = Scene(image["width"], image["height"],
                          (SceneObject(0, "subject", subject), SceneObject(1, "object", reference)))
            pools[cat].append(RpnSample(encode_pair(scene, 0, 1), cat))
    if skipped:
        logger.info("skipped %d relationships with unmapped predicates", skipped)
    if dropped_boxes:
        logger.info("dropped %d relationships with boxes outside the image", dropped_boxes)
    rng = np.random.default_rng(seed)
    samples = []
    for cat in CATEGORIES:
        samples.extend(_capped(rng, pools[cat], per_class_cap))
    if not samples:
        logger.warning("no usable relationship annotations in %s", path)
    return samples


def extract_rin_dataset(path: str, synonym_map: dict[str, RelationCategory] | None = None,
                        per_class_cap: int = 2057, seed: int = 0) -> list[RinSample]:
    """Informativeness samples mined from annotations.

    Annotated pairs are informative. Pairs within the same image whose rule
    fires for a category but that were never annotated with it are
    uninformative. Both sides are capped per category.
    """
    if per_class_cap <= 0:
        raise ValueError("per_class_cap must be positive")
    synonyms = DEFAULT_PREDICATE_SYNONYMS if synonym_map is None else synonym_map
    informative: dict[RelationCategory, list[RinSample]] = {cat: [] for cat in CATEGORIES}
    uninformative: dict[RelationCategory, list[RinSample]] = {cat: [] for cat in CATEGORIES}
    for image in read_vg_annotations(path):
        width, height = image["width"], image["height"]
        boxes: list[BoundingBox] = []
        index: dict[tuple, int] = {}

        def box_id(raw: tuple[float, float, float, float]) -> int | None:
            box = _clamped(raw, width, height)
            if box is None:
                return None
            key = (box.x, box.y, box.w, box.h)
            if key not in index:
                index[key] = len(boxes)
                boxes.append(box)
            return index[key]

        annotated: set[tuple[int, int, RelationCategory]] = set()
        for rel in image["relationships"]:
            cat = synonyms.get(normalize_predicate(rel["predicate"]))
            subject = box_id(rel["subject"])
            reference = box_id(rel["object"])
            if cat is None or subject is None or reference is None or subject == reference:
                continue
            annotated.add((subject, reference, cat))
        if not boxes:
            continue
        scene = Scene(width, height,
                      tuple(SceneObject(i, "object", box) for i, box in enumerate(boxes)))
        for subject, reference, cat in sorted(annotated, key=lambda t: (t[0], t[1], t[2].index)):
            informative[cat].append(
                RinSample(encode_relation(scene, subject, reference, cat), True))
        for subject in range(len(boxes)):
            for reference in range(len(boxes)):
                if subject == reference:
                    continue
                for cat in CATEGORIES:
                    if (subject, reference, cat) in annotated:
                        continue
                    if rule_holds(boxes[subject], boxes[reference], cat):
                        uninformative[cat].append(
                            RinSample(encode_relation(scene, subject, reference, cat), False))
    rng = np.random.default_rng(seed)
    samples = []
    for cat in CATEGORIES:
        samples.extend(_capped(rng, informative[cat], per_class_cap))
    for cat in CATEGORIES:
        samples.extend(_capped(rng, uninformative[cat], per_class_cap))
    if not samples:
        logger.warning("no usable relationship annotations in %s", path)
    return samples


# --- JSONL persistence ----------------------------------------------------------

def write_rpn_samples(path: str, samples: list[RpnSample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps({"features": [float(v) for v in sample.features],
                                 "label": sample.label.index}))
            fh.write("\n")


def write_rin_samples(path: str, samples: list[RinSample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps({"features": [float(v) for v in sample.features],
                                 "label": bool(sample.label)}))
            fh.write("\n")


def _read_jsonl(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"line {lineno}: not valid JSON ({exc})") from None


def _read_features(doc: object, lineno: int, dim: int) -> np.ndarray:
    _require(isinstance(doc, dict), f"line {lineno}", "must be a JSON object")
    features = doc.get("features")
    _require(isinstance(features, list) and len(features) == dim,
             f"line {lineno}.features", f"must be a list of {dim} numbers")
    for v in features:
        _require(not isinstance(v, bool) and isinstance(v, (int, float)),
                 f"line {lineno}.features", f"must be numbers, got {v!r}")
    return np.asarray(features, dtype=np.float64)


def read_rpn_samples(path: str) -> list[RpnSample]:
    from .networks import PAIR_FEATURE_DIM
    samples = []
    for lineno, doc in _read_jsonl(path):
        features = _read_features(doc, lineno, PAIR_FEATURE_DIM)
        label = doc.get("label")
        _require(not isinstance(label, bool) and isinstance(label, int)
                 and 0 <= label < len(CATEGORIES),
                 f"line {lineno}.label", f"must be a category index, got {label!r}")
        samples.append(RpnSample(features, CATEGORIES[label]))
    return samples


def read_rin_samples(path: str) -> list[RinSample]:
    from .networks import RIN_FEATURE_DIM
    samples = []
    for lineno, doc in _read_jsonl(path):
        features = _read_features(doc, lineno, RIN_FEATURE_DIM)
        label = doc.get("label")
        _require(isinstance(label, bool), f"line {lineno}.label",
                 f"must be true or false, got {label!r}")
        samples.append(RinSample(features, label))
    return samples


def write_scenes(path: str, scenes: list[Scene]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for scene in scenes:
            fh.write(json.dumps(scene_to_json(scene)))
            fh.write("\n")


def read_scenes(path: str) -> list[Scene]:
    scenes = []
    for lineno, doc in _read_jsonl(path):
        try:
            scenes.append(scene_from_json(doc))
        except SceneFormatError as exc:
            raise DatasetFormatError(f"line {lineno}: {exc}") from None
    return scenes


def rpn_training_pairs(samples: list[RpnSample]) -> list[tuple[np.ndarray, int]]:
    return [(s.features, s.label.index) for s in samples]


def rin_training_pairs(samples: list[RinSample]) -> list[tuple[np.ndarray, int]]:
    return [(s.features, int(s.label)) for s in samples]
