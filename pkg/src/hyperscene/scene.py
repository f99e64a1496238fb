"""Detection-file ingestion.

A detection file is a JSON document::

    {
      "scene_id": "kitchen_small",
      "images": [{"id": "cam0", "width": 640, "height": 480}],
      "objects": [{"id": 0, "image_id": "cam0", "bbox": [x, y, w, h],
                   "category": "stove", "attributes": "burner is on"}],
      "task": {"goal": "...", "guidance": ["...", "..."]}
    }

Object positions are bounding-box centres in pixel coordinates.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Sequence

__all__ = [
    "DomainError",
    "ImageInfo",
    "ObjectInstance",
    "SceneParseError",
    "SceneRecord",
    "SceneValidationError",
    "TaskSpec",
    "bbox_center",
    "bbox_iou",
    "load_scene",
    "parse_scene",
    "scene_to_dict",
    "serialize_scene",
]

DUPLICATE_IOU = 0.9


class DomainError(ValueError):
    """Raised when a numeric argument lies outside its domain."""


class SceneParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class SceneValidationError(ValueError):
    def __init__(self, message: str, object_id: Any = None, field: str | None = None):
        super().__init__(message)
        self.object_id = object_id
        self.field = field


@dataclass(frozen=True)
class ImageInfo:
    id: str
    width: int
    height: int


@dataclass(frozen=True)
class TaskSpec:
    goal: str
    guidance: tuple[str, ...] = ()


@dataclass(frozen=True)
class ObjectInstance:
    id: int
    position: tuple[float, float]
    bbox: tuple[float, float, float, float]
    category: str
    attributes: str
    image_id: str
    source_id: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SceneRecord:
    scene_id: str
    images: tuple[ImageInfo, ...]
    objects: tuple[ObjectInstance, ...] = ()
    task: TaskSpec | None = None

    @property
    def image_width(self) -> int:
        return max((im.width for im in self.images), default=0)

    @property
    def image_height(self) -> int:
        return max((im.height for im in self.images), default=0)

    def image(self, image_id: str) -> ImageInfo:
        for im in self.images:
            if im.id == image_id:
                return im
        raise KeyError(image_id)

    def objects_in(self, image_id: str) -> list[ObjectInstance]:
        return [o for o in self.objects if o.image_id == image_id]


def bbox_center(bbox: Sequence[float]) -> tuple[float, float]:
    """Centre ``(x + w/2, y + h/2)`` of an ``[x, y, w, h]`` box."""
    x, y, w, h = (float(v) for v in bbox)
    if not (w > 0 and h > 0):
        raise DomainError(f"bbox extent must be positive, got width={w}, height={h}")
    return (x + w / 2.0, y + h / 2.0)


def bbox_iou(a: Sequence[float], b: Sequence[float]) -> float:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


def load_scene(path: str | os.PathLike) -> SceneRecord:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_scene(data)


def parse_scene(data: bytes | str) -> SceneRecord:
    """Parse and validate detection-file bytes.

    Object ids are renumbered ``0..N-1`` in file order after duplicate
    detections have been merged.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SceneParseError("invalid UTF-8", exc.start) from None
    else:
        text = data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise SceneParseError(exc.msg, offset) from None
    return _scene_from_doc(doc)


def _require(cond: bool, message: str, object_id: Any = None, field: str | None = None) -> None:
    if not cond:
        raise SceneValidationError(message, object_id, field)


def _scene_from_doc(doc: Any) -> SceneRecord:
    _require(isinstance(doc, dict), "document must be a JSON object")
    scene_id = doc.get("scene_id")
    _require(isinstance(scene_id, str) and scene_id != "", "scene_id must be a non-empty string",
             field="scene_id")

    images_raw = doc.get("images", [])
    _require(isinstance(images_raw, list), "images must be a list", field="images")
    images: list[ImageInfo] = []
    seen_images: set[str] = set()
    for im in images_raw:
        _require(isinstance(im, dict), "image entry must be an object", field="images")
        iid, w, h = im.get("id"), im.get("width"), im.get("height")
        _require(isinstance(iid, str) and iid != "", "image id must be a non-empty string",
                 field="images.id")
        _require(iid not in seen_images, f"duplicate image id {iid}", field="images.id")
        for name, val in (("width", w), ("height", h)):
            _require(isinstance(val, int) and not isinstance(val, bool) and val > 0,
                     f"image {iid} {name} must be a positive integer", field=f"images.{name}")
        seen_images.add(iid)
        images.append(ImageInfo(iid, w, h))
    by_image = {im.id: im for im in images}

    objects_raw = doc.get("objects", [])
    _require(isinstance(objects_raw, list), "objects must be a list", field="objects")
    parsed: list[ObjectInstance] = []
    seen_ids: set[tuple[str, int]] = set()
    for raw in objects_raw:
        _require(isinstance(raw, dict), "object entry must be an object", field="objects")
        oid = raw.get("id")
        _require(isinstance(oid, int) and not isinstance(oid, bool) and oid >= 0,
                 f"object id must be a non-negative integer, got {oid!r}", oid, "id")
        image_id = raw.get("image_id")
        if image_id is None and len(images) == 1:
            image_id = images[0].id
        _require(image_id in by_image, f"object {oid}: unknown image_id {image_id!r}", oid, "image_id")
        _require((image_id, oid) not in seen_ids, f"duplicate id {oid}", oid, "id")
        seen_ids.add((image_id, oid))

        bbox = raw.get("bbox")
        _require(isinstance(bbox, list) and len(bbox) == 4
                 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox),
                 f"object {oid}: bbox must be four numbers", oid, "bbox")
        bbox_t = tuple(float(v) for v in bbox)
        _require(all(math.isfinite(v) for v in bbox_t), f"object {oid}: bbox must be finite", oid, "bbox")
        try:
            center = bbox_center(bbox_t)
        except DomainError as exc:
            raise SceneValidationError(f"object {oid}: {exc}", oid, "bbox") from None
        im = by_image[image_id]
        _require(0.0 <= center[0] <= im.width and 0.0 <= center[1] <= im.height,
                 f"object {oid}: position {center} outside image {image_id} extent", oid, "bbox")

        category = raw.get("category")
        _require(isinstance(category, str) and category.strip() != "",
                 f"object {oid}: category must be non-empty text", oid, "category")
        attributes = raw.get("attributes", "")
        if attributes is None:
            attributes = ""
        _require(isinstance(attributes, str), f"object {oid}: attributes must be text", oid, "attributes")
        parsed.append(ObjectInstance(oid, center, bbox_t, category.strip(), attributes.strip(),
                                     image_id, source_id=oid))

    task = None
    task_raw = doc.get("task")
    if task_raw is not None:
        _require(isinstance(task_raw, dict), "task must be an object", field="task")
        goal = task_raw.get("goal", "")
        guidance = task_raw.get("guidance", [])
        _require(isinstance(goal, str), "task.goal must be text", field="task.goal")
        _require(isinstance(guidance, list) and all(isinstance(g, str) for g in guidance),
                 "task.guidance must be a list of text", field="task.guidance")
        task = TaskSpec(goal, tuple(guidance))

    merged = _merge_duplicates(parsed)
    objects = tuple(
        ObjectInstance(i, o.position, o.bbox, o.category, o.attributes, o.image_id, o.source_id)
        for i, o in enumerate(merged)
    )
    return SceneRecord(scene_id, tuple(images), objects, task)


def _merge_duplicates(objs: list[ObjectInstance]) -> list[ObjectInstance]:
    # same image + category with IoU above threshold: keep the larger box at the
    # earlier slot
    out: list[ObjectInstance] = []
    for obj in objs:
        for k, kept in enumerate(out):
            if (kept.image_id == obj.image_id and kept.category == obj.category
                    and bbox_iou(kept.bbox, obj.bbox) > DUPLICATE_IOU):
                if obj.bbox[2] * obj.bbox[3] > kept.bbox[2] * kept.bbox[3]:
                    out[k] = obj
                break
        else:
            out.append(obj)
    return out


def scene_to_dict(scene: SceneRecord) -> dict:
    doc: dict[str, Any] = {
        "scene_id": scene.scene_id,
        "images": [{"id": im.id, "width": im.width, "height": im.height} for im in scene.images],
        "objects": [
            {
                "id": o.id,
                "image_id": o.image_id,
                "bbox": list(o.bbox),
                "category": o.category,
                "attributes": o.attributes,
            }
            for o in scene.objects
        ],
    }
    if scene.task is not None:
        doc["task"] = {"goal": scene.task.goal, "guidance": list(scene.task.guidance)}
    return doc


def serialize_scene(scene: SceneRecord) -> str:
    return json.dumps(scene_to_dict(scene), indent=2, ensure_ascii=False) + "\n"
