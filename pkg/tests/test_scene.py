import json

import pytest
from hypothesis import given, strategies as st

from hyperscene.scene import (
    DomainError,
    SceneParseError,
    SceneValidationError,
    bbox_center,
    load_scene,
    parse_scene,
    serialize_scene,
)


def _doc(objects, width=100, height=100, **extra):
    return json.dumps({"scene_id": "s", "images": [{"id": "im", "width": width, "height": height}],
                       "objects": objects, **extra})


def _obj(oid, bbox, category="cup", attributes="", image_id="im"):
    return {"id": oid, "image_id": image_id, "bbox": bbox, "category": category, "attributes": attributes}


def test_bbox_center_examples():
    assert bbox_center((0, 0, 2, 2)) == (1.0, 1.0)
    assert bbox_center((3, 4, 5, 6)) == (5.5, 7.0)
    with pytest.raises(DomainError):
        bbox_center((10, 20, 0, 5))
    with pytest.raises(DomainError):
        bbox_center((0, 0, 3, -1))


def test_empty_scene():
    scene = parse_scene(_doc([]))
    assert scene.objects == ()
    assert scene.image_width == 100


def test_duplicate_id_is_rejected():
    with pytest.raises(SceneValidationError, match="duplicate id 3") as info:
        parse_scene(_doc([_obj(3, [0, 0, 10, 10]), _obj(3, [50, 50, 10, 10], "plate")]))
    assert info.value.object_id == 3
    assert info.value.field == "id"


def test_kitchen_small_positions_are_bbox_centres(kitchen_path):
    scene = load_scene(kitchen_path)
    # hand-computed from the fixture boxes
    expected = [(90.0, 100.0), (140.0, 85.0), (100.0, 165.0), (480.0, 310.0), (470.0, 360.0), (475.0, 295.0)]
    assert [o.position for o in scene.objects] == expected
    assert [o.id for o in scene.objects] == list(range(6))
    assert scene.task.goal.startswith("Serve")


def test_malformed_json_reports_byte_offset():
    data = '{"scene_id": "s", "images": [}'.encode()
    with pytest.raises(SceneParseError) as info:
        parse_scene(data)
    assert info.value.offset == 29
    assert "byte offset 29" in str(info.value)


def test_byte_offset_counts_multibyte_characters():
    data = '{"scene_id": "é", oops}'.encode()
    with pytest.raises(SceneParseError) as info:
        parse_scene(data)
    assert info.value.offset == len('{"scene_id": "é", '.encode())


@pytest.mark.parametrize("obj, field", [
    (_obj(0, [0, 0, 0, 5]), "bbox"),
    (_obj(0, [500, 0, 5, 5]), "bbox"),
    (_obj(0, [0, 0, 5, 5], category=""), "category"),
    (_obj(0, [0, 0, 5, 5], image_id="nope"), "image_id"),
    (_obj(-1, [0, 0, 5, 5]), "id"),
])
def test_validation_errors_name_object_and_field(obj, field):
    with pytest.raises(SceneValidationError) as info:
        parse_scene(_doc([obj]))
    assert info.value.field == field


def test_ids_renumbered_in_file_order():
    scene = parse_scene(_doc([_obj(7, [0, 0, 10, 10]), _obj(2, [50, 50, 10, 10], "plate")]))
    assert [(o.id, o.source_id, o.category) for o in scene.objects] == [(0, 7, "cup"), (1, 2, "plate")]


def test_duplicate_detections_merge_keeping_larger_box():
    scene = parse_scene(_doc([
        _obj(0, [10, 10, 20, 20], "cup", "small"),
        _obj(1, [60, 60, 10, 10], "plate"),
        _obj(2, [10, 10, 20.5, 20.5], "cup", "large"),
    ]))
    assert [o.category for o in scene.objects] == ["cup", "plate"]
    assert scene.objects[0].attributes == "large"
    assert scene.objects[0].id == 0


def test_same_box_different_category_not_merged():
    scene = parse_scene(_doc([_obj(0, [10, 10, 20, 20], "cup"), _obj(1, [10, 10, 20, 20], "mug")]))
    assert len(scene.objects) == 2


def test_multi_image_scene_allows_repeated_local_ids():
    doc = json.dumps({
        "scene_id": "two",
        "images": [{"id": "a", "width": 50, "height": 50}, {"id": "b", "width": 80, "height": 40}],
        "objects": [_obj(0, [0, 0, 4, 4], image_id="a"), _obj(0, [0, 0, 4, 4], image_id="b")],
    })
    scene = parse_scene(doc)
    assert [(o.id, o.image_id) for o in scene.objects] == [(0, "a"), (1, "b")]
    assert (scene.image_width, scene.image_height) == (80, 50)


def test_pure_function_of_bytes(kitchen_path):
    data = kitchen_path.read_bytes()
    assert parse_scene(data) == parse_scene(data)


def test_round_trip(kitchen_path):
    scene = load_scene(kitchen_path)
    assert parse_scene(serialize_scene(scene)) == scene


box = st.tuples(st.floats(0, 90), st.floats(0, 90), st.floats(0.5, 10), st.floats(0.5, 10))


@given(st.lists(st.tuples(box, st.sampled_from(["cup", "plate", "stove"]), st.text(max_size=8)), max_size=12))
def test_round_trip_property(items):
    objects = [_obj(i, list(b), c, a) for i, (b, c, a) in enumerate(items)]
    scene = parse_scene(_doc(objects))
    again = parse_scene(serialize_scene(scene))
    assert again == scene
    assert [o.id for o in scene.objects] == list(range(len(scene.objects)))
