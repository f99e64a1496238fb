import pytest

from hyperscene.enrich import enrich
from hyperscene.hypergraph import build_hypergraph
from hyperscene.knowledge import (
    SECTION_ORDER,
    TemplateError,
    assemble_prompt,
    build_knowledge,
    export_xml,
    format_score,
    load_template,
    parse_xml,
    render,
    summarize,
)
from hyperscene.scene import ImageInfo, SceneRecord, TaskSpec, load_scene
from hyperscene.synthetic import planted_hypergraph


@pytest.fixture
def kitchen(kitchen_path):
    scene = load_scene(kitchen_path)
    return enrich(build_hypergraph(scene), task=scene.task)


@pytest.mark.parametrize("value, text", [
    (0.25, "0.25"), (0.125, "0.12"), (0.135, "0.14"), (0.0, "0.00"), (1.0, "1.00"), (0.85, "0.85"), (0.005, "0.00"),
])
def test_format_score(value, text):
    assert format_score(value) == text


def test_empty_graph_exports_minimal_scene():
    g = enrich(build_hypergraph(SceneRecord("empty", (ImageInfo("im", 10, 10),), ())))
    assert export_xml(g) == '<scene id="empty"/>\n'


def test_kitchen_xml_matches_golden(kitchen, fixtures):
    expected = (fixtures / "golden" / "kitchen_small.graph.xml").read_bytes()
    assert export_xml(kitchen).encode("utf-8") == expected


def test_xml_is_canonical():
    g = planted_hypergraph(n_nodes=8, n_edges=2)
    text = export_xml(g)
    assert text == export_xml(g)
    assert "\r" not in text and text.endswith("</scene>\n")
    assert all(line.startswith(("<scene", "  <area", "    <object", "  </area", "</scene"))
               for line in text.splitlines())


def test_xml_round_trip(kitchen):
    scene_id, areas = parse_xml(export_xml(kitchen))
    assert scene_id == "kitchen_small"
    assert [a.label for a in areas] == ["Kitchen Area", "Dining Area"]
    assert [[o.id for o in a.objects] for a in areas] == [list(e.members) for e in kitchen.base.hyperedges]
    assert areas[1].objects[1].cf_score == pytest.approx(0.9)


def test_special_characters_are_escaped():
    g = planted_hypergraph(n_nodes=2, n_edges=1)
    g.area_labels[0] = 'A & "B" <C>'
    _, areas = parse_xml(export_xml(g))
    assert areas[0].label == 'A & "B" <C>'


def test_knowledge_flags_and_summary(kitchen):
    k = build_knowledge(kitchen)
    assert k.flags == (2, 4)
    assert k.rendered == export_xml(kitchen)
    text = summarize(k)
    assert "Kitchen Area (area 0) contains: stove (object 0)" in text
    assert "chair (object 4), abnormality 0.90" in text


def test_planner_prompt_matches_golden(kitchen, fixtures):
    prompt = assemble_prompt(kitchen.task, build_knowledge(kitchen), "planner_xml")
    assert prompt.text == (fixtures / "golden" / "kitchen_small.prompt.txt").read_text(encoding="utf-8")
    assert prompt.length == len(prompt.text)
    assert tuple(name for name, _ in prompt.sections) == SECTION_ORDER


def test_narrative_prompt(kitchen):
    prompt = assemble_prompt(kitchen.task, build_knowledge(kitchen), "planner_narrative")
    assert "<scene" not in prompt.text
    assert "Dining Area (area 1)" in dict(prompt.sections)["Hypergraph Knowledge"]


def test_unknown_template_id(kitchen):
    with pytest.raises(TemplateError, match="unknown template id"):
        assemble_prompt(kitchen.task, build_knowledge(kitchen), "nope")


def test_unresolved_placeholder(tmp_path, kitchen):
    (tmp_path / "t.txt").write_text("## Task Goal\n{goal} and {missing}\n")
    with pytest.raises(TemplateError, match="unresolved placeholder missing"):
        assemble_prompt(kitchen.task, build_knowledge(kitchen), "t", tmp_path)


def test_template_without_placeholders_is_verbatim(tmp_path, kitchen):
    body = "## Task Goal\nDo the thing.\n\n## Answer Instructions\nList actions.\n"
    (tmp_path / "plain.txt").write_text(body)
    assert assemble_prompt(None, build_knowledge(kitchen), "plain", tmp_path).text == body


def test_sections_out_of_order_rejected(tmp_path, kitchen):
    (tmp_path / "bad.txt").write_text("## Guidance\nx\n## Task Goal\ny\n")
    with pytest.raises(TemplateError, match="out of order"):
        assemble_prompt(kitchen.task, build_knowledge(kitchen), "bad", tmp_path)


def test_render_escapes_braces():
    assert render("{{literal}} {x}", {"x": "v"}) == "{literal} v"


def test_missing_task_renders_placeholder_guidance(kitchen):
    prompt = assemble_prompt(TaskSpec("Tidy up"), build_knowledge(kitchen), "planner_xml")
    assert dict(prompt.sections)["Guidance"] == "(none)"
    assert load_template("planner_xml").startswith("## Task Goal")
