"""Hypergraph knowledge export (canonical XML) and prompt assembly."""

from __future__ import annotations

import os
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from importlib import resources
from pathlib import Path
from typing import Mapping

from .enrich import UNKNOWN_AREA, EnrichedHypergraph
from .scene import TaskSpec

__all__ = [
    "AssembledPrompt",
    "HypergraphKnowledge",
    "KnowledgeArea",
    "KnowledgeObject",
    "SECTION_ORDER",
    "TemplateError",
    "assemble_prompt",
    "build_knowledge",
    "export_xml",
    "format_score",
    "load_template",
    "parse_xml",
    "summarize",
]

DEFAULT_FLAG_THRESHOLD = 0.5
SECTION_ORDER = ("Task Goal", "Guidance", "Hypergraph Knowledge", "Answer Instructions")
PROMPT_TEMPLATES = ("planner_xml", "planner_narrative")


class TemplateError(ValueError):
    pass


def format_score(value: float) -> str:
    """Two decimals, round-half-even on the shortest decimal repr (0.125 -> "0.12")."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def _attr(value: str) -> str:
    out = (str(value).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
           .replace('"', "&quot;").replace("\n", "&#10;").replace("\r", "&#13;").replace("\t", "&#9;"))
    return f'"{out}"'


@dataclass(frozen=True)
class KnowledgeObject:
    id: int
    category: str
    cf_score: float


@dataclass(frozen=True)
class KnowledgeArea:
    id: int
    label: str
    objects: tuple[KnowledgeObject, ...]


@dataclass(frozen=True)
class HypergraphKnowledge:
    scene_id: str
    areas: tuple[KnowledgeArea, ...]
    flags: tuple[int, ...]
    rendered: str


def export_xml(graph: EnrichedHypergraph) -> str:
    """Canonical XML: ``scene > area* > object*``, 2-space indent, LF endings."""
    base = graph.base
    if not base.hyperedges:
        return f"<scene id={_attr(base.scene_id)}/>\n"
    lines = [f"<scene id={_attr(base.scene_id)}>"]
    for edge in base.hyperedges:
        label = graph.area_labels.get(edge.id, UNKNOWN_AREA)
        lines.append(f"  <area id=\"{edge.id}\" label={_attr(label)}>")
        for m in edge.members:
            node = base.nodes[m]
            score = format_score(graph.cf_scores.get(m, 0.0))
            lines.append(f"    <object id=\"{m}\" category={_attr(node.category)} cf_score=\"{score}\"/>")
        lines.append("  </area>")
    lines.append("</scene>")
    return "\n".join(lines) + "\n"


def build_knowledge(graph: EnrichedHypergraph, threshold: float = DEFAULT_FLAG_THRESHOLD) -> HypergraphKnowledge:
    base = graph.base
    areas = tuple(
        KnowledgeArea(
            e.id, graph.area_labels.get(e.id, UNKNOWN_AREA),
            tuple(KnowledgeObject(m, base.nodes[m].category, graph.cf_scores.get(m, 0.0)) for m in e.members),
        )
        for e in base.hyperedges
    )
    flags = tuple(n.id for n in base.nodes if graph.cf_scores.get(n.id, 0.0) >= threshold)
    return HypergraphKnowledge(base.scene_id, areas, flags, export_xml(graph))


def parse_xml(text: str) -> tuple[str, list[KnowledgeArea]]:
    """Recover scene id and area/membership structure from exported XML."""
    root = ET.fromstring(text)
    if root.tag != "scene":
        raise ValueError(f"expected <scene> root, got <{root.tag}>")
    areas = []
    for area in root.findall("area"):
        objs = tuple(KnowledgeObject(int(o.get("id")), o.get("category", ""), float(o.get("cf_score", "0")))
                     for o in area.findall("object"))
        areas.append(KnowledgeArea(int(area.get("id")), area.get("label", ""), objs))
    return root.get("id", ""), areas


def summarize(knowledge: HypergraphKnowledge) -> str:
    """Plain-language rendering of the knowledge, one line per area."""
    if not knowledge.areas:
        return "No objects were detected in the scene."
    lines = []
    for area in knowledge.areas:
        names = ", ".join(f"{o.category} (object {o.id})" for o in area.objects)
        lines.append(f"- {area.label} (area {area.id}) contains: {names}.")
    flagged = {o.id: o for a in knowledge.areas for o in a.objects if o.id in knowledge.flags}
    if flagged:
        lines.append("Objects in an abnormal state:")
        for oid in sorted(flagged):
            lines.append(f"- {flagged[oid].category} (object {oid}), abnormality {format_score(flagged[oid].cf_score)}")
    return "\n".join(lines)


# ---------------------------------------------------------------- prompts

@dataclass(frozen=True)
class AssembledPrompt:
    template_id: str
    text: str
    sections: tuple[tuple[str, str], ...]

    @property
    def length(self) -> int:
        return len(self.text)


def load_template(template_id: str, template_dir: str | os.PathLike | None = None) -> str:
    if template_dir is not None:
        path = Path(template_dir) / f"{template_id}.txt"
        if path.is_file():
            return path.read_text(encoding="utf-8")
    if template_id in PROMPT_TEMPLATES:
        return resources.files(__package__).joinpath("data", "templates", f"{template_id}.txt").read_text(
            encoding="utf-8")
    raise TemplateError(f"unknown template id {template_id!r}")


_PLACEHOLDER = re.compile(r"\{\{|\}\}|\{([A-Za-z_][A-Za-z0-9_]*)\}")


def render(template: str, values: Mapping[str, str]) -> str:
    """Substitute ``{name}`` placeholders; ``{{``/``}}`` are literal braces."""
    def sub(match: re.Match) -> str:
        token = match.group(0)
        if token == "{{":
            return "{"
        if token == "}}":
            return "}"
        name = match.group(1)
        if name not in values:
            raise TemplateError(f"unresolved placeholder {name}")
        return values[name]

    return _PLACEHOLDER.sub(sub, template)


def split_sections(text: str) -> tuple[tuple[str, str], ...]:
    """Split on ``## <name>`` header lines; text before the first header is
    a ``preamble`` section. Known section names must appear in canonical order."""
    sections: list[tuple[str, list[str]]] = []
    current: tuple[str, list[str]] = ("preamble", [])
    for line in text.splitlines(keepends=True):
        if line.startswith("## "):
            sections.append(current)
            current = (line[3:].strip(), [])
        else:
            current[1].append(line)
    sections.append(current)
    out = tuple((name, "".join(body).strip("\n")) for name, body in sections
                if not (name == "preamble" and not "".join(body).strip()))
    known = [name for name, _ in out if name in SECTION_ORDER]
    if known != sorted(known, key=SECTION_ORDER.index):
        raise TemplateError(f"sections out of order: {known}")
    return out


def assemble_prompt(task: TaskSpec | None, knowledge: HypergraphKnowledge, template_id: str,
                    template_dir: str | os.PathLike | None = None) -> AssembledPrompt:
    template = load_template(template_id, template_dir)
    task = task or TaskSpec("")
    guidance = "\n".join(f"- {g}" for g in task.guidance) if task.guidance else "(none)"
    values = {
        "goal": task.goal,
        "guidance": guidance,
        "knowledge": knowledge.rendered.rstrip("\n"),
        "knowledge_summary": summarize(knowledge),
        "scene_id": knowledge.scene_id,
        "flags": ", ".join(str(f) for f in knowledge.flags) or "(none)",
    }
    text = render(template, values)
    return AssembledPrompt(template_id, text, split_sections(text))
