"""
Hypergraph knowledge for a planner prompt
=========================================

The enriched hypergraph is serialised as canonical XML and dropped into a
planner prompt together with the task goal and guidance.
"""

# %%
from pathlib import Path

from hyperscene import assemble_prompt, build_hypergraph, build_knowledge, enrich, export_xml, load_scene

DATA = Path(__file__).parent / "data"
scene = load_scene(DATA / "kitchen_small.json")
graph = enrich(build_hypergraph(scene), task=scene.task)
print(export_xml(graph))

# %%
# Objects scoring at least 0.5 are flagged.
knowledge = build_knowledge(graph)
print("flagged objects:", knowledge.flags)

# %%
prompt = assemble_prompt(scene.task, knowledge, "planner_xml")
print(prompt.text)
print(prompt.length, "characters")

# %%
# The narrative template swaps the XML for plain sentences.
print(dict(assemble_prompt(scene.task, knowledge, "planner_narrative").sections)["Hypergraph Knowledge"])
