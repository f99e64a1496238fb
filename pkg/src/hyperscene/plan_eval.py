"""Plan metrics: executability, LCS similarity and task correctness.

Plans run against a small symbolic household environment. Object and
location identifiers are case-insensitive (lowercased on parse).

Action preconditions ("at x" means the agent's location equals x's id or
x's location):

=========== ===== ==========================================================
verb        arity preconditions
=========== ===== ==========================================================
GOTO x      1     x is an object id or a known location
PICKUP x    1     x holdable, not held, hand empty, at x, x's container open
PLACE x y   2     holding x, y a surface or an open openable, at y, x != y
OPEN x      1     x openable and closed, at x
CLOSE x     1     x openable and open, at x
TOGGLE_ON   1     x toggleable and off, at x
TOGGLE_OFF  1     x toggleable and on, at x
SLICE x     1     x sliceable, not yet sliced, at x, holding a cutting tool
CLEAN x     1     x dirty, at x or holding x
HEAT x      1     x heatable, at x or holding x
=========== ===== ==========================================================

GOTO to a fixture (a non-holdable object) or a named location puts the agent
there; GOTO to a holdable object puts the agent at that object's location.
A held object's location always equals the agent's location.
"""

from __future__ import annotations

import copy
import csv
import enum
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

__all__ = [
    "ARITY",
    "Action",
    "AgentState",
    "CorpusError",
    "MetricReport",
    "ObjectState",
    "SymbolicEnv",
    "Verb",
    "correctness",
    "evaluate_corpus",
    "evaluate_sample",
    "execute",
    "executability",
    "format_report_csv",
    "lcs_length",
    "lcs_score",
    "load_env",
    "load_plan",
    "load_gold",
    "parse_plan",
]


class Verb(str, enum.Enum):
    GOTO = "GOTO"
    PICKUP = "PICKUP"
    PLACE = "PLACE"
    OPEN = "OPEN"
    CLOSE = "CLOSE"
    TOGGLE_ON = "TOGGLE_ON"
    TOGGLE_OFF = "TOGGLE_OFF"
    SLICE = "SLICE"
    CLEAN = "CLEAN"
    HEAT = "HEAT"


ARITY = {v: 1 for v in Verb} | {Verb.PLACE: 2}


@dataclass(frozen=True)
class Action:
    verb: Verb
    args: tuple[str, ...]

    def __post_init__(self):
        if not isinstance(self.verb, Verb):
            object.__setattr__(self, "verb", Verb(str(self.verb).upper()))
        object.__setattr__(self, "args", tuple(str(a).strip().lower() for a in self.args))
        if len(self.args) != ARITY[self.verb]:
            raise ValueError(f"{self.verb.value} takes {ARITY[self.verb]} argument(s), got {len(self.args)}")

    @classmethod
    def of(cls, verb: str, *args: str) -> "Action":
        return cls(Verb(verb.upper()), tuple(args))

    def __str__(self) -> str:
        return f"{self.verb.value}({', '.join(self.args)})"


@dataclass
class ObjectState:
    location: str
    holdable: bool = False
    openable: bool = False
    open: bool = False
    toggleable: bool = False
    on: bool = False
    held: bool = False
    surface: bool = False
    sliceable: bool = False
    sliced: bool = False
    dirty: bool = False
    heatable: bool = False
    hot: bool = False
    cutting_tool: bool = False


@dataclass
class AgentState:
    location: str
    holding: str | None = None


@dataclass
class SymbolicEnv:
    objects: dict[str, ObjectState]
    agent: AgentState
    goal: list[tuple[str, tuple[str, ...]]] = field(default_factory=list)
    landmarks: set[str] = field(default_factory=set, compare=False, repr=False)

    def __post_init__(self):
        held = [k for k, o in self.objects.items() if o.held]
        if len(held) > 1:
            raise ValueError(f"at most one object may be held, got {held}")
        if held and self.agent.holding != held[0] or (not held and self.agent.holding is not None):
            raise ValueError("agent.holding must name the single held object")
        if held:
            self.objects[held[0]].location = self.agent.location
        # locations named in the initial state stay reachable after the agent leaves
        self.landmarks |= {o.location for o in self.objects.values()} | {self.agent.location}

    def places(self) -> set[str]:
        return set(self.objects) | self.landmarks | {o.location for o in self.objects.values()}

    def copy(self) -> "SymbolicEnv":
        return copy.deepcopy(self)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "SymbolicEnv":
        known = set(ObjectState.__dataclass_fields__)
        objects = {}
        for oid, spec in doc.get("objects", {}).items():
            extra = set(spec) - known
            if extra:
                raise ValueError(f"object {oid}: unknown fields {sorted(extra)}")
            spec = dict(spec)
            spec["location"] = str(spec["location"]).lower()
            objects[str(oid).lower()] = ObjectState(**spec)
        agent_doc = doc.get("agent", {})
        holding = agent_doc.get("holding")
        agent = AgentState(str(agent_doc.get("location", "")).lower(), holding.lower() if holding else None)
        goal = [(str(g["pred"]).lower(), tuple(str(a).lower() for a in g.get("args", [])))
                for g in doc.get("goal", [])]
        return cls(objects, agent, goal)


def _at(env: SymbolicEnv, oid: str) -> bool:
    obj = env.objects[oid]
    return env.agent.location in (oid, obj.location)


def _apply(env: SymbolicEnv, action: Action) -> bool:
    """Apply ``action`` in place if its preconditions hold; report success."""
    args = action.args
    objs = env.objects
    verb = action.verb
    if verb is Verb.GOTO:
        (x,) = args
        if x in objs:
            obj = objs[x]
            if obj.held:
                return False
            env.agent.location = obj.location if obj.holdable else x
        elif x in env.places():
            env.agent.location = x
        else:
            return False
        if env.agent.holding is not None:
            objs[env.agent.holding].location = env.agent.location
        return True

    if any(a not in objs for a in args):
        return False

    if verb is Verb.PICKUP:
        (x,) = args
        obj = objs[x]
        container = objs.get(obj.location)
        if (not obj.holdable or obj.held or env.agent.holding is not None or not _at(env, x)
                or (container is not None and container.openable and not container.open)):
            return False
        obj.held = True
        obj.location = env.agent.location
        env.agent.holding = x
        return True
    if verb is Verb.PLACE:
        x, y = args
        target = objs[y]
        receptive = target.surface or (target.openable and target.open)
        if env.agent.holding != x or x == y or not receptive or not _at(env, y):
            return False
        obj = objs[x]
        obj.held = False
        obj.location = y
        env.agent.holding = None
        return True

    (x,) = args
    obj = objs[x]
    holding_x = env.agent.holding == x
    if verb is Verb.OPEN:
        ok = obj.openable and not obj.open and _at(env, x)
        if ok:
            obj.open = True
    elif verb is Verb.CLOSE:
        ok = obj.openable and obj.open and _at(env, x)
        if ok:
            obj.open = False
    elif verb is Verb.TOGGLE_ON:
        ok = obj.toggleable and not obj.on and _at(env, x)
        if ok:
            obj.on = True
    elif verb is Verb.TOGGLE_OFF:
        ok = obj.toggleable and obj.on and _at(env, x)
        if ok:
            obj.on = False
    elif verb is Verb.SLICE:
        tool = env.agent.holding
        ok = (obj.sliceable and not obj.sliced and _at(env, x)
              and tool is not None and objs[tool].cutting_tool)
        if ok:
            obj.sliced = True
    elif verb is Verb.CLEAN:
        ok = obj.dirty and (_at(env, x) or holding_x)
        if ok:
            obj.dirty = False
    else:  # HEAT
        ok = obj.heatable and (_at(env, x) or holding_x)
        if ok:
            obj.hot = True
    return ok


def execute(env: SymbolicEnv, plan: Sequence[Action]) -> tuple[SymbolicEnv, int]:
    """Run ``plan`` on a copy of ``env`` until the first failing action.

    Returns the final environment and the number of actions executed.
    """
    state = env.copy()
    done = 0
    for action in plan:
        if not _apply(state, action):
            break
        done += 1
    return state, done


def executability(plan: Sequence[Action], env: SymbolicEnv) -> float:
    """Executed prefix length over plan length; 0 for an empty plan."""
    if not plan:
        return 0.0
    return execute(env, plan)[1] / len(plan)


def lcs_length(a: Sequence, b: Sequence) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def lcs_score(gen: Sequence[Action], gold: Sequence[Action] | Sequence[Sequence[Action]]) -> float:
    """LCS length over ``max(len(gen), len(gold))``; best over several references.

    ``gold`` is either one action sequence or a list of them.
    """
    refs = list(gold)
    if refs and not isinstance(refs[0], Action):
        return max(lcs_score(gen, r) for r in refs)
    longest = max(len(gen), len(refs))
    if longest == 0:
        return 1.0
    return lcs_length(gen, refs) / longest


def _predicate(env: SymbolicEnv, pred: str, args: tuple[str, ...]) -> bool:
    objs = env.objects
    if any(a not in objs for a in args[:1]):
        return False
    if pred in ("on", "in", "at_location"):
        return len(args) == 2 and objs[args[0]].location == args[1] and not objs[args[0]].held
    if pred == "agent_at":
        return len(args) == 1 and env.agent.location in (args[0], objs[args[0]].location)
    if len(args) != 1:
        return False
    obj = objs[args[0]]
    checks = {
        "held": obj.held,
        "open": obj.openable and obj.open,
        "closed": obj.openable and not obj.open,
        "is_on": obj.on,
        "is_off": obj.toggleable and not obj.on,
        "sliced": obj.sliced,
        "clean": not obj.dirty,
        "dirty": obj.dirty,
        "hot": obj.hot,
    }
    return checks.get(pred, False)


def correctness(env: SymbolicEnv, goal: Iterable[tuple[str, Sequence[str]]] | None = None) -> bool:
    """True iff every goal predicate holds; predicates over unknown objects fail."""
    goal = env.goal if goal is None else goal
    return all(_predicate(env, str(p).lower(), tuple(str(a).lower() for a in args)) for p, args in goal)


# ---------------------------------------------------------------- files and corpora

class CorpusError(ValueError):
    pass


def parse_plan(items: Sequence[Mapping[str, Any]]) -> list[Action]:
    return [Action.of(str(it["verb"]), *it.get("args", [])) for it in items]


def load_plan(path: str | os.PathLike) -> list[Action]:
    with open(path, encoding="utf-8") as fh:
        return parse_plan(json.load(fh)["plan"])


def load_gold(path: str | os.PathLike) -> list[list[Action]]:
    """Gold file: ``{"plan": [...]}`` or ``{"plans": [[...], ...]}``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "plans" in doc:
        return [parse_plan(p) for p in doc["plans"]]
    return [parse_plan(doc["plan"])]


def load_env(path: str | os.PathLike) -> SymbolicEnv:
    with open(path, encoding="utf-8") as fh:
        return SymbolicEnv.from_dict(json.load(fh))


@dataclass(frozen=True)
class MetricReport:
    executability: float
    lcs: float
    correct: bool


def evaluate_sample(plan: Sequence[Action], env: SymbolicEnv, golds: Sequence[Sequence[Action]]) -> MetricReport:
    final, done = execute(env, plan)
    exe = done / len(plan) if plan else 0.0
    return MetricReport(exe, lcs_score(plan, list(golds)), correctness(final))


@dataclass(frozen=True)
class CorpusReport:
    rows: tuple[tuple[str, MetricReport], ...]

    @property
    def mean_executability(self) -> float:
        return sum(r.executability for _, r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def mean_lcs(self) -> float:
        return sum(r.lcs for _, r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def correct_rate(self) -> float:
        return sum(r.correct for _, r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def percent_correct(self) -> float:
        return 100.0 * self.correct_rate


def _stems(directory: Path) -> dict[str, Path]:
    return {p.stem: p for p in sorted(directory.glob("*.json"))}


def evaluate_corpus(plans_dir: str | os.PathLike, envs_dir: str | os.PathLike,
                    golds_dir: str | os.PathLike, workers: int = 1) -> CorpusReport:
    """Score every plan file against the env and gold files with the same stem."""
    plans, envs, golds = (_stems(Path(d)) for d in (plans_dir, envs_dir, golds_dir))
    for sid in plans:
        if sid not in golds:
            raise CorpusError(f"no gold plan for sample {sid}")
        if sid not in envs:
            raise CorpusError(f"no environment for sample {sid}")
    for sid in golds:
        if sid not in plans:
            raise CorpusError(f"no generated plan for sample {sid}")

    def one(sid: str) -> tuple[str, MetricReport]:
        return sid, evaluate_sample(load_plan(plans[sid]), load_env(envs[sid]), load_gold(golds[sid]))

    ids = sorted(plans)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, ids))
    else:
        rows = [one(sid) for sid in ids]
    return CorpusReport(tuple(rows))


MEAN_ROW = "__mean__"


def format_report_csv(report: CorpusReport) -> str:
    """Columns ``sample,exec,lcs,correct``; a ``__mean__`` row follows the samples
    (its ``correct`` column is the fraction of correct samples)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sample", "exec", "lcs", "correct"])
    for sid, r in report.rows:
        writer.writerow([sid, f"{r.executability:.6f}", f"{r.lcs:.6f}", int(r.correct)])
    if report.rows:
        writer.writerow([MEAN_ROW, f"{report.mean_executability:.6f}", f"{report.mean_lcs:.6f}",
                         f"{report.correct_rate:.6f}"])
    return buf.getvalue()
