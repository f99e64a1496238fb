"""Command-line entry point: ``hyperscene {build,train,export,eval,grad-check}``.

Exit codes: 0 ok, 2 validation failure, 3 I/O failure, 4 numeric failure.

A run config is a JSON document with optional sections::

    {"profile": "desk",
     "clustering": {"epsilon": 80.0, "min_pts": 2},
     "triview": {"steps": 200, "temperature": 0.07, "learning_rate": 0.001},
     "annotator": {"mode": "replay", "endpoint": "...", "transcript": "..."},
     "paths": {"output_dir": "out"}}

The profile supplies defaults, the file overrides the profile and explicit
flags override both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .enrich import (
    ENDPOINT_ENV,
    LexiconAnnotator,
    RemoteAnnotator,
    ReplayAnnotator,
    enrich,
    enriched_from_dict,
    enriched_to_dict,
)
from .hypergraph import DEFAULT_MIN_PTS, ClusteringParams, build_hypergraph, default_params
from .knowledge import TemplateError, assemble_prompt, build_knowledge
from .plan_eval import CorpusError, evaluate_corpus, format_report_csv
from .scene import SceneParseError, SceneValidationError, load_scene
from .triview import NumericalError, TriViewConfig, grad_check, preset, save_params, train, write_trace

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    profile: str = "desk"
    clustering: dict[str, Any] = field(default_factory=dict)
    triview: dict[str, Any] = field(default_factory=dict)
    annotator: dict[str, Any] = field(default_factory=lambda: {"mode": "fallback"})
    paths: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | os.PathLike | None) -> "RunConfig":
        if path is None:
            return cls()
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path}: {exc}") from None
        unknown = set(doc) - {"profile", "clustering", "triview", "annotator", "paths"}
        if unknown:
            raise ConfigError(f"config {path}: unknown sections {sorted(unknown)}")
        cfg = cls()
        cfg.profile = doc.get("profile", cfg.profile)
        cfg.clustering = dict(doc.get("clustering", {}))
        cfg.triview = dict(doc.get("triview", {}))
        cfg.annotator = {"mode": "fallback", **doc.get("annotator", {})}
        cfg.paths = dict(doc.get("paths", {}))
        return cfg

    def triview_config(self, **flags: Any) -> TriViewConfig:
        base = preset(flags.pop("profile", None) or self.profile)
        settings = {**self.triview, **{k: v for k, v in flags.items() if v is not None}}
        try:
            return base.replace(**settings) if settings else base
        except TypeError as exc:
            raise ConfigError(f"bad triview setting: {exc}") from None

    def clustering_params(self, scene, epsilon: float | None, min_pts: int | None):
        """One ``ClusteringParams`` for all images, or per-image defaults when no epsilon is set."""
        eps = epsilon if epsilon is not None else self.clustering.get("epsilon")
        mp = int(min_pts if min_pts is not None else self.clustering.get("min_pts", DEFAULT_MIN_PTS))
        if eps is None:
            return {im.id: default_params(im.width, im.height, mp) for im in scene.images}
        return ClusteringParams(float(eps), mp)


def _annotator(cfg: RunConfig, args: argparse.Namespace):
    mode = args.annotator or cfg.annotator.get("mode", "fallback")
    endpoint = args.endpoint or cfg.annotator.get("endpoint") or os.environ.get(ENDPOINT_ENV)
    transcript = args.transcript or cfg.annotator.get("transcript")
    if mode == "fallback":
        return LexiconAnnotator()
    if mode == "remote":
        return RemoteAnnotator(endpoint)
    if mode == "replay":
        if not transcript:
            raise ConfigError("replay annotator needs a transcript path")
        if not Path(transcript).exists() and not endpoint:
            raise FileNotFoundError(transcript)
        return ReplayAnnotator(transcript, inner=RemoteAnnotator(endpoint) if endpoint else None)
    raise ConfigError(f"unknown annotator mode {mode!r}")


def _write(path: str | os.PathLike, text: str | bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(text, bytes):
        path.write_bytes(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _read_graph(path: str | os.PathLike):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    try:
        return enriched_from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: malformed hypergraph document ({exc})") from None


def _out_path(cfg: RunConfig, explicit: str | None, stem: str, suffix: str) -> Path:
    if explicit:
        return Path(explicit)
    return Path(cfg.paths.get("output_dir", ".")) / f"{stem}{suffix}"


# ---------------------------------------------------------------- subcommands

def cmd_build(args: argparse.Namespace, cfg: RunConfig) -> int:
    scene = load_scene(args.scene)
    graph = build_hypergraph(scene, cfg.clustering_params(scene, args.epsilon, args.min_pts))
    enriched = enrich(graph, _annotator(cfg, args), scene.task)
    out = _out_path(cfg, args.output, scene.scene_id, ".graph.json")
    _write(out, json.dumps(enriched_to_dict(enriched), indent=2, ensure_ascii=False) + "\n")
    print(f"wrote {out} ({graph.num_nodes} nodes, {graph.num_edges} hyperedges)")
    return EXIT_OK


def cmd_train(args: argparse.Namespace, cfg: RunConfig) -> int:
    graph = _read_graph(args.graph)
    config = cfg.triview_config(profile=args.profile, steps=args.steps, seed=args.seed,
                                learning_rate=args.learning_rate, temperature=args.temperature)
    result = train(graph, config)
    stem = graph.scene_id or Path(args.graph).stem
    params_path = _out_path(cfg, args.params, stem, ".params.bin")
    trace_path = _out_path(cfg, args.trace, stem, ".trace.csv")
    params_path.parent.mkdir(parents=True, exist_ok=True)
    trace_path.parent.mkdir(parents=True, exist_ok=True)
    save_params(params_path, result.params, config)
    write_trace(trace_path, result.trace)
    if result.trace:
        last = result.trace[-1]
        print(f"final losses: L_n={last.node:.6f} L_g={last.area:.6f} L_m={last.membership:.6f} "
              f"L={last.total:.6f}")
    else:
        print("no training steps run")
    return EXIT_OK


def cmd_export(args: argparse.Namespace, cfg: RunConfig) -> int:
    graph = _read_graph(args.graph)
    knowledge = build_knowledge(graph, args.threshold)
    prompt = assemble_prompt(graph.task, knowledge, args.template, args.template_dir)
    stem = graph.scene_id or Path(args.graph).stem
    xml_path = _out_path(cfg, args.xml, stem, ".graph.xml")
    prompt_path = _out_path(cfg, args.prompt, stem, ".prompt.txt")
    _write(xml_path, knowledge.rendered)
    _write(prompt_path, prompt.text)
    print(f"wrote {xml_path} and {prompt_path} ({prompt.length} characters)")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, cfg: RunConfig) -> int:
    for d in (args.plans, args.envs, args.golds):
        if not Path(d).is_dir():
            raise FileNotFoundError(d)
    report = evaluate_corpus(args.plans, args.envs, args.golds, workers=args.workers)
    text = format_report_csv(report)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_grad_check(args: argparse.Namespace, cfg: RunConfig) -> int:
    config = cfg.triview_config(profile=args.profile, seed=args.seed)
    report = grad_check(config, trials=args.trials)
    print("\n".join(report.lines()))
    if not report.passed(args.tolerance):
        print(f"gradient check failed: {report.max_rel_error:.3e} >= {args.tolerance:g}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperscene", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="JSON run-config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="detections -> enriched hypergraph JSON")
    p.add_argument("scene", help="detection JSON file")
    p.add_argument("-o", "--output", help="output path (default <output_dir>/<scene_id>.graph.json)")
    p.add_argument("--epsilon", type=float, help="DBSCAN radius in pixels (default 0.12 * max(W, H))")
    p.add_argument("--min-pts", type=int, help="DBSCAN core-point threshold (default 2)")
    p.add_argument("--annotator", choices=["fallback", "replay", "remote"], help="annotator mode")
    p.add_argument("--transcript", help="replay transcript (JSON lines)")
    p.add_argument("--endpoint", help=f"remote annotator base URL (env {ENDPOINT_ENV} overrides)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("train", help="train the tri-view encoder on a hypergraph JSON")
    p.add_argument("graph", help="enriched hypergraph JSON from 'build'")
    p.add_argument("--params", help="parameter output (default <output_dir>/<scene_id>.params.bin)")
    p.add_argument("--trace", help="loss trace CSV (default <output_dir>/<scene_id>.trace.csv)")
    p.add_argument("--profile", choices=["desk", "paper"], help="hyperparameter preset (default desk)")
    p.add_argument("--steps", type=int, help="optimisation steps")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--learning-rate", type=float, help="Adam learning rate")
    p.add_argument("--temperature", type=float, help="shared InfoNCE temperature")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("export", help="hypergraph JSON -> knowledge XML + prompt text")
    p.add_argument("graph", help="enriched hypergraph JSON from 'build'")
    p.add_argument("--template", default="planner_xml",
                   help="prompt template id: planner_xml, planner_narrative, or a file in --template-dir")
    p.add_argument("--template-dir", help="directory of extra <id>.txt templates")
    p.add_argument("--threshold", type=float, default=0.5, help="cf-score flag threshold")
    p.add_argument("--xml", help="XML output (default <output_dir>/<scene_id>.graph.xml)")
    p.add_argument("--prompt", help="prompt output (default <output_dir>/<scene_id>.prompt.txt)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("eval", help="score plans: executability, LCS, correctness")
    p.add_argument("plans", help="directory of <id>.json generated plans")
    p.add_argument("envs", help="directory of <id>.json environments")
    p.add_argument("golds", help="directory of <id>.json gold plans")
    p.add_argument("-o", "--output", help="report CSV (default stdout)")
    p.add_argument("--workers", type=int, default=1, help="parallel workers")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grad-check", help="verify analytic gradients by finite differences")
    p.add_argument("--trials", type=int, default=5, help="random instances")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--profile", choices=["desk", "paper"], help="hyperparameter preset")
    p.add_argument("--tolerance", type=float, default=1e-5, help="max relative error")
    p.set_defaults(func=cmd_grad_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        return args.func(args, cfg)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SceneParseError, SceneValidationError, TemplateError, CorpusError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
