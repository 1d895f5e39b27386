"""``agcontracts`` command line: check, verify, simulate, confidence.

Exit codes: 0 when every check passes, 1 for verification findings
(failed or exhausted obligations, monitor violations), 2 for usage,
parse and resolve errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .composition import VALID, CompositionError, discharge_obligations, system_contract
from .confidence import ConfidenceError, confidence_report, evidence_from_graph, load_evidence
from .dsl import Diagnostic, SpecError, load_spec
from .entailment import Scope, ScopeError
from .graph import cycle_components
from .logic import Span, formula_text
from .monitor import MonitorError, Violated, trace_to_jsonl, verdicts_json
from .simulation import ScenarioError, SimulationError, parse_scenario, run_simulation

EXIT_OK, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2
_NOWHERE = Span(1, 1, 0)


class _Usage(Exception):
    pass


class _Report:
    def __init__(self, command: str, timestamp: bool):
        self.data = {
            "version": __version__,
            "command": command,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None,
            "inputs": {},
            "diagnostics": [],
            "obligations": [],
            "system_contract": None,
            "verdicts": {},
            "confidence": None,
            "exit": EXIT_OK,
        }
        self.text: list[str] = []

    def read(self, path: str) -> str:
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise _Usage(f"cannot read {path}: {exc.strerror or exc}") from None
        self.data["inputs"][path] = hashlib.sha256(raw).hexdigest()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise _Usage(f"{path} is not UTF-8 text") from None

    def diagnose(self, diags, path: str):
        for d in diags:
            self.data["diagnostics"].append({"file": path, **d.to_json()})
            self.text.append(f"{path}:{d}")

    def error(self, message: str, code: str, path: str = ""):
        self.diagnose([Diagnostic("error", message, _NOWHERE, code)], path)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from JSON output")

    parser = argparse.ArgumentParser(prog="agcontracts", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"agcontracts {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="parse, resolve and validate a spec")
    p.add_argument("file")

    p = sub.add_parser("verify", parents=[common], help="discharge compatibility obligations")
    p.add_argument("file")
    p.add_argument("--scope", type=int, default=3, help="domain size bound per base sort")
    p.add_argument("--nat", type=int, default=4, help="Nat ranges over 0..N-1")
    p.add_argument("--budget", type=int, default=10**7, help="interpretations examined per obligation")
    p.add_argument("--unroll", type=int, default=1, help="loop unroll bound")

    p = sub.add_parser("simulate", parents=[common], help="run a scenario and monitor every contract")
    p.add_argument("file")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--trace", help="write the event trace as JSON lines to this path")

    p = sub.add_parser("confidence", parents=[common], help="report the verification-confidence measure")
    p.add_argument("file")
    p.add_argument("--evidence", help="JSON evidence table overriding the spec's evidence clauses")
    return parser


def _load(report: _Report, path: str):
    text = report.read(path)
    try:
        return load_spec(text)
    except SpecError as exc:
        report.diagnose(exc.diagnostics, path)
        return None


def _check(args, report: _Report) -> int:
    loaded = _load(report, args.file)
    if loaded is None:
        return EXIT_ERROR
    _, _, graph = loaded
    for comp in cycle_components(graph, ignore_self_loops=True):
        report.diagnose([Diagnostic("warning", f"cycle through {', '.join(comp)} cannot be composed",
                                    _NOWHERE, "cycle")], args.file)
    report.text.append(f"{args.file}: ok, {len(graph.nodes)} nodes, {len(graph.edges)} connections")
    return EXIT_OK


def _verify(args, report: _Report) -> int:
    try:
        scope = Scope(args.scope, args.nat)
    except ScopeError as exc:
        raise _Usage(str(exc)) from None
    if args.budget < 1 or args.unroll < 1:
        raise _Usage("--budget and --unroll must be positive")
    loaded = _load(report, args.file)
    if loaded is None:
        return EXIT_ERROR
    _, _, graph = loaded
    try:
        composed, obligations = system_contract(graph, unroll=args.unroll)
    except CompositionError as exc:
        report.error(str(exc), "composition", args.file)
        return EXIT_ERROR
    done, summary = discharge_obligations(obligations, scope, budget=args.budget)
    for ob in done:
        entry = {"id": ob.id, "from": list(ob.sources), "to": list(ob.targets),
                 "status": ob.status, "scope": scope.to_json()}
        if ob.counterexample is not None:
            entry["counterexample"] = ob.counterexample.to_json()
        if ob.warnings:
            entry["warnings"] = list(ob.warnings)
        report.data["obligations"].append(entry)
        report.text.append(f"[{ob.status}] {ob.id} ({ob.origin}): "
                           f"{', '.join(formula_text(h) for h in ob.hypotheses)} |= {formula_text(ob.conclusion)}")
        for w in ob.warnings:
            report.text.append(f"  warning: {w}")
        if ob.result is not None and ob.status != VALID:
            report.text.extend("  " + line for line in str(ob.result).splitlines())
    report.data["system_contract"] = {"assumption": formula_text(composed.assumption),
                                      "guarantee": formula_text(composed.guarantee)}
    report.text.append(f"system contract: {formula_text(composed.assumption)} => {formula_text(composed.guarantee)}")
    report.text.append(f"{summary[VALID]}/{len(done)} obligations {VALID} ({scope.describe()})")
    return EXIT_OK if summary[VALID] == len(done) else EXIT_FINDINGS


def _simulate(args, report: _Report) -> int:
    loaded = _load(report, args.file)
    scenario_text = report.read(args.scenario)
    if loaded is None:
        return EXIT_ERROR
    _, _, graph = loaded
    try:
        scenario = parse_scenario(scenario_text)
    except ScenarioError as exc:
        report.diagnose(exc.diagnostics, args.scenario)
        return EXIT_ERROR
    seed = scenario.seed if args.seed is None else args.seed
    steps = scenario.steps if args.steps is None else args.steps
    try:
        stubs = scenario.build_stubs(graph)
        result = run_simulation(graph, stubs, scenario.universe, scenario.inputs, seed, steps,
                                unroll=scenario.unroll)
    except (SimulationError, MonitorError, CompositionError) as exc:
        report.error(str(exc), "simulation", args.scenario)
        return EXIT_ERROR
    if args.trace:
        Path(args.trace).write_text(trace_to_jsonl(result.trace))
    verdicts = dict(result.verdicts)
    verdicts["<system>"] = result.system_verdict
    report.data["verdicts"] = verdicts_json(verdicts)
    for name, state in verdicts.items():
        extra = "".join(f" {k}={v}" for k, v in state.to_json().items() if k != "state")
        report.text.append(f"{name}: {state.name}{extra}")
        if state.name == "vacuous":
            report.diagnose([Diagnostic("warning", f"{name} holds vacuously: its assumption never held",
                                        _NOWHERE, "vacuous")], args.scenario)
    report.text.append(f"{len(result.trace)} events, seed {seed}, {steps} steps, "
                       f"{len(result.violations)} violation(s)")
    return EXIT_FINDINGS if any(isinstance(s, Violated) for s in verdicts.values()) else EXIT_OK


def _confidence(args, report: _Report) -> int:
    loaded = _load(report, args.file)
    evidence_text = report.read(args.evidence) if args.evidence else None
    if loaded is None:
        return EXIT_ERROR
    _, _, graph = loaded
    try:
        table = load_evidence(evidence_text) if evidence_text is not None else evidence_from_graph(graph)
        conf = confidence_report(graph, table)
    except ConfidenceError as exc:
        report.error(str(exc), "confidence", args.evidence or args.file)
        return EXIT_ERROR
    report.data["confidence"] = conf.to_json()
    report.text.append(conf.text())
    return EXIT_OK


_COMMANDS = {"check": _check, "verify": _verify, "simulate": _simulate, "confidence": _confidence}


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    report = _Report(args.command, not args.no_timestamp)
    try:
        code = _COMMANDS[args.command](args, report)
    except _Usage as exc:
        report.error(str(exc), "usage")
        code = EXIT_ERROR
    report.data["exit"] = code
    if args.format == "json":
        sys.stdout.write(json.dumps(report.data, indent=2) + "\n")
    else:
        sys.stdout.write("\n".join(report.text) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
