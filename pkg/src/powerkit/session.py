"""Interactive elicitation sessions.

A session walks the loop: describe the study, get a recommendation,
fill the parameter checklist, solve, then iterate what-if edits. The
transition function is pure — (state, command) -> (state, reply) — and
history is append-only, so folding the recorded commands over a fresh
state reproduces the final state exactly.

Free-text interpretation is a pluggable boundary: the default client is a
deterministic stub over the command grammar, an HTTP client can be
configured instead, and both fall back to the grammar on any failure.
"""

from __future__ import annotations

import dataclasses
import json
import time
import urllib.error
import urllib.request
import uuid
from dataclasses import dataclass, field
from typing import Any, Callable

from . import selector
from .designs import InvalidDesignError, TESTS, build_spec
from .grammar import Command, ParseError, parse_command, pretty, suggest_parameter
from .selector import (
    IncoherentDescriptorError,
    StudyDescriptor,
    UnsupportedDesignError,
    checklist,
)
from .solve import SolveResult, UnreachablePowerError, solve_effect, solve_n, solve_power

__all__ = [
    "HistoryEntry", "Reply", "SessionState",
    "apply", "new_session", "replay", "export_transcript",
    "ModelClient", "StubModelClient", "HttpModelClient",
]

# friendly spellings accepted by `set` in addition to canonical field names
_PARAM_ALIASES = {
    "baseline": "p0",
    "baseline-incidence": "p0",
    "baseline_incidence": "p0",
    "control-rate": "p0",
    "treatment-rate": "p1",
    "sample-size": "n",
    "sample_size": "n",
}
_ARR_NAMES = {"absolute-risk-reduction", "absolute_risk_reduction", "arr",
              "risk-reduction", "risk_reduction"}

_DESCRIBE_ALIASES = {
    "outcome": "outcome",
    "groups": "n_groups",
    "n_groups": "n_groups",
    "arms": "n_groups",
    "pairing": "pairing",
    "paired": "pairing",
    "comparison": "comparison",
    "assumption": "distribution_assumption",
    "distribution": "distribution_assumption",
    "distribution_assumption": "distribution_assumption",
    "covariates": "covariate_adjusted",
    "covariate_adjusted": "covariate_adjusted",
    "adjusted": "covariate_adjusted",
}
_OUTCOME_ALIASES = {
    "continuous": "continuous", "binary": "binary", "correlation": "correlation",
    "time_to_event": "time_to_event", "time-to-event": "time_to_event",
    "survival": "time_to_event",
}


@dataclass(frozen=True)
class HistoryEntry:
    t: float
    command: str                    # canonical command text
    reply_text: str
    result: dict | None = None      # SolveResult payload when one was produced


@dataclass(frozen=True)
class Reply:
    text: str
    data: dict | None = None
    error: bool = False


@dataclass(frozen=True)
class SessionState:
    id: str
    created: float
    updated: float
    descriptor: dict = field(default_factory=dict)
    chosen_test: str | None = None
    known_params: tuple[tuple[str, Any], ...] = ()
    pending: tuple[str, ...] = ()
    history: tuple[HistoryEntry, ...] = ()
    last_target: str = "sample_size"

    def params_dict(self) -> dict[str, Any]:
        return dict(self.known_params)


def new_session(session_id: str | None = None, now: float | None = None) -> SessionState:
    t = time.time() if now is None else now
    return SessionState(id=session_id or uuid.uuid4().hex, created=t, updated=t)


def _with_entry(state: SessionState, cmd: Command, reply: Reply, now: float,
                **changes) -> SessionState:
    entry = HistoryEntry(t=now, command=pretty(cmd), reply_text=reply.text,
                         result=reply.data if reply.data and "n_total" in reply.data else None)
    return dataclasses.replace(state, updated=now,
                               history=state.history + (entry,), **changes)


def _set_param(state: SessionState, name: str, value: Any) -> tuple[tuple, tuple]:
    known = dict(state.known_params)
    known[name] = value  # last write wins
    pending = tuple(p for p in state.pending if p != name)
    return tuple(known.items()), pending


def _valid_param_names(state: SessionState) -> tuple[str, ...]:
    if state.chosen_test is None:
        return ()
    return tuple(item.name for item in checklist(state.chosen_test)) + ("n",)


def apply(state: SessionState, cmd: Command, now: float | None = None
          ) -> tuple[SessionState, Reply]:
    """Pure transition function. Invalid commands produce error replies,
    never exceptions."""
    now = time.time() if now is None else now
    handler = _HANDLERS.get(cmd.verb)
    if handler is None:
        reply = Reply(f"unknown command verb {cmd.verb!r}", error=True)
        return _with_entry(state, cmd, reply, now), reply
    return handler(state, cmd, now)


def _handle_describe(state: SessionState, cmd: Command, now: float):
    fields: dict[str, Any] = {}
    for key, value in cmd.args:
        canon = _DESCRIBE_ALIASES.get(key)
        if canon is None:
            reply = Reply(f"unknown study field {key!r}; expected one of "
                          f"{sorted(set(_DESCRIBE_ALIASES))}", error=True)
            return _with_entry(state, cmd, reply, now), reply
        fields[canon] = value
    if "outcome" in fields:
        outcome = _OUTCOME_ALIASES.get(str(fields["outcome"]).lower())
        if outcome is None:
            reply = Reply(f"unknown outcome {fields['outcome']!r}; expected one of "
                          f"{sorted(set(_OUTCOME_ALIASES.values()))}", error=True)
            return _with_entry(state, cmd, reply, now), reply
        fields["outcome"] = outcome
    if "n_groups" in fields:
        fields["n_groups"] = int(fields["n_groups"])
    if "pairing" in fields and fields["pairing"] in ("yes", "true"):
        fields["pairing"] = "paired"
    if "covariate_adjusted" in fields:
        fields["covariate_adjusted"] = str(fields["covariate_adjusted"]).lower() in (
            "1", "1.0", "true", "yes")

    merged = {**state.descriptor, **fields}
    if "outcome" not in merged:
        reply = Reply("describe needs at least the outcome "
                      "(continuous, binary, time_to_event, correlation)", error=True)
        return _with_entry(state, cmd, reply, now), reply
    try:
        descriptor = StudyDescriptor(**merged)
        rec = selector.select(descriptor)
    except (IncoherentDescriptorError, UnsupportedDesignError) as exc:
        reply = Reply(f"cannot map this study to a test: {exc}", error=True)
        return _with_entry(state, cmd, reply, now, descriptor=merged), reply

    items = checklist(rec.test)
    known = {i.name: i.default for i in items if i.default is not None}
    pending = tuple(i.name for i in items if i.default is None)
    text = (f"Recommended test: {TESTS[rec.test].label} ({rec.test}). "
            f"{rec.rationale}."
            + (f" Alternatives: {', '.join(rec.alternatives)}." if rec.alternatives else "")
            + f" Please provide: {', '.join(pending)}."
            + f" Defaults applied: "
            + ", ".join(f"{k}={v}" for k, v in known.items()) + ".")
    reply = Reply(text, data={"test": rec.test, "pending": list(pending),
                              "alternatives": list(rec.alternatives)})
    new = _with_entry(state, cmd, reply, now,
                      descriptor=merged, chosen_test=rec.test,
                      known_params=tuple(known.items()), pending=pending)
    return new, reply


def _handle_choose(state: SessionState, cmd: Command, now: float):
    test = cmd.get("test")
    if test not in TESTS:
        reply = Reply(f"unknown test id {test!r}; expected one of {sorted(TESTS)}",
                      error=True)
        return _with_entry(state, cmd, reply, now), reply
    items = checklist(test)
    known = {i.name: i.default for i in items if i.default is not None}
    pending = tuple(i.name for i in items if i.default is None)
    reply = Reply(f"Chosen test: {TESTS[test].label} ({test}). "
                  f"Please provide: {', '.join(pending)}.",
                  data={"test": test, "pending": list(pending)})
    new = _with_entry(state, cmd, reply, now, chosen_test=test,
                      known_params=tuple(known.items()), pending=pending)
    return new, reply


def _handle_set(state: SessionState, cmd: Command, now: float):
    return _set_or_whatif(state, cmd, now, resolve=False)


def _handle_whatif(state: SessionState, cmd: Command, now: float):
    return _set_or_whatif(state, cmd, now, resolve=True)


def _set_or_whatif(state: SessionState, cmd: Command, now: float, resolve: bool):
    if state.chosen_test is None:
        reply = Reply("no test chosen yet; use `describe ...` or `choose <test>` first",
                      error=True)
        return _with_entry(state, cmd, reply, now), reply
    (raw_name, value), = cmd.args
    name = _PARAM_ALIASES.get(raw_name, raw_name)
    known = state.params_dict()

    if raw_name in _ARR_NAMES:
        # absolute risk reduction: treatment rate is baseline minus the reduction
        if "p0" not in known:
            reply = Reply("set the baseline rate (p0) before the absolute risk "
                          "reduction", error=True)
            return _with_entry(state, cmd, reply, now), reply
        derived = known["p0"] - float(value)
        known_t, pending = _set_param(state, "p1", derived)
        note = (f"absolute risk reduction {value:g} applied: "
                f"p1 = p0 - {value:g} = {derived:g}")
        state = dataclasses.replace(state, known_params=known_t, pending=pending)
        name, value = "p1", derived
    elif raw_name == "eta2" and state.chosen_test in ("one_way_anova", "kruskal_wallis"):
        # eta-squared convention converted to Cohen's f
        from .designs import f_from_eta_squared
        try:
            derived = f_from_eta_squared(float(value))
        except InvalidDesignError as exc:
            reply = Reply(str(exc), error=True)
            return _with_entry(state, cmd, reply, now), reply
        known_t, pending = _set_param(state, "f", derived)
        note = f"eta2 {value:g} converted: f = sqrt(eta2/(1-eta2)) = {derived:g}"
        state = dataclasses.replace(state, known_params=known_t, pending=pending)
        name, value = "f", derived
    else:
        valid = _valid_param_names(state)
        if name not in valid:
            hint = suggest_parameter(name, valid)
            text = f"unknown parameter {raw_name!r} for {state.chosen_test}"
            if hint:
                text += f"; nearest valid name: {hint!r}"
            reply = Reply(text, error=True)
            return _with_entry(state, cmd, reply, now), reply
        known_t, pending = _set_param(state, name, value)
        note = f"{name} set to {value!r}"
        state = dataclasses.replace(state, known_params=known_t, pending=pending)

    if not resolve:
        nxt = f" Next: {state.pending[0]}." if state.pending else " Ready to solve."
        reply = Reply(note + "." + nxt,
                      data={"set": name, "pending": list(state.pending)})
        return _with_entry(state, cmd, reply, now), reply

    # what-if re-solves the last target with the edited assumption
    state, reply = _do_solve(state, cmd, now, state.last_target, prefix=note + ". ")
    return state, reply


def _handle_unset(state: SessionState, cmd: Command, now: float):
    if state.chosen_test is None:
        reply = Reply("no test chosen yet", error=True)
        return _with_entry(state, cmd, reply, now), reply
    (raw_name, _), = cmd.args
    name = _PARAM_ALIASES.get(raw_name, raw_name)
    names = tuple(i.name for i in checklist(state.chosen_test))
    if name not in names:
        reply = Reply(f"{raw_name!r} is not a parameter of {state.chosen_test}", error=True)
        return _with_entry(state, cmd, reply, now), reply
    known = state.params_dict()
    known.pop(name, None)
    pending = tuple(p for p in names if p not in known)
    reply = Reply(f"{name} cleared; missing: {', '.join(pending)}",
                  data={"pending": list(pending)})
    new = _with_entry(state, cmd, reply, now,
                      known_params=tuple(known.items()), pending=pending)
    return new, reply


def _handle_solve(state: SessionState, cmd: Command, now: float):
    target = cmd.get("target", "sample_size")
    return _do_solve(state, cmd, now, target)


def _build_solve(state: SessionState, target: str) -> SolveResult:
    known = state.params_dict()
    alpha = known.get("alpha", 0.05)
    tails = known.get("tails", "two")
    power_goal = known.get("power")
    n_fixed = known.get("n")
    design_params = {k: v for k, v in known.items()
                     if k not in ("alpha", "tails", "power", "n")}
    spec = build_spec(state.chosen_test, design_params, alpha=alpha, tails=tails)
    if target == "sample_size":
        return solve_n(spec, power_goal)
    if target == "power":
        if n_fixed is None:
            raise InvalidDesignError({"n": "set n before solving for power"})
        return solve_power(spec, int(n_fixed))
    if n_fixed is None:
        raise InvalidDesignError({"n": "set n before solving for the effect"})
    return solve_effect(spec, int(n_fixed), power_goal)


def _do_solve(state: SessionState, cmd: Command, now: float, target: str,
              prefix: str = ""):
    if state.chosen_test is None:
        reply = Reply("no test chosen yet; use `describe ...` or `choose <test>` first",
                      error=True)
        return _with_entry(state, cmd, reply, now), reply
    if state.pending:
        reply = Reply(prefix + f"still missing: {', '.join(state.pending)}. "
                      f"Next, set {state.pending[0]}.",
                      data={"pending": list(state.pending)}, error=False)
        return _with_entry(state, cmd, reply, now), reply
    try:
        result = _build_solve(state, target)
    except (InvalidDesignError, UnreachablePowerError) as exc:
        reply = Reply(prefix + f"cannot solve: {exc}", error=True)
        return _with_entry(state, cmd, reply, now), reply
    text = prefix + _explain_result(state, result)
    reply = Reply(text, data=result.to_dict())
    new = _with_entry(state, cmd, reply, now, last_target=target)
    return new, reply


def _explain_result(state: SessionState, result: SolveResult) -> str:
    label = TESTS[result.test].label
    known = state.params_dict()
    if result.target == "sample_size":
        arms = "/".join(str(v) for v in result.n_per_arm)
        text = (f"The {label} needs {arms} per arm ({result.n_total} total) to reach "
                f"power {known.get('power'):g} at alpha {known.get('alpha'):g}; the "
                f"achieved power at that size is {result.achieved_power:.4f}.")
        if result.events_required is not None:
            text += f" This corresponds to {result.events_required} required events."
    elif result.target == "power":
        text = (f"At n = {result.n_total} the {label} has power "
                f"{result.achieved_power:.4f} at alpha {known.get('alpha'):g}.")
    else:
        text = (f"The smallest effect the {label} can detect at "
                f"n = {result.n_total} with power {known.get('power'):g} is "
                f"{result.effect_solved:.6g} (standardized units).")
    return text + f" [formula: {result.formula_id}]"


def _handle_explain(state: SessionState, cmd: Command, now: float):
    if state.chosen_test is None:
        reply = Reply("No test chosen yet. Start with `describe outcome=... groups=...` "
                      "and I will map your study to a test and list what it needs.")
        return _with_entry(state, cmd, reply, now), reply
    last = next((e for e in reversed(state.history) if e.result), None)
    lines = [f"Current test: {TESTS[state.chosen_test].label} ({state.chosen_test})."]
    if state.known_params:
        lines.append("Known: " + ", ".join(f"{k}={v!r}" for k, v in state.known_params) + ".")
    if state.pending:
        lines.append("Missing: " + ", ".join(state.pending) + ".")
    if last:
        lines.append(f"Last result: {json.dumps(last.result, sort_keys=True)}.")
    reply = Reply(" ".join(lines))
    return _with_entry(state, cmd, reply, now), reply


def _handle_export(state: SessionState, cmd: Command, now: float):
    transcript = export_transcript(state)
    reply = Reply(transcript, data={"format": "transcript/plain"})
    return _with_entry(state, cmd, reply, now), reply


_HANDLERS: dict[str, Callable] = {
    "describe": _handle_describe,
    "choose": _handle_choose,
    "set": _handle_set,
    "whatif": _handle_whatif,
    "unset": _handle_unset,
    "solve": _handle_solve,
    "explain": _handle_explain,
    "export": _handle_export,
}


def replay(history: tuple[HistoryEntry, ...], session_id: str,
           created: float) -> SessionState:
    """Fold recorded commands over a fresh state (event-sourcing check)."""
    state = SessionState(id=session_id, created=created, updated=created)
    for entry in history:
        state, _ = apply(state, parse_command(entry.command), now=entry.t)
    return state


def export_transcript(state: SessionState) -> str:
    """Session transcript as structured plain text, suitable for a protocol
    appendix: commands, replies, and the formula ids behind each result."""
    lines = [
        f"session {state.id}",
        f"created {state.created:.3f}  updated {state.updated:.3f}",
        f"test {state.chosen_test or '-'}",
        "-" * 60,
    ]
    for i, entry in enumerate(state.history, 1):
        lines.append(f"[{i:03d}] > {entry.command}")
        for ln in entry.reply_text.splitlines():
            lines.append(f"      {ln}")
        if entry.result:
            lines.append(f"      result: {json.dumps(entry.result, sort_keys=True)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# pluggable free-text interpretation
# ---------------------------------------------------------------------------

class ModelClient:
    """Adapter contract: free text in, Command out. Implementations must
    degrade to the deterministic grammar on any failure."""

    def interpret(self, text: str) -> Command:
        raise NotImplementedError


class StubModelClient(ModelClient):
    """Default offline client: straight pass-through to the grammar."""

    def interpret(self, text: str) -> Command:
        return parse_command(text)


class HttpModelClient(ModelClient):
    """Posts the utterance to an external chat-completion style endpoint that
    returns {"command": "<grammar text>"}; any failure (network, timeout,
    malformed payload, unparseable command) falls back to parsing the
    original text, recording a notice."""

    def __init__(self, endpoint: str, timeout: float = 5.0,
                 opener: Callable | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self._opener = opener or urllib.request.urlopen
        self.last_notice: str | None = None

    def interpret(self, text: str) -> Command:
        self.last_notice = None
        try:
            payload = json.dumps({"text": text}).encode()
            req = urllib.request.Request(self.endpoint, data=payload,
                                         headers={"Content-Type": "application/json"})
            with self._opener(req, timeout=self.timeout) as resp:
                body = json.loads(resp.read().decode())
            return parse_command(body["command"])
        except (urllib.error.URLError, OSError, KeyError, TypeError,
                ValueError) as exc:
            self.last_notice = f"model client failed ({exc}); fell back to grammar"
            return parse_command(text)
