"""Command grammar for interactive sessions.

A deterministic tokenizer + recursive-descent parser over the session
verbs; the pluggable language-model client falls back to this grammar, so
the whole interactive layer works offline.

    command   := describe | choose | set | unset | solve | whatif
               | explain | export
    describe  := "describe" assignment+
    choose    := "choose" WORD
    set       := "set" WORD "="? value
    unset     := "unset" WORD
    solve     := "solve" target?
    whatif    := "whatif" WORD "="? value
    explain   := "explain" WORD?
    export    := "export"
    target    := "n" | "sample_size" | "power" | "effect"
    value     := NUMBER "%"? | WORD
    assignment:= WORD "="? value

Numbers accept percent notation: "18%" parses to 0.18.
"""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field

VERBS = ("describe", "choose", "set", "unset", "solve", "whatif", "explain", "export")

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?%?)"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_\-]*)"
    r"|(?P<eq>=)"
    r"|(?P<bad>\S))"
)


class ParseError(ValueError):
    """Parse failure with position and the token set that was expected."""

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = expected
        detail = f"{message} at position {position}"
        if expected:
            detail += f" (expected: {', '.join(expected)})"
        super().__init__(detail)


@dataclass(frozen=True)
class Token:
    kind: str   # "number" | "word" | "eq" | "end"
    text: str
    pos: int
    value: float | None = None


@dataclass(frozen=True)
class Command:
    verb: str
    args: tuple[tuple[str, object], ...] = ()

    def get(self, key: str, default=None):
        for k, v in self.args:
            if k == key:
                return v
        return default


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        if m.group("bad"):
            raise ParseError(f"unexpected character {m.group('bad')!r}", m.start("bad"))
        if m.group("number"):
            raw = m.group("number")
            if raw.endswith("%"):
                value = float(raw[:-1]) / 100.0
            else:
                value = float(raw)
            tokens.append(Token("number", raw, m.start("number"), value))
        elif m.group("word"):
            tokens.append(Token("word", m.group("word"), m.start("word")))
        else:
            tokens.append(Token("eq", "=", m.start("eq")))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "end":
            self.i += 1
        return tok

    def expect(self, kind: str, expected: tuple[str, ...]) -> Token:
        if self.cur.kind != kind:
            raise ParseError(f"unexpected {self.cur.kind} {self.cur.text!r}",
                             self.cur.pos, expected)
        return self.advance()

    def eat_eq(self) -> None:
        if self.cur.kind == "eq":
            self.advance()

    def value(self) -> object:
        if self.cur.kind == "number":
            return self.advance().value
        if self.cur.kind == "word":
            return self.advance().text
        raise ParseError(f"unexpected {self.cur.kind}", self.cur.pos,
                         ("number", "word"))

    def at_end(self) -> bool:
        return self.cur.kind == "end"


def parse_command(text: str) -> Command:
    """Parse one command line. Raises ParseError on malformed input."""
    tokens = tokenize(text)
    p = _Parser(tokens)
    head = p.expect("word", VERBS)
    verb = head.text.lower()
    if verb not in VERBS:
        hint = difflib.get_close_matches(verb, VERBS, n=1)
        msg = f"unknown verb {verb!r}"
        if hint:
            msg += f"; did you mean {hint[0]!r}?"
        raise ParseError(msg, head.pos, VERBS)

    if verb == "describe":
        args = []
        while not p.at_end():
            name = p.expect("word", ("field name",)).text.lower()
            p.eat_eq()
            args.append((name, p.value()))
        if not args:
            raise ParseError("describe needs at least one field", p.cur.pos,
                             ("outcome", "groups", "pairing", "comparison"))
        return Command("describe", tuple(args))

    if verb == "choose":
        name = p.expect("word", ("test id",)).text.lower()
        _require_end(p)
        return Command("choose", (("test", name),))

    if verb in ("set", "whatif"):
        name = p.expect("word", ("parameter name",)).text.lower()
        p.eat_eq()
        val = p.value()
        _require_end(p)
        return Command(verb, ((name, val),))

    if verb == "unset":
        name = p.expect("word", ("parameter name",)).text.lower()
        _require_end(p)
        return Command("unset", ((name, True),))

    if verb == "solve":
        target = "sample_size"
        if not p.at_end():
            word = p.expect("word", ("n", "sample_size", "power", "effect")).text.lower()
            targets = {"n": "sample_size", "sample_size": "sample_size",
                       "power": "power", "effect": "effect"}
            if word not in targets:
                raise ParseError(f"unknown solve target {word!r}", p.tokens[p.i - 1].pos,
                                 ("n", "sample_size", "power", "effect"))
            target = targets[word]
        _require_end(p)
        return Command("solve", (("target", target),))

    if verb == "explain":
        topic = None
        if not p.at_end():
            topic = p.expect("word", ("topic",)).text.lower()
        _require_end(p)
        return Command("explain", (("topic", topic),) if topic else ())

    # export
    _require_end(p)
    return Command("export")


def _require_end(p: _Parser) -> None:
    if not p.at_end():
        raise ParseError(f"trailing input {p.cur.text!r}", p.cur.pos, ("end of command",))


def pretty(cmd: Command) -> str:
    """Canonical text form; pretty(parse(text)) reparses to an equal Command."""
    if cmd.verb == "export":
        return "export"
    if cmd.verb == "solve":
        target = cmd.get("target", "sample_size")
        return f"solve {'n' if target == 'sample_size' else target}"
    if cmd.verb == "explain":
        topic = cmd.get("topic")
        return f"explain {topic}" if topic else "explain"
    if cmd.verb == "choose":
        return f"choose {cmd.get('test')}"
    parts = [cmd.verb]
    for key, value in cmd.args:
        if cmd.verb == "unset":
            parts.append(key)
        elif isinstance(value, float):
            parts.append(f"{key} {value!r}")
        else:
            parts.append(f"{key} {value}")
    return " ".join(parts)


def suggest_parameter(name: str, valid: tuple[str, ...]) -> str | None:
    """Nearest valid parameter name for a typo diagnostic."""
    hits = difflib.get_close_matches(name, valid, n=1, cutoff=0.5)
    return hits[0] if hits else None
