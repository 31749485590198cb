"""Import/export for the accepted TVL subset.

A TVL model is a list of feature blocks; the first one is the root. Group
mapping: an `allof` child is mandatory, or optional when flagged `opt`;
`oneof` becomes one alternative group, `someof` one or group. Constraints
may appear in any block and are collected into the single model-level set;
export emits them inside the root block.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import Constraint, DecompKind, Feature, FeatureModel
from .serializer import format_real
from .tokens import STRING_PUNCT

KEYWORDS = {
    "enum", "string", "in", "root", "group", "allof", "oneof", "someof",
    "opt", "int", "real", "bool", "is", "requires", "excludes", "true", "false",
}

_ID_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")


class TvlError(Exception):
    """Input is not a valid model in the accepted TVL subset."""


class TvlExportError(Exception):
    """The model cannot be represented in the TVL subset."""


@dataclass
class _Tok:
    kind: str
    value: object
    line: int


def _tokenize(text: str) -> list:
    tokens = []
    i, line = 0, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] not in '"\n':
                c = text[j]
                if not (c.isascii() and (c.isalnum() or c in STRING_PUNCT)):
                    raise TvlError(f"line {line}: character {c!r} not allowed in a string")
                j += 1
            if j >= n or text[j] != '"' or j == i + 1:
                raise TvlError(f"line {line}: bad string literal")
            tokens.append(_Tok("STRING", text[i + 1:j], line))
            i = j + 1
            continue
        if ch.isdigit() or (ch in "+-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j + 1 < n and text[j] == "." and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                tokens.append(_Tok("REAL", float(text[i:j]), line))
            else:
                tokens.append(_Tok("INT", int(text[i:j]), line))
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(_Tok(word if word in KEYWORDS else "ID", word, line))
            i = j
            continue
        if ch in "{},;":
            tokens.append(_Tok(ch, ch, line))
            i += 1
            continue
        raise TvlError(f"line {line}: unexpected character {ch!r}")
    tokens.append(_Tok("EOF", None, line))
    return tokens


@dataclass
class _Block:
    name: str
    attributes: dict = field(default_factory=dict)
    groups: list = field(default_factory=list)  # (cardinality, [(opt?, id)])
    constraints: list = field(default_factory=list)
    line: int = 0


class _TvlParser:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Tok:
        return self.tokens[self.pos]

    def next(self) -> _Tok:
        t = self.peek()
        if t.kind != "EOF":
            self.pos += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.peek()
        if t.kind != kind:
            raise TvlError(f"line {t.line}: expected {kind!r}, found {t.value!r}")
        return self.next()

    def parse(self):
        header = None
        if self.peek().kind == "enum":
            self.next()
            self.expect("string")
            self.expect("in")
            self.expect("{")
            header = [self.expect("STRING").value]
            while self.peek().kind == ",":
                self.next()
                header.append(self.expect("STRING").value)
            self.expect("}")
            self.expect(";")
        blocks = []
        self.expect("root")
        blocks.append(self.parse_block())
        while self.peek().kind == "ID":
            blocks.append(self.parse_block())
        self.expect("EOF")
        return header, blocks

    def parse_block(self) -> _Block:
        t = self.expect("ID")
        block = _Block(t.value, line=t.line)
        self.expect("{")
        while self.peek().kind in ("int", "real", "bool", "string"):
            tag = self.next().kind
            name = self.parse_attr_id()
            self.expect("is")
            block.attributes[name] = self.parse_value(tag)
            self.expect(";")
        while self.peek().kind == "group":
            self.next()
            card = self.peek()
            if card.kind not in ("allof", "oneof", "someof"):
                raise TvlError(
                    f"line {card.line}: expected allof, oneof, or someof")
            self.next()
            self.expect("{")
            members = []
            while True:
                opt = False
                if card.kind == "allof" and self.peek().kind == "opt":
                    self.next()
                    opt = True
                members.append((opt, self.expect("ID").value))
                if self.peek().kind != ",":
                    break
                self.next()
            self.expect("}")
            block.groups.append((card.kind, members))
        while self.peek().kind == "ID":
            left = self.next().value
            op = self.peek()
            if op.kind not in ("requires", "excludes"):
                raise TvlError(f"line {op.line}: expected requires or excludes")
            self.next()
            right = self.expect("ID").value
            self.expect(";")
            block.constraints.append(Constraint(left, op.kind, right))
        self.expect("}")
        return block

    def parse_attr_id(self) -> str:
        t = self.peek()
        if t.kind != "ID" or not t.value[0].islower():
            raise TvlError(f"line {t.line}: expected a lowercase attribute id")
        return self.next().value

    def parse_value(self, tag: str):
        t = self.peek()
        if tag == "int" and t.kind == "INT":
            return self.next().value
        if tag == "real" and t.kind == "REAL":
            return float(self.next().value)
        if tag == "bool" and t.kind in ("true", "false"):
            return self.next().kind == "true"
        if tag == "string" and t.kind == "STRING":
            return self.next().value
        raise TvlError(f"line {t.line}: value {t.value!r} does not match type {tag}")


def import_tvl(text: str) -> FeatureModel:
    header, blocks = _TvlParser(_tokenize(text)).parse()
    by_name: dict = {}
    for b in blocks:
        if b.name in by_name:
            raise TvlError(f'duplicate feature "{b.name}"')
        by_name[b.name] = b

    model = FeatureModel.with_root(blocks[0].name, blocks[0].attributes)
    model.tvl_string_enum = header

    placed = {blocks[0].name}
    order = [blocks[0].name]
    # walk blocks in declaration order; a group can only mention declared ids
    for b in blocks:
        for card, members in b.groups:
            gid = model.fresh_group_id() if card in ("oneof", "someof") else 0
            kind = {"oneof": DecompKind.ALTERNATIVE,
                    "someof": DecompKind.OR}.get(card)
            for opt, child in members:
                if child not in by_name:
                    raise TvlError(
                        f'group under "{b.name}" names unknown feature "{child}"')
                if child in placed:
                    raise TvlError(f'feature "{child}" appears in two groups')
                placed.add(child)
                order.append(child)
                child_kind = kind or (DecompKind.OPTIONAL if opt
                                      else DecompKind.MANDATORY)
                model.features[child] = Feature(
                    child, parent=b.name, decomp=child_kind, group_id=gid,
                    attributes=dict(by_name[child].attributes))
    missing = [b.name for b in blocks if b.name not in placed]
    if missing:
        raise TvlError(f'feature "{missing[0]}" is not attached to any group')

    for b in blocks:
        for c in b.constraints:
            for end in (c.left, c.right):
                if end not in by_name:
                    raise TvlError(f'constraint {c} names unknown feature "{end}"')
            model.add_constraint(c)

    problems = model.validate()
    if problems:
        raise TvlError("; ".join(problems))
    return model


def _check_exportable(model: FeatureModel) -> None:
    for name in model.features:
        if not _ID_RE.match(name):
            raise TvlExportError(
                f'feature name "{name}" is not a valid TVL identifier')


def _attr_line(name: str, value) -> str:
    if isinstance(value, bool):
        return f"  bool {name} is {'true' if value else 'false'};"
    if isinstance(value, int):
        return f"  int {name} is {value};"
    if isinstance(value, float):
        return f"  real {name} is {format_real(value)};"
    return f'  string {name} is "{value}";'


def export_tvl(model: FeatureModel) -> str:
    _check_exportable(model)
    children: dict = {}
    for f in model.features.values():
        if f.parent is not None:
            children.setdefault(f.parent, []).append(f)

    lines = []
    if model.tvl_string_enum:
        listed = ", ".join(f'"{s}"' for s in model.tvl_string_enum)
        lines.append(f"enum string in {{ {listed} }};")

    def emit(name: str, is_root: bool) -> None:
        f = model.features[name]
        lines.append(("root " if is_root else "") + name + " {")
        for attr, value in f.attributes.items():
            lines.append(_attr_line(attr, value))
        kids = children.get(name, [])
        solitary = [k for k in kids if not k.decomp.is_group]
        if solitary:
            listed = ", ".join(
                ("opt " if k.decomp is DecompKind.OPTIONAL else "") + k.name
                for k in solitary)
            lines.append(f"  group allof {{ {listed} }}")
        listing_order = list(solitary)
        emitted = set()
        for k in kids:
            if k.group_id > 0 and k.group_id not in emitted:
                emitted.add(k.group_id)
                members = [m for m in kids if m.group_id == k.group_id]
                card = "oneof" if k.decomp is DecompKind.ALTERNATIVE else "someof"
                listed = ", ".join(m.name for m in members)
                lines.append(f"  group {card} {{ {listed} }}")
                listing_order.extend(members)
        if is_root:
            for c in model.constraints:
                lines.append(f"  {c.left} {c.kind} {c.right};")
        lines.append("}")
        # recurse in listing order so that export(import(text)) is stable
        for k in listing_order:
            emit(k.name, False)

    emit(model.root, True)
    return "\n".join(lines) + "\n"
