"""Textual language for competence requirements and organization classes.

Grammar (normative, see README):

    file  := class*
    class := "class" name "{" body "}"
    name  := STRING | IDENT
    body  := expr (NEWLINE expr)*          # newline-separated exprs are AND-ed
    expr  := req | expr "AND" expr | expr "OR" expr | "NOT" expr | "(" expr ")"
    req   := path op operand
    op    := "=" | "!=" | "<" | "<=" | ">=" | "includes" | "contains"
           | "matches" | "exists"
    path  := IDENT (":" IDENT)*
    operand := STRING | NUMBER | DATE | "{" operand ("," operand)* "}"

`#` starts a line comment. Strings are double-quoted, dates are ISO-8601.
Files use the `.ocls` extension, UTF-8, one or more classes per file.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass
from typing import Any, Iterator, Union

from .errors import DslSyntaxError, EvalTypeError, PropertyMissingError
from .record_ops import MISSING

Value = Union[str, int, float, dt.date]


# AST ------------------------------------------------------------------------


@dataclass(frozen=True)
class Equals:
    value: Value


@dataclass(frozen=True)
class NotEquals:
    value: Value


@dataclass(frozen=True)
class LessThan:
    value: Value


@dataclass(frozen=True)
class AtMost:
    value: Value


@dataclass(frozen=True)
class AtLeast:
    value: Value


@dataclass(frozen=True)
class IncludesAll:
    values: tuple[Value, ...]


@dataclass(frozen=True)
class ContainsElement:
    value: Value


@dataclass(frozen=True)
class Matches:
    pattern: str


@dataclass(frozen=True)
class Exists:
    pass


Predicate = Union[
    Equals, NotEquals, LessThan, AtMost, AtLeast, IncludesAll, ContainsElement,
    Matches, Exists,
]


@dataclass(frozen=True)
class Requirement:
    property_path: str
    predicate: Predicate


@dataclass(frozen=True)
class And:
    children: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    children: tuple["Expr", ...]


@dataclass(frozen=True)
class Not:
    child: "Expr"


Expr = Union[Requirement, And, Or, Not]


@dataclass(frozen=True)
class OrganizationClass:
    name: str
    expr: Expr


def leaves(expr: Expr) -> list[Requirement]:
    """Requirement leaves in definition (pre-order, left-to-right) order."""
    if isinstance(expr, Requirement):
        return [expr]
    if isinstance(expr, Not):
        return leaves(expr.child)
    out: list[Requirement] = []
    for child in expr.children:
        out.extend(leaves(child))
    return out


# lexer ------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<COMMENT>\#[^\n]*)
  | (?P<NEWLINE>\n)
  | (?P<WS>[ \t\r]+)
  | (?P<DATE>\d{4}-\d{2}-\d{2})
  | (?P<NUMBER>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<STRING>"(?:[^"\\\n]|\\.)*")
  | (?P<WORD>[A-Za-z_][A-Za-z0-9_\-]*(?::[A-Za-z_][A-Za-z0-9_\-]*)*)
  | (?P<OP><=|>=|!=|=|<|\{|\}|\(|\)|,)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"class", "AND", "OR", "NOT", "includes", "contains", "matches", "exists"}


@dataclass(frozen=True)
class Token:
    kind: str  # NEWLINE DATE NUMBER STRING PATH KEYWORD OP EOF
    text: str
    line: int
    column: int


def _lex(source: str) -> Iterator[Token]:
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise DslSyntaxError(
                f"unexpected character {source[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        pos = m.end()
        if kind == "NEWLINE":
            yield Token("NEWLINE", text, line, col)
            line += 1
            line_start = pos
            continue
        if kind in ("WS", "COMMENT"):
            continue
        if kind == "WORD":
            if ":" not in text and text in _KEYWORDS:
                yield Token("KEYWORD", text, line, col)
            else:
                yield Token("PATH", text, line, col)
            continue
        yield Token(kind, text, line, col)
    yield Token("EOF", "", line, pos - line_start + 1)


# parser -----------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.tokens = list(_lex(source))
        self.pos = 0

    def peek(self, skip_newlines: bool = True) -> Token:
        i = self.pos
        if skip_newlines:
            while self.tokens[i].kind == "NEWLINE":
                i += 1
        return self.tokens[i]

    def next(self, skip_newlines: bool = True) -> Token:
        if skip_newlines:
            while self.tokens[self.pos].kind == "NEWLINE":
                self.pos += 1
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: Token) -> DslSyntaxError:
        return DslSyntaxError(message, tok.line, tok.column)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise self.error(f"expected {want!r}, found {tok.text or tok.kind!r}", tok)
        return tok

    # classes ------------------------------------------------------------

    def parse_file(self) -> list[OrganizationClass]:
        classes = []
        while self.peek().kind != "EOF":
            classes.append(self.parse_class())
        return classes

    def parse_class(self) -> OrganizationClass:
        self.expect("KEYWORD", "class")
        tok = self.next()
        if tok.kind == "STRING":
            name = _unquote(tok.text)
        elif tok.kind == "PATH" and ":" not in tok.text:
            name = tok.text
        else:
            raise self.error("expected class name", tok)
        self.expect("OP", "{")
        exprs = []
        while True:
            # newlines between expressions act as AND separators
            while self.tokens[self.pos].kind == "NEWLINE":
                self.pos += 1
            if self.peek().kind == "OP" and self.peek().text == "}":
                break
            exprs.append(self.parse_expr())
        self.expect("OP", "}")
        if not exprs:
            raise self.error("class body is empty", self.tokens[self.pos - 1])
        expr = exprs[0] if len(exprs) == 1 else And(tuple(exprs))
        return OrganizationClass(name, expr)

    # expressions (newlines terminate an expression at body level, so the
    # sub-parsers below never skip newlines when peeking for an operator)

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        first = self.parse_and()
        children = [first]
        while self._at_keyword("OR"):
            self.next()
            children.append(self.parse_and())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def parse_and(self) -> Expr:
        first = self.parse_unary()
        children = [first]
        while self._at_keyword("AND"):
            self.next()
            children.append(self.parse_unary())
        return children[0] if len(children) == 1 else And(tuple(children))

    def _at_keyword(self, word: str) -> bool:
        tok = self.tokens[self.pos]
        return tok.kind == "KEYWORD" and tok.text == word

    def parse_unary(self) -> Expr:
        tok = self.peek(skip_newlines=False)
        if tok.kind == "KEYWORD" and tok.text == "NOT":
            self.next(skip_newlines=False)
            return Not(self.parse_unary())
        if tok.kind == "OP" and tok.text == "(":
            self.next(skip_newlines=False)
            inner = self.parse_parenthesized()
            self.expect("OP", ")")
            return inner
        return self.parse_requirement()

    def parse_parenthesized(self) -> Expr:
        # inside parentheses newlines are insignificant
        first = self.parse_unary_nl()
        children = [first]
        ops: list[str] = []
        while self.peek().kind == "KEYWORD" and self.peek().text in ("AND", "OR"):
            ops.append(self.next().text)
            children.append(self.parse_unary_nl())
        if not ops:
            return children[0]
        if all(op == "AND" for op in ops):
            return And(tuple(children))
        if all(op == "OR" for op in ops):
            return Or(tuple(children))
        # mixed: AND binds tighter than OR
        groups: list[list[Expr]] = [[children[0]]]
        for op, child in zip(ops, children[1:]):
            if op == "OR":
                groups.append([child])
            else:
                groups[-1].append(child)
        terms = [g[0] if len(g) == 1 else And(tuple(g)) for g in groups]
        return Or(tuple(terms))

    def parse_unary_nl(self) -> Expr:
        tok = self.peek()
        if tok.kind == "KEYWORD" and tok.text == "NOT":
            self.next()
            return Not(self.parse_unary_nl())
        if tok.kind == "OP" and tok.text == "(":
            self.next()
            inner = self.parse_parenthesized()
            self.expect("OP", ")")
            return inner
        return self.parse_requirement()

    def parse_requirement(self) -> Requirement:
        tok = self.next()
        if tok.kind != "PATH":
            raise self.error(f"expected property path, found {tok.text or tok.kind!r}", tok)
        path = tok.text
        op_tok = self.next(skip_newlines=False)
        if op_tok.kind == "KEYWORD" and op_tok.text == "exists":
            return Requirement(path, Exists())
        if op_tok.kind == "KEYWORD" and op_tok.text == "includes":
            values = self.parse_set()
            return Requirement(path, IncludesAll(values))
        if op_tok.kind == "KEYWORD" and op_tok.text == "contains":
            return Requirement(path, ContainsElement(self.parse_value()))
        if op_tok.kind == "KEYWORD" and op_tok.text == "matches":
            pat_tok = self.next(skip_newlines=False)
            if pat_tok.kind != "STRING":
                raise self.error("matches requires a quoted pattern", pat_tok)
            pattern = _unquote(pat_tok.text)
            try:
                re.compile(pattern)
            except re.error as exc:
                raise self.error(f"invalid pattern: {exc}", pat_tok)
            return Requirement(path, Matches(pattern))
        if op_tok.kind == "OP" and op_tok.text in ("=", "!=", "<", "<=", ">="):
            value = self.parse_value()
            pred = {
                "=": Equals,
                "!=": NotEquals,
                "<": LessThan,
                "<=": AtMost,
                ">=": AtLeast,
            }[op_tok.text](value)
            if op_tok.text in ("<", "<=", ">=") and isinstance(value, str):
                raise self.error(
                    f"order predicate {op_tok.text!r} needs a number or date operand",
                    op_tok,
                )
            return Requirement(path, pred)
        raise self.error(
            f"expected a predicate operator, found {op_tok.text or op_tok.kind!r}", op_tok
        )

    def parse_set(self) -> tuple[Value, ...]:
        open_tok = self.expect("OP", "{")
        values: list[Value] = []
        if self.peek().kind == "OP" and self.peek().text == "}":
            raise self.error("set operand must be nonempty", open_tok)
        while True:
            values.append(self.parse_value(skip_newlines=True))
            tok = self.next()
            if tok.kind == "OP" and tok.text == "}":
                break
            if not (tok.kind == "OP" and tok.text == ","):
                raise self.error(f"expected ',' or '}}', found {tok.text!r}", tok)
        return tuple(values)

    def parse_value(self, skip_newlines: bool = False) -> Value:
        tok = self.next(skip_newlines=skip_newlines)
        if tok.kind == "STRING":
            return _unquote(tok.text)
        if tok.kind == "DATE":
            return dt.date.fromisoformat(tok.text)
        if tok.kind == "NUMBER":
            return float(tok.text) if any(c in tok.text for c in ".eE") else int(tok.text)
        raise self.error(f"expected an operand, found {tok.text or tok.kind!r}", tok)


_UNESCAPE = {"\\\\": "\\", '\\"': '"', "\\n": "\n", "\\r": "\r", "\\t": "\t"}


def _unquote(text: str) -> str:
    body = text[1:-1]
    return re.sub(r"\\.", lambda m: _UNESCAPE.get(m.group(), m.group()[1]), body)


def parse_classes(source: str) -> list[OrganizationClass]:
    return _Parser(source).parse_file()


def parse_requirement_line(source: str) -> Requirement:
    """Parse a single `path op operand` requirement (no logical operators)."""
    parser = _Parser(source)
    req = parser.parse_requirement()
    tok = parser.next()
    if tok.kind != "EOF":
        raise parser.error(f"unexpected trailing input {tok.text!r}", tok)
    return req


def parse_class(source: str) -> OrganizationClass:
    classes = parse_classes(source)
    if len(classes) != 1:
        raise DslSyntaxError(f"expected exactly one class, found {len(classes)}", 1, 1)
    return classes[0]


# printer ----------------------------------------------------------------------


_ESCAPE = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _quote(text: str) -> str:
    return '"' + "".join(_ESCAPE.get(ch, ch) for ch in text) + '"'


def _value_text(value: Value) -> str:
    if isinstance(value, str):
        return _quote(value)
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, bool):  # bool is an int; not a DSL value
        raise TypeError("boolean operands are not part of the DSL")
    return repr(value)


def _predicate_text(pred: Predicate) -> str:
    if isinstance(pred, Equals):
        return f"= {_value_text(pred.value)}"
    if isinstance(pred, NotEquals):
        return f"!= {_value_text(pred.value)}"
    if isinstance(pred, LessThan):
        return f"< {_value_text(pred.value)}"
    if isinstance(pred, AtMost):
        return f"<= {_value_text(pred.value)}"
    if isinstance(pred, AtLeast):
        return f">= {_value_text(pred.value)}"
    if isinstance(pred, IncludesAll):
        return "includes {" + ", ".join(_value_text(v) for v in pred.values) + "}"
    if isinstance(pred, ContainsElement):
        return f"contains {_value_text(pred.value)}"
    if isinstance(pred, Matches):
        return f"matches {_quote(pred.pattern)}"
    if isinstance(pred, Exists):
        return "exists"
    raise TypeError(f"unknown predicate {pred!r}")


def _expr_text(expr: Expr) -> str:
    if isinstance(expr, Requirement):
        return f"{expr.property_path} {_predicate_text(expr.predicate)}"
    if isinstance(expr, Not):
        return f"NOT {_wrap(expr.child)}"
    op = " AND " if isinstance(expr, And) else " OR "
    return op.join(_wrap(c) for c in expr.children)


def _wrap(expr: Expr) -> str:
    # composite children are parenthesized so the printed tree re-parses to
    # exactly the same shape
    text = _expr_text(expr)
    return text if isinstance(expr, Requirement) else f"({text})"


def print_class(cls: OrganizationClass) -> str:
    if isinstance(cls.expr, And):
        body = "\n".join(f"  {_wrap(c) if not isinstance(c, Requirement) else _expr_text(c)}"
                         for c in cls.expr.children)
    else:
        body = f"  {_expr_text(cls.expr)}"
    return f"class {_quote(cls.name)} {{\n{body}\n}}\n"


def print_classes(classes: list[OrganizationClass]) -> str:
    return "\n".join(print_class(c) for c in classes)


# predicate evaluation -----------------------------------------------------------


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _comparable(a: Any, b: Any) -> bool:
    if _is_number(a) and _is_number(b):
        return True
    if isinstance(a, dt.date) and isinstance(b, dt.date):
        return True
    return isinstance(a, str) and isinstance(b, str)


def eval_predicate(predicate: Predicate, value: Any) -> bool:
    """Evaluate a predicate against a property value.

    ``value`` may be the MISSING sentinel; only `exists` tolerates it, every
    other predicate raises PropertyMissingError so the caller can classify the
    leaf. Operand/value type mismatches raise EvalTypeError, which is distinct
    from an unsatisfied predicate.
    """
    if isinstance(predicate, Exists):
        return value is not MISSING
    if value is MISSING:
        raise PropertyMissingError("property not defined")

    is_set = isinstance(value, (set, frozenset))

    if isinstance(predicate, (IncludesAll, ContainsElement)):
        if not is_set:
            raise EvalTypeError(
                f"set predicate over scalar value {value!r}"
            )
        if isinstance(predicate, IncludesAll):
            return set(predicate.values) <= set(value)
        return predicate.value in value

    if is_set:
        raise EvalTypeError("scalar predicate over set value")

    if isinstance(predicate, Matches):
        if not isinstance(value, str):
            raise EvalTypeError(f"matches over non-text value {value!r}")
        try:
            return re.fullmatch(predicate.pattern, value) is not None
        except re.error as exc:
            raise EvalTypeError(f"invalid pattern {predicate.pattern!r}: {exc}")

    operand = predicate.value
    if not _comparable(operand, value):
        raise EvalTypeError(
            f"operand {operand!r} incompatible with value {value!r}"
        )
    if isinstance(predicate, Equals):
        return value == operand
    if isinstance(predicate, NotEquals):
        return value != operand
    if isinstance(operand, str):
        raise EvalTypeError(f"order predicate over text value {value!r}")
    if isinstance(predicate, LessThan):
        return value < operand
    if isinstance(predicate, AtMost):
        return value <= operand
    if isinstance(predicate, AtLeast):
        return value >= operand
    raise TypeError(f"unknown predicate {predicate!r}")
