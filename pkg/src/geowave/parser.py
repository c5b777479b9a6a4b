"""Expression grammar and model-file reader.

Expressions::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := base ("^" factor)?
    base   := NUMBER | IDENT | IDENT "_" SUFFIX | IDENT "(" expr ("," expr)* ")"
            | "(" expr ")"

A leading ``-`` is allowed before any factor and binds looser than ``^``.
The implementation is a Pratt loop over binding powers.

Model files are line oriented::

    [coords]
    list = "x, y, z, t"

    [equation wave1]
    delta = "(x*t - 3*y*z)/t^2*u_xx - 2*y/t*u_xy + u_xt + u_yz - k(u)"
    leading = "u_xt"
"""

from __future__ import annotations

import re
from fractions import Fraction
from dataclasses import dataclass, field as dc_field

from .kernel import atoms as A
from .kernel.expr import Expr, KernelError, clear_aliases, register_alias
from .kernel.tree import BinOp, Call, JetRef, Name, Neg, NormalizeError, Num, Scope, normalize
from .scalars import QdScalar, set_radical

__all__ = [
    "ParseError",
    "ModelError",
    "Model",
    "Section",
    "parse_tree",
    "parse_expr",
    "parse_model",
    "load_model",
    "serialize",
]


class ParseError(ValueError):
    """Syntax or name-resolution error with a 1-based column."""

    def __init__(self, msg: str, column: int, text: str = ""):
        self.column = column
        self.text = text
        super().__init__(f"column {column}: {msg}")


class ModelError(ValueError):
    """Invalid model document."""

    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


# -- tokens ----------------------------------------------------------------

_NUM = re.compile(r"\d+(?:\.\d+)?")
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9]*")
_SUFFIX = re.compile(r"[A-Za-z0-9]*")


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, jet, op, end
    text: str
    pos: int
    suffix: str = ""


def tokenize(s: str) -> list[Token]:
    out = []
    i = 0
    n = len(s)
    while i < n:
        ch = s[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            m = _NUM.match(s, i)
            out.append(Token("num", m.group(), i))
            i = m.end()
            continue
        if ch.isalpha():
            m = _IDENT.match(s, i)
            j = m.end()
            if j < n and s[j] == "_":
                sm = _SUFFIX.match(s, j + 1)
                if not sm.group():
                    raise ParseError("malformed jet suffix: nothing after '_'", j + 1, s)
                out.append(Token("jet", m.group(), i, sm.group()))
                i = sm.end()
            else:
                out.append(Token("ident", m.group(), i))
                i = j
            continue
        if s.startswith("**", i):
            out.append(Token("op", "^", i))
            i += 2
            continue
        if ch in "+-*/^(),":
            out.append(Token("op", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i + 1, s)
    out.append(Token("end", "", n))
    return out


# -- Pratt parser ----------------------------------------------------------

_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY = 25


class _Parser:
    def __init__(self, text: str, scope: Scope | None):
        self.text = text
        self.scope = scope
        self.toks = tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Token):
        raise ParseError(msg, tok.pos + 1, self.text)

    def expect(self, text: str):
        t = self.next()
        if t.kind != "op" or t.text != text:
            what = "end of input" if t.kind == "end" else repr(t.text)
            self.error(f"expected {text!r}, found {what}", t)
        return t

    def parse(self):
        tree = self.expr(0)
        t = self.peek()
        if t.kind != "end":
            self.error(f"unexpected {t.text!r}", t)
        return tree

    def expr(self, rbp: int):
        left = self.nud(self.next())
        while True:
            t = self.peek()
            if t.kind != "op" or t.text not in _INFIX:
                break
            lbp = _INFIX[t.text]
            if lbp <= rbp:
                break
            self.next()
            # ^ is right associative
            right = self.expr(lbp - 1 if t.text == "^" else lbp)
            left = BinOp(t.text, left, right, t.pos)
        return left

    def nud(self, t: Token):
        if t.kind == "num":
            return Num(QdScalar(Fraction(t.text)), t.pos)
        if t.kind == "jet":
            return JetRef(t.text, self._split(t), t.pos)
        if t.kind == "ident":
            nt = self.peek()
            if nt.kind == "op" and nt.text == "(":
                self.next()
                args = [self.expr(0)]
                while self.peek().kind == "op" and self.peek().text == ",":
                    self.next()
                    args.append(self.expr(0))
                self.expect(")")
                return Call(t.text, tuple(args), t.pos)
            return Name(t.text, t.pos)
        if t.kind == "op" and t.text == "(":
            inner = self.expr(0)
            self.expect(")")
            return inner
        if t.kind == "op" and t.text == "-":
            return Neg(self.expr(_UNARY), t.pos)
        if t.kind == "op" and t.text == "+":
            return self.expr(_UNARY)
        if t.kind == "end":
            self.error("unexpected end of input", t)
        self.error(f"unexpected {t.text!r}", t)

    def _split(self, t: Token) -> tuple:
        if self.scope is None:
            return tuple(t.suffix)
        parts = A.split_suffix(t.suffix, self.scope.coords)
        if parts is None:
            raise ParseError(
                f"malformed jet suffix {t.suffix!r}: not a sequence of coordinates",
                t.pos + len(t.text) + 2, self.text)
        return tuple(parts)


def parse_tree(s: str, scope: Scope | None = None):
    """Parse to a raw tree without normalizing."""
    return _Parser(s, scope).parse()


def parse_expr(s: str, ctx) -> Expr:
    """Parse and normalize ``s`` against a :class:`Model` or :class:`Scope`."""
    scope = ctx.scope if isinstance(ctx, Model) else ctx
    tree = parse_tree(s, scope)
    try:
        return normalize(tree, scope)
    except NormalizeError as exc:
        raise ParseError(exc.msg, exc.pos + 1, s) from None
    except KernelError as exc:
        raise ParseError(str(exc), 1, s) from None


def serialize(e: Expr) -> str:
    return str(e)


# -- model files -----------------------------------------------------------

SECTION_KEYS = {
    "coords": {"list", "angular"},
    "params": {"list"},
    "field": {"name"},
    "radical": {"d"},
    "functions": None,  # free-form: name = "args" or D(name,arg) = "expr"
    "metric": None,  # g[i][j] and sqrtdet
    "equation": {"delta", "box", "leading", "side", "side_leading", "coords", "label", "note", "reading"},
    "lagrangian": {"density", "equation", "label", "note", "reading"},
    "generator": None,  # coordinate names, phi/field, gauge <c>, meta keys
    "flux": None,  # coordinate names plus meta keys
    "multiplier": {"q", "equation", "density", "case", "label", "note", "expect", "reading"},
    "map": None,  # new/dep/inverse/keep/source/equation
}
NAMED = {"equation", "lagrangian", "generator", "flux", "multiplier", "map"}
SINGLE = {"coords", "params", "field", "radical", "functions", "metric"}
READINGS = {"printed", "corrected"}
REPEATABLE_KEYS = {"side", "side_leading", "instance"}
GEN_META = {"case", "label", "equation", "lagrangian", "instance", "note", "kind", "expect", "reading",
            "side", "side_leading"}
FLUX_META = {"case", "label", "equation", "generator", "lagrangian", "note", "expect", "reading"}
MAP_HEADS = {"new", "dep", "inverse"}
MAP_META = {"keep", "source", "equation", "label", "note", "field"}

_SECTION_RE = re.compile(r"^\[\s*([A-Za-z]+)(?:\s+([^\]\s]+))?\s*\]\s*$")
_ENTRY_RE = re.compile(r'^([^=]+?)\s*=\s*(.*)$')


@dataclass
class Entry:
    key: str
    value: str
    line: int


@dataclass
class Section:
    kind: str
    name: str | None
    line: int
    entries: list = dc_field(default_factory=list)

    def get(self, key: str, default=None):
        for e in self.entries:
            if e.key == key:
                return e.value
        return default

    def get_all(self, key: str) -> list:
        return [e.value for e in self.entries if e.key == key]

    def entry(self, key: str):
        for e in self.entries:
            if e.key == key:
                return e
        return None

    def keys(self) -> list:
        return [e.key for e in self.entries]


@dataclass
class Model:
    """A validated model document."""

    scope: Scope
    radical: int = 7
    metric: list | None = None
    sqrtdet: Expr | None = None
    sections: dict = dc_field(default_factory=dict)  # (kind, name) -> Section
    order: list = dc_field(default_factory=list)
    aliases: list = dc_field(default_factory=list)
    path: str | None = None

    @property
    def coordinates(self) -> list:
        return self.scope.coords

    @property
    def field(self) -> str:
        return self.scope.fields[0]

    def named(self, kind: str) -> list:
        """Sections of ``kind`` in document order."""
        return [self.sections[k] for k in self.order if k[0] == kind]

    def section(self, kind: str, name: str) -> Section:
        try:
            return self.sections[(kind, name)]
        except KeyError:
            raise ModelError(f"no [{kind} {name}] section") from None

    def expr(self, text: str, scope: Scope | None = None) -> Expr:
        return parse_expr(text, scope or self.scope)

    def activate(self) -> None:
        """Install session state (radical, derivative aliases, print names)."""
        set_radical(self.radical)
        clear_aliases()
        A.register_suffix_names(self.scope.coords)
        for fname, derivs, body in self.aliases:
            register_alias(fname, derivs, body)


def _unquote(v: str, line: int) -> str:
    v = v.strip()
    if v.startswith('"'):
        if len(v) < 2 or not v.endswith('"'):
            raise ModelError("unterminated string", line)
        return v[1:-1]
    return v


def _split_sections(doc: str) -> list[Section]:
    out: list[Section] = []
    cur = None
    for no, raw in enumerate(doc.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _SECTION_RE.match(line)
        if m:
            kind, name = m.group(1), m.group(2)
            if kind not in SECTION_KEYS:
                raise ModelError(f"unknown section [{kind}]", no)
            if kind in NAMED and not name:
                raise ModelError(f"section [{kind}] needs a name", no)
            if kind in SINGLE and name:
                raise ModelError(f"section [{kind}] takes no name", no)
            cur = Section(kind, name, no)
            out.append(cur)
            continue
        if cur is None:
            raise ModelError("entry outside any section", no)
        m = _ENTRY_RE.match(line)
        if not m:
            raise ModelError(f"expected 'key = value', got {line!r}", no)
        key = " ".join(m.group(1).split())
        cur.entries.append(Entry(key, _unquote(m.group(2), no), no))
    return out


def _names(v: str) -> list[str]:
    return [x.strip() for x in v.split(",") if x.strip()]


def _check_keys(sec: Section, allowed: set) -> None:
    seen = set()
    for e in sec.entries:
        base = e.key
        if base not in allowed:
            raise ModelError(f"unknown key {e.key!r} in [{sec.kind}{' ' + sec.name if sec.name else ''}]", e.line)
        if base in seen and base not in REPEATABLE_KEYS:
            raise ModelError(f"duplicate key {e.key!r}", e.line)
        seen.add(base)


_METRIC_KEY = re.compile(r"^g\[(\d+)\]\[(\d+)\]$")
_ALIAS_KEY = re.compile(r"^D\(\s*([A-Za-z][A-Za-z0-9]*)\s*((?:,\s*[A-Za-z][A-Za-z0-9]*\s*)+)\)$")


def parse_model(doc: str, path: str | None = None) -> Model:
    """Parse and validate a model document."""
    secs = _split_sections(doc)
    model = Model(Scope(), path=path)
    for s in secs:
        k = (s.kind, s.name)
        if k in model.sections:
            label = f"[{s.kind}{' ' + s.name if s.name else ''}]"
            raise ModelError(f"duplicate section {label}", s.line)
        model.sections[k] = s
        model.order.append(k)

    def single(kind):
        return model.sections.get((kind, None))

    sc = model.scope
    coords = single("coords")
    if coords is None:
        raise ModelError("missing [coords] section")
    _check_keys(coords, SECTION_KEYS["coords"])
    sc.coords = _names(coords.get("list", ""))
    if not sc.coords:
        raise ModelError("no coordinates declared", coords.line)
    if len(set(sc.coords)) != len(sc.coords):
        raise ModelError("coordinate names must be distinct", coords.line)
    sc.angular = set(_names(coords.get("angular", "")))
    for a in sc.angular:
        if a not in sc.coords:
            raise ModelError(f"angular coordinate {a!r} is not a coordinate", coords.line)

    params = single("params")
    if params is not None:
        _check_keys(params, SECTION_KEYS["params"])
        sc.params = _names(params.get("list", ""))
    fld = single("field")
    if fld is not None:
        _check_keys(fld, SECTION_KEYS["field"])
        sc.fields = _names(fld.get("name", "u")) or ["u"]
    names = sc.coords + sc.params + sc.fields
    if len(set(names)) != len(names):
        raise ModelError("coordinate, parameter and field names must be distinct")

    rad = single("radical")
    if rad is not None:
        _check_keys(rad, SECTION_KEYS["radical"])
        try:
            model.radical = int(rad.get("d", "7"))
            set_radical(model.radical)
        except ValueError as exc:
            raise ModelError(str(exc), rad.line) from None
    else:
        set_radical(7)
    A.register_suffix_names(sc.coords)

    funcs = single("functions")
    pending_alias = []
    if funcs is not None:
        for e in funcs.entries:
            m = _ALIAS_KEY.match(e.key)
            if m:
                pending_alias.append((m.group(1), _names(m.group(2)), e))
                continue
            if not _IDENT.fullmatch(e.key):
                raise ModelError(f"bad function name {e.key!r}", e.line)
            if e.key in sc.functions:
                raise ModelError(f"duplicate function {e.key!r}", e.line)
            argn = tuple(_names(e.value))
            for a in argn:
                if a not in sc.coords and a not in sc.fields:
                    raise ModelError(f"function argument {a!r} is not a coordinate or field", e.line)
            sc.functions[e.key] = argn
    clear_aliases()
    for fname, derivs, e in pending_alias:
        if fname not in sc.functions:
            raise ModelError(f"derivative relation for undeclared function {fname!r}", e.line)
        body = _expr_at(model, e)
        model.aliases.append((fname, tuple(sorted(derivs)), body))
        register_alias(fname, derivs, body)

    met = single("metric")
    if met is not None:
        _parse_metric(model, met)

    for key in model.order:
        s = model.sections[key]
        if s.kind in NAMED:
            _validate_named(model, s)
    return model


def _expr_at(model: Model, e: Entry, scope: Scope | None = None) -> Expr:
    try:
        return parse_expr(e.value, scope or model.scope)
    except ParseError as exc:
        raise ModelError(f"{e.key}: {exc}", e.line) from None


def _parse_metric(model: Model, sec: Section) -> None:
    n = len(model.scope.coords)
    g = [[None] * n for _ in range(n)]
    seen = set()
    for e in sec.entries:
        if e.key == "sqrtdet":
            model.sqrtdet = _expr_at(model, e)
            continue
        m = _METRIC_KEY.match(e.key)
        if not m:
            raise ModelError(f"unknown key {e.key!r} in [metric]", e.line)
        i, j = int(m.group(1)), int(m.group(2))
        if i >= n or j >= n:
            raise ModelError(f"metric index out of range in {e.key}", e.line)
        if (i, j) in seen:
            raise ModelError(f"duplicate key {e.key!r}", e.line)
        seen.add((i, j))
        val = _expr_at(model, e)
        if val.depends_on_field():
            raise ModelError("metric entries may not depend on the field", e.line)
        g[i][j] = val
    zero = Expr.const(0)
    for i in range(n):
        for j in range(n):
            a, b = g[i][j], g[j][i]
            if a is None and b is None:
                g[i][j] = zero
            elif a is None:
                g[i][j] = b
            elif b is not None and not a.equals(b):
                raise ModelError(f"metric not symmetric: g[{i}][{j}] != g[{j}][{i}]", sec.line)
    model.metric = g


def _validate_named(model: Model, s: Section) -> None:
    reading = s.get("reading")
    if reading is not None and reading not in READINGS:
        raise ModelError(f"[{s.kind} {s.name}] reading must be one of {sorted(READINGS)}", s.line)
    sc = model.scope
    coords = set(sc.coords)
    field_names = set(sc.fields)
    if s.kind in ("equation", "lagrangian", "multiplier"):
        _check_keys(s, SECTION_KEYS[s.kind])
        for e in s.entries:
            if e.key in ("delta", "box", "leading", "side", "side_leading", "density", "q"):
                _expr_at(model, e)
        if s.kind == "equation" and (s.get("delta") is None) == (s.get("box") is None):
            raise ModelError(f"[equation {s.name}] needs exactly one of delta or box", s.line)
        if s.kind == "lagrangian" and s.get("density") is None:
            raise ModelError(f"[lagrangian {s.name}] needs density", s.line)
        if s.kind == "multiplier" and s.get("q") is None:
            raise ModelError(f"[multiplier {s.name}] needs q", s.line)
        return
    if s.kind == "generator":
        comp_keys = coords | field_names | ({"phi"} if "phi" not in coords else set())
        gauge_keys = {f"gauge {c}" for c in sc.coords}
        _check_keys(s, comp_keys | gauge_keys | GEN_META)
        for e in s.entries:
            if e.key in comp_keys or e.key in gauge_keys or e.key in ("side", "side_leading"):
                _expr_at(model, e)
            elif e.key == "instance":
                parse_bindings(model, e.value, e.line)
        return
    if s.kind == "flux":
        _check_keys(s, coords | FLUX_META)
        for e in s.entries:
            if e.key in coords:
                _expr_at(model, e)
        return
    if s.kind == "map":
        for e in s.entries:
            head = e.key.split(" ", 1)[0]
            if head in MAP_HEADS:
                if " " not in e.key:
                    raise ModelError(f"{head} needs a variable name", e.line)
            elif e.key not in MAP_META:
                raise ModelError(f"unknown key {e.key!r} in [map {s.name}]", e.line)
        if not any(e.key.startswith("new ") for e in s.entries):
            raise ModelError(f"[map {s.name}] declares no new variable", s.line)
        return


def parse_bindings(model: Model, text: str, line: int | None = None) -> dict:
    """Parse ``"f1 = x; n = 2"`` into {name: Expr}.

    Function bodies are written in the function's declared arguments.
    """
    out = {}
    if text.strip() == "symbolic":
        return out
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ModelError(f"bad binding {part!r}", line)
        name, body = (x.strip() for x in part.split("=", 1))
        if name not in model.scope.functions and name not in model.scope.params:
            raise ModelError(f"binding for undeclared name {name!r}", line)
        try:
            out[name] = parse_expr(body, model.scope)
        except ParseError as exc:
            raise ModelError(f"{name}: {exc}", line) from None
    return out


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        doc = fh.read()
    model = parse_model(doc, str(path))
    model.activate()
    return model
