"""Quivers with relations: data model, a small DSL, and the shipped families.

DSL, one statement per line, ``#`` starts a comment::

    name SD2A1
    field 2                      # or: field 4, field 2^2
    vertices 0 1
    arrow alpha: 0 -> 0
    arrow beta: 0 -> 1
    param n int >= 4
    param c field
    relation alpha^2 - c*(gamma*beta*alpha)^(2^(n-2))

Products written with ``*`` compose right to left, like functions:
``gamma*beta*alpha`` means *first* alpha, then beta, then gamma, so it is
defined when ``target(alpha) = source(beta)`` and ``target(beta) =
source(gamma)``.  Modules are left modules.  ``e_v`` is the idempotent at
vertex ``v``.  A parameter may carry a bound value (``param n int >= 4 =
5``); a presentation with every parameter bound is *instantiated*.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field as dc_field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Union

from .fields import GF, FieldError, field, field_of_order


class PresentationError(ValueError):
    pass


class DSLSyntaxError(PresentationError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


class CompositionError(PresentationError):
    pass


class UnknownSymbol(PresentationError):
    pass


class ParameterError(PresentationError):
    pass


# ---------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: "Expr"


Expr = Union[Num, Sym, Neg, Add, Sub, Mul, Pow]


# ---------------------------------------------------------------------------
# quiver and presentation


@dataclass(frozen=True)
class Arrow:
    name: str
    source: str
    target: str


@dataclass(frozen=True)
class Quiver:
    vertices: tuple[str, ...]
    arrows: tuple[Arrow, ...]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise PresentationError("vertex labels must be unique")
        names = [a.name for a in self.arrows]
        if len(set(names)) != len(names):
            raise PresentationError("arrow names must be unique")
        for a in self.arrows:
            for v in (a.source, a.target):
                if v not in self.vertices:
                    raise UnknownSymbol(f"arrow {a.name} uses undeclared vertex {v}")

    def vertex_index(self, v) -> int:
        v = str(v)
        try:
            return self.vertices.index(v)
        except ValueError:
            raise UnknownSymbol(f"unknown vertex {v!r}") from None

    def arrow_index(self, name: str) -> int:
        for i, a in enumerate(self.arrows):
            if a.name == name:
                return i
        raise UnknownSymbol(f"unknown arrow {name!r}")

    @property
    def sources(self) -> tuple[int, ...]:
        return tuple(self.vertices.index(a.source) for a in self.arrows)

    @property
    def targets(self) -> tuple[int, ...]:
        return tuple(self.vertices.index(a.target) for a in self.arrows)


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # "int" or "field"
    constraints: tuple[tuple[str, int], ...] = ()
    value: Optional[int] = None

    def check(self, value: int) -> None:
        for op, bound in self.constraints:
            ok = {">=": value >= bound, "<=": value <= bound, ">": value > bound,
                  "<": value < bound, "==": value == bound}[op]
            if not ok:
                raise ParameterError(f"parameter {self.name}={value} violates {self.name} {op} {bound}")


# A monomial of the path algebra: (source index, target index, arrows), the
# arrows written leftmost first.  The empty word is the idempotent at source.
Monomial = tuple[int, int, tuple[int, ...]]
Poly = dict  # Monomial -> nonzero field element


@dataclass(frozen=True)
class AlgebraPresentation:
    quiver: Quiver
    relations: tuple[Expr, ...]
    params: tuple[Param, ...] = ()
    p: int = 2
    e: int = 1
    name: str = ""

    @property
    def field(self) -> GF:
        return field(self.p, self.e)

    @property
    def values(self) -> dict[str, int]:
        return {q.name: q.value for q in self.params if q.value is not None}

    @property
    def is_instantiated(self) -> bool:
        return all(q.value is not None for q in self.params)

    def param(self, name: str) -> Param:
        for q in self.params:
            if q.name == name:
                return q
        raise UnknownSymbol(f"unknown parameter {name!r}")

    def relator_polys(self) -> list[Poly]:
        """Relators expanded in the free path algebra (needs all parameters bound)."""
        if not self.is_instantiated:
            missing = [q.name for q in self.params if q.value is None]
            raise ParameterError(f"unbound parameters: {', '.join(missing)}")
        ev = _Evaluator(self)
        out = []
        for r in self.relations:
            kind, val = ev.eval(r)
            assert kind == "path"
            out.append(val)
        return out

    def to_text(self) -> str:
        return print_presentation(self)


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>->|>=|<=|==|[-+*^():=<>]))")


def _tokenize(text: str, line: int):
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise DSLSyntaxError(f"unexpected character {text[col - 1]!r}", line, col)
        kind = m.lastgroup
        col = m.start(kind) + 1
        toks.append((kind, m.group(kind), col))
        pos = m.end()
    return toks


class _ExprParser:
    def __init__(self, toks, line: int, endcol: int):
        self.toks = toks
        self.i = 0
        self.line = line
        self.endcol = endcol

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, self.endcol)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None:
            raise DSLSyntaxError("unexpected end of expression", self.line, tok[2])
        if value is not None and tok[1] != value:
            raise DSLSyntaxError(f"expected {value!r}, found {tok[1]!r}", self.line, tok[2])
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.sum()
        tok = self.peek()
        if tok[0] is not None:
            raise DSLSyntaxError(f"unexpected token {tok[1]!r}", self.line, tok[2])
        return e

    def sum(self) -> Expr:
        left = self.product()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            right = self.product()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def product(self) -> Expr:
        left = self.unary()
        while self.peek()[1] == "*":
            self.take()
            left = Mul(left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return Pow(base, self.power())
        return base

    def atom(self) -> Expr:
        kind, val, col = self.take()
        if kind == "num":
            return Num(int(val))
        if kind == "id":
            return Sym(val)
        if val == "(":
            e = self.sum()
            self.take(")")
            return e
        raise DSLSyntaxError(f"unexpected token {val!r}", self.line, col)


def parse_expr(text: str, line: int = 1) -> Expr:
    toks = _tokenize(text, line)
    return _ExprParser(toks, line, len(text) + 1).parse()


def _parse_field(args: list[str], line: int) -> tuple[int, int]:
    text = "".join(args)
    try:
        if "^" in text:
            p, e = text.split("^")
            F = field(int(p), int(e))
        else:
            F = field_of_order(int(text))
    except (ValueError, FieldError) as exc:
        raise DSLSyntaxError(f"bad field specification {text!r}: {exc}", line, 7) from None
    return F.p, F.e


def parse_presentation(text: str) -> AlgebraPresentation:
    """Parse and elaborate DSL source into a validated presentation."""
    name = ""
    fld = (2, 1)
    vertices: list[str] = []
    arrows: list[Arrow] = []
    params: list[Param] = []
    relations: list[tuple[Expr, int]] = []
    seen_vertices = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        stripped = body.strip()
        keyword = stripped.split()[0]
        kwcol = body.index(keyword) + 1
        rest_col = kwcol + len(keyword)
        rest = body[rest_col - 1:]
        if keyword == "name":
            name = rest.strip()
        elif keyword == "field":
            fld = _parse_field(rest.split(), lineno)
        elif keyword == "vertices":
            if seen_vertices:
                raise DSLSyntaxError("vertices declared twice", lineno, kwcol)
            vertices = rest.split()
            if not vertices:
                raise DSLSyntaxError("no vertices given", lineno, rest_col)
            seen_vertices = True
        elif keyword == "arrow":
            toks = _tokenize(rest, lineno)
            shape = [t[0] for t in toks], [t[1] for t in toks]
            if (len(toks) != 5 or shape[0][0] != "id" or shape[1][1] != ":" or shape[1][3] != "->"
                    or shape[0][2] not in ("id", "num") or shape[0][4] not in ("id", "num")):
                raise DSLSyntaxError("expected 'arrow NAME: SOURCE -> TARGET'", lineno, rest_col)
            aname, src, tgt = shape[1][0], shape[1][2], shape[1][4]
            for v, col in ((src, toks[2][2]), (tgt, toks[4][2])):
                if v not in vertices:
                    raise UnknownSymbol(f"line {lineno}, column {col + rest_col - 1}: unknown vertex {v!r}")
            if any(a.name == aname for a in arrows):
                raise DSLSyntaxError(f"arrow {aname!r} declared twice", lineno, rest_col)
            arrows.append(Arrow(aname, src, tgt))
        elif keyword == "param":
            params.append(_parse_param(rest, lineno, rest_col))
        elif keyword == "relation":
            relations.append((parse_expr(rest, lineno), lineno))
        else:
            raise DSLSyntaxError(f"unknown statement {keyword!r}", lineno, kwcol)
    if not vertices:
        raise DSLSyntaxError("missing 'vertices' statement", 1, 1)
    quiver = Quiver(tuple(vertices), tuple(arrows))
    names = [a.name for a in arrows] + [q.name for q in params]
    if len(set(names)) != len(names):
        raise PresentationError("arrow and parameter names must be distinct")
    pres = AlgebraPresentation(quiver, tuple(r for r, _ in relations), tuple(params), fld[0], fld[1], name)
    checker = _TypeChecker(pres)
    for expr, lineno in relations:
        try:
            t = checker.check(expr)
        except PresentationError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
        if t[0] != "path":
            raise CompositionError(f"line {lineno}: relation is a scalar, not a path combination")
    for q in params:
        if q.value is not None:
            _validate_value(pres, q, q.value)
    return pres


def _parse_param(rest: str, lineno: int, col0: int) -> Param:
    toks = _tokenize(rest, lineno)
    if len(toks) < 2 or toks[0][0] != "id" or toks[1][1] not in ("int", "field"):
        raise DSLSyntaxError("expected 'param NAME int|field [constraints] [= value]'", lineno, col0)
    name, kind = toks[0][1], toks[1][1]
    cons = []
    value = None
    i = 2
    while i < len(toks):
        op = toks[i][1]
        if op in (">=", "<=", ">", "<", "==") and i + 1 < len(toks) and toks[i + 1][0] == "num":
            if kind != "int":
                raise DSLSyntaxError("constraints are only allowed on int parameters", lineno, col0 + toks[i][2] - 1)
            cons.append((op, int(toks[i + 1][1])))
            i += 2
        elif op == "=" and i + 1 < len(toks) and toks[i + 1][0] == "num" and i + 2 == len(toks):
            value = int(toks[i + 1][1])
            i += 2
        else:
            raise DSLSyntaxError(f"unexpected token {op!r} in parameter declaration", lineno, col0 + toks[i][2] - 1)
    return Param(name, kind, tuple(cons), value)


def _validate_value(pres: AlgebraPresentation, q: Param, value: int) -> None:
    if q.kind == "int":
        q.check(value)
    elif not 0 <= value < pres.field.q:
        raise ParameterError(f"parameter {q.name}={value} is not an element of {pres.field}")


# ---------------------------------------------------------------------------
# type checking and expansion


class _TypeChecker:
    """Symbolic elaboration: types are ("int",), ("scalar",) or ("path", s, t)."""

    def __init__(self, pres: AlgebraPresentation):
        self.pres = pres
        self.q = pres.quiver
        self.params = {p.name: p for p in pres.params}

    def sym(self, name: str):
        q = self.q
        for a in q.arrows:
            if a.name == name:
                return ("path", a.source, a.target)
        if name in self.params:
            return ("int",) if self.params[name].kind == "int" else ("scalar",)
        if name.startswith("e_") and name[2:] in q.vertices:
            v = name[2:]
            return ("path", v, v)
        raise UnknownSymbol(f"unknown symbol {name!r}")

    def check(self, e: Expr):
        if isinstance(e, Num):
            return ("int",)
        if isinstance(e, Sym):
            return self.sym(e.name)
        if isinstance(e, Neg):
            return self.check(e.operand)
        if isinstance(e, (Add, Sub)):
            a, b = self.check(e.left), self.check(e.right)
            if a[0] == "path" or b[0] == "path":
                if a != b:
                    raise CompositionError(
                        f"summands of {print_expr(e)} are not endpoint-homogeneous")
                return a
            return ("int",) if a == b == ("int",) else ("scalar",)
        if isinstance(e, Mul):
            a, b = self.check(e.left), self.check(e.right)
            if a[0] == "path" and b[0] == "path":
                # left*right: apply right first
                if b[2] != a[1]:
                    raise CompositionError(
                        f"product {print_expr(e)} is not composable: "
                        f"{print_expr(e.right)} ends at {b[2]} but {print_expr(e.left)} starts at {a[1]}")
                return ("path", b[1], a[2])
            if a[0] == "path":
                return a
            if b[0] == "path":
                return b
            return ("int",) if a == b == ("int",) else ("scalar",)
        if isinstance(e, Pow):
            a, x = self.check(e.base), self.check(e.exponent)
            if x != ("int",):
                raise CompositionError(f"exponent of {print_expr(e)} must be an integer expression")
            if a[0] == "path" and a[1] != a[2]:
                raise CompositionError(f"power {print_expr(e)} of a non-cyclic path")
            return a
        raise TypeError(e)


class _Evaluator:
    def __init__(self, pres: AlgebraPresentation):
        self.pres = pres
        self.F = pres.field
        self.q = pres.quiver
        self.values = pres.values
        self.kinds = {p.name: p.kind for p in pres.params}
        self.src = self.q.sources
        self.tgt = self.q.targets

    def eval(self, e: Expr):
        F = self.F
        if isinstance(e, Num):
            return "int", e.value
        if isinstance(e, Sym):
            name = e.name
            if name in self.kinds:
                return ("int" if self.kinds[name] == "int" else "scalar"), self.values[name]
            for i, a in enumerate(self.q.arrows):
                if a.name == name:
                    return "path", {(self.src[i], self.tgt[i], (i,)): 1}
            v = self.q.vertex_index(name[2:])
            return "path", {(v, v, ()): 1}
        if isinstance(e, Neg):
            k, x = self.eval(e.operand)
            if k == "int":
                return k, -x
            if k == "scalar":
                return k, F.neg(x)
            return k, poly_scale(x, F.neg(1), F)
        if isinstance(e, (Add, Sub)):
            ka, a = self.eval(e.left)
            kb, b = self.eval(e.right)
            sign = 1 if isinstance(e, Add) else -1
            if ka == kb == "int":
                return "int", a + sign * b
            if ka != "path":
                a = self._scalar(ka, a)
                b = self._scalar(kb, b)
                return "scalar", F.add(a, b if sign == 1 else F.neg(b))
            return "path", poly_add(a, b if sign == 1 else poly_scale(b, F.neg(1), F), F)
        if isinstance(e, Mul):
            ka, a = self.eval(e.left)
            kb, b = self.eval(e.right)
            if ka == kb == "int":
                return "int", a * b
            if ka != "path" and kb != "path":
                return "scalar", F.mul(self._scalar(ka, a), self._scalar(kb, b))
            if ka != "path":
                return "path", poly_scale(b, self._scalar(ka, a), F)
            if kb != "path":
                return "path", poly_scale(a, self._scalar(kb, b), F)
            return "path", poly_mul(a, b, F)
        if isinstance(e, Pow):
            ka, a = self.eval(e.base)
            kx, x = self.eval(e.exponent)
            if x < 0:
                raise ParameterError(f"negative exponent in {print_expr(e)}")
            if ka == "int":
                return "int", a**x
            if ka == "scalar":
                r = 1
                for _ in range(x):
                    r = F.mul(r, a)
                return "scalar", r
            mono = next(iter(a))
            result = {(mono[0], mono[0], ()): 1}
            for _ in range(x):
                result = poly_mul(result, a, F)
            return "path", result
        raise TypeError(e)

    def _scalar(self, kind, v):
        return self.F.from_int(v) if kind == "int" else v


# ---------------------------------------------------------------------------
# polynomial helpers over the free path algebra


def mono_mul(a: Monomial, b: Monomial) -> Optional[Monomial]:
    """``a * b`` (apply ``b`` first), or ``None`` when not composable."""
    if a[0] != b[1]:
        return None
    return (b[0], a[1], a[2] + b[2])


def poly_add(a: Poly, b: Poly, F: GF) -> Poly:
    out = dict(a)
    for m, c in b.items():
        v = F.add(out.get(m, 0), c)
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def poly_scale(a: Poly, c: int, F: GF) -> Poly:
    if c == 0:
        return {}
    return {m: F.mul(c, x) for m, x in a.items()}


def poly_mul(a: Poly, b: Poly, F: GF) -> Poly:
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = mono_mul(ma, mb)
            if m is None:
                continue
            v = F.add(out.get(m, 0), F.mul(ca, cb))
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


# ---------------------------------------------------------------------------
# printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Neg: 3, Pow: 4, Num: 5, Sym: 5}


def print_expr(e: Expr) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Sym):
        return e.name

    def wrap(x: Expr, min_prec: int) -> str:
        s = print_expr(x)
        return s if _PREC[type(x)] >= min_prec else f"({s})"

    if isinstance(e, (Add, Sub)):
        op = " + " if isinstance(e, Add) else " - "
        return wrap(e.left, 1) + op + wrap(e.right, 2)
    if isinstance(e, Mul):
        return wrap(e.left, 2) + "*" + wrap(e.right, 3)
    if isinstance(e, Neg):
        return "-" + wrap(e.operand, 3)
    if isinstance(e, Pow):
        return wrap(e.base, 5) + "^" + wrap(e.exponent, 4)
    raise TypeError(e)


def print_presentation(p: AlgebraPresentation) -> str:
    lines = []
    if p.name:
        lines.append(f"name {p.name}")
    lines.append(f"field {p.p}" if p.e == 1 else f"field {p.p}^{p.e}")
    lines.append("vertices " + " ".join(p.quiver.vertices))
    for a in p.quiver.arrows:
        lines.append(f"arrow {a.name}: {a.source} -> {a.target}")
    for q in p.params:
        s = f"param {q.name} {q.kind}"
        for op, b in q.constraints:
            s += f" {op} {b}"
        if q.value is not None:
            s += f" = {q.value}"
        lines.append(s)
    for r in p.relations:
        lines.append("relation " + print_expr(r))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# instantiation and the shipped families


def instantiate(pres: AlgebraPresentation, values: Mapping[str, int] | None = None,
                p: int | None = None, e: int | None = None) -> AlgebraPresentation:
    """Bind parameters (and optionally move to an extension field of the same characteristic)."""
    values = dict(values or {})
    if p is not None and p != pres.p:
        raise ParameterError(f"cannot change characteristic from {pres.p} to {p}")
    out = pres if e is None else replace(pres, e=e)
    _ = out.field
    new_params = []
    for q in out.params:
        v = values.pop(q.name, q.value)
        if v is None:
            raise ParameterError(f"missing value for parameter {q.name}")
        _validate_value(out, q, v)
        new_params.append(replace(q, value=v))
    if values:
        raise UnknownSymbol(f"unknown parameters: {', '.join(sorted(values))}")
    out = replace(out, params=tuple(new_params))
    for poly in out.relator_polys():
        _check_homogeneous(poly)
    return out


def _check_homogeneous(poly: Poly) -> None:
    ends = {(m[0], m[1]) for m in poly}
    if len(ends) > 1:
        raise CompositionError("relator is not endpoint-homogeneous")


SHIPPED = {"SD2A1": "sd2a1.qa", "Q3B": "q3b.qa", "KleinFourLocal": "klein4.qa"}
ALIASES = {"sd2a1": "SD2A1", "q3b": "Q3B", "kleinfourlocal": "KleinFourLocal",
           "kleinfour": "KleinFourLocal", "klein4": "KleinFourLocal"}
# Names of the tame block families; only the shipped ids carry presentations.
CATALOG = (
    "D(2A)", "D(2B)", "D(3A)1", "D(3B)1", "D(3K)",
    "SD(2A)1(c)", "SD(2A)2(c)", "SD(2B)1(c)", "SD(2B)2(c)", "SD(2B)4(c)",
    "SD(3A)1", "SD(3B)1", "SD(3B)2", "SD(3C)2,1", "SD(3C)2,2", "SD(3D)", "SD(3H)1", "SD(3H)2",
    "Q(2A)(c)", "Q(2B)1(c)", "Q(2B)2(p,a,c)", "Q(3A)2", "Q(3B)", "Q(3K)",
)


@dataclass(frozen=True)
class UserDefined:
    path: str


FamilyId = Union[str, UserDefined]


def fixture_dir() -> Path:
    env = os.environ.get("BLOCKFORGE_FIXTURES")
    if env:
        return Path(env)
    return Path(str(resources.files("blockforge") / "fixtures"))


def canonical_family(fid: FamilyId) -> FamilyId:
    if isinstance(fid, UserDefined):
        return fid
    key = ALIASES.get(str(fid).lower().replace("_", "").replace("-", ""))
    if key is None:
        raise UnknownSymbol(f"unknown family {fid!r}; shipped: {', '.join(SHIPPED)}")
    return key


def load_family(fid: FamilyId) -> AlgebraPresentation:
    fid = canonical_family(fid)
    path = Path(fid.path) if isinstance(fid, UserDefined) else fixture_dir() / SHIPPED[fid]
    return parse_presentation(path.read_text())


def instantiate_family(fid: FamilyId, n: int | None = None, scalars: Mapping[str, int] | None = None,
                       e: int | None = None) -> AlgebraPresentation:
    """Load a family and bind ``n`` and its scalars, e.g. ``("SD2A1", 4, {"c": 0})``."""
    pres = load_family(fid)
    values = dict(scalars or {})
    names = {q.name for q in pres.params}
    if n is not None:
        if "n" not in names:
            raise UnknownSymbol("this family has no parameter n")
        values["n"] = n
    for q in pres.params:
        if q.kind == "field" and q.value is None and q.name not in values:
            raise ParameterError(f"missing scalar {q.name}")
    return instantiate(pres, values, e=e)
