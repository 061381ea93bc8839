"""Parsed source units and the entity index built from them."""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from functools import cached_property

FunctionNode = (ast.FunctionDef, ast.AsyncFunctionDef)
DefNode = (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)


@dataclass(frozen=True)
class Span:
    start_line: int
    end_line: int


@dataclass(frozen=True)
class FunctionEntity:
    name: str
    params: tuple[tuple[str, bool], ...]  # (name, has annotation)
    has_return_annotation: bool
    has_docstring: bool
    span: Span

    @property
    def is_annotated(self) -> bool:
        return self.has_return_annotation or any(a for _, a in self.params)


@dataclass(frozen=True)
class ClassEntity:
    name: str
    fields: tuple[str, ...]
    methods: tuple[str, ...]
    has_docstring: bool
    span: Span


@dataclass(frozen=True)
class ImportEntity:
    module: str
    names: tuple[str, ...]
    relative: bool


@dataclass(frozen=True)
class CallSite:
    callee: str
    n_args: int
    keywords: tuple[str, ...]


@dataclass(frozen=True)
class EntityIndex:
    functions: tuple[FunctionEntity, ...] = ()
    classes: tuple[ClassEntity, ...] = ()
    imports: tuple[ImportEntity, ...] = ()
    call_sites: tuple[CallSite, ...] = ()


@dataclass(frozen=True, eq=False)
class SourceUnit:
    """One analysed file. ``tree`` is ``None`` when the text does not parse."""

    path: str
    text: str
    tree: ast.Module | None = field(repr=False, default=None)

    @property
    def parse_ok(self) -> bool:
        return self.tree is not None

    @cached_property
    def lines(self) -> list[str]:
        return self.text.splitlines()

    @cached_property
    def index(self) -> EntityIndex:
        return build_index(self.tree) if self.tree is not None else EntityIndex()

    @cached_property
    def docstring_spans(self) -> tuple[Span, ...]:
        if self.tree is None:
            return ()
        return tuple(docstring_spans(self.tree))

    @cached_property
    def import_aliases(self) -> dict[str, str]:
        if self.tree is None:
            return {}
        return import_aliases(self.tree)


def parse_source(path: str, text: str | bytes) -> SourceUnit:
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    try:
        tree = ast.parse(text, filename=path)
    except (SyntaxError, ValueError):
        tree = None
    return SourceUnit(path=path, text=text, tree=tree)


def read_source(path, display_path: str | None = None) -> SourceUnit:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_source(display_path or str(path), data)


# ---------------------------------------------------------------------------
# helpers shared by the metric modules
# ---------------------------------------------------------------------------


def docstring_node(node: ast.AST) -> ast.Expr | None:
    body = getattr(node, "body", None)
    if not body:
        return None
    first = body[0]
    if (
        isinstance(first, ast.Expr)
        and isinstance(first.value, ast.Constant)
        and isinstance(first.value.value, str)
    ):
        return first
    return None


def has_docstring(node: ast.AST) -> bool:
    return docstring_node(node) is not None


def docstring_spans(tree: ast.Module):
    for node in ast.walk(tree):
        if isinstance(node, (ast.Module, *DefNode)):
            doc = docstring_node(node)
            if doc is not None:
                yield Span(doc.lineno, doc.end_lineno or doc.lineno)


def docstring_ids(tree: ast.Module) -> set[int]:
    """``id`` of every docstring expression statement in the tree."""
    out = set()
    for node in ast.walk(tree):
        if isinstance(node, (ast.Module, *DefNode)):
            doc = docstring_node(node)
            if doc is not None:
                out.add(id(doc))
    return out


def dotted_name(node: ast.AST) -> str | None:
    """``a.b.c`` for a Name/Attribute chain, else ``None``."""
    parts = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return ".".join(reversed(parts))
    return None


def root_name(node: ast.AST) -> ast.Name | None:
    while isinstance(node, (ast.Attribute, ast.Subscript, ast.Call)):
        node = node.func if isinstance(node, ast.Call) else node.value
    return node if isinstance(node, ast.Name) else None


def import_aliases(tree: ast.Module) -> dict[str, str]:
    """Local name -> fully qualified dotted path for every import in the file."""
    aliases: dict[str, str] = {}
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                if alias.asname:
                    aliases[alias.asname] = alias.name
                else:
                    root = alias.name.split(".")[0]
                    aliases[root] = root
        elif isinstance(node, ast.ImportFrom):
            base = "." * node.level + (node.module or "")
            for alias in node.names:
                if alias.name == "*":
                    continue
                target = f"{base}.{alias.name}" if base and not base.endswith(".") else base + alias.name
                aliases[alias.asname or alias.name] = target
    return aliases


def resolve_call(node: ast.Call, aliases: dict[str, str]) -> str | None:
    """Dotted callee path with the leading import alias expanded."""
    name = dotted_name(node.func)
    if name is None:
        return None
    head, _, rest = name.partition(".")
    if head in aliases:
        head = aliases[head]
    return f"{head}.{rest}" if rest else head


def _span(node: ast.AST) -> Span:
    return Span(node.lineno, getattr(node, "end_lineno", None) or node.lineno)


def _function_entity(node) -> FunctionEntity:
    a = node.args
    params = [*a.posonlyargs, *a.args, *a.kwonlyargs]
    if a.vararg:
        params.append(a.vararg)
    if a.kwarg:
        params.append(a.kwarg)
    return FunctionEntity(
        name=node.name,
        params=tuple((p.arg, p.annotation is not None) for p in params),
        has_return_annotation=node.returns is not None,
        has_docstring=has_docstring(node),
        span=_span(node),
    )


def receiver_name(method) -> str | None:
    a = method.args
    positional = [*a.posonlyargs, *a.args]
    if not positional:
        return None
    for dec in method.decorator_list:
        if isinstance(dec, ast.Name) and dec.id == "staticmethod":
            return None
    return positional[0].arg


def class_methods(cls: ast.ClassDef) -> list:
    return [n for n in cls.body if isinstance(n, FunctionNode)]


def class_fields(cls: ast.ClassDef) -> list[str]:
    """Class-level assignment targets plus attributes assigned on the receiver."""
    seen: dict[str, None] = {}
    for stmt in cls.body:
        targets = []
        if isinstance(stmt, ast.Assign):
            targets = stmt.targets
        elif isinstance(stmt, (ast.AnnAssign, ast.AugAssign)):
            targets = [stmt.target]
        for t in targets:
            for n in ast.walk(t):
                if isinstance(n, ast.Name):
                    seen.setdefault(n.id)
    for method in class_methods(cls):
        recv = receiver_name(method)
        if recv is None:
            continue
        for n in ast.walk(method):
            if (
                isinstance(n, ast.Attribute)
                and isinstance(n.ctx, (ast.Store, ast.Del))
                and isinstance(n.value, ast.Name)
                and n.value.id == recv
            ):
                seen.setdefault(n.attr)
    return list(seen)


def build_index(tree: ast.Module) -> EntityIndex:
    functions, classes, imports, calls = [], [], [], []
    for node in ast.walk(tree):
        if isinstance(node, FunctionNode):
            functions.append(_function_entity(node))
        elif isinstance(node, ast.ClassDef):
            classes.append(
                ClassEntity(
                    name=node.name,
                    fields=tuple(class_fields(node)),
                    methods=tuple(m.name for m in class_methods(node)),
                    has_docstring=has_docstring(node),
                    span=_span(node),
                )
            )
        elif isinstance(node, ast.Import):
            for alias in node.names:
                imports.append(ImportEntity(alias.name, (alias.asname or alias.name,), False))
        elif isinstance(node, ast.ImportFrom):
            imports.append(
                ImportEntity(
                    node.module or "",
                    tuple(a.name for a in node.names),
                    node.level > 0,
                )
            )
        elif isinstance(node, ast.Call):
            callee = dotted_name(node.func)
            if callee is not None:
                calls.append(
                    CallSite(
                        callee,
                        len(node.args),
                        tuple(k.arg for k in node.keywords if k.arg is not None),
                    )
                )
    return EntityIndex(tuple(functions), tuple(classes), tuple(imports), tuple(calls))
