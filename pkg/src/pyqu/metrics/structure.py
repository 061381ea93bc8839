"""Documentation, cohesion, coupling and lite type-consistency metrics."""

from __future__ import annotations

import ast
import math

from pyqu.metrics.rules import LintFinding
from pyqu.metrics.source import (
    FunctionNode,
    SourceUnit,
    class_fields,
    class_methods,
    has_docstring,
    receiver_name,
)


def annotation_doc_consistency(unit: SourceUnit) -> float:
    """Share of functions and classes that are documented (and, for
    functions, carry at least one annotation)."""
    if not unit.parse_ok:
        return 0.0
    idx = unit.index
    good = sum(f.has_docstring and f.is_annotated for f in idx.functions)
    good += sum(c.has_docstring for c in idx.classes)
    return good / max(len(idx.functions) + len(idx.classes), 1)


def docstring_quality(unit: SourceUnit) -> float:
    if not unit.parse_ok:
        return 0.0
    idx = unit.index
    entities = [f.has_docstring for f in idx.functions] + [c.has_docstring for c in idx.classes]
    if has_docstring(unit.tree):
        entities.append(True)
    return sum(entities) / max(len(entities), 1)


def _class_cohesion(cls: ast.ClassDef) -> float:
    fields = set(class_fields(cls))
    methods = class_methods(cls)
    if not fields or not methods:
        return 1.0
    ratios = []
    for method in methods:
        receivers = {cls.name}
        recv = receiver_name(method)
        if recv:
            receivers.add(recv)
        used = {
            n.attr
            for n in ast.walk(method)
            if isinstance(n, ast.Attribute)
            and isinstance(n.value, ast.Name)
            and n.value.id in receivers
            and n.attr in fields
        }
        ratios.append(len(used) / len(fields))
    return sum(ratios) / len(ratios)


def cohesion(unit: SourceUnit) -> float:
    """Mean over classes of the mean share of fields each method touches."""
    if not unit.parse_ok:
        return 1.0
    scores = [_class_cohesion(n) for n in ast.walk(unit.tree) if isinstance(n, ast.ClassDef)]
    if not scores:
        return 1.0
    return sum(scores) / len(scores)


def coupling(unit: SourceUnit) -> tuple[int, int]:
    """``(internal, external)`` reference counts."""
    if not unit.parse_ok:
        return 0, 0
    tree = unit.tree
    imported = set(unit.import_aliases)
    external = 0
    for node in ast.walk(tree):
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            external += 1
        elif isinstance(node, ast.Attribute) and isinstance(node.value, ast.Name) and node.value.id in imported:
            external += 1

    top = [n for n in tree.body if isinstance(n, (*FunctionNode, ast.ClassDef))]
    names = {n.name for n in top}
    internal = 0
    for entity in top:
        for node in ast.walk(entity):
            if (
                isinstance(node, ast.Name)
                and isinstance(node.ctx, ast.Load)
                and node.id in names
                and node.id != entity.name
            ):
                internal += 1
    return internal, external


# lite type checks ---------------------------------------------------------

_PRIMITIVES = {"int", "float", "str", "bool", "bytes", "complex"}
_ACCEPTS = {
    "float": {"int", "bool"},
    "int": {"bool"},
    "complex": {"int", "float", "bool"},
}


def _literal_type(node: ast.AST) -> str | None:
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        node = node.operand
        if not (isinstance(node, ast.Constant) and type(node.value) in (int, float, complex)):
            return None
    if isinstance(node, ast.Constant):
        return "None" if node.value is None else type(node.value).__name__
    return None


def _mismatch(declared: ast.AST | None, value: ast.AST | None) -> bool:
    if not (isinstance(declared, ast.Name) and declared.id in _PRIMITIVES) or value is None:
        return False
    lit = _literal_type(value)
    if lit is None or lit == declared.id:
        return False
    return lit not in _ACCEPTS.get(declared.id, set())


def _arity(func) -> tuple[int, float]:
    a = func.args
    positional = len(a.posonlyargs) + len(a.args)
    required = positional - len(a.defaults)
    required += sum(d is None for d in a.kw_defaults)
    upper = math.inf if (a.vararg or a.kwarg) else positional + len(a.kwonlyargs)
    return required, upper


def _own_returns(func):
    stack = list(func.body)
    while stack:
        node = stack.pop()
        if isinstance(node, ast.Return):
            yield node
        if not isinstance(node, (*FunctionNode, ast.Lambda, ast.ClassDef)):
            stack.extend(ast.iter_child_nodes(node))


def type_findings(unit: SourceUnit) -> list[LintFinding]:
    if not unit.parse_ok:
        return []
    tree = unit.tree
    out = []
    arity = {n.name: _arity(n) for n in tree.body if isinstance(n, FunctionNode)}
    for node in ast.walk(tree):
        if isinstance(node, ast.AnnAssign) and _mismatch(node.annotation, node.value):
            out.append(LintFinding("T401", "error", node.lineno, "literal does not match annotation"))
        elif isinstance(node, FunctionNode):
            for ret in _own_returns(node):
                if _mismatch(node.returns, ret.value):
                    out.append(LintFinding("T402", "error", ret.lineno, "return literal does not match annotation"))
        elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in arity:
            if any(isinstance(a, ast.Starred) for a in node.args) or any(k.arg is None for k in node.keywords):
                continue
            lo, hi = arity[node.func.id]
            n = len(node.args) + len(node.keywords)
            if not lo <= n <= hi:
                out.append(LintFinding("T403", "error", node.lineno, f"{node.func.id}() called with {n} arguments"))
    out.sort(key=lambda f: (f.line, f.rule_id))
    return out


def type_consistency(unit: SourceUnit) -> int:
    return len(type_findings(unit))
