"""Cyclomatic complexity and Halstead volume."""

from __future__ import annotations

import ast
import math
from collections import Counter

from pyqu.metrics.source import DefNode, FunctionNode, SourceUnit, docstring_ids


def _decision_points(node: ast.AST) -> int:
    if isinstance(node, (ast.If, ast.While, ast.For, ast.AsyncFor, ast.ExceptHandler, ast.Assert, ast.IfExp)):
        return 1
    if isinstance(node, ast.BoolOp):
        return len(node.values) - 1
    if isinstance(node, ast.comprehension):
        return len(node.ifs)
    if isinstance(node, ast.Match):
        return max(len(node.cases) - 1, 0)
    return 0


def _has_module_code(body: list[ast.stmt], docs: set[int]) -> bool:
    for stmt in body:
        if id(stmt) in docs or isinstance(stmt, (*FunctionNode, ast.Import, ast.ImportFrom)):
            continue
        if isinstance(stmt, ast.ClassDef):
            if _has_module_code(stmt.body, docs):
                return True
            continue
        return True
    return False


def cyclomatic_complexity(unit: SourceUnit) -> int:
    """Sum over functions of ``1 + decision points``.

    Statements outside any function (module and class bodies) form one
    implicit function, which only counts when such executable code exists;
    imports, definitions and docstrings alone do not create it.
    """
    if not unit.parse_ok:
        return 0
    tree = unit.tree
    total = 0
    module_points = 0
    stack: list[tuple[ast.AST, bool]] = [(tree, False)]
    while stack:
        node, in_function = stack.pop()
        for child in ast.iter_child_nodes(node):
            if isinstance(child, FunctionNode):
                total += 1
                total += sum(_decision_points(n) for n in _own_nodes(child))
                stack.append((child, True))
                continue
            if not in_function:
                module_points += _decision_points(child)
            stack.append((child, in_function))
    if _has_module_code(tree.body, docstring_ids(tree)):
        total += 1 + module_points
    return total


def _own_nodes(func):
    """Nodes of ``func`` not belonging to a nested function."""
    stack = list(ast.iter_child_nodes(func))
    while stack:
        node = stack.pop()
        yield node
        if not isinstance(node, FunctionNode):
            stack.extend(ast.iter_child_nodes(node))


# Halstead -------------------------------------------------------------------

_BINOPS = {
    ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/", ast.FloorDiv: "//",
    ast.Mod: "%", ast.Pow: "**", ast.LShift: "<<", ast.RShift: ">>",
    ast.BitOr: "|", ast.BitXor: "^", ast.BitAnd: "&", ast.MatMult: "@",
}
_UNARY = {ast.UAdd: "u+", ast.USub: "u-", ast.Not: "not", ast.Invert: "~"}
_CMP = {
    ast.Eq: "==", ast.NotEq: "!=", ast.Lt: "<", ast.LtE: "<=", ast.Gt: ">",
    ast.GtE: ">=", ast.Is: "is", ast.IsNot: "is not", ast.In: "in", ast.NotIn: "not in",
}
_KEYWORD = {
    ast.Return: "return", ast.Yield: "yield", ast.YieldFrom: "yield from",
    ast.Raise: "raise", ast.Try: "try", ast.Assert: "assert", ast.Pass: "pass",
    ast.Break: "break", ast.Continue: "continue", ast.Delete: "del",
    ast.Global: "global", ast.Nonlocal: "nonlocal", ast.Lambda: "lambda",
    ast.Await: "await", ast.FunctionDef: "def", ast.AsyncFunctionDef: "async def",
    ast.ClassDef: "class", ast.While: "while", ast.With: "with",
    ast.AsyncWith: "async with", ast.Import: "import", ast.NamedExpr: ":=",
    ast.Starred: "*", ast.Subscript: "[]", ast.Attribute: ".", ast.Call: "()",
    ast.Slice: ":", ast.List: "[,]", ast.Tuple: "(,)", ast.Set: "{,}",
    ast.Dict: "{:}", ast.JoinedStr: "f''", ast.Match: "match",
    ast.match_case: "case", ast.IfExp: "if-else",
}


def halstead_counts(unit: SourceUnit) -> tuple[Counter, Counter]:
    """Operator and operand occurrence counters; docstrings are skipped."""
    operators: Counter = Counter()
    operands: Counter = Counter()
    if not unit.parse_ok:
        return operators, operands
    docs = docstring_ids(unit.tree)
    stack: list[ast.AST] = [unit.tree]
    while stack:
        node = stack.pop()
        if id(node) in docs:
            continue
        _classify(node, operators, operands)
        stack.extend(ast.iter_child_nodes(node))
    return +operators, +operands


def _classify(node: ast.AST, ops: Counter, rands: Counter) -> None:
    kind = type(node)
    if kind in _KEYWORD:
        ops[_KEYWORD[kind]] += 1
    if isinstance(node, ast.Name):
        rands["id:" + node.id] += 1
    elif isinstance(node, ast.Constant):
        rands[f"lit:{type(node.value).__name__}:{node.value!r}"] += 1
    elif isinstance(node, ast.Attribute):
        rands["id:" + node.attr] += 1
    elif isinstance(node, ast.arg):
        rands["id:" + node.arg] += 1
    elif isinstance(node, ast.keyword):
        if node.arg is None:
            ops["**"] += 1
        else:
            rands["id:" + node.arg] += 1
    elif isinstance(node, ast.alias):
        rands["id:" + node.name] += 1
        if node.asname:
            ops["as"] += 1
            rands["id:" + node.asname] += 1
    elif isinstance(node, DefNode):
        rands["id:" + node.name] += 1
        if node.decorator_list:
            ops["@"] += len(node.decorator_list)
    elif isinstance(node, (ast.Global, ast.Nonlocal)):
        for name in node.names:
            rands["id:" + name] += 1
    elif isinstance(node, ast.Assign):
        ops["="] += len(node.targets)
    elif isinstance(node, ast.AnnAssign):
        if node.value is not None:
            ops["="] += 1
    elif isinstance(node, ast.AugAssign):
        ops[_BINOPS[type(node.op)] + "="] += 1
    elif isinstance(node, ast.BinOp):
        ops[_BINOPS[type(node.op)]] += 1
    elif isinstance(node, ast.UnaryOp):
        ops[_UNARY[type(node.op)]] += 1
    elif isinstance(node, ast.BoolOp):
        ops["and" if isinstance(node.op, ast.And) else "or"] += len(node.values) - 1
    elif isinstance(node, ast.Compare):
        for op in node.ops:
            ops[_CMP[type(op)]] += 1
    elif isinstance(node, ast.If):
        ops["if"] += 1
        if node.orelse and not (len(node.orelse) == 1 and isinstance(node.orelse[0], ast.If)):
            ops["else"] += 1
    elif isinstance(node, (ast.For, ast.AsyncFor)):
        ops["for"] += 1
        ops["in"] += 1
        if node.orelse:
            ops["else"] += 1
    elif isinstance(node, ast.comprehension):
        ops["for"] += 1
        ops["in"] += 1
        if node.ifs:
            ops["if"] += len(node.ifs)
    elif isinstance(node, ast.ExceptHandler):
        ops["except"] += 1
        if node.name:
            ops["as"] += 1
            rands["id:" + node.name] += 1
    elif isinstance(node, ast.withitem):
        if node.optional_vars is not None:
            ops["as"] += 1
    elif isinstance(node, ast.ImportFrom):
        ops["from"] += 1
        ops["import"] += 1
        if node.module:
            rands["id:" + node.module] += 1
    if isinstance(node, ast.Try) and node.finalbody:
        ops["finally"] += 1
    if isinstance(node, (ast.While, ast.Try)) and node.orelse:
        ops["else"] += 1


def halstead_volume(unit: SourceUnit) -> float:
    """``N * log2(n)`` over operator and operand occurrences."""
    ops, rands = halstead_counts(unit)
    total = sum(ops.values()) + sum(rands.values())
    vocabulary = len(ops) + len(rands)
    if total == 0 or vocabulary < 2:
        return 0.0
    return total * math.log2(vocabulary)
