"""Rule catalog and the lint-style checkers behind SCS, AFP, APIFC and D."""

from __future__ import annotations

import ast
import io
import re
import tokenize
from dataclasses import dataclass, field

from pyqu.metrics.source import (
    DefNode,
    FunctionNode,
    SourceUnit,
    dotted_name,
    resolve_call,
)

SEVERITIES = ("convention", "warning", "error")


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class LintFinding:
    rule_id: str
    severity: str
    line: int
    message: str


@dataclass(frozen=True)
class ApiRule:
    rule_id: str
    framework: str
    kind: str  # "attribute_subscript" | "deprecated_call" | "call_in_loop"
    pattern: str
    replacement: str

    def compiled(self) -> re.Pattern:
        return re.compile(self.pattern, re.IGNORECASE)


STYLE_RULES = (
    ("S101", "line longer than 79 characters"),
    ("S102", "trailing whitespace"),
    ("S103", "indentation contains a tab"),
    ("S104", "indentation is not a multiple of four"),
    ("S105", "missing whitespace around '=' or comparison operator"),
    ("S106", "function name is not snake_case"),
    ("S107", "variable name is not snake_case"),
    ("S108", "class name is not CapWords"),
    ("S109", "multiple statements on one line (semicolon)"),
)

# (feature, severity)
ADVANCED_FEATURES = (
    ("lambda", "convention"),
    ("eval_exec", "warning"),
    ("global_nonlocal", "warning"),
    ("metaclass", "convention"),
    ("nested_comprehension", "convention"),
    ("walrus", "convention"),
    ("stacked_decorators", "convention"),
)

_SEED_CALLS = (
    r"^(random\.seed|numpy\.random\.seed|torch\.manual_seed|torch\.cuda\.manual_seed(_all)?"
    r"|tensorflow\.random\.set_seed|tensorflow\.set_random_seed|tensorflow\.compat\.v1\.set_random_seed"
    r"|jax\.random\.PRNGKey)$"
)

API_RULES = (
    ApiRule("F301", "torch", "attribute_subscript", r"(^|\.)\w*loss\w*\.data$", ".item()"),
    ApiRule(
        "F302",
        "tensorflow",
        "deprecated_call",
        r"^tensorflow\.(compat\.v1\.)?(Session|InteractiveSession|placeholder"
        r"|global_variables_initializer|local_variables_initializer|initialize_all_variables)$",
        "eager execution / tf.function",
    ),
    ApiRule("F303", "torch", "deprecated_call", r"^torch\.autograd\.Variable$", "plain tensors"),
    ApiRule("F304", "any", "call_in_loop", _SEED_CALLS, "seed once before the loop"),
)

FRAMEWORK_ROOTS = ("torch", "tensorflow", "keras", "sklearn", "numpy", "jax")

# used by repository reproducibility scoring
RANDOMNESS_CALLS = (
    r"^(random\.(random|randint|randrange|choice|choices|shuffle|sample|uniform|gauss)"
    r"|numpy\.random\.\w+|torch\.(rand|randn|randint|randperm|normal|bernoulli|multinomial)"
    r"|torch\.nn\.init\.\w+|tensorflow\.random\.\w+|sklearn\.model_selection\.train_test_split)$"
)
SEEDING_CALLS = _SEED_CALLS

SEVERITY_WEIGHTS = {"convention": 1.0, "warning": 2.0, "error": 5.0}


@dataclass(frozen=True)
class RuleCatalog:
    style_rules: tuple[tuple[str, str], ...] = STYLE_RULES
    advanced_features: tuple[tuple[str, str], ...] = ADVANCED_FEATURES
    api_rules: tuple[ApiRule, ...] = API_RULES
    severity_weights: dict = field(default_factory=lambda: dict(SEVERITY_WEIGHTS))
    framework_roots: tuple[str, ...] = FRAMEWORK_ROOTS
    randomness_calls: str = RANDOMNESS_CALLS
    seeding_calls: str = SEEDING_CALLS
    max_line_length: int = 79

    def __post_init__(self):
        ids = [r for r, _ in self.style_rules] + [r.rule_id for r in self.api_rules]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise CatalogError(f"duplicate rule ids: {', '.join(dupes)}")
        missing = [s for s in SEVERITIES if s not in self.severity_weights]
        if missing:
            raise CatalogError(f"no severity weight for: {', '.join(missing)}")
        for s, w in self.severity_weights.items():
            if s not in SEVERITIES or not w > 0:
                raise CatalogError(f"invalid severity weight {s}={w}")
        for rule in self.api_rules:
            try:
                rule.compiled()
            except re.error as exc:
                raise CatalogError(f"api rule {rule.rule_id}: bad pattern ({exc})") from None
        for _, sev in self.advanced_features:
            if sev not in SEVERITIES:
                raise CatalogError(f"unknown severity {sev!r}")

    @property
    def enabled_styles(self) -> set[str]:
        return {r for r, _ in self.style_rules}

    @property
    def feature_severity(self) -> dict[str, str]:
        return dict(self.advanced_features)


DEFAULT_CATALOG = RuleCatalog()


# ---------------------------------------------------------------------------
# style
# ---------------------------------------------------------------------------

_SNAKE = re.compile(r"^_{0,2}[a-z][a-z0-9_]*$|^_+$")
_CONSTANT = re.compile(r"^_*[A-Z][A-Z0-9_]*$")
_CAPWORDS = re.compile(r"^_*[A-Z][A-Za-z0-9]*$")
_SPACED_OPS = {"=", "==", "!=", "<", ">", "<=", ">="}


def _token_style(unit: SourceUnit, enabled: set[str]) -> list[LintFinding]:
    out = []
    try:
        tokens = list(tokenize.generate_tokens(io.StringIO(unit.text).readline))
    except (tokenize.TokenError, IndentationError, SyntaxError):
        return out
    depth = 0
    for i, tok in enumerate(tokens):
        if tok.type != tokenize.OP:
            continue
        if tok.string in ("(", "[", "{"):
            depth += 1
        elif tok.string in (")", "]", "}"):
            depth = max(depth - 1, 0)
        elif depth == 0 and tok.string == ";" and "S109" in enabled:
            out.append(LintFinding("S109", "convention", tok.start[0], "statement separated by ';'"))
        elif depth == 0 and tok.string in _SPACED_OPS and "S105" in enabled:
            prev, nxt = tokens[i - 1], tokens[i + 1] if i + 1 < len(tokens) else None
            tight_before = prev.end == tok.start
            tight_after = nxt is not None and nxt.start == tok.end
            if tight_before or tight_after:
                out.append(
                    LintFinding("S105", "convention", tok.start[0], f"missing whitespace around {tok.string!r}")
                )
    return out


def _stored_names(node: ast.AST):
    for n in ast.walk(node):
        if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Store):
            yield n


def _name_style(unit: SourceUnit, enabled: set[str]) -> list[LintFinding]:
    out = []
    lines = unit.lines
    indent_lines = set()
    for node in ast.walk(unit.tree):
        if isinstance(node, FunctionNode) and "S106" in enabled and not _SNAKE.match(node.name):
            out.append(LintFinding("S106", "convention", node.lineno, f"function name {node.name!r}"))
        elif isinstance(node, ast.ClassDef) and "S108" in enabled and not _CAPWORDS.match(node.name):
            out.append(LintFinding("S108", "convention", node.lineno, f"class name {node.name!r}"))
        targets = []
        if isinstance(node, ast.Assign):
            targets = node.targets
        elif isinstance(node, (ast.AnnAssign, ast.AugAssign, ast.For, ast.AsyncFor, ast.NamedExpr)):
            targets = [node.target]
        elif isinstance(node, ast.withitem) and node.optional_vars is not None:
            targets = [node.optional_vars]
        if "S107" in enabled:
            for t in targets:
                for name in _stored_names(t):
                    if not (_SNAKE.match(name.id) or _CONSTANT.match(name.id)):
                        out.append(LintFinding("S107", "convention", name.lineno, f"variable name {name.id!r}"))
        if isinstance(node, ast.stmt) and "S104" in enabled:
            row = node.lineno
            if row in indent_lines or row > len(lines):
                continue
            line = lines[row - 1]
            lead = line[: len(line) - len(line.lstrip())]
            indent_lines.add(row)
            if "\t" not in lead and len(lead) % 4:
                out.append(LintFinding("S104", "convention", row, f"indentation of {len(lead)} spaces"))
    return out


def style_findings(unit: SourceUnit, catalog: RuleCatalog = DEFAULT_CATALOG) -> list[LintFinding]:
    enabled = catalog.enabled_styles
    out = []
    for row, line in enumerate(unit.lines, 1):
        if "S101" in enabled and len(line) > catalog.max_line_length:
            out.append(LintFinding("S101", "convention", row, f"line too long ({len(line)})"))
        if "S102" in enabled and line != line.rstrip():
            out.append(LintFinding("S102", "convention", row, "trailing whitespace"))
        if "S103" in enabled and "\t" in line[: len(line) - len(line.lstrip())]:
            out.append(LintFinding("S103", "convention", row, "tab in indentation"))
    out.extend(_token_style(unit, enabled))
    if unit.parse_ok:
        out.extend(_name_style(unit, enabled))
    return out


def style_conformance(unit: SourceUnit, catalog: RuleCatalog = DEFAULT_CATALOG, loc: int | None = None) -> float:
    """``1 - violations / max(loc, 1)`` clamped to ``[0, 1]``."""
    if loc is None:
        from pyqu.metrics.textual import count_loc_and_ccr

        loc = count_loc_and_ccr(unit).loc
    violations = len(style_findings(unit, catalog))
    return min(1.0, max(0.0, 1.0 - violations / max(loc, 1)))


# ---------------------------------------------------------------------------
# advanced features
# ---------------------------------------------------------------------------

_COMPREHENSIONS = (ast.ListComp, ast.SetComp, ast.DictComp, ast.GeneratorExp)


def _nested_comprehensions(tree: ast.AST) -> list[ast.AST]:
    found = []

    def visit(node, depth):
        if isinstance(node, _COMPREHENSIONS):
            depth += 1
            if depth >= 2:
                found.append(node)
        for child in ast.iter_child_nodes(node):
            visit(child, depth)

    visit(tree, 0)
    return found


def advanced_feature_findings(unit: SourceUnit, catalog: RuleCatalog = DEFAULT_CATALOG) -> list[LintFinding]:
    if not unit.parse_ok:
        return []
    sev = catalog.feature_severity
    out = []

    def add(feature, node, msg):
        if feature in sev:
            out.append(LintFinding(f"A2{list(sev).index(feature):02d}", sev[feature], node.lineno, msg))

    for node in ast.walk(unit.tree):
        if isinstance(node, ast.Lambda):
            add("lambda", node, "lambda expression")
        elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in ("eval", "exec"):
            add("eval_exec", node, f"{node.func.id}() call")
        elif isinstance(node, (ast.Global, ast.Nonlocal)):
            add("global_nonlocal", node, f"{type(node).__name__.lower()} statement")
        elif isinstance(node, ast.NamedExpr):
            add("walrus", node, "assignment expression")
        if isinstance(node, ast.ClassDef) and any(k.arg == "metaclass" for k in node.keywords):
            add("metaclass", node, "metaclass keyword")
        if isinstance(node, DefNode) and len(node.decorator_list) >= 2:
            add("stacked_decorators", node, f"{len(node.decorator_list)} decorators")
    for node in _nested_comprehensions(unit.tree):
        add("nested_comprehension", node, "nested comprehension")
    return out


def advanced_feature_penalty(unit: SourceUnit, catalog: RuleCatalog = DEFAULT_CATALOG) -> int:
    return len(advanced_feature_findings(unit, catalog))


# ---------------------------------------------------------------------------
# ML framework API conformance
# ---------------------------------------------------------------------------


def framework_call_sites(unit: SourceUnit, catalog: RuleCatalog = DEFAULT_CATALOG) -> int:
    """Calls whose callee is rooted at an imported ML framework name."""
    if not unit.parse_ok:
        return 0
    aliases = unit.import_aliases
    roots = set(catalog.framework_roots)
    count = 0
    for node in ast.walk(unit.tree):
        if not isinstance(node, ast.Call):
            continue
        name = dotted_name(node.func)
        if name is None or name.split(".")[0] not in aliases:
            continue
        if resolve_call(node, aliases).split(".")[0] in roots:
            count += 1
    return count


def _loop_calls(tree: ast.AST):
    """Calls lexically inside a for/while body of the same function."""

    def visit(node, in_loop):
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (*FunctionNode, ast.Lambda, ast.ClassDef)):
                visit(child, False)
                continue
            looping = in_loop
            if isinstance(node, (ast.For, ast.AsyncFor, ast.While)) and child in node.body:
                looping = True
            if looping and isinstance(child, ast.Call):
                yield_list.append(child)
            visit(child, looping)

    yield_list: list[ast.Call] = []
    visit(tree, False)
    return yield_list


def api_findings(unit: SourceUnit, catalog: RuleCatalog = DEFAULT_CATALOG) -> list[LintFinding]:
    if not unit.parse_ok:
        return []
    aliases = unit.import_aliases
    out = []
    subscript_rules = [r for r in catalog.api_rules if r.kind == "attribute_subscript"]
    call_rules = [r for r in catalog.api_rules if r.kind == "deprecated_call"]
    loop_rules = [r for r in catalog.api_rules if r.kind == "call_in_loop"]
    for node in ast.walk(unit.tree):
        if subscript_rules and isinstance(node, ast.Subscript) and isinstance(node.value, ast.Attribute):
            name = dotted_name(node.value)
            for rule in subscript_rules:
                if name and rule.compiled().search(name):
                    out.append(
                        LintFinding(rule.rule_id, "warning", node.lineno, f"{name}[...]: use {rule.replacement}")
                    )
        elif call_rules and isinstance(node, ast.Call):
            path = resolve_call(node, aliases)
            for rule in call_rules:
                if path and rule.compiled().search(path):
                    out.append(
                        LintFinding(rule.rule_id, "warning", node.lineno, f"{path}(): use {rule.replacement}")
                    )
    if loop_rules:
        for call in _loop_calls(unit.tree):
            path = resolve_call(call, aliases)
            for rule in loop_rules:
                if path and rule.compiled().search(path):
                    out.append(LintFinding(rule.rule_id, "warning", call.lineno, f"{path}() inside a loop"))
    out.sort(key=lambda f: (f.line, f.rule_id))
    return out


def api_framework_conformance(unit: SourceUnit, catalog: RuleCatalog = DEFAULT_CATALOG) -> float:
    """``1 - violations / framework call sites``; 1.0 without framework calls."""
    sites = framework_call_sites(unit, catalog)
    if sites == 0:
        return 1.0
    violations = len(api_findings(unit, catalog))
    return min(1.0, max(0.0, 1.0 - violations / sites))


# ---------------------------------------------------------------------------
# defects
# ---------------------------------------------------------------------------


def collect_findings(unit: SourceUnit, catalog: RuleCatalog = DEFAULT_CATALOG) -> list[LintFinding]:
    from pyqu.metrics.structure import type_findings

    out = style_findings(unit, catalog)
    if unit.parse_ok:
        out += advanced_feature_findings(unit, catalog)
        out += api_findings(unit, catalog)
        out += type_findings(unit)
    else:
        out.append(LintFinding("E999", "error", 1, "source does not parse"))
    return out


def defect_score(unit: SourceUnit, catalog: RuleCatalog = DEFAULT_CATALOG) -> float:
    weights = catalog.severity_weights
    return float(sum(weights[f.severity] for f in collect_findings(unit, catalog)))
