"""Line counts, comment density and comment readability."""

from __future__ import annotations

import ast
import inspect
import io
import re
import tokenize
from dataclasses import dataclass

from pyqu.metrics.source import DefNode, SourceUnit, docstring_node

_SKIP_TOKENS = {
    tokenize.NL, tokenize.NEWLINE, tokenize.INDENT, tokenize.DEDENT,
    tokenize.ENDMARKER, tokenize.ENCODING, tokenize.COMMENT,
}


@dataclass(frozen=True)
class LineStats:
    loc: int
    comment_lines: int
    ccr: float


def _char_col(line: str, byte_col: int) -> int:
    return len(line.encode("utf-8")[:byte_col].decode("utf-8", errors="ignore"))


def _docstring_ranges(unit: SourceUnit) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    if unit.tree is None:
        return []
    lines = unit.text.splitlines()
    ranges = []
    for node in ast.walk(unit.tree):
        if isinstance(node, (ast.Module, *DefNode)):
            doc = docstring_node(node)
            if doc is None:
                continue
            start_line = lines[doc.lineno - 1] if doc.lineno <= len(lines) else ""
            end_line = lines[doc.end_lineno - 1] if doc.end_lineno <= len(lines) else ""
            ranges.append(
                (
                    (doc.lineno, _char_col(start_line, doc.col_offset)),
                    (doc.end_lineno, _char_col(end_line, doc.end_col_offset)),
                )
            )
    return ranges


def _in_ranges(start, end, ranges) -> bool:
    return any(lo <= start and end <= hi for lo, hi in ranges)


def classify_lines(unit: SourceUnit) -> tuple[set[int], set[int], list[str]]:
    """Return ``(code_lines, comment_lines, comment_texts)``.

    Code lines carry at least one token that is neither a comment nor part of
    a docstring. Comment lines start with a comment or hold docstring text.
    """
    lines = unit.text.splitlines()
    code: set[int] = set()
    comments: set[int] = set()
    texts: list[str] = []
    ranges = _docstring_ranges(unit)
    try:
        tokens = list(tokenize.generate_tokens(io.StringIO(unit.text).readline))
    except (tokenize.TokenError, IndentationError, SyntaxError):
        tokens = None
    if tokens is None:
        for i, line in enumerate(lines, 1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                comments.add(i)
                texts.append(stripped.lstrip("#").strip())
            else:
                code.add(i)
        return code, comments, texts

    for tok in tokens:
        if tok.type == tokenize.COMMENT:
            row, col = tok.start
            if not tok.line[:col].strip():
                comments.add(row)
            texts.append(tok.string.lstrip("#").strip())
            continue
        if tok.type in _SKIP_TOKENS:
            continue
        doc = tok.type == tokenize.STRING and _in_ranges(tok.start, tok.end, ranges)
        for row in range(tok.start[0], tok.end[0] + 1):
            if row <= len(lines) and lines[row - 1].strip():
                (comments if doc else code).add(row)
    for node in ast.walk(unit.tree) if unit.tree is not None else ():
        if isinstance(node, (ast.Module, *DefNode)):
            doc = docstring_node(node)
            if doc is not None:
                texts.append(inspect.cleandoc(doc.value.value))
    return code, comments, texts


def count_loc_and_ccr(unit: SourceUnit) -> LineStats:
    code, comments, _ = classify_lines(unit)
    loc = len(code)
    return LineStats(loc=loc, comment_lines=len(comments), ccr=len(comments) / max(loc, 1))


# readability ----------------------------------------------------------------

_WORD = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)*")
_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")
_VOWEL_GROUP = re.compile(r"[aeiouy]+")


def count_syllables(word: str) -> int:
    """Vowel groups, minus one for a silent trailing ``e``; at least 1."""
    w = word.lower()
    count = len(_VOWEL_GROUP.findall(w))
    if count > 1 and w.endswith("e") and not w.endswith(("ee", "ye")):
        if not (w.endswith("le") and len(w) > 2 and w[-3] not in "aeiouy"):
            count -= 1
    return max(count, 1)


def flesch_reading_ease(text: str) -> float:
    words = _WORD.findall(text)
    if not words:
        return 0.0
    sentences = max(len(_SENTENCE_END.findall(text)), 1)
    syllables = sum(count_syllables(w) for w in words)
    return 206.835 - 1.015 * (len(words) / sentences) - 84.6 * (syllables / len(words))


def comment_readability(unit: SourceUnit) -> float:
    _, _, texts = classify_lines(unit)
    return flesch_reading_ease("\n".join(t for t in texts if t))
