"""Deployment metadata: parse web.xml and @WebServlet, resolve URLs.

Builds the pattern -> servlet lookup table and resolves every extracted URL
reference to an internal page, an internal servlet class, an external
resource, or an explicit "unresolved" verdict. Pattern matching follows the
container precedence rule: exact match, then longest path prefix, then
extension, then the default mapping.
"""

from __future__ import annotations

import posixpath
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum

from .dependency_extractor import UrlRef
from .diagnostics import Diagnostic, emit
from .jsp_parser import normalize_page_path

SOURCE_WEB_XML = "web-xml"
SOURCE_ANNOTATION = "annotation"


class XmlSyntaxError(ValueError):
    """web.xml is not well-formed XML."""


@dataclass
class ServletDecl:
    servlet_name: str
    servlet_class: str | None = None
    jsp_file: str | None = None
    source: str = SOURCE_WEB_XML


@dataclass
class UrlMappingTable:
    entries: list[tuple[str, str]] = field(default_factory=list)
    decls: list[ServletDecl] = field(default_factory=list)
    context_path: str = ""

    def decl_for(self, servlet_name: str) -> ServletDecl | None:
        for decl in self.decls:
            if decl.servlet_name == servlet_name:
                return decl
        return None


class ResolvedKind(str, Enum):
    INTERNAL_PAGE = "InternalPage"
    INTERNAL_SERVLET_CLASS = "InternalServletClass"
    EXTERNAL = "External"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class ResolvedTarget:
    kind: ResolvedKind
    page_path: str | None = None
    class_name: str | None = None
    reason: str | None = None


# -- web.xml --------------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rpartition("}")[2]


def _child_text(element: ET.Element, local_name: str) -> str | None:
    for child in element:
        if _local(child.tag) == local_name:
            return (child.text or "").strip()
    return None


def parse_web_xml(content: bytes) -> tuple[list[ServletDecl],
                                           list[tuple[str, str]],
                                           list[Diagnostic]]:
    """Servlet declarations and (url-pattern, servlet-name) pairs.

    Element matching is namespace-agnostic and local-name based; everything
    outside the five mapping-related elements is ignored.
    """
    try:
        root = ET.fromstring(content)
    except ET.ParseError as exc:
        raise XmlSyntaxError(str(exc)) from exc
    decls: list[ServletDecl] = []
    mappings: list[tuple[str, str]] = []
    diagnostics: list[Diagnostic] = []
    for element in root.iter():
        local = _local(element.tag)
        if local == "servlet":
            name = _child_text(element, "servlet-name")
            servlet_class = _child_text(element, "servlet-class")
            jsp_file = _child_text(element, "jsp-file")
            if not name:
                diagnostics.append(Diagnostic(
                    "web-xml", "servlet declaration without servlet-name; skipped"))
                continue
            if servlet_class and jsp_file:
                diagnostics.append(Diagnostic(
                    "web-xml",
                    f"servlet {name!r} declares both servlet-class and jsp-file; skipped"))
                continue
            if not servlet_class and not jsp_file:
                diagnostics.append(Diagnostic(
                    "web-xml",
                    f"servlet {name!r} declares neither servlet-class nor jsp-file; skipped"))
                continue
            decls.append(ServletDecl(
                servlet_name=name,
                servlet_class=servlet_class or None,
                jsp_file=normalize_page_path(jsp_file) if jsp_file else None,
                source=SOURCE_WEB_XML))
        elif local == "servlet-mapping":
            name = _child_text(element, "servlet-name")
            if not name:
                diagnostics.append(Diagnostic(
                    "web-xml", "servlet-mapping without servlet-name; skipped"))
                continue
            patterns = [(child.text or "").strip() for child in element
                        if _local(child.tag) == "url-pattern"]
            if not patterns:
                diagnostics.append(Diagnostic(
                    "web-xml", f"servlet-mapping for {name!r} has no url-pattern"))
            for pattern in patterns:
                mappings.append((pattern, name))
    return decls, mappings, diagnostics


# -- @WebServlet annotations ------------------------------------------------------

_LINE_COMMENT_RE = re.compile(r"//[^\n]*")
_BLOCK_COMMENT_RE = re.compile(r"/\*.*?\*/", re.DOTALL)
_STRING_RE = re.compile(r'"((?:[^"\\]|\\.)*)"')
_ANNOTATION_RE = re.compile(r"@\s*WebServlet\b")
_PACKAGE_RE = re.compile(r"^\s*package\s+([\w.]+)\s*;", re.MULTILINE)
_CLASS_RE = re.compile(r"\bclass\s+([A-Za-z_]\w*)")


def _strip_java_comments(source: str) -> str:
    return _LINE_COMMENT_RE.sub("", _BLOCK_COMMENT_RE.sub("", source))


def _unescape_java(literal: str) -> str:
    return literal.replace('\\"', '"').replace("\\\\", "\\")


def _annotation_args(source: str, pos: int) -> str | None:
    """Text between the balanced parens starting at ``pos`` (skipping space)."""
    n = len(source)
    while pos < n and source[pos].isspace():
        pos += 1
    if pos >= n or source[pos] != "(":
        return None
    depth = 0
    start = pos + 1
    in_string = False
    i = pos
    while i < n:
        c = source[i]
        if in_string:
            if c == "\\":
                i += 1
            elif c == '"':
                in_string = False
        elif c == '"':
            in_string = True
        elif c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                return source[start:i]
        i += 1
    return None


def _patterns_from_args(args: str) -> list[str] | None:
    """URL patterns in an annotation argument list, or None if unparseable."""

    def literals_after(match_end: int) -> list[str]:
        rest = args[match_end:]
        stripped = rest.lstrip()
        if stripped.startswith("{"):
            brace_end = stripped.find("}")
            if brace_end < 0:
                return []
            return [_unescape_java(m.group(1))
                    for m in _STRING_RE.finditer(stripped[:brace_end])]
        m = _STRING_RE.match(stripped)
        return [_unescape_java(m.group(1))] if m else []

    keyed = re.search(r"\b(?:urlPatterns|value)\s*=", args)
    if keyed:
        return literals_after(keyed.end())
    if "=" not in args:
        # Bare single-value form: @WebServlet("/hello")
        return [_unescape_java(m.group(1)) for m in _STRING_RE.finditer(args)]
    return None


def scan_webservlet_annotations(
        java_source: str, class_qualified_name: str,
        diagnostics: list[Diagnostic] | None = None) -> list[tuple[str, ServletDecl]]:
    """Lexical scan for @WebServlet URL patterns on one class.

    Handles the single string value, ``value = {...}`` and
    ``urlPatterns = {...}`` forms; anything else yields a diagnostic.
    """
    source = _strip_java_comments(java_source)
    results: list[tuple[str, ServletDecl]] = []
    for m in _ANNOTATION_RE.finditer(source):
        args = _annotation_args(source, m.end())
        if args is None:
            emit(diagnostics, "annotation",
                 f"@WebServlet on {class_qualified_name} has no arguments")
            continue
        patterns = _patterns_from_args(args)
        if patterns is None or not patterns:
            emit(diagnostics, "annotation",
                 f"@WebServlet on {class_qualified_name} without url patterns")
            continue
        name_match = re.search(r'\bname\s*=\s*"((?:[^"\\]|\\.)*)"', args)
        servlet_name = (_unescape_java(name_match.group(1)) if name_match
                        else class_qualified_name)
        decl = ServletDecl(servlet_name=servlet_name,
                           servlet_class=class_qualified_name,
                           source=SOURCE_ANNOTATION)
        for pattern in patterns:
            results.append((pattern, decl))
    return results


def java_qualified_class_name(java_source: str, fallback: str) -> str:
    """Best-effort "package.Class" from a source file, lexically."""
    source = _strip_java_comments(java_source)
    cls = _CLASS_RE.search(source)
    name = cls.group(1) if cls else fallback
    pkg = _PACKAGE_RE.search(source)
    return f"{pkg.group(1)}.{name}" if pkg else name


# -- lookup table -----------------------------------------------------------------

PATTERN_EXACT = "exact"
PATTERN_PREFIX = "prefix"
PATTERN_EXTENSION = "extension"
PATTERN_DEFAULT = "default"


def classify_pattern(pattern: str) -> str | None:
    """One of the four container pattern shapes, or None when invalid."""
    if pattern == "/":
        return PATTERN_DEFAULT
    if pattern.startswith("/") and pattern.endswith("/*") and "*" not in pattern[:-1]:
        return PATTERN_PREFIX
    if re.fullmatch(r"\*\.[^/.*]+", pattern):
        return PATTERN_EXTENSION
    if pattern.startswith("/") and "*" not in pattern:
        return PATTERN_EXACT
    return None


def build_lookup_table(decls: list[ServletDecl],
                       mappings: list[tuple[str, str]],
                       context_path: str = "",
                       diagnostics: list[Diagnostic] | None = None) -> UrlMappingTable:
    """Merge declarations and mappings into the lookup table.

    Mappings to undeclared servlets and syntactically invalid patterns are
    dropped with diagnostics. On a pattern collision the web.xml mapping wins
    over an annotation one; the shadowed mapping is recorded.
    """
    table = UrlMappingTable(context_path=context_path, decls=list(decls))
    chosen: dict[str, int] = {}  # pattern -> index into table.entries
    for pattern, servlet_name in mappings:
        decl = table.decl_for(servlet_name)
        if decl is None:
            emit(diagnostics, "mapping",
                 f"url-pattern {pattern!r} maps to undeclared servlet "
                 f"{servlet_name!r}; dropped")
            continue
        if classify_pattern(pattern) is None:
            emit(diagnostics, "mapping",
                 f"invalid url-pattern {pattern!r} for servlet {servlet_name!r}; dropped")
            continue
        if pattern in chosen:
            index = chosen[pattern]
            _, current_name = table.entries[index]
            current = table.decl_for(current_name)
            if (current is not None and current.source == SOURCE_ANNOTATION
                    and decl.source == SOURCE_WEB_XML):
                emit(diagnostics, "mapping",
                     f"pattern {pattern!r}: web.xml servlet {servlet_name!r} "
                     f"shadows annotation servlet {current_name!r}")
                table.entries[index] = (pattern, servlet_name)
            else:
                emit(diagnostics, "mapping",
                     f"pattern {pattern!r} already mapped to {current_name!r}; "
                     f"{servlet_name!r} shadowed")
            continue
        chosen[pattern] = len(table.entries)
        table.entries.append((pattern, servlet_name))
    return table


# -- URL resolution -----------------------------------------------------------------

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")


def normalize_url_path(path: str) -> tuple[str, bool, bool]:
    """Normalize an absolute context-relative path.

    Collapses "//", resolves "." and "..", and trims trailing dots from the
    last segment. Returns (normalized, clamped_at_root, trimmed_dots).
    """
    clamped = False
    stack: list[str] = []
    for segment in path.split("/"):
        if segment in ("", "."):
            continue
        if segment == "..":
            if stack:
                stack.pop()
            else:
                clamped = True
            continue
        stack.append(segment)
    normalized = "/" + "/".join(stack)
    trimmed = False
    if normalized.endswith(".") and normalized != "/":
        normalized = normalized.rstrip(".")
        trimmed = True
        if normalized == "":
            normalized = "/"
        elif normalized.endswith("/") and normalized != "/":
            normalized = normalized[:-1]
    return normalized, clamped, trimmed


def _match_entry(pattern: str, url: str) -> tuple[int, int] | None:
    """(tier, tiebreak) when ``pattern`` matches ``url``; lower wins."""
    shape = classify_pattern(pattern)
    if shape == PATTERN_EXACT:
        return (0, 0) if url == pattern else None
    if shape == PATTERN_PREFIX:
        base = pattern[:-2]
        if url == base or url.startswith(base + "/"):
            return (1, -len(base))
        return None
    if shape == PATTERN_EXTENSION:
        return (2, 0) if url.endswith(pattern[1:]) else None
    if shape == PATTERN_DEFAULT:
        return (3, 0)
    return None


def resolve_url(table: UrlMappingTable, ref: UrlRef, source_page: str,
                known_pages: frozenset[str] | set[str] = frozenset(),
                diagnostics: list[Diagnostic] | None = None) -> ResolvedTarget:
    """Resolve one reference to its server page, class, or verdict.

    ``known_pages`` lists the application's page paths so that URLs without a
    table entry can still resolve to a page file (the container's implicit
    JSP mapping). Dynamic references are never resolved.
    """
    where = f"{source_page}:{ref.raw_url!r}"
    if ref.dynamic:
        return ResolvedTarget(ResolvedKind.UNRESOLVED, reason="dynamic")
    raw = ref.raw_url.strip()
    if not raw:
        return ResolvedTarget(ResolvedKind.UNRESOLVED, reason="empty")
    if _SCHEME_RE.match(raw):
        return ResolvedTarget(ResolvedKind.EXTERNAL)
    path = raw.split("#", 1)[0].split("?", 1)[0]
    if not path:
        return ResolvedTarget(ResolvedKind.UNRESOLVED, reason="empty")
    if not path.startswith("/"):
        base = posixpath.dirname(normalize_page_path(source_page))
        path = posixpath.join(base, path)
    path, clamped, trimmed = normalize_url_path(path)
    if clamped:
        emit(diagnostics, "resolution",
             f'".." escapes the context root; clamped', where)
    if trimmed:
        emit(diagnostics, "resolution", "trailing dot(s) trimmed", where)
    ctx = table.context_path.rstrip("/")
    if ctx and (path == ctx or path.startswith(ctx + "/")):
        path = path[len(ctx):] or "/"
    best: tuple[tuple[int, int], int] | None = None
    best_entry: tuple[str, str] | None = None
    matches: list[str] = []
    for index, (pattern, servlet_name) in enumerate(table.entries):
        rank = _match_entry(pattern, path)
        if rank is None:
            continue
        matches.append(pattern)
        if best is None or (rank, index) < best:
            best = (rank, index)
            best_entry = (pattern, servlet_name)
    if best_entry is not None:
        if len(matches) > 1:
            shadowed = [p for p in matches if p != best_entry[0]]
            emit(diagnostics, "resolution",
                 f"pattern {best_entry[0]!r} wins over {shadowed}", where)
        decl = table.decl_for(best_entry[1])
        if decl is not None and decl.jsp_file:
            return ResolvedTarget(ResolvedKind.INTERNAL_PAGE, page_path=decl.jsp_file)
        if decl is not None and decl.servlet_class:
            return ResolvedTarget(ResolvedKind.INTERNAL_SERVLET_CLASS,
                                  class_name=decl.servlet_class)
    if path in known_pages:
        return ResolvedTarget(ResolvedKind.INTERNAL_PAGE, page_path=path)
    return ResolvedTarget(ResolvedKind.UNRESOLVED, reason="no-mapping")
