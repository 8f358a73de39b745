"""Tag-level parser for JSP pages.

Produces a :class:`JspDocument`: an ordered, span-annotated node list that
covers the page source exactly. HTML is tokenized flatly (open tags, close
tags and text become sibling nodes); prefixed action elements such as
``jsp:include`` or ``c:if`` are nested when their close tag is found and
folded flat otherwise. No EL evaluation and no tag-library loading happen
here: the node list is the shared input for the servlet translator and the
URL-reference extractor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, NamedTuple

Span = tuple[int, int]


class NodeKind(str, Enum):
    TEMPLATE_TEXT = "TemplateText"
    SCRIPTLET = "Scriptlet"
    DECLARATION = "Declaration"
    EXPRESSION = "Expression"
    DIRECTIVE = "Directive"
    STANDARD_ACTION = "StandardAction"
    CUSTOM_ACTION = "CustomAction"
    HTML_ELEMENT = "HtmlElement"
    COMMENT = "Comment"


class Attribute(NamedTuple):
    name: str
    value: str
    value_is_dynamic: bool


class JspParseError(ValueError):
    """Base class for fatal page-level parse failures."""

    def __init__(self, message: str, page_path: str = "?", offset: int = 0):
        super().__init__(f"{page_path}@{offset}: {message}")
        self.page_path = page_path
        self.offset = offset


class UnterminatedScriptlet(JspParseError):
    """EOF was hit inside a ``<% ... %>``-family region."""


class MalformedAttribute(JspParseError):
    """A tag's attribute list cannot be tokenized (e.g. unclosed quote)."""


class DuplicateAttribute(JspParseError):
    """Two attributes of one tag share a name after ASCII lower-casing."""


@dataclass
class JspNode:
    kind: NodeKind
    name: str = ""
    attributes: list[Attribute] = field(default_factory=list)
    body: str | None = None
    children: list["JspNode"] = field(default_factory=list)
    span: Span = (0, 0)
    # Region between the open and close tag for nested elements; None for
    # flat or self-closing nodes.
    inner_span: Span | None = None

    def attribute_value(self, name: str, case_insensitive: bool = False) -> str | None:
        if case_insensitive:
            name = name.lower()
            for attr in self.attributes:
                if attr.name.lower() == name:
                    return attr.value
        else:
            for attr in self.attributes:
                if attr.name == name:
                    return attr.value
        return None


@dataclass
class JspDocument:
    """Parsed form of one page; nodes tile the source text exactly."""

    page_path: str
    nodes: list[JspNode]
    source: str

    @property
    def source_length(self) -> int:
        return len(self.source)

    def text_of(self, node: JspNode) -> str:
        return self.source[node.span[0]:node.span[1]]


def normalize_page_path(path: str) -> str:
    """Context-relative form: forward slashes, leading "/", no "//" runs."""
    path = path.replace("\\", "/")
    if not path.startswith("/"):
        path = "/" + path
    while "//" in path:
        path = path.replace("//", "/")
    return path


_NAME_RE = re.compile(r"[A-Za-z_][\w.\-]*(?::[\w.\-]+)?")
_ATTR_NAME_RE = re.compile(r"[^\s=/>]+")
_DIRECTIVE_NAME_RE = re.compile(r"\s*([A-Za-z][\w.\-]*)")
_DIRECTIVE_ATTR_RE = re.compile(
    r"([^\s=]+)\s*=\s*(?:\"([^\"]*)\"|'([^']*)'|([^\s%>]+))")


def _is_dynamic(value: str) -> bool:
    return "<%=" in value or "${" in value


def _classify_element(name: str) -> NodeKind:
    if ":" not in name:
        return NodeKind.HTML_ELEMENT
    if name.startswith("jsp:directive."):
        return NodeKind.DIRECTIVE
    if name.startswith("jsp:"):
        # The five actions the translator understands plus the rest of the
        # jsp: namespace (jsp:param, jsp:plugin, ...), which is standard too.
        return NodeKind.STANDARD_ACTION
    return NodeKind.CUSTOM_ACTION


class _Parser:
    def __init__(self, source: str, page_path: str):
        self.source = source
        self.page_path = page_path
        self.pos = 0
        self._close_span: Span | None = None

    # -- error helpers ----------------------------------------------------

    def _unterminated(self, offset: int, what: str) -> UnterminatedScriptlet:
        return UnterminatedScriptlet(f"unterminated {what}", self.page_path, offset)

    # -- region scanners --------------------------------------------------

    def _parse_delimited(self, start: int, open_len: int, closer: str,
                         kind: NodeKind, what: str) -> JspNode:
        end = self.source.find(closer, start + open_len)
        if end < 0:
            raise self._unterminated(start, what)
        self.pos = end + len(closer)
        return JspNode(kind=kind, body=self.source[start + open_len:end],
                       span=(start, self.pos))

    def _parse_directive(self, start: int) -> JspNode:
        end = self.source.find("%>", start + 3)
        if end < 0:
            raise self._unterminated(start, "directive")
        inner = self.source[start + 3:end]
        m = _DIRECTIVE_NAME_RE.match(inner)
        name = m.group(1) if m else ""
        rest = inner[m.end():] if m else inner
        attrs = self._scan_directive_attrs(rest, start + 3 + (m.end() if m else 0))
        self.pos = end + 2
        return JspNode(kind=NodeKind.DIRECTIVE, name=name, attributes=attrs,
                       span=(start, self.pos))

    def _scan_directive_attrs(self, text: str, offset: int) -> list[Attribute]:
        attrs: list[Attribute] = []
        seen: set[str] = set()
        consumed = 0
        for m in _DIRECTIVE_ATTR_RE.finditer(text):
            name = m.group(1)
            value = next(g for g in m.groups()[1:] if g is not None)
            key = name.lower()
            if key in seen:
                raise DuplicateAttribute(
                    f"duplicate attribute {name!r}", self.page_path, offset + m.start())
            seen.add(key)
            attrs.append(Attribute(name, value, _is_dynamic(value)))
            consumed = m.end()
        leftover = text[consumed:]
        if '"' in leftover or "'" in leftover:
            raise MalformedAttribute(
                "unclosed quote in directive", self.page_path, offset + consumed)
        return attrs

    def _scan_tag_attrs(self, pos: int, tag_start: int) -> tuple[list[Attribute], int, bool] | None:
        """Scan attributes from ``pos`` up to the tag's ``>``.

        Returns (attributes, position after ">", self_closing), or None when
        EOF arrives before ">" (the caller then treats "<" as template text).
        Quoted values may contain "<", ">" and expression fragments; an
        unclosed quote is a hard error.
        """
        src = self.source
        n = len(src)
        attrs: list[Attribute] = []
        seen: set[str] = set()
        while True:
            while pos < n and src[pos].isspace():
                pos += 1
            if pos >= n:
                return None
            c = src[pos]
            if c == ">":
                return attrs, pos + 1, False
            if c == "/":
                if src.startswith("/>", pos):
                    return attrs, pos + 2, True
                pos += 1  # stray slash, skip
                continue
            if c == "=":
                pos += 1  # stray "=", skip
                continue
            m = _ATTR_NAME_RE.match(src, pos)
            name = m.group(0)
            pos = m.end()
            while pos < n and src[pos].isspace():
                pos += 1
            value = ""
            if pos < n and src[pos] == "=":
                pos += 1
                while pos < n and src[pos].isspace():
                    pos += 1
                if pos >= n:
                    return None
                q = src[pos]
                if q in ("'", '"'):
                    endq = src.find(q, pos + 1)
                    if endq < 0:
                        raise MalformedAttribute("unclosed quote", self.page_path, pos)
                    value = src[pos + 1:endq]
                    pos = endq + 1
                else:
                    vstart = pos
                    while pos < n and not src[pos].isspace() and src[pos] != ">" \
                            and not src.startswith("/>", pos):
                        pos += 1
                    value = src[vstart:pos]
            key = name.lower()
            if key in seen:
                raise DuplicateAttribute(
                    f"duplicate attribute {name!r}", self.page_path, tag_start)
            seen.add(key)
            attrs.append(Attribute(name, value, _is_dynamic(value)))

    # -- element / node parsing -------------------------------------------

    def _parse_element(self, start: int) -> list[JspNode] | None:
        src = self.source
        m = _NAME_RE.match(src, start + 1)
        assert m is not None  # caller checked the name start
        name = m.group(0)
        scanned = self._scan_tag_attrs(m.end(), start)
        if scanned is None:
            return None
        attrs, tag_end, self_closing = scanned
        kind = _classify_element(name)
        self.pos = tag_end
        if ":" in name and not self_closing:
            # Prefixed actions nest; look for the matching close tag.
            children = self._parse_nodes(until_close=name)
            close_span, self._close_span = self._close_span, None
            if close_span is not None:
                close_start, close_end = close_span
                node = JspNode(kind=kind, name=name, attributes=attrs,
                               children=children, span=(start, close_end),
                               inner_span=(tag_end, close_start))
                return [node]
            # No close tag by EOF: fold flat, keep what followed as siblings.
            node = JspNode(kind=kind, name=name, attributes=attrs,
                           span=(start, tag_end))
            return [node] + children
        return [JspNode(kind=kind, name=name, attributes=attrs,
                        span=(start, tag_end))]

    def _parse_nodes(self, until_close: str | None = None) -> list[JspNode]:
        src = self.source
        n = len(src)
        nodes: list[JspNode] = []
        run_start = self.pos
        self._close_span = None

        def flush_text(end: int) -> None:
            if end > run_start:
                nodes.append(JspNode(kind=NodeKind.TEMPLATE_TEXT,
                                     body=src[run_start:end], span=(run_start, end)))

        while self.pos < n:
            lt = src.find("<", self.pos)
            if lt < 0:
                self.pos = n
                break
            if src.startswith("<%--", lt):
                flush_text(lt)
                end = src.find("--%>", lt + 4)
                if end < 0:
                    raise self._unterminated(lt, "JSP comment")
                self.pos = end + 4
                nodes.append(JspNode(kind=NodeKind.COMMENT,
                                     body=src[lt + 4:end], span=(lt, self.pos)))
                run_start = self.pos
            elif src.startswith("<%@", lt):
                flush_text(lt)
                nodes.append(self._parse_directive(lt))
                run_start = self.pos
            elif src.startswith("<%=", lt):
                flush_text(lt)
                nodes.append(self._parse_delimited(lt, 3, "%>",
                                                   NodeKind.EXPRESSION, "expression"))
                run_start = self.pos
            elif src.startswith("<%!", lt):
                flush_text(lt)
                nodes.append(self._parse_delimited(lt, 3, "%>",
                                                   NodeKind.DECLARATION, "declaration"))
                run_start = self.pos
            elif src.startswith("<%", lt):
                flush_text(lt)
                nodes.append(self._parse_delimited(lt, 2, "%>",
                                                   NodeKind.SCRIPTLET, "scriptlet"))
                run_start = self.pos
            elif src.startswith("</", lt):
                m = _NAME_RE.match(src, lt + 2)
                if not m:
                    self.pos = lt + 1
                    continue
                gt = src.find(">", m.end())
                if gt < 0:
                    self.pos = lt + 1
                    continue
                name = m.group(0)
                if until_close is not None and name == until_close:
                    flush_text(lt)
                    self.pos = gt + 1
                    self._close_span = (lt, gt + 1)
                    return nodes
                flush_text(lt)
                nodes.append(JspNode(kind=_classify_element(name), name="/" + name,
                                     span=(lt, gt + 1)))
                self.pos = gt + 1
                run_start = self.pos
            elif lt + 1 < n and _NAME_RE.match(src, lt + 1):
                produced = self._parse_element(lt)
                if produced is None:
                    self.pos = lt + 1
                    continue
                flush_text(lt)
                nodes.extend(produced)
                run_start = self.pos
            else:
                # "<" that opens nothing: part of the template text.
                self.pos = lt + 1

        flush_text(n)
        self._close_span = None
        return nodes


def parse_jsp(source: str, page_path: str) -> JspDocument:
    """Parse one JSP page into its tag-level document.

    Raises :class:`UnterminatedScriptlet`, :class:`MalformedAttribute` or
    :class:`DuplicateAttribute` on inputs that cannot be tokenized; unbalanced
    plain HTML is not an error.
    """
    if not page_path:
        raise ValueError("page_path must be non-empty")
    page_path = normalize_page_path(page_path)
    nodes = _Parser(source, page_path)._parse_nodes()
    return JspDocument(page_path=page_path, nodes=nodes, source=source)


def parse_jsp_file(path, page_path: str, encoding: str = "utf-8") -> JspDocument:
    """Read a ``.jsp``/``.jspf`` file and parse it; encoding is overridable."""
    with open(path, "r", encoding=encoding) as fh:
        return parse_jsp(fh.read(), page_path)


def iter_nodes(nodes: list[JspNode]) -> Iterator[JspNode]:
    """Depth-first, document-order traversal."""
    for node in nodes:
        yield node
        if node.children:
            yield from iter_nodes(node.children)


def elements_of(doc: JspDocument, kinds: set[NodeKind]) -> list[JspNode]:
    """All nodes of the given kinds, depth-first in document order."""
    return [n for n in iter_nodes(doc.nodes) if n.kind in kinds]
