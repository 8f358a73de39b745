"""Translate parsed JSP pages into servlet-shaped code units.

Follows the classic container translation rules: scriptlets and expressions
become code in the request-serving method, declarations become class members,
bean actions become instantiations and accessor calls, and everything else is
written to the response verbatim. The resulting :class:`ServletUnit` is what
the code model is discovered from; rendering it to Java-looking source is a
side product for inspection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

from .diagnostics import Diagnostic
from .jsp_parser import JspDocument, JspNode, NodeKind, Span


class StatementKind(str, Enum):
    INLINE_CODE = "InlineCode"
    TEMPLATE_EMIT = "TemplateEmit"
    BEAN_INSTANTIATION = "BeanInstantiation"
    PROPERTY_GET = "PropertyGet"
    PROPERTY_SET = "PropertySet"
    TAG_HANDLER_CALL = "TagHandlerCall"
    EXPRESSION_EMIT = "ExpressionEmit"


@dataclass
class CodeStatement:
    kind: StatementKind
    text: str
    metadata: dict[str, Any] | None = None
    origin_span: Span = (0, 0)


@dataclass
class TranslationOptions:
    # Tag name (e.g. "c:redirect") -> handler class qualified name. Custom
    # actions not listed here are emitted verbatim like any other tag.
    known_tag_handlers: Mapping[str, str] = field(default_factory=dict)


@dataclass
class ServletUnit:
    """Servlet-shaped translation of one page."""

    class_name: str
    source_page: str
    declarations: list[CodeStatement] = field(default_factory=list)
    init_body: list[CodeStatement] = field(default_factory=list)
    service_body: list[CodeStatement] = field(default_factory=list)
    destroy_body: list[CodeStatement] = field(default_factory=list)
    imports: list[str] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)


SERVICE_METHOD = "_jspService"
INIT_METHOD = "_jspInit"
DESTROY_METHOD = "_jspDestroy"

_HEX_DIGITS = frozenset("0123456789abcdef")


def mangle_class_name(page_path: str) -> str:
    """Deterministic, injective identifier for a page path.

    "/" maps to "_", alphanumerics map to themselves and anything else to a
    ``_XXXX`` four-digit hex escape ("." -> "_002e"). When four literal hex
    digits directly follow a "/" the first one is escaped too, so a path can
    never imitate an escape sequence; this keeps the mapping collision-free
    (e.g. "/a.jsp" vs "/a/002ejsp").
    """
    out = ["jsp"]
    chars = page_path
    for i, ch in enumerate(chars):
        if ch == "/":
            out.append("_")
            continue
        fakes_escape = (i > 0 and chars[i - 1] == "/"
                        and all(c in _HEX_DIGITS for c in chars[i:i + 4])
                        and len(chars) >= i + 4)
        if ch.isascii() and ch.isalnum() and not fakes_escape:
            out.append(ch)
        else:
            code = ord(ch)
            if code > 0xFFFF:  # astral chars: escape the surrogate pair
                code -= 0x10000
                out.append(f"_{0xD800 + (code >> 10):04x}")
                out.append(f"_{0xDC00 + (code & 0x3FF):04x}")
            else:
                out.append(f"_{code:04x}")
    return "".join(out)


def _capitalized(prop: str) -> str:
    return prop[:1].upper() + prop[1:]


class _Translator:
    def __init__(self, doc: JspDocument, options: TranslationOptions, unit: ServletUnit):
        self.doc = doc
        self.options = options
        self.unit = unit
        self._pending: list[tuple[str, Span]] = []

    # -- emit buffering -----------------------------------------------------

    def _emit(self, text: str, span: Span) -> None:
        if text:
            self._pending.append((text, span))

    def flush(self) -> None:
        if not self._pending:
            return
        text = "".join(t for t, _ in self._pending)
        span = (self._pending[0][1][0], self._pending[-1][1][1])
        self.unit.service_body.append(
            CodeStatement(StatementKind.TEMPLATE_EMIT, text, origin_span=span))
        self._pending.clear()

    def _statement(self, stmt: CodeStatement) -> None:
        self.flush()
        self.unit.service_body.append(stmt)

    def _emit_element(self, node: JspNode) -> None:
        src = self.doc.source
        if node.inner_span is None:
            self._emit(self.doc.text_of(node), node.span)
            return
        start, end = node.span
        inner_start, inner_end = node.inner_span
        self._emit(src[start:inner_start], (start, inner_start))
        self.walk(node.children)
        self._emit(src[inner_end:end], (inner_end, end))

    def _diag(self, message: str, node: JspNode) -> None:
        self.unit.diagnostics.append(Diagnostic(
            "translation", message,
            f"{self.doc.page_path}@{node.span[0]}"))

    # -- node dispatch --------------------------------------------------------

    def walk(self, nodes: list[JspNode]) -> None:
        for node in nodes:
            kind = node.kind
            if kind is NodeKind.COMMENT:
                continue  # never reaches the client
            if kind is NodeKind.TEMPLATE_TEXT:
                self._emit(node.body or "", node.span)
            elif kind is NodeKind.SCRIPTLET:
                self._statement(CodeStatement(
                    StatementKind.INLINE_CODE, node.body or "", origin_span=node.span))
            elif kind is NodeKind.EXPRESSION:
                self._statement(CodeStatement(
                    StatementKind.EXPRESSION_EMIT, node.body or "", origin_span=node.span))
            elif kind is NodeKind.DECLARATION:
                self.unit.declarations.append(CodeStatement(
                    StatementKind.INLINE_CODE, (node.body or "").strip(),
                    origin_span=node.span))
            elif kind is NodeKind.DIRECTIVE:
                self._directive(node)
            elif kind is NodeKind.STANDARD_ACTION:
                self._standard_action(node)
            elif kind is NodeKind.CUSTOM_ACTION:
                self._custom_action(node)
            else:  # HtmlElement: flat, emitted verbatim
                self._emit(self.doc.text_of(node), node.span)

    def _directive(self, node: JspNode) -> None:
        if node.name == "page":
            imports = node.attribute_value("import")
            if imports:
                for imp in imports.split(","):
                    imp = imp.strip()
                    if imp and imp not in self.unit.imports:
                        self.unit.imports.append(imp)
        self._emit_element(node)

    def _standard_action(self, node: JspNode) -> None:
        name = node.name
        if name == "jsp:useBean":
            bean_id = node.attribute_value("id")
            bean_class = node.attribute_value("class")
            if not bean_class:
                self._diag("jsp:useBean without class attribute", node)
                self._emit_element(node)
                return
            metadata = {"bean": bean_id or "", "class": bean_class}
            scope = node.attribute_value("scope")
            if scope:
                metadata["scope"] = scope
            self._statement(CodeStatement(
                StatementKind.BEAN_INSTANTIATION, self.doc.text_of(node),
                metadata=metadata, origin_span=node.span))
            self.walk(node.children)
        elif name in ("jsp:getProperty", "jsp:setProperty"):
            bean = node.attribute_value("name")
            prop = node.attribute_value("property")
            if not bean or not prop:
                self._diag(f"{name} missing name/property attribute", node)
                self._emit_element(node)
                return
            if name == "jsp:getProperty":
                metadata = {"bean": bean, "property": prop,
                            "method": "get" + _capitalized(prop)}
                stmt_kind = StatementKind.PROPERTY_GET
            else:
                metadata = {"bean": bean, "property": prop}
                if prop != "*":
                    metadata["method"] = "set" + _capitalized(prop)
                value = node.attribute_value("value")
                if value is not None:
                    metadata["value"] = value
                param = node.attribute_value("param")
                if param is not None:
                    metadata["param"] = param
                stmt_kind = StatementKind.PROPERTY_SET
            self._statement(CodeStatement(
                stmt_kind, self.doc.text_of(node), metadata=metadata,
                origin_span=node.span))
            self.walk(node.children)
        else:
            # jsp:include, jsp:forward, jsp:param, ... : emitted verbatim and
            # codified later by the dependency extraction pass.
            self._emit_element(node)

    def _custom_action(self, node: JspNode) -> None:
        handler = self.options.known_tag_handlers.get(node.name)
        if handler is None:
            self._emit_element(node)
            return
        methods = ["setAttribute"] * len(node.attributes) + ["doStartTag", "doEndTag"]
        self._statement(CodeStatement(
            StatementKind.TAG_HANDLER_CALL, self.doc.text_of(node),
            metadata={"tag": node.name, "handler": handler,
                      "methods": methods,
                      "attributes": [a.name for a in node.attributes]},
            origin_span=node.span))
        self.walk(node.children)


def translate_page(doc: JspDocument, options: TranslationOptions | None = None) -> ServletUnit:
    """Apply the translation rules to one parsed page, in document order."""
    unit = ServletUnit(class_name=mangle_class_name(doc.page_path),
                       source_page=doc.page_path)
    translator = _Translator(doc, options or TranslationOptions(), unit)
    translator.walk(doc.nodes)
    translator.flush()
    return unit


# -- source rendering ---------------------------------------------------------

_DEFAULT_IMPORTS = ("java.io.*", "javax.servlet.*", "javax.servlet.http.*")

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def escape_java_string(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _render_statement(stmt: CodeStatement, out: list[str], indent: str) -> None:
    md = stmt.metadata or {}
    if stmt.kind is StatementKind.TEMPLATE_EMIT:
        out.append(f'{indent}out.print("{escape_java_string(stmt.text)}");')
    elif stmt.kind is StatementKind.EXPRESSION_EMIT:
        out.append(f"{indent}out.print({stmt.text.strip()});")
    elif stmt.kind is StatementKind.INLINE_CODE:
        for line in stmt.text.strip("\n").splitlines() or [""]:
            out.append(indent + line.strip())
    elif stmt.kind is StatementKind.BEAN_INSTANTIATION:
        cls, bean = md.get("class", "Object"), md.get("bean", "bean")
        out.append(f"{indent}{cls} {bean} = new {cls}();")
    elif stmt.kind is StatementKind.PROPERTY_GET:
        out.append(f"{indent}out.print({md['bean']}.{md['method']}());")
    elif stmt.kind is StatementKind.PROPERTY_SET:
        if md.get("property") == "*":
            out.append(f"{indent}// jsp:setProperty property=\"*\" on {md['bean']}")
        elif "value" in md:
            value = md["value"]
            if value.startswith("<%=") and value.endswith("%>"):
                arg = value[3:-2].strip()
            else:
                arg = f'"{escape_java_string(value)}"'
            out.append(f"{indent}{md['bean']}.{md['method']}({arg});")
        else:
            param = md.get("param") or md.get("property")
            out.append(
                f"{indent}{md['bean']}.{md['method']}(request.getParameter(\"{param}\"));")
    elif stmt.kind is StatementKind.TAG_HANDLER_CALL:
        out.append(f"{indent}// custom tag {md.get('tag')} -> {md.get('handler')} "
                   f"({'/'.join(md.get('methods', []))})")


def render_servlet_source(unit: ServletUnit) -> str:
    """Deterministic servlet source text for a translated page."""
    lines: list[str] = []
    for imp in _DEFAULT_IMPORTS:
        lines.append(f"import {imp};")
    for imp in unit.imports:
        if imp not in _DEFAULT_IMPORTS:
            lines.append(f"import {imp};")
    lines.append("")
    lines.append(f"public class {unit.class_name} extends HttpServlet {{")
    if unit.declarations:
        lines.append("")
        for decl in unit.declarations:
            for line in decl.text.strip("\n").splitlines() or [""]:
                lines.append("    " + line.strip())
    lines.append("")
    lines.append(f"    public void {INIT_METHOD}() {{")
    for stmt in unit.init_body:
        _render_statement(stmt, lines, "        ")
    lines.append("    }")
    lines.append("")
    lines.append(f"    public void {SERVICE_METHOD}(HttpServletRequest request, "
                 "HttpServletResponse response)")
    lines.append("            throws ServletException, IOException {")
    lines.append('        response.setContentType("text/html");')
    lines.append("        ServletOutputStream out = response.getOutputStream();")
    for stmt in unit.service_body:
        _render_statement(stmt, lines, "        ")
    lines.append("        out.close();")
    lines.append("    }")
    lines.append("")
    lines.append(f"    public void {DESTROY_METHOD}() {{")
    for stmt in unit.destroy_body:
        _render_statement(stmt, lines, "        ")
    lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_servlet_sources(units: list[ServletUnit], out_dir) -> list[str]:
    """Render every unit to ``<class_name>.java`` under ``out_dir``."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for unit in units:
        path = out / f"{unit.class_name}.java"
        path.write_text(render_servlet_source(unit), encoding="utf-8")
        written.append(str(path))
    return written
