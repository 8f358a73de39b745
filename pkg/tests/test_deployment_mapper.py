"""Mapper tests: descriptor parsing, annotation scanning, URL resolution."""

from __future__ import annotations

import random
import xml.etree.ElementTree as ET

import pytest

from jspkdm import (
    ResolvedKind,
    ServletDecl,
    UrlRef,
    XmlSyntaxError,
    build_lookup_table,
    parse_web_xml,
    resolve_url,
    scan_webservlet_annotations,
)
from jspkdm.deployment_mapper import (
    SOURCE_ANNOTATION,
    SOURCE_WEB_XML,
    classify_pattern,
    java_qualified_class_name,
    normalize_url_path,
)
from .oracles import precedence_oracle

WEB_XML_POWERS = b"""<?xml version="1.0" encoding="UTF-8"?>
<web-app xmlns="http://java.sun.com/xml/ns/javaee">
  <display-name>demo</display-name>
  <servlet>
    <servlet-name>pow</servlet-name>
    <jsp-file>/powers.jsp</jsp-file>
  </servlet>
  <servlet-mapping>
    <servlet-name>pow</servlet-name>
    <url-pattern>/powers</url-pattern>
  </servlet-mapping>
</web-app>
"""


def make_ref(url: str, dynamic: bool = False) -> UrlRef:
    return UrlRef(source_page="/index.jsp", tag_kind="a-href",
                  attribute="href", raw_url=url, dynamic=dynamic)


def table_of(patterns: list[tuple[str, str | None]], context_path: str = ""):
    """Each pattern gets its own servlet: jsp-file when the target is a path,
    servlet-class otherwise."""
    decls = []
    mappings = []
    for i, (pattern, target) in enumerate(patterns):
        name = f"s{i}"
        if target is None or target.startswith("/"):
            decls.append(ServletDecl(name, jsp_file=target or f"/t{i}.jsp"))
        else:
            decls.append(ServletDecl(name, servlet_class=target))
        mappings.append((pattern, name))
    return build_lookup_table(decls, mappings, context_path)


class TestParseWebXml:
    def test_powers_declaration(self):
        decls, mappings, diagnostics = parse_web_xml(WEB_XML_POWERS)
        assert len(decls) == 1
        assert decls[0].servlet_name == "pow"
        assert decls[0].jsp_file == "/powers.jsp"
        assert decls[0].servlet_class is None
        assert decls[0].source == SOURCE_WEB_XML
        assert mappings == [("/powers", "pow")]
        assert diagnostics == []

    def test_empty_web_app(self):
        decls, mappings, _ = parse_web_xml(b"<web-app/>")
        assert decls == [] and mappings == []

    def test_two_url_patterns_one_servlet(self):
        content = b"""<web-app>
          <servlet><servlet-name>s</servlet-name>
            <servlet-class>a.B</servlet-class></servlet>
          <servlet-mapping><servlet-name>s</servlet-name>
            <url-pattern>/a</url-pattern><url-pattern>/b</url-pattern>
          </servlet-mapping></web-app>"""
        decls, mappings, _ = parse_web_xml(content)
        # oracle: independent XML walk counting url-pattern elements
        root = ET.fromstring(content)
        oracle_count = sum(1 for el in root.iter() if el.tag == "url-pattern")
        assert oracle_count == 2
        assert len(mappings) == oracle_count
        assert {name for _, name in mappings} == {"s"}

    def test_missing_servlet_name_skipped_with_diagnostic(self):
        content = b"""<web-app><servlet>
          <servlet-class>a.B</servlet-class></servlet></web-app>"""
        decls, _, diagnostics = parse_web_xml(content)
        assert decls == []
        assert len(diagnostics) == 1

    def test_malformed_xml_raises(self):
        with pytest.raises(XmlSyntaxError):
            parse_web_xml(b"<web-app><servlet>")

    def test_servlet_with_both_targets_skipped(self):
        content = b"""<web-app><servlet>
          <servlet-name>s</servlet-name>
          <servlet-class>a.B</servlet-class>
          <jsp-file>/a.jsp</jsp-file></servlet></web-app>"""
        decls, _, diagnostics = parse_web_xml(content)
        assert decls == []
        assert len(diagnostics) == 1

    def test_namespaced_elements_matched_by_local_name(self):
        decls, mappings, _ = parse_web_xml(WEB_XML_POWERS)
        assert decls and mappings  # the fixture uses a default namespace


class TestAnnotationScan:
    def test_single_value_form(self):
        entries = scan_webservlet_annotations('@WebServlet("/hello")\nclass C {}',
                                              "a.b.C")
        assert len(entries) == 1
        pattern, decl = entries[0]
        assert pattern == "/hello"
        assert decl.servlet_class == "a.b.C"
        assert decl.source == SOURCE_ANNOTATION

    def test_no_annotation(self):
        assert scan_webservlet_annotations("class C {}", "a.b.C") == []

    def test_url_patterns_list(self):
        source = '@WebServlet(urlPatterns = {"/a", "/b"}) class C {}'
        entries = scan_webservlet_annotations(source, "a.b.C")
        assert [p for p, _ in entries] == ["/a", "/b"]
        # token-scan oracle: string literals inside the annotation parens
        import re
        inner = re.search(r"@WebServlet\(([^)]*)\)", source).group(1)
        assert re.findall(r'"([^"]*)"', inner) == ["/a", "/b"]
        assert entries[0][1] is entries[1][1]  # one decl shared

    def test_value_list_form(self):
        entries = scan_webservlet_annotations(
            '@WebServlet(value = {"/x"}) class C {}', "p.C")
        assert [p for p, _ in entries] == ["/x"]

    def test_name_attribute_used_as_servlet_name(self):
        entries = scan_webservlet_annotations(
            '@WebServlet(name = "nice", urlPatterns = {"/n"}) class C {}', "p.C")
        assert entries[0][1].servlet_name == "nice"

    def test_commented_out_annotation_ignored(self):
        source = '// @WebServlet("/dead")\n/* @WebServlet("/gone") */\nclass C {}'
        assert scan_webservlet_annotations(source, "p.C") == []

    def test_annotation_without_patterns_is_a_diagnostic(self):
        diagnostics = []
        entries = scan_webservlet_annotations(
            '@WebServlet(name = "x") class C {}', "p.C", diagnostics)
        assert entries == []
        assert len(diagnostics) == 1

    def test_qualified_name_helper(self):
        source = "package com.example;\npublic final class Thing {}"
        assert java_qualified_class_name(source, "Fallback") == "com.example.Thing"
        assert java_qualified_class_name("int x;", "Fallback") == "Fallback"


class TestBuildLookupTable:
    def test_web_xml_wins_over_annotation(self):
        decls = [ServletDecl("ann", servlet_class="p.B", source=SOURCE_ANNOTATION),
                 ServletDecl("xml", jsp_file="/a.jsp", source=SOURCE_WEB_XML)]
        diagnostics = []
        table = build_lookup_table(decls, [("/x", "ann"), ("/x", "xml")],
                                   diagnostics=diagnostics)
        assert table.entries == [("/x", "xml")]
        assert any("shadow" in d.message for d in diagnostics)

    def test_empty_inputs(self):
        table = build_lookup_table([], [])
        assert table.entries == [] and table.decls == []

    def test_dangling_mapping_dropped(self):
        diagnostics = []
        table = build_lookup_table([], [("/x", "ghost")], diagnostics=diagnostics)
        assert table.entries == []
        assert any("undeclared" in d.message for d in diagnostics)

    def test_same_source_collision_first_wins(self):
        decls = [ServletDecl("one", jsp_file="/1.jsp"),
                 ServletDecl("two", jsp_file="/2.jsp")]
        diagnostics = []
        table = build_lookup_table(decls, [("/x", "one"), ("/x", "two")],
                                   diagnostics=diagnostics)
        assert table.entries == [("/x", "one")]
        assert len(diagnostics) == 1

    def test_invalid_pattern_dropped(self):
        decls = [ServletDecl("s", jsp_file="/a.jsp")]
        diagnostics = []
        table = build_lookup_table(decls, [("x-no-slash", "s"), ("/ok", "s"),
                                           ("*.tar.gz", "s")],
                                   diagnostics=diagnostics)
        assert table.entries == [("/ok", "s")]
        assert len(diagnostics) == 2

    def test_pattern_shapes(self):
        assert classify_pattern("/x") == "exact"
        assert classify_pattern("/x/*") == "prefix"
        assert classify_pattern("/*") == "prefix"
        assert classify_pattern("*.jsp") == "extension"
        assert classify_pattern("/") == "default"
        assert classify_pattern("x") is None
        assert classify_pattern("/a/*/b") is None


class TestResolveUrl:
    def test_external_scheme(self):
        table = table_of([])
        target = resolve_url(table, make_ref("https://www.uqam.ca"), "/index.jsp")
        assert target.kind is ResolvedKind.EXTERNAL

    def test_exact_match_to_jsp_file(self):
        table = table_of([("/powers", "/powers.jsp")])
        target = resolve_url(table, make_ref("/powers"), "/index.jsp")
        assert target.kind is ResolvedKind.INTERNAL_PAGE
        assert target.page_path == "/powers.jsp"

    def test_servlet_class_target(self):
        table = table_of([("/do", "com.example.DoServlet")])
        target = resolve_url(table, make_ref("/do"), "/index.jsp")
        assert target.kind is ResolvedKind.INTERNAL_SERVLET_CLASS
        assert target.class_name == "com.example.DoServlet"

    def test_precedence_examples(self):
        table = table_of([("/a/*", "/x.jsp"), ("/a/b/*", "/y.jsp"),
                          ("*.jsp", "/z.jsp")])
        longest = resolve_url(table, make_ref("/a/b/c"), "/index.jsp")
        assert longest.page_path == "/y.jsp"
        extension = resolve_url(table, make_ref("/q.jsp"), "/index.jsp")
        assert extension.page_path == "/z.jsp"

    def test_dynamic_is_unresolved(self):
        table = table_of([("/x", "/x.jsp")])
        target = resolve_url(table, make_ref("${go}", dynamic=True), "/index.jsp")
        assert target.kind is ResolvedKind.UNRESOLVED
        assert target.reason == "dynamic"

    def test_relative_resolution(self):
        table = table_of([])
        target = resolve_url(table, make_ref("x.jsp"), "/dir/a.jsp",
                             known_pages={"/dir/x.jsp"})
        assert target.kind is ResolvedKind.INTERNAL_PAGE
        assert target.page_path == "/dir/x.jsp"

    def test_dotdot_clamped_at_root(self):
        table = table_of([])
        diagnostics = []
        target = resolve_url(table, make_ref("../../x.jsp"), "/a.jsp",
                             known_pages={"/x.jsp"}, diagnostics=diagnostics)
        assert target.page_path == "/x.jsp"
        assert any("clamped" in d.message for d in diagnostics)

    def test_trailing_dot_trimmed_with_diagnostic(self):
        table = table_of([])
        diagnostics = []
        target = resolve_url(table, make_ref("/myPage.jsp."), "/index.jsp",
                             known_pages={"/myPage.jsp"}, diagnostics=diagnostics)
        assert target.page_path == "/myPage.jsp"
        assert any("trailing dot" in d.message for d in diagnostics)

    def test_query_and_fragment_stripped(self):
        table = table_of([])
        target = resolve_url(table, make_ref("/p.jsp?id=3#top"), "/index.jsp",
                             known_pages={"/p.jsp"})
        assert target.page_path == "/p.jsp"

    def test_context_path_stripped(self):
        table = table_of([("/powers", "/powers.jsp")], context_path="/app")
        target = resolve_url(table, make_ref("/app/powers"), "/index.jsp")
        assert target.page_path == "/powers.jsp"

    def test_unresolved_reason_no_mapping(self):
        table = table_of([])
        target = resolve_url(table, make_ref("/nowhere"), "/index.jsp")
        assert target.kind is ResolvedKind.UNRESOLVED
        assert target.reason == "no-mapping"

    def test_implicit_page_only_when_known(self):
        table = table_of([])
        hit = resolve_url(table, make_ref("/real.jsp"), "/i.jsp",
                          known_pages={"/real.jsp"})
        miss = resolve_url(table, make_ref("/fake.jsp"), "/i.jsp",
                           known_pages={"/real.jsp"})
        assert hit.kind is ResolvedKind.INTERNAL_PAGE
        assert miss.kind is ResolvedKind.UNRESOLVED


class TestNormalization:
    def test_examples(self):
        assert normalize_url_path("/a/./b//c") == ("/a/b/c", False, False)
        assert normalize_url_path("/a/../b") == ("/b", False, False)
        assert normalize_url_path("/../x") == ("/x", True, False)
        assert normalize_url_path("/p.jsp.") == ("/p.jsp", False, True)

    def test_idempotence_randomized(self):
        rng = random.Random(321)
        segments = ["a", "b.", "..", ".", "c.jsp", "", "x10", "y.."]
        for _ in range(250):
            raw = "/" + "/".join(rng.choice(segments)
                                 for _ in range(rng.randint(0, 6)))
            once, _, _ = normalize_url_path(raw)
            twice, clamped, trimmed = normalize_url_path(once)
            assert twice == once
            assert not clamped and not trimmed


def random_pattern(rng: random.Random) -> str:
    kind = rng.randrange(4)
    segs = lambda: "/".join(rng.choice(["a", "b", "c", "dd"])
                            for _ in range(rng.randint(1, 3)))
    if kind == 0:
        return "/" + segs()
    if kind == 1:
        return "/" + segs() + "/*" if rng.random() < 0.8 else "/*"
    if kind == 2:
        return "*." + rng.choice(["jsp", "html", "do"])
    return "/"


def random_url(rng: random.Random) -> str:
    parts = [rng.choice(["a", "b", "c", "dd", "q"]) for _ in range(rng.randint(1, 4))]
    url = "/" + "/".join(parts)
    if rng.random() < 0.5:
        url += rng.choice([".jsp", ".html", ".do", ""])
    return url


class TestPrecedenceAgainstOracle:
    def test_randomized_agreement(self):
        rng = random.Random(0xFACE)
        for _ in range(200):
            patterns = []
            seen = set()
            for _ in range(rng.randint(0, 8)):
                p = random_pattern(rng)
                if p not in seen:
                    seen.add(p)
                    patterns.append((p, f"/t{len(patterns)}.jsp"))
            table = table_of(patterns)
            url = random_url(rng)
            expected = precedence_oracle(table.entries, url)
            got = resolve_url(table, make_ref(url), "/index.jsp")
            if expected is None:
                assert got.kind is ResolvedKind.UNRESOLVED
            else:
                pattern, servlet_name = expected
                decl = table.decl_for(servlet_name)
                assert got.kind is ResolvedKind.INTERNAL_PAGE
                assert got.page_path == decl.jsp_file
