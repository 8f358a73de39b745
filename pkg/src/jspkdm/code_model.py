"""KDM-subset code model: discovery, mutation and serialization.

The model keeps the few element kinds the recovery needs (class, method,
block, statement-level elements, class-to-class relationships). Discovery
walks translated servlet units; mutation injects call relationships found by
the dependency analysis; serialization writes a documented JSON form (with a
lossless round trip) and a simplified XMI dialect (see docs/MODEL_FORMATS.md).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

from .jsp_parser import Span, normalize_page_path
from .servlet_translator import (
    DESTROY_METHOD,
    INIT_METHOD,
    SERVICE_METHOD,
    CodeStatement,
    ServletUnit,
)


class DuplicateClassName(ValueError):
    """Two units mangled to the same class name; signals a pipeline bug."""


@dataclass(eq=False)
class CodeRelationship:
    from_class: "ClassUnit"
    to_class: "ClassUnit"
    kind: str
    label: str = "newCall"


@dataclass(eq=False)
class CodeElement:
    name: str
    kind: str
    origin_span: Span | None = None
    relationships: list[CodeRelationship] = field(default_factory=list)


@dataclass(eq=False)
class BlockUnit:
    elements: list[CodeElement] = field(default_factory=list)


@dataclass(eq=False)
class MethodUnit:
    name: str
    block: BlockUnit = field(default_factory=BlockUnit)


@dataclass(eq=False)
class ClassUnit:
    name: str
    source_page: str | None = None
    code_elements: list[MethodUnit] = field(default_factory=list)

    def method(self, name: str) -> MethodUnit | None:
        for m in self.code_elements:
            if m.name == name:
                return m
        return None


@dataclass(eq=False)
class PackageUnit:
    name: str
    class_units: list[ClassUnit] = field(default_factory=list)


@dataclass
class MutationReport:
    status: str  # "added" | "duplicate" | "error"
    reason: str = ""


@dataclass(eq=False)
class KdmModel:
    name: str
    packages: list[PackageUnit] = field(default_factory=list)
    class_units: list[ClassUnit] = field(default_factory=list)
    relationships: list[CodeRelationship] = field(default_factory=list)

    def to_dict(self) -> dict:
        rel_index = {id(r): i for i, r in enumerate(self.relationships)}
        return {
            "name": self.name,
            "packages": [
                {"name": p.name, "classes": [c.name for c in p.class_units]}
                for p in self.packages
            ],
            "class_units": [
                {
                    "name": c.name,
                    "source_page": c.source_page,
                    "methods": [
                        {
                            "name": m.name,
                            "elements": [
                                {
                                    "name": e.name,
                                    "kind": e.kind,
                                    "origin_span": list(e.origin_span)
                                    if e.origin_span is not None else None,
                                    "relationships": [rel_index[id(r)]
                                                      for r in e.relationships],
                                }
                                for e in m.block.elements
                            ],
                        }
                        for m in c.code_elements
                    ],
                }
                for c in self.class_units
            ],
            "relationships": [
                {"from": r.from_class.name, "to": r.to_class.name,
                 "kind": r.kind, "label": r.label}
                for r in self.relationships
            ],
        }


def _block_from_statements(statements: list[CodeStatement]) -> BlockUnit:
    return BlockUnit(elements=[
        CodeElement(name=s.kind.value, kind=s.kind.value, origin_span=s.origin_span)
        for s in statements
    ])


def discover_model(units: list[ServletUnit], name: str = "webapp") -> KdmModel:
    """Build the code model from translated units: one class per page with
    the three life-cycle methods, statements mirrored at element granularity."""
    classes: list[ClassUnit] = []
    seen: set[str] = set()
    for unit in units:
        if unit.class_name in seen:
            raise DuplicateClassName(unit.class_name)
        seen.add(unit.class_name)
        classes.append(ClassUnit(
            name=unit.class_name,
            source_page=unit.source_page,
            code_elements=[
                MethodUnit(INIT_METHOD, _block_from_statements(unit.init_body)),
                MethodUnit(SERVICE_METHOD, _block_from_statements(unit.service_body)),
                MethodUnit(DESTROY_METHOD, _block_from_statements(unit.destroy_body)),
            ],
        ))
    package = PackageUnit(name="jsp", class_units=list(classes))
    return KdmModel(name=name, packages=[package], class_units=classes)


def find_class_unit(model: KdmModel, source_page: str) -> ClassUnit | None:
    """Sequential search by source page, tolerant of missing "/" prefixes."""
    wanted = normalize_page_path(source_page)
    for cu in model.class_units:
        if cu.source_page == wanted:
            return cu
    return None


def add_method_call(model: KdmModel, caller: ClassUnit, target: ClassUnit,
                    kind: str) -> MutationReport:
    """Record that ``caller``'s service method reaches ``target``.

    Appends a "newCall" element to the caller's service block carrying a new
    relationship, and registers the relationship model-wide. A repeated
    (from, to, kind) triple is reported as a duplicate and changes nothing.
    """
    members = {id(c) for c in model.class_units}
    if id(caller) not in members or id(target) not in members:
        raise ValueError("caller and target must belong to the model")
    for rel in model.relationships:
        if (rel.from_class is caller and rel.to_class is target
                and rel.kind == kind):
            return MutationReport("duplicate")
    service = caller.method(SERVICE_METHOD)
    if service is None:
        return MutationReport("error", "MissingServiceMethod")
    rel = CodeRelationship(from_class=caller, to_class=target, kind=kind)
    service.block.elements.append(
        CodeElement(name="newCall", kind="Call", relationships=[rel]))
    model.relationships.append(rel)
    return MutationReport("added")


# -- serialization -------------------------------------------------------------

XMI_NS = "http://www.omg.org/XMI"
KDM_NS = "urn:jspkdm:code"


def _to_xmi(model: KdmModel) -> str:
    rel_ids = {id(r): f"rel.{i}" for i, r in enumerate(model.relationships)}
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    lines.append(
        f'<kdm:Segment xmlns:kdm={quoteattr(KDM_NS)} xmlns:xmi={quoteattr(XMI_NS)} '
        f'xmi:version="2.1" name={quoteattr(model.name)}>')
    lines.append(f'  <codeModel name={quoteattr(model.name)}>')
    for package in model.packages:
        lines.append(f'    <package name={quoteattr(package.name)}>')
        for cu in package.class_units:
            attrs = f'xmi:id={quoteattr(cu.name)} name={quoteattr(cu.name)}'
            if cu.source_page is not None:
                attrs += f' sourcePage={quoteattr(cu.source_page)}'
            lines.append(f'      <classUnit {attrs}>')
            for method in cu.code_elements:
                mid = f"{cu.name}.{method.name}"
                lines.append(f'        <methodUnit xmi:id={quoteattr(mid)} '
                             f'name={quoteattr(method.name)}>')
                lines.append(f'          <blockUnit xmi:id={quoteattr(mid + ".block")}>')
                for el in method.block.elements:
                    e_attrs = f'name={quoteattr(el.name)} kind={quoteattr(el.kind)}'
                    if el.origin_span is not None:
                        e_attrs += (f' spanStart="{el.origin_span[0]}"'
                                    f' spanEnd="{el.origin_span[1]}"')
                    if el.relationships:
                        refs = " ".join(rel_ids[id(r)] for r in el.relationships)
                        e_attrs += f' relations={quoteattr(refs)}'
                    lines.append(f'            <codeElement {e_attrs}/>')
                lines.append('          </blockUnit>')
                lines.append('        </methodUnit>')
            lines.append('      </classUnit>')
        lines.append('    </package>')
    # Classes outside any package (possible on hand-built models).
    packaged = {id(c) for p in model.packages for c in p.class_units}
    for cu in model.class_units:
        if id(cu) not in packaged:
            lines.append(f'    <classUnit xmi:id={quoteattr(cu.name)} '
                         f'name={quoteattr(cu.name)}/>')
    for rel in model.relationships:
        lines.append(
            f'    <codeRelationship xmi:id={quoteattr(rel_ids[id(rel)])} '
            f'from={quoteattr(rel.from_class.name)} to={quoteattr(rel.to_class.name)} '
            f'kind={quoteattr(rel.kind)} label={quoteattr(rel.label)}/>')
    lines.append('  </codeModel>')
    lines.append('</kdm:Segment>')
    return "\n".join(lines) + "\n"


def serialize_model(model: KdmModel, format: str = "json") -> bytes:
    """Stable bytes for a model; insertion order everywhere."""
    if format == "json":
        return (json.dumps(model.to_dict(), indent=2) + "\n").encode("utf-8")
    if format == "xmi":
        return _to_xmi(model).encode("utf-8")
    raise ValueError(f"unknown serialization format: {format!r}")


def deserialize_model(data: bytes, format: str = "json") -> KdmModel:
    """Rebuild a model from its JSON serialization."""
    if format != "json":
        raise ValueError("only the json format deserializes")
    doc = json.loads(data.decode("utf-8"))
    classes: list[ClassUnit] = []
    by_name: dict[str, ClassUnit] = {}
    pending: list[tuple[CodeElement, list[int]]] = []
    for cdoc in doc["class_units"]:
        methods = []
        for mdoc in cdoc["methods"]:
            elements = []
            for edoc in mdoc["elements"]:
                element = CodeElement(
                    name=edoc["name"], kind=edoc["kind"],
                    origin_span=tuple(edoc["origin_span"])
                    if edoc["origin_span"] is not None else None)
                pending.append((element, edoc["relationships"]))
                elements.append(element)
            methods.append(MethodUnit(mdoc["name"], BlockUnit(elements)))
        cu = ClassUnit(cdoc["name"], cdoc["source_page"], methods)
        classes.append(cu)
        by_name[cu.name] = cu
    relationships = [
        CodeRelationship(by_name[rdoc["from"]], by_name[rdoc["to"]],
                         rdoc["kind"], rdoc["label"])
        for rdoc in doc["relationships"]
    ]
    for element, indices in pending:
        element.relationships = [relationships[i] for i in indices]
    packages = [
        PackageUnit(pdoc["name"], [by_name[n] for n in pdoc["classes"]])
        for pdoc in doc["packages"]
    ]
    return KdmModel(name=doc["name"], packages=packages,
                    class_units=classes, relationships=relationships)
