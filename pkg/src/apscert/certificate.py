"""Certificate files: JSON (checkable), indented tree and Graphviz DOT."""

from __future__ import annotations

import hashlib
import json
from typing import Any, Union

from .core import GROUND, Atom, CheckReport, Polarity, Proof, SignedSystem, System, check_proof
from .syntax import canonical_text

NODE_KEYS = frozenset({"polarity", "predicate", "word", "rule", "binding", "children", "marker"})


class CertificateFormatError(ValueError):
    pass


def system_hash(s: Union[System, SignedSystem]) -> str:
    return hashlib.sha256(canonical_text(s).encode()).hexdigest()


def proof_to_json(pf: Proof) -> dict[str, Any]:
    return {
        "polarity": pf.polarity.value,
        "predicate": pf.atom.predicate,
        "word": list(pf.atom.word),
        "rule": pf.rule,
        "binding": [] if pf.binding is GROUND or pf.binding is None else list(pf.binding),
        "children": [proof_to_json(c) for c in pf.children],
        "marker": "expanded" if pf.expanded else "unexpanded",
    }


def dumps(pf: Proof, s: Union[System, SignedSystem]) -> str:
    doc = {"system_hash": system_hash(s), "root": proof_to_json(pf)}
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def _strs(value: Any, what: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise CertificateFormatError(f"{what} must be a list of strings")
    return tuple(value)


def proof_from_json(node: Any, s: Union[System, SignedSystem]) -> Proof:
    """Rebuild a proof; the ground binding is recognised from the rule it names."""
    if not isinstance(node, dict) or set(node) != NODE_KEYS:
        raise CertificateFormatError(f"proof node must have exactly the keys {sorted(NODE_KEYS)}")
    try:
        polarity = Polarity(node["polarity"])
    except ValueError:
        raise CertificateFormatError(f"unknown polarity {node['polarity']!r}") from None
    if not isinstance(node["predicate"], str):
        raise CertificateFormatError("predicate must be a string")
    word = _strs(node["word"], "word")
    binding = _strs(node["binding"], "binding")
    rule_id = node["rule"]
    if rule_id is not None and not isinstance(rule_id, str):
        raise CertificateFormatError("rule must be a string or null")
    if node["marker"] not in ("expanded", "unexpanded"):
        raise CertificateFormatError(f"unknown marker {node['marker']!r}")
    expanded = node["marker"] == "expanded"
    if not isinstance(node["children"], list):
        raise CertificateFormatError("children must be a list")
    kids = tuple(proof_from_json(c, s) for c in node["children"])

    side = s.side(polarity) if isinstance(s, SignedSystem) else s
    rule = side.by_id.get(rule_id) if rule_id is not None else None
    if not expanded:
        b = None if not binding else binding
    elif rule is not None and rule.is_ground and not binding:
        b = GROUND
    else:
        b = binding
    return Proof(Atom(node["predicate"], word), rule_id, b, kids, polarity, expanded)


def loads(text: str, s: Union[System, SignedSystem]) -> tuple[str, Proof]:
    doc = json.loads(text)
    if not isinstance(doc, dict) or set(doc) != {"system_hash", "root"}:
        raise CertificateFormatError("certificate must have exactly the keys 'system_hash' and 'root'")
    if not isinstance(doc["system_hash"], str):
        raise CertificateFormatError("system_hash must be a string")
    return doc["system_hash"], proof_from_json(doc["root"], s)


def verify_document(text: str, candidates: dict[str, tuple[Union[System, SignedSystem], bool]]) -> CheckReport:
    """Check a JSON certificate against the candidate system its hash names.

    ``candidates`` maps a system hash to (system, unexpanded leaves allowed).
    Raises json.JSONDecodeError on text that is not JSON at all.
    """
    doc = json.loads(text)
    digest = doc.get("system_hash") if isinstance(doc, dict) else None
    if digest not in candidates:
        return CheckReport(False, None, "system hash matches none of the systems derived from the rule file")
    system, prefix_ok = candidates[digest]
    try:
        _, pf = loads(text, system)
    except CertificateFormatError as e:
        return CheckReport(False, None, f"malformed certificate: {e}")
    return check_proof(system, pf, allow_unexpanded=prefix_ok)


def format_tree(pf: Proof, loops: tuple[tuple[int, ...], ...] = ()) -> str:
    marks = set(loops)
    lines = []
    for path, node in pf.walk():
        pad = "  " * len(path)
        if not node.expanded:
            note = "  ..."
        else:
            note = f"  [{node.rule}]"
        if path in marks:
            note += "  (repeats an ancestor)"
        lines.append(f"{pad}{node.sequent}{note}")
    return "\n".join(lines) + "\n"


def format_dot(pf: Proof) -> str:
    lines = ["digraph proof {", "  node [shape=box, fontname=monospace];"]
    ids: dict = {}
    for path, node in pf.walk():
        ids[path] = f"n{len(ids)}"
        label = node.sequent if node.expanded else f"{node.sequent}\\n..."
        if node.expanded:
            label += f"\\n{node.rule}"
        style = "" if node.expanded else ", style=dashed"
        lines.append(f'  {ids[path]} [label="{label}"{style}];')
    for path, node in pf.walk():
        for i in range(len(node.children)):
            lines.append(f"  {ids[path]} -> {ids[path + (i,)]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
