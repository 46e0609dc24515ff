"""Seeded generators of small DTDs and documents valid against them.

Element names are drawn from a pool that deliberately collides with the
mapper's own column names (id, pos, value, parent_id) and with each other
after case folding (Item, item), so the naming rules get exercised.
"""
from __future__ import annotations

import random
import xml.etree.ElementTree as ET

from complex_etl.dtd import AttDef, DtdAst, Empty, Group, Multiplicity, NameRef, Pcdata

NAME_POOL = ["a", "b", "Item", "item", "id", "pos", "value", "parent_id",
             "c", "d_x", "sqlite_y", "e"]
ATT_POOL = ["id", "value", "pos", "kind", "n", "parent_id"]
TEXT_POOL = ["", "x", "hello world", "  padded  ", "<&>\"'", "ünïcødé", "1", "0", "a\nb", "NULL"]
MULTS = list(Multiplicity)

MAX_NODES = 40


def random_dtd(rng: random.Random, max_elements=6, max_depth=3, max_group_depth=2):
    """A DAG-shaped DTD; returns (ast, root).

    Every element sits on a level no deeper than ``max_depth`` below the
    root and only references elements on deeper levels.
    """
    n = rng.randint(1, max_elements)
    names = rng.sample(NAME_POOL, n)
    root = names[0]
    levels = {root: 0}
    for name in names[1:]:
        levels[name] = rng.randint(1, max_depth)
    # make levels contiguous so every non-root element has someone above it
    used = sorted(set(levels.values()))
    remap = {lvl: i for i, lvl in enumerate(used)}
    levels = {k: remap[v] for k, v in levels.items()}

    elements, attlists = {}, {}
    for name in names:
        deeper = [m for m in names if levels[m] > levels[name]]
        if not deeper or rng.random() < 0.15:
            elements[name] = Pcdata() if rng.random() < 0.7 else Empty()
        else:
            elements[name] = _group(rng, deeper, max_group_depth)
        if rng.random() < 0.4:
            attlists[name] = _attlist(rng)

    # attach any element nobody references to some element above it
    referenced = set()
    for model in elements.values():
        if isinstance(model, Group):
            referenced |= set(_names(model))
    for name in names[1:]:
        if name in referenced:
            continue
        parents = [m for m in names if levels[m] < levels[name] and isinstance(elements[m], Group)]
        if not parents:
            parents = [root]
        parent = rng.choice(parents)
        model = elements[parent]
        ref = NameRef(name, rng.choice(MULTS))
        if isinstance(model, Group):
            elements[parent] = Group(model.kind, model.items + (ref,), model.mult)
        else:
            elements[parent] = Group("seq", (ref,))
        referenced.add(name)
    return DtdAst(elements, attlists), root


def _names(model):
    for item in model.items:
        if isinstance(item, NameRef):
            yield item.name
        else:
            yield from _names(item)


def _group(rng, names, depth):
    kind = rng.choice(["seq", "choice"])
    items = []
    for _ in range(rng.randint(1, 3)):
        if depth > 1 and rng.random() < 0.25:
            items.append(_group(rng, names, depth - 1))
        else:
            items.append(NameRef(rng.choice(names), rng.choice(MULTS)))
    mult = rng.choice(MULTS) if rng.random() < 0.4 else Multiplicity.ONE
    return Group(kind, tuple(items), mult)


def _attlist(rng):
    out = []
    for att in rng.sample(ATT_POOL, rng.randint(1, 2)):
        typ = "CDATA" if rng.random() < 0.6 else tuple(rng.sample(["p", "q", "r"], 2))
        default = rng.choice(["#REQUIRED", "#IMPLIED", "#IMPLIED", "#FIXED", ""])
        value = None
        if default in ("#FIXED", ""):
            value = typ[0] if isinstance(typ, tuple) else rng.choice(["k", "", "d v"])
        out.append(AttDef(att, typ, default, value))
    return tuple(out)


def random_document(rng: random.Random, ast: DtdAst, root: str, max_nodes=MAX_NODES):
    """A document valid against ``ast`` with at most ``max_nodes`` elements,
    or None when even a lean attempt is too large."""
    for budget in (max_nodes,) * 20 + (0,):
        gen = _DocGen(rng, ast, budget=budget)
        doc = gen.element(root)
        if gen.count <= max_nodes:
            return doc
    return None


class _DocGen:
    def __init__(self, rng, ast, budget):
        self.rng, self.ast, self.budget = rng, ast, budget
        self.count = 0

    @property
    def lean(self):
        return self.count >= self.budget * 0.6

    def element(self, name):
        self.count += 1
        elem = ET.Element(name)
        for att in self.ast.attributes(name):
            if att.default == "#FIXED":
                if self.rng.random() < 0.5:
                    elem.set(att.name, att.value)
            elif att.required or self.rng.random() < 0.6:
                if isinstance(att.type, tuple):
                    elem.set(att.name, self.rng.choice(att.type))
                else:
                    elem.set(att.name, self.rng.choice(TEXT_POOL))
        model = self.ast.content(name)
        if isinstance(model, Pcdata):
            text = self.rng.choice(TEXT_POOL)
            elem.text = text or None
        elif isinstance(model, Group):
            for child in self.particle(model):
                elem.append(self.element(child))
        return elem

    def repeats(self, mult):
        if mult is Multiplicity.ONE:
            return 1
        low = 1 if mult is Multiplicity.PLUS else 0
        high = 1 if mult is Multiplicity.OPTIONAL else 3
        if self.lean:
            return low
        return self.rng.randint(low, high)

    def particle(self, p):
        out = []
        for _ in range(self.repeats(p.mult)):
            if isinstance(p, NameRef):
                out.append(p.name)
            elif p.kind == "seq":
                for item in p.items:
                    out.extend(self.particle(item))
            else:
                item = p.items[0] if self.lean else self.rng.choice(p.items)
                out.extend(self.particle(item))
        return out


def random_case(seed: int):
    """(ast, root, document) drawn deterministically from ``seed``."""
    rng = random.Random(seed)
    while True:
        ast, root = random_dtd(rng)
        doc = random_document(rng, ast, root)
        if doc is not None:
            return ast, root, doc
