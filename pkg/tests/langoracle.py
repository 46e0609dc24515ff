"""Brute-force enumeration of content-model languages up to a length bound.

Works on plain sets of tuples, with no automaton, so it is an independent
check on the matcher.
"""
from __future__ import annotations

import itertools

from complex_etl.dtd import Group, Multiplicity, NameRef


def _concat(left, right, bound):
    return {a + b for a in left for b in right if len(a) + len(b) <= bound}


def _closure(lang, bound):
    # words built from one or more members of ``lang``
    out = set(lang)
    frontier = set(lang)
    while frontier:
        frontier = _concat(frontier, lang, bound) - out
        out |= frontier
    return out


def language(particle, bound=4) -> frozenset:
    """Every child-name sequence of length <= ``bound`` the particle accepts."""
    if isinstance(particle, NameRef):
        base = {(particle.name,)} if bound >= 1 else set()
    elif particle.kind == "seq":
        base = {()}
        for item in particle.items:
            base = _concat(base, language(item, bound), bound)
    else:
        base = set()
        for item in particle.items:
            base |= language(item, bound)
    mult = particle.mult
    if mult.repeats:
        base = _closure(base, bound)
    if mult.may_be_absent:
        base = base | {()}
    return frozenset(base)


def all_sequences(names, max_len=4):
    for n in range(max_len + 1):
        yield from itertools.product(names, repeat=n)


def particles(names):
    """Every name reference over ``names`` with every multiplicity."""
    return [NameRef(n, m) for n in names for m in Multiplicity]


def groups(items, max_arity):
    """Every group whose members come from ``items``, arity 1..``max_arity``."""
    out = []
    for arity in range(1, max_arity + 1):
        for members in itertools.product(items, repeat=arity):
            kinds = ("seq",) if arity == 1 else ("seq", "choice")
            for kind in kinds:
                for mult in Multiplicity:
                    out.append(Group(kind, members, mult))
    return out
