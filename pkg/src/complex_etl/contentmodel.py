"""Matching child-element sequences against DTD content models.

A group content model is compiled once into a Thompson NFA over element
names.  Simulating it on a child sequence yields either acceptance or the
first offending position together with the names that would have been
accepted there.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .dtd import Group, Multiplicity, NameRef


@dataclass(frozen=True)
class MatchResult:
    ok: bool
    position: int = -1  # index of the first offending child, or len(seq) if input ended early
    expected: tuple = ()

    def __bool__(self):
        return self.ok


class _Nfa:
    def __init__(self):
        self.eps = []  # state -> list of states
        self.edges = []  # state -> list of (name, state)

    def new(self):
        self.eps.append([])
        self.edges.append([])
        return len(self.eps) - 1

    def build(self, particle):
        """Return (start, end) states for a particle, multiplicity included."""
        start, end = self._bare(particle)
        mult = particle.mult
        if mult is Multiplicity.ONE:
            return start, end
        s, e = self.new(), self.new()
        self.eps[s].append(start)
        self.eps[end].append(e)
        if mult.may_be_absent:
            self.eps[s].append(e)
        if mult.repeats:
            self.eps[end].append(start)
        return s, e

    def _bare(self, particle):
        if isinstance(particle, NameRef):
            s, e = self.new(), self.new()
            self.edges[s].append((particle.name, e))
            return s, e
        parts = [self.build(item) for item in particle.items]
        if particle.kind == "seq":
            for (_, e1), (s2, _) in zip(parts, parts[1:]):
                self.eps[e1].append(s2)
            return parts[0][0], parts[-1][1]
        s, e = self.new(), self.new()
        for ps, pe in parts:
            self.eps[s].append(ps)
            self.eps[pe].append(e)
        return s, e


class ContentMatcher:
    """Compiled matcher for one group content model."""

    def __init__(self, model: Group):
        nfa = _Nfa()
        self.start, self.accept = nfa.build(model)
        self._edges = nfa.edges
        self._closure = [self._close(nfa.eps, s) for s in range(len(nfa.eps))]

    @staticmethod
    def _close(eps, state):
        seen = {state}
        stack = [state]
        while stack:
            for nxt in eps[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return frozenset(seen)

    def _expected(self, states):
        names = {name for s in states for name, _ in self._edges[s]}
        return tuple(sorted(names))

    def match(self, names) -> MatchResult:
        current = self._closure[self.start]
        for i, name in enumerate(names):
            nxt = set()
            for s in current:
                for label, target in self._edges[s]:
                    if label == name:
                        nxt |= self._closure[target]
            if not nxt:
                return MatchResult(False, i, self._expected(current))
            current = nxt
        if self.accept in current:
            return MatchResult(True)
        return MatchResult(False, len(names), self._expected(current))


@lru_cache(maxsize=1024)
def matcher_for(model: Group) -> ContentMatcher:
    return ContentMatcher(model)


def matches(model: Group, names) -> bool:
    return matcher_for(model).match(list(names)).ok
