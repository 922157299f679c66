"""Unweighted finite-state transducers over multi-character symbols.

A transducer relates input strings to output strings; an acceptor is the
special case where every arc carries the same symbol on both sides. Symbols
are arbitrary non-empty tokens (``"l"``, ``"success3"``, ``"<|>"``), never
single characters by assumption.

All values are immutable once built. Operations return new machines whose
states are dense integers with the initial state at 0, and every iteration
runs in sorted order so that results are reproducible.
"""

from __future__ import annotations

from collections import defaultdict, deque
from collections.abc import Iterable, Iterator, Sequence

from .errors import InfiniteOutput, InvalidSymbol

EPS = "<eps>"
SENT = "<.>"
PARA = "<|>"
COMMA = "<,>"
SUBJ = "<subj>"

RESERVED = frozenset({EPS, SENT, PARA, COMMA, SUBJ})
_FORBIDDEN_CHARS = frozenset(".|,/=#")


def check_symbol(name: str) -> str:
    """Validate a user-declared symbol name and return it.

    Names of the form ``<...>`` are reserved for internal markers.
    """
    if not isinstance(name, str) or not name:
        raise InvalidSymbol(f"symbol must be a non-empty string, got {name!r}")
    if name in RESERVED or (name.startswith("<") and name.endswith(">")):
        raise InvalidSymbol(f"symbol {name!r} is reserved for internal markers")
    for ch in name:
        if ch.isspace() or ch in _FORBIDDEN_CHARS:
            raise InvalidSymbol(f"symbol {name!r} contains forbidden character {ch!r}")
    return name


class Alphabet:
    """Ordered, duplicate-free collection of symbols."""

    __slots__ = ("symbols", "_set")

    def __init__(self, symbols: Iterable[str]):
        symbols = tuple(symbols)
        seen = set()
        for s in symbols:
            check_symbol(s)
            if s in seen:
                raise InvalidSymbol(f"duplicate symbol {s!r} in alphabet")
            seen.add(s)
        self.symbols = symbols
        self._set = frozenset(symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self._set

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        return f"Alphabet({list(self.symbols)!r})"


class Fst:
    """An immutable transducer.

    ``transitions`` are ``(source, input, output, target)`` tuples where either
    label may be :data:`EPS`. States that are unreachable or cannot reach a
    final state are dropped on construction.
    """

    __slots__ = ("num_states", "initial", "finals", "_arcs", "_by_input")

    def __init__(self, num_states: int, initial: int, finals: Iterable[int],
                 transitions: Iterable[tuple[int, str, str, int]]):
        finals = set(finals)
        trans = set(transitions)
        if not 0 <= initial < num_states:
            raise ValueError(f"initial state {initial} out of range")
        for s, i, o, t in trans:
            if not (0 <= s < num_states and 0 <= t < num_states):
                raise ValueError(f"transition {(s, i, o, t)} has an endpoint out of range")
        if any(not 0 <= f < num_states for f in finals):
            raise ValueError("final state out of range")

        keep = _useful_states(num_states, initial, finals, trans)
        order = [initial] + sorted(keep - {initial})
        renum = {old: new for new, old in enumerate(order)}
        arcs: list[list[tuple[str, str, int]]] = [[] for _ in order]
        for s, i, o, t in trans:
            if s in renum and t in renum:
                arcs[renum[s]].append((i, o, renum[t]))
        self.num_states = len(order)
        self.initial = 0
        self.finals = frozenset(renum[f] for f in finals if f in renum)
        self._arcs = tuple(tuple(sorted(a)) for a in arcs)
        by_input: list[dict[str, list[tuple[str, int]]]] = []
        for a in self._arcs:
            d: dict[str, list[tuple[str, int]]] = defaultdict(list)
            for i, o, t in a:
                d[i].append((o, t))
            by_input.append(dict(d))
        self._by_input = tuple(by_input)
        _reject_output_cycles(self)

    @property
    def states(self) -> range:
        return range(self.num_states)

    @property
    def transitions(self) -> tuple[tuple[int, str, str, int], ...]:
        return tuple((s, i, o, t) for s in self.states for i, o, t in self._arcs[s])

    def arcs(self, state: int) -> tuple[tuple[str, str, int], ...]:
        return self._arcs[state]

    @property
    def is_acceptor(self) -> bool:
        return all(i == o for a in self._arcs for i, o, _ in a)

    def labels(self) -> frozenset[str]:
        """Non-epsilon symbols on either side of any arc."""
        return frozenset(x for a in self._arcs for i, o, _ in a for x in (i, o) if x != EPS)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Fst):
            return NotImplemented
        return (self.num_states, self.finals, self._arcs) == (other.num_states, other.finals, other._arcs)

    def __hash__(self) -> int:
        return hash((self.num_states, self.finals, self._arcs))

    def __repr__(self) -> str:
        kind = "acceptor" if self.is_acceptor else "transducer"
        n_arcs = sum(len(a) for a in self._arcs)
        return f"<Fst {kind}: {self.num_states} states, {n_arcs} arcs, {len(self.finals)} final>"


def _useful_states(n, initial, finals, trans) -> set[int]:
    fwd: dict[int, set[int]] = defaultdict(set)
    back: dict[int, set[int]] = defaultdict(set)
    for s, _, _, t in trans:
        fwd[s].add(t)
        back[t].add(s)
    acc = _reach({initial}, fwd)
    coacc = _reach(set(finals), back)
    return (acc & coacc) | {initial}


def _reach(start: set[int], graph) -> set[int]:
    seen = set(start)
    stack = list(start)
    while stack:
        s = stack.pop()
        for t in graph.get(s, ()):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def _reject_output_cycles(fst: Fst) -> None:
    # Strongly connected components of the epsilon-input subgraph (Kosaraju).
    graph: dict[int, list[int]] = defaultdict(list)
    rgraph: dict[int, list[int]] = defaultdict(list)
    emitting = []
    for s in fst.states:
        for o, t in fst._by_input[s].get(EPS, ()):
            graph[s].append(t)
            rgraph[t].append(s)
            if o != EPS:
                emitting.append((s, t))
    if not emitting:
        return
    order: list[int] = []
    visited: set[int] = set()
    for root in list(graph):
        if root in visited:
            continue
        visited.add(root)
        stack = [(root, iter(graph[root]))]
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if nxt not in visited:
                    visited.add(nxt)
                    stack.append((nxt, iter(graph.get(nxt, ()))))
                    break
            else:
                stack.pop()
                order.append(node)
    comp: dict[int, int] = {}
    for root in reversed(order):
        if root in comp:
            continue
        comp[root] = root
        stack2 = [root]
        while stack2:
            node = stack2.pop()
            for prev in rgraph.get(node, ()):
                if prev not in comp:
                    comp[prev] = root
                    stack2.append(prev)
    for s, t in emitting:
        if s == t or comp.get(s, -1) == comp.get(t, -2):
            raise InfiniteOutput(f"epsilon-input cycle through state {s} emits output")


# ---------------------------------------------------------------------------
# Construction


def empty() -> Fst:
    """The empty relation."""
    return Fst(1, 0, (), ())


def epsilon() -> Fst:
    """Relates the empty string to itself only."""
    return Fst(1, 0, (0,), ())


def string_map(inp: Sequence[str], out: Sequence[str]) -> Fst:
    """Transducer relating exactly ``inp`` to ``out``.

    The shorter side is padded with epsilons at the end.
    """
    inp, out = tuple(inp), tuple(out)
    n = max(len(inp), len(out))
    trans = []
    for k in range(n):
        i = inp[k] if k < len(inp) else EPS
        o = out[k] if k < len(out) else EPS
        trans.append((k, i, o, k + 1))
    return Fst(n + 1, 0, (n,), trans)


def string_acceptor(seq: Sequence[str]) -> Fst:
    return string_map(seq, seq)


def symbols_acceptor(symbols: Iterable[str]) -> Fst:
    """Acceptor for the single-symbol strings drawn from ``symbols``."""
    return Fst(2, 0, (1,), ((0, s, s, 1) for s in symbols))


def universal(symbols: Iterable[str]) -> Fst:
    """Acceptor for every string over ``symbols`` (Sigma-star)."""
    return Fst(1, 0, (0,), ((0, s, s, 0) for s in symbols))


def _offset(fst: Fst, k: int):
    return [(s + k, i, o, t + k) for s, i, o, t in fst.transitions]


def union(*fsts: Fst) -> Fst:
    trans = []
    finals = []
    n = 1
    for f in fsts:
        trans.append((0, EPS, EPS, n))
        trans.extend(_offset(f, n))
        finals.extend(x + n for x in f.finals)
        n += f.num_states
    return Fst(n, 0, finals, trans)


def concat(*fsts: Fst) -> Fst:
    if not fsts:
        return epsilon()
    trans = _offset(fsts[0], 0)
    finals = set(fsts[0].finals)
    n = fsts[0].num_states
    for f in fsts[1:]:
        trans.extend((x, EPS, EPS, n) for x in finals)
        trans.extend(_offset(f, n))
        finals = {x + n for x in f.finals}
        n += f.num_states
    return Fst(n, 0, finals, trans)


def star(fst: Fst) -> Fst:
    trans = [(0, EPS, EPS, 1)] + _offset(fst, 1)
    trans.extend((f + 1, EPS, EPS, 0) for f in fst.finals)
    return Fst(fst.num_states + 1, 0, (0,), trans)


def plus(fst: Fst) -> Fst:
    return concat(fst, star(fst))


def optional(fst: Fst) -> Fst:
    return union(fst, epsilon())


def power(fst: Fst, n: int) -> Fst:
    if n < 0:
        raise ValueError("repetition count must be >= 0")
    return concat(*([fst] * n)) if n else epsilon()


def map_arcs(fst: Fst, fn) -> Fst:
    """Rebuild ``fst`` with each arc ``(i, o)`` replaced by ``fn(i, o)``."""
    trans = []
    for s, i, o, t in fst.transitions:
        i2, o2 = fn(i, o)
        trans.append((s, i2, o2, t))
    return Fst(fst.num_states, fst.initial, fst.finals, trans)


def input_side(fst: Fst) -> Fst:
    return map_arcs(fst, lambda i, o: (i, i))


def output_side(fst: Fst) -> Fst:
    return map_arcs(fst, lambda i, o: (o, o))


def cross(acceptor: Fst, out: Sequence[str]) -> Fst:
    """Relate every string accepted by ``acceptor`` to the fixed string ``out``."""
    return concat(map_arcs(acceptor, lambda i, o: (i, EPS)), string_map((), out))


def insert_after(acceptor: Fst, marker: Sequence[str]) -> Fst:
    """Identity on ``acceptor``'s language followed by the insertion of ``marker``."""
    return concat(acceptor, string_map((), marker))


def with_loops(fst: Fst, symbols: Iterable[str]) -> Fst:
    """Add an identity self-loop for each of ``symbols`` on every state.

    On an acceptor this lets the symbols occur anywhere, ignored by the
    original language.
    """
    symbols = tuple(symbols)
    trans = list(fst.transitions)
    trans.extend((s, m, m, s) for s in fst.states for m in symbols)
    return Fst(fst.num_states, fst.initial, fst.finals, trans)


def follow_each(acceptor: Fst, sep: str) -> Fst:
    """Acceptor in which every non-epsilon symbol is immediately followed by ``sep``."""
    n = acceptor.num_states
    trans = []
    for s, i, o, t in acceptor.transitions:
        if i == EPS:
            trans.append((s, i, o, t))
        else:
            trans.append((s, i, o, n))
            trans.append((n, sep, sep, t))
            n += 1
    return Fst(n, acceptor.initial, acceptor.finals, trans)


# ---------------------------------------------------------------------------
# Composition and application


def compose(a: Fst, b: Fst) -> Fst:
    """Relational composition: ``(x, z)`` whenever ``(x, y) in a`` and ``(y, z) in b``.

    A two-state sequencing filter lets ``a`` take its epsilon-output moves
    only before ``b`` takes epsilon-input moves, so each pair of paths is
    realised once rather than once per interleaving.
    """
    start = (a.initial, b.initial, 0)
    index = {start: 0}
    queue = deque([start])
    trans = []

    def target(triple):
        k = index.get(triple)
        if k is None:
            k = index[triple] = len(index)
            queue.append(triple)
        return k

    while queue:
        triple = queue.popleft()
        p, q, f = triple
        s = index[triple]
        b_arcs = b._by_input[q]
        for i, o, p2 in a._arcs[p]:
            if o == EPS:
                if f == 0:
                    trans.append((s, i, EPS, target((p2, q, 0))))
            else:
                for z, q2 in b_arcs.get(o, ()):
                    trans.append((s, i, z, target((p2, q2, 0))))
        for z, q2 in b_arcs.get(EPS, ()):
            trans.append((s, EPS, z, target((p, q2, 1))))
    finals = [k for (p, q, _), k in index.items() if p in a.finals and q in b.finals]
    return Fst(len(index), 0, finals, trans)


def compose_all(*fsts: Fst) -> Fst:
    result = fsts[0]
    for f in fsts[1:]:
        result = compose(result, f)
    return result


def _eps_closure(fst: Fst, configs: set[tuple[int, tuple[str, ...]]]):
    result = set(configs)
    work = list(configs)
    while work:
        st, out = work.pop()
        for o, t in fst._by_input[st].get(EPS, ()):
            cfg = (t, out if o == EPS else out + (o,))
            if cfg not in result:
                result.add(cfg)
                work.append(cfg)
    return result


def apply_down(fst: Fst, seq: Sequence[str]) -> set[tuple[str, ...]]:
    """All output strings paired with ``seq``; empty when ``seq`` is not in the domain."""
    configs = {(fst.initial, ())}
    for sym in seq:
        configs = _eps_closure(fst, configs)
        nxt = set()
        for st, out in configs:
            for o, t in fst._by_input[st].get(sym, ()):
                nxt.add((t, out if o == EPS else out + (o,)))
        if not nxt:
            return set()
        configs = nxt
    configs = _eps_closure(fst, configs)
    return {out for st, out in configs if st in fst.finals}


def apply_one(fst: Fst, seq: Sequence[str]) -> tuple[str, ...]:
    """Apply a functional transducer; raises if the image is not a single string."""
    outs = apply_down(fst, seq)
    if len(outs) != 1:
        raise ValueError(f"expected exactly one output, got {len(outs)}")
    return next(iter(outs))


def accepts(fst: Fst, seq: Sequence[str]) -> bool:
    """Whether ``seq`` is in the input-side language of ``fst``."""
    def closure(states):
        todo = list(states)
        while todo:
            for _, t in fst._by_input[todo.pop()].get(EPS, ()):
                if t not in states:
                    states.add(t)
                    todo.append(t)
        return states

    current = closure({fst.initial})
    for sym in seq:
        current = closure({t for s in current for _, t in fst._by_input[s].get(sym, ())})
        if not current:
            return False
    return not current.isdisjoint(fst.finals)


# ---------------------------------------------------------------------------
# Acceptor algorithms


def determinize(acceptor: Fst) -> Fst:
    """Equivalent deterministic, minimal, canonically numbered acceptor.

    Two acceptors with the same language yield equal (``==``) results.
    """
    if not acceptor.is_acceptor:
        raise ValueError("determinize requires an acceptor")

    def closure(states):
        seen = set(states)
        stack = list(states)
        while stack:
            s = stack.pop()
            for _, t in acceptor._by_input[s].get(EPS, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    start = closure({acceptor.initial})
    index = {start: 0}
    order = [start]
    delta: list[dict[str, int]] = []
    k = 0
    while k < len(order):
        subset = order[k]
        moves: dict[str, set[int]] = defaultdict(set)
        for s in subset:
            for sym, targets in acceptor._by_input[s].items():
                if sym != EPS:
                    moves[sym].update(t for _, t in targets)
        row = {}
        for sym in sorted(moves):
            tgt = closure(moves[sym])
            if tgt not in index:
                index[tgt] = len(order)
                order.append(tgt)
            row[sym] = index[tgt]
        delta.append(row)
        k += 1
    finals = {index[sub] for sub in order if sub & acceptor.finals}
    return _minimize(len(order), delta, finals)


def _minimize(n: int, delta: list[dict[str, int]], finals: set[int]) -> Fst:
    back: dict[int, set[int]] = defaultdict(set)
    for s, row in enumerate(delta):
        for t in row.values():
            back[t].add(s)
    live = _reach(set(finals), back)
    if 0 not in live:
        return empty()
    delta = [{a: t for a, t in row.items() if t in live} if s in live else {} for s, row in enumerate(delta)]

    cls = _hopcroft(n, delta, finals, live)

    # Canonical numbering: breadth-first from the initial class, labels sorted.
    rep: dict[int, int] = {}
    for s in sorted(live):
        rep.setdefault(cls[s], s)
    ids = {cls[0]: 0}
    queue = deque([cls[0]])
    trans = []
    while queue:
        c = queue.popleft()
        for a, t in sorted(delta[rep[c]].items()):
            tc = cls[t]
            if tc not in ids:
                ids[tc] = len(ids)
                queue.append(tc)
            trans.append((ids[c], a, a, ids[tc]))
    fin = {ids[cls[s]] for s in finals if s in live and cls[s] in ids}
    return Fst(len(ids), 0, fin, trans)


def _hopcroft(n, delta, finals, live) -> list[int]:
    """Coarsest partition of ``live`` compatible with finality and ``delta``.

    Missing transitions lead to an implicit sink (state ``n``), which is
    distinguishable from every live state.
    """
    sink = n
    symbols = sorted({a for s in live for a in delta[s]})
    inv: dict[str, dict[int, list[int]]] = {a: defaultdict(list) for a in symbols}
    for s in live:
        row = delta[s]
        for a in symbols:
            inv[a][row.get(a, sink)].append(s)
    inv_sink = {a: [s for s in live if a not in delta[s]] for a in symbols}
    for a in symbols:
        inv[a][sink] = inv_sink[a] + [sink]

    fin = [s for s in live if s in finals]
    nonfin = [s for s in live if s not in finals] + [sink]
    blocks: list[set[int]] = [set(b) for b in (fin, nonfin) if b]
    block_of = [0] * (n + 1)
    for k, b in enumerate(blocks):
        for s in b:
            block_of[s] = k
    work = set(range(len(blocks)))
    while work:
        splitter = tuple(blocks[work.pop()])
        for a in symbols:
            pre = inv[a]
            touched: dict[int, list[int]] = defaultdict(list)
            for t in splitter:
                for s in pre.get(t, ()):
                    touched[block_of[s]].append(s)
            for k, members in touched.items():
                block = blocks[k]
                if len(members) == len(block):
                    continue
                moved = set(members)
                rest = block - moved
                # The smaller half gets the new id; whether or not block k is
                # still pending, queueing just that half is sufficient.
                small, large = (moved, rest) if len(moved) <= len(rest) else (rest, moved)
                blocks[k] = large
                new = len(blocks)
                blocks.append(small)
                for s in small:
                    block_of[s] = new
                work.add(new)
    return block_of


def complement(acceptor: Fst, symbols: Iterable[str]) -> Fst:
    """Acceptor for every string over ``symbols`` not accepted by ``acceptor``."""
    symbols = sorted(set(symbols))
    dfa = determinize(acceptor)
    extra = dfa.labels() - set(symbols)
    if extra:
        raise ValueError(f"acceptor uses symbols outside the complement alphabet: {sorted(extra)}")
    sink = dfa.num_states
    trans = []
    for s in range(dfa.num_states + 1):
        row = dict((i, t) for i, _, t in dfa.arcs(s)) if s < sink else {}
        for a in symbols:
            trans.append((s, a, a, row.get(a, sink)))
    finals = [s for s in range(sink + 1) if s not in dfa.finals]
    return determinize(Fst(sink + 1, 0, finals, trans))


def containing(acceptor: Fst, symbols: Iterable[str]) -> Fst:
    """Deterministic acceptor for strings over ``symbols`` with a factor in ``acceptor``.

    Built directly by tracking every partial match at once; the first
    complete match jumps to an absorbing accepting state.
    """
    symbols = sorted(set(symbols))
    dfa = determinize(acceptor)
    if dfa.initial in dfa.finals:
        return universal(symbols)
    delta = [{i: t for i, _, t in dfa.arcs(s)} for s in dfa.states]
    start = frozenset({dfa.initial})
    index = {start: 0}
    order = [start]
    accept = -1
    trans = []
    k = 0
    while k < len(order):
        subset = order[k]
        for a in symbols:
            nxt = {delta[q][a] for q in subset if a in delta[q]}
            if nxt & dfa.finals:
                if accept < 0:
                    accept = len(order)
                    order.append(None)
                trans.append((k, a, a, accept))
                continue
            nxt = frozenset(nxt | {dfa.initial})
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            trans.append((k, a, a, index[nxt]))
        k += 1
        while k < len(order) and order[k] is None:
            trans.extend((k, a, a, k) for a in symbols)
            k += 1
    finals = [accept] if accept >= 0 else []
    return determinize(Fst(len(order), 0, finals, trans))


def intersect(a: Fst, b: Fst) -> Fst:
    return determinize(compose(a, b))


def difference(a: Fst, b: Fst, symbols: Iterable[str]) -> Fst:
    return intersect(a, complement(b, symbols))


def is_empty(fst: Fst) -> bool:
    return not fst.finals
