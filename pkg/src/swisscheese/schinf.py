"""The free degree extension of the degree 0/1 swiss-cheese pieces.

Elements are stored through their image in the W construction: a normalized
W-tree over SC_d with only h-colored internal edges in which every maximal
finite subtree carries at most one full-disc leaf.  Cutting such a tree at
its inf edges and merging degree-0 regions into a neighbor recovers the
formal tree of degree-1 generators (``SChInf.pieces``).

Words in iota, p, h_t and act(alpha) are read left to right in the order the
maps are applied: ``iota . act(a) . p`` first includes, then acts by a, then
lifts back.  ``p`` and ``h_t`` for 0 < t < inf are symbolic; the evaluator
only runs where the relations p iota = id and h_inf = iota p fix the value.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .geometry import (FULL, HALF, INF, Configuration, LittleDiscs, ParseError,
                       SwissCheese, config_from_dict, config_to_dict, format_ext,
                       identify_half_lower, lift_half_lower, parse_ext, random_config)
from .operad_core import (ArityMismatch, ColorMismatch, DegreeOverflow, MultiHom,
                          OperadInstance, check_composable, inverse_perm, multihom_compose,
                          multihom_identity, multihom_is_identity)
from .trees import (LENGTH_CHOICES, Edge, Leaf, LevelSequence, Node, WOperad,
                    _is_relabeling, canonicalize, canonicalize_le, component_to_le, graft, iter_leaves,
                    normalize_le, normalize_w, random_length, relabel, tree_from_dict,
                    tree_input_colors, tree_to_dict)

EXIT = "exit"


class NotInImage(ValueError):
    """A W-tree with two full-disc leaves in one finite region."""


class NotEvaluable(ValueError):
    pass


class WordTypeError(ValueError):
    pass


def _sc(d: int) -> SwissCheese:
    return SwissCheese(d)


def _map_leaves(t, fn):
    """Rebuild ``t`` with every leaf replaced by ``fn(leaf)`` (a Leaf or a Node)."""
    def item(ch):
        if isinstance(ch, Leaf):
            new = fn(ch)
            return new if isinstance(new, Leaf) else Edge(INF, new)
        return Edge(ch.length, walk(ch.node))

    def walk(node):
        return Node(node.label, tuple(item(ch) for ch in node.children))

    if isinstance(t, Leaf):
        return fn(t)
    return walk(t)


def f_count(t) -> int:
    return sum(1 for leaf in iter_leaves(t) if leaf.color == "f")


def h_count(t) -> int:
    return sum(1 for leaf in iter_leaves(t) if leaf.color == "h")


def check_h_tree(op: SwissCheese, t):
    """Output h, internal edges h-colored, leaves numbered color by color."""
    if isinstance(t, Leaf):
        if t.color != "h" or t.pos != 0:
            raise ColorMismatch("a bare leaf must be the h identity")
        return
    if op.output_color(t.label) != "h":
        raise ColorMismatch("the root must have a half-disc target")

    def walk(node):
        cols = op.input_colors(node.label)
        if len(cols) != len(node.children):
            raise ArityMismatch("vertex arity differs from its child count")
        for c, ch in zip(cols, node.children):
            if isinstance(ch, Leaf):
                if ch.color != c:
                    raise ColorMismatch("leaf color does not match its slot")
            else:
                if c != "h":
                    raise ColorMismatch("internal edges must be h-colored")
                walk(ch.node)

    walk(t)
    n = f_count(t)
    pos = sorted((leaf.pos, leaf.color) for leaf in iter_leaves(t))
    want = [(i, "f") for i in range(n)] + [(n + j, "h") for j in range(len(pos) - n)]
    if pos != want:
        raise ValueError("leaves must be numbered 0..n-1 (full) then n..n+m-1 (half)")


# ---------------------------------------------------------------- pieces

@dataclass(frozen=True)
class Piece:
    """A region of a W-tree; leaf Leaf(EXIT, j) continues into ``kids[j]``
    across an inf edge."""
    tree: object
    kids: tuple

    @property
    def degree(self) -> int:
        return f_count(self.tree)


def _split(node) -> Piece:
    kids = []

    def walk(nd):
        new = []
        for ch in nd.children:
            if isinstance(ch, Leaf):
                new.append(ch)
            elif ch.length is INF:
                new.append(Leaf(EXIT, len(kids)))
                kids.append(_split(ch.node))
            else:
                new.append(Edge(ch.length, walk(ch.node)))
        return Node(nd.label, tuple(new))

    tree = walk(node)
    return Piece(tree, tuple(kids))


def _renumber_exits(tree, kidmap: dict) -> Piece:
    order = [leaf.pos for leaf in iter_leaves(tree) if leaf.color == EXIT]
    idx = {k: i for i, k in enumerate(order)}
    tree = _map_leaves(tree, lambda l: Leaf(EXIT, idx[l.pos]) if l.color == EXIT else l)
    return Piece(tree, tuple(kidmap[k] for k in order))


def _glue(p: Piece, j: int) -> Piece:
    """Absorb kid j into p across its inf edge."""
    kid = p.kids[j]
    inner = _map_leaves(kid.tree, lambda l: Leaf(EXIT, ("k", l.pos)) if l.color == EXIT else l)

    def sub(l):
        if l.color != EXIT:
            return l
        return inner if l.pos == j else Leaf(EXIT, ("p", l.pos))

    tree = _map_leaves(p.tree, sub)
    kidmap = {("p", i): k for i, k in enumerate(p.kids) if i != j}
    kidmap.update({("k", i): k for i, k in enumerate(kid.kids)})
    return _renumber_exits(tree, kidmap)


def _min_f(p: Piece):
    """Smallest full-disc leaf in p or below it."""
    own = [l.pos for l in iter_leaves(p.tree) if l.color == "f"]
    below = [v for k in p.kids if (v := _min_f(k)) is not None]
    return min(own + below, default=None)


def _merge_up(p: Piece) -> Piece:
    kids = [_merge_up(k) for k in p.kids]
    p = Piece(p.tree, tuple(kids))
    for j in reversed(range(len(kids))):
        if kids[j].degree == 0:
            p = _glue(p, j)
    return p


def cut(t) -> Piece:
    """The canonical formal tree of degree <= 1 generators for a W-tree in
    the image; raises NotInImage otherwise."""
    if isinstance(t, Leaf):
        return Piece(t, ())
    p = _merge_up(_split(t))

    def check(q):
        if q.degree > 1:
            raise NotInImage("a finite region carries more than one full disc")
        for k in q.kids:
            check(k)

    check(p)
    if p.degree == 0 and p.kids:
        j = min(range(len(p.kids)), key=lambda i: _min_f(p.kids[i]))
        p = _glue(p, j)
    return p


def assemble(p: Piece):
    """Graft a formal tree of generators back into one W-tree."""
    if not p.kids:
        return p.tree
    subs = [assemble(k) for k in p.kids]
    return _map_leaves(p.tree, lambda l: subs[l.pos] if l.color == EXIT else l)


def in_iota_image(t) -> bool:
    try:
        cut(t)
    except NotInImage:
        return False
    return True


# ---------------------------------------------------------------- elements

@dataclass(frozen=True)
class SCh1Element:
    """A generator of degree 0 or 1: a W-tree over SC_d^h with at most one
    full-disc leaf and only h-colored internal edges."""
    degree: int
    tree: object

    @property
    def arity(self) -> int:
        return h_count(self.tree)


def make_sch1(op: SwissCheese, tree) -> SCh1Element:
    check_h_tree(op, tree)
    deg = f_count(tree)
    if deg > 1:
        raise DegreeOverflow("generators have degree 0 or 1")
    return SCh1Element(deg, normalize_w(op, tree))


def sch1_to_lower(x: SCh1Element):
    """Degree-0 generators as W-trees over E_{d-1}."""
    if x.degree != 0:
        raise ValueError("only degree-0 generators live in W E_{d-1}")
    t = x.tree
    if isinstance(t, Leaf):
        return Leaf("f", t.pos)
    return _map_labels(_map_leaves(t, lambda l: Leaf("f", l.pos)), identify_half_lower)


def sch1_from_lower(t) -> SCh1Element:
    if isinstance(t, Leaf):
        return SCh1Element(0, Leaf("h", t.pos))
    return SCh1Element(0, _map_labels(_map_leaves(t, lambda l: Leaf("h", l.pos)),
                                      lift_half_lower))


def _map_labels(t, fn):
    if isinstance(t, Leaf):
        return t
    return Node(fn(t.label), tuple(
        ch if isinstance(ch, Leaf) else Edge(ch.length, _map_labels(ch.node, fn))
        for ch in t.children))


def compose_sch1(op: SwissCheese, x: SCh1Element, ys: Sequence[SCh1Element]) -> SCh1Element:
    """Composition in the degree <= 1 truncation."""
    if len(ys) != x.arity:
        raise ArityMismatch(f"{x.arity} half slots, {len(ys)} inputs")
    if x.degree + sum(y.degree for y in ys) > 1:
        raise DegreeOverflow("the composite has degree 2, which is discarded")
    inputs = [Leaf("f", 0)] * x.degree + [y.tree for y in ys]
    return SCh1Element(x.degree + sum(y.degree for y in ys),
                       normalize_w(op, graft(op, x.tree, inputs)))


@dataclass(frozen=True)
class SChInf:
    """A point of SC^{h,inf}(n, m), kept as its canonical image tree."""
    tree: object

    @property
    def degree(self) -> int:
        return f_count(self.tree)

    @property
    def n(self) -> int:
        return self.degree

    @property
    def m(self) -> int:
        return h_count(self.tree)

    def pieces(self) -> Piece:
        return cut(self.tree)


def schinf_from_tree(op: SwissCheese, t) -> SChInf:
    check_h_tree(op, t)
    t = normalize_w(op, t)
    cut(t)
    return SChInf(t)


def schinf_identity() -> SChInf:
    return SChInf(Leaf("h", 0))


def embed_leq1(x: SCh1Element) -> SChInf:
    return SChInf(x.tree)


def iota(op: SwissCheese, x: SChInf):
    """The image in the W construction, rebuilt from the generators."""
    return normalize_w(op, assemble(x.pieces()))


def compose_schinf(op: SwissCheese, outer: SChInf, inputs: Sequence[SChInf]) -> SChInf:
    """Fill the half slots of ``outer``; full-disc leaves of ``outer`` come
    first in the result, then those of each input in slot order."""
    if len(inputs) != outer.m:
        raise ArityMismatch(f"{outer.m} half slots, {len(inputs)} inputs")
    ys = [Leaf("f", 0)] * outer.n + [iota(op, y) for y in inputs]
    return schinf_from_tree(op, graft(op, iota(op, outer), ys))


def schinf_act(op: SwissCheese, x: SChInf, perm: Sequence[int]) -> SChInf:
    """Right action of the permutations preserving the color blocks."""
    return SChInf(WOperad(op).act(x.tree, perm))


def schinf_to_dict(x: SChInf) -> dict:
    return {"degree": x.degree, "arity": x.m, "tree": tree_to_dict(x.tree)}


def schinf_from_dict(op: SwissCheese, data) -> SChInf:
    if not isinstance(data, dict) or "tree" not in data:
        raise ParseError("an SChInf element is an object with a tree")
    x = schinf_from_tree(op, tree_from_dict(data["tree"]))
    if "degree" in data and data["degree"] != x.degree:
        raise ParseError("degree annotation does not match the tree")
    return x


# ---------------------------------------------------------------- E_d action

def act_ed(op: SwissCheese, t, alpha: MultiHom):
    """Right action of alpha in E_d(n_in; n_out) on full-disc leaves."""
    n = f_count(t)
    if alpha.n_out != n:
        raise ArityMismatch(f"tree has {n} full leaves, the action expects {alpha.n_out}")
    shift = alpha.n_in - n

    def fix(ch):
        if isinstance(ch, Leaf):
            return Leaf("h", ch.pos + shift)
        return Edge(ch.length, walk(ch.node))

    def walk(node):
        cols = op.input_colors(node.label)
        ys = [alpha.parts[ch.pos] if isinstance(ch, Leaf) and ch.color == "f"
              else op.identity(c) for c, ch in zip(cols, node.children)]
        if "f" not in cols:
            return Node(node.label, tuple(fix(ch) for ch in node.children))
        z = op.compose(node.label, ys)
        kids = []
        for i, a in op.origins(node.label, ys):
            ch = node.children[i]
            if isinstance(ch, Leaf) and ch.color == "f":
                kids.append(Leaf("f", alpha.fiber(ch.pos)[a]))
            else:
                kids.append(fix(ch))
        return Node(z, tuple(kids))

    if isinstance(t, Leaf):
        return fix(t)
    return normalize_w(op, walk(t))


# ---------------------------------------------------------------- words

IOTA = ("iota",)
P = ("p",)


def h(t):
    return ("h", t)


def act(alpha: MultiHom):
    return ("act", alpha)


@dataclass(frozen=True)
class FormalWord:
    """``dom`` is (kind, n) with kind "S" (SC^{h,inf}) or "W" (the W
    construction) and n the degree."""
    dom: tuple
    tokens: tuple = ()

    @property
    def cod(self) -> tuple:
        return word_type(self)


def _step(state, tok):
    kind, n = state
    tag = tok[0]
    if tag == "iota":
        if kind != "S":
            raise WordTypeError("iota needs an SC^{h,inf} input")
        return ("W", n)
    if tag == "p":
        if kind != "W":
            raise WordTypeError("p needs a W input")
        return ("S", n)
    if tag == "h":
        if kind != "W":
            raise WordTypeError("h_t needs a W input")
        return state
    if tag == "act":
        if kind != "W":
            raise WordTypeError("act needs a W input")
        if tok[1].n_out != n:
            raise WordTypeError(f"act expects degree {tok[1].n_out}, got {n}")
        return ("W", tok[1].n_in)
    raise WordTypeError(f"unknown token {tok!r}")


def word_type(w: FormalWord) -> tuple:
    state = tuple(w.dom)
    for tok in w.tokens:
        state = _step(state, tok)
    return state


def word(dom, *tokens) -> FormalWord:
    w = FormalWord(tuple(dom), tuple(tokens))
    word_type(w)
    return w


def word_concat(w1: FormalWord, w2: FormalWord) -> FormalWord:
    """First w1, then w2."""
    if w1.cod != tuple(w2.dom):
        raise WordTypeError(f"cannot follow {w1.cod} by a word starting at {w2.dom}")
    return FormalWord(w1.dom, w1.tokens + w2.tokens)


def from_composition_order(dom, tokens) -> FormalWord:
    """Read ``tokens`` as a composite of maps written right to left."""
    return word(dom, *reversed(tuple(tokens)))


def to_composition_order(w: FormalWord) -> tuple:
    return tuple(reversed(w.tokens))


def _perm_segment(ed, toks, i) -> bool:
    """toks[i:i+3] is iota . act(pi) . p with pi a relabeling."""
    return (toks[i:i + 1] == (IOTA,) and len(toks) > i + 2 and toks[i + 1][0] == "act"
            and _is_relabeling(ed, toks[i + 1][1]) and toks[i + 2] == P)


def _rule_redexes(ed, toks) -> list:
    """Positions where a rule starts.  Besides the five basic rules, a bare
    relabeling between two inf boundaries slides into its neighbor, since
    every generator commutes with permutations."""
    out = []
    for i, tok in enumerate(toks):
        if _perm_segment(ed, toks, i) and toks[i + 3:i + 4] == (IOTA,):
            out.append(("down", i))
            continue
        if tok == P and _perm_segment(ed, toks, i + 1):
            out.append(("up", i))
            continue
        if tok[0] == "h" and (tok[1] == 0 or tok[1] is INF):
            out.append(i)
        elif tok[0] == "act" and multihom_is_identity(ed, tok[1]):
            out.append(i)
        elif i + 1 < len(toks):
            nxt = toks[i + 1]
            if (tok == IOTA and nxt == P) or (tok[0] == "act" and nxt[0] == "act"):
                out.append(i)
    return out


def _rule_apply(ed, toks, i):
    if isinstance(i, tuple):
        kind, i = i
        if kind == "down":  # iota act(pi) p iota -> iota act(pi)
            return toks[:i + 2] + toks[i + 4:]
        return toks[:i] + (toks[i + 2], P) + toks[i + 4:]  # p iota act(pi) p -> act(pi) p
    tok = toks[i]
    if tok[0] == "h":
        return toks[:i] + ((P, IOTA) if tok[1] is INF else ()) + toks[i + 1:]
    if tok[0] == "act" and multihom_is_identity(ed, tok[1]):
        return toks[:i] + toks[i + 1:]
    if tok == IOTA:
        return toks[:i] + toks[i + 2:]
    return toks[:i] + (act(multihom_compose(ed, tok[1], toks[i + 1][1])),) + toks[i + 2:]


def _relabel_canonical(ed, w: FormalWord) -> FormalWord:
    """Renumber the intermediate degrees; all four generators commute with
    permutations, so only the two ends of the word are fixed."""
    toks = w.tokens
    if not toks:
        return w
    kind, n = w.dom
    start = 1 if kind == "S" else 0
    end = len(toks) - 1 if w.cod[0] == "S" else len(toks)
    levels, seps = [None], []
    i = start
    while i < end:
        tok = toks[i]
        if tok[0] == "act":
            levels[-1] = tok[1]
        elif tok[0] == "h":
            seps.append(tok)
            levels.append(None)
        else:  # p followed by iota
            seps.append(("pi",))
            levels.append(None)
            i += 1
        i += 1
    full = []
    for a in levels:
        full.append(a if a is not None else multihom_identity(ed, n))
        n = full[-1].n_in
    s = canonicalize_le(ed, LevelSequence(full[-1].n_in, full[0].n_out, tuple(full), tuple(seps)))
    mid = []
    for j, a in enumerate(s.levels):
        if not multihom_is_identity(ed, a):
            mid.append(act(a))
        if j < len(seps):
            mid.extend([P, IOTA] if seps[j] == ("pi",) else [seps[j]])
    return FormalWord(w.dom, toks[:start] + tuple(mid) + toks[end:])


def word_normalize(ed: LittleDiscs, w: FormalWord, rng: random.Random | None = None) -> FormalWord:
    """Rewrite with h_0 -> (), h_inf -> p . iota, iota . p -> (),
    act(a) . act(b) -> act(a o b) and act(id) -> (), then renumber the
    intermediate degrees canonically; repeat until nothing changes."""
    word_type(w)
    toks = w.tokens
    while True:
        reds = _rule_redexes(ed, toks)
        if reds:
            toks = _rule_apply(ed, toks, rng.choice(reds) if rng is not None else reds[0])
            continue
        new = _relabel_canonical(ed, FormalWord(w.dom, toks))
        if new.tokens == toks:
            return new
        toks = new.tokens


def chain_from_le(s: LevelSequence) -> FormalWord:
    """iota . act(a_1) . h_{t_1} . act(a_2) ... act(a_{k+1}) . p, a map of
    degree n_out to degree n_in."""
    if not s.levels:
        return FormalWord(("S", s.n_in), ())
    toks = [IOTA, act(s.levels[0])]
    for t, a in zip(s.lengths, s.levels[1:]):
        toks += [h(t), act(a)]
    toks.append(P)
    return FormalWord(("S", s.n_out), tuple(toks))


def _ext_min(a, b):
    if a is INF:
        return b
    if b is INF:
        return a
    return min(a, b)


def clamp(w: FormalWord, s) -> FormalWord:
    """h_t -> h_min(s, t)."""
    return FormalWord(w.dom, tuple(h(_ext_min(s, tok[1])) if tok[0] == "h" else tok
                                   for tok in w.tokens))


def eval_word(op: SwissCheese, w: FormalWord, x):
    """Apply ``w`` to an SChInf element (domain kind S) or a W-tree (kind W)."""
    word_type(w)
    if w.dom[0] == "S" and not isinstance(x, SChInf):
        raise WordTypeError("the word starts on SC^{h,inf}")
    value = x
    for tok in w.tokens:
        tag = tok[0]
        if tag == "iota":
            value = iota(op, value)
        elif tag == "p":
            value = _lift(op, value)
        elif tag == "h":
            if tok[1] == 0:
                continue
            if tok[1] is not INF:
                raise NotEvaluable(f"h_{format_ext(tok[1])} has no formula")
            value = iota(op, _lift(op, value))
        else:
            value = act_ed(op, value, tok[1])
    return value


def _lift(op, t) -> SChInf:
    if not in_iota_image(t):
        raise NotEvaluable("p is only determined on the image of iota")
    return SChInf(normalize_w(op, t))


def token_to_dict(tok) -> dict:
    if tok[0] in ("iota", "p"):
        return {"tok": tok[0]}
    if tok[0] == "h":
        return {"tok": "h", "t": format_ext(tok[1])}
    a = tok[1]
    return {"tok": "act", "map": list(a.f), "parts": [config_to_dict(x) for x in a.parts]}


def token_from_dict(data):
    if not isinstance(data, dict) or "tok" not in data:
        raise ParseError("a token is an object with a 'tok' field")
    tag = data["tok"]
    if tag in ("iota", "p"):
        return (tag,)
    if tag == "h":
        return h(parse_ext(data["t"]))
    if tag == "act":
        f = tuple(data["map"])
        return act(MultiHom(len(f), f, tuple(config_from_dict(x) for x in data["parts"])))
    raise ParseError(f"unknown token {tag!r}")


def word_to_dict(w: FormalWord) -> dict:
    return {"dom": list(w.dom), "tokens": [token_to_dict(t) for t in w.tokens]}


def word_from_dict(data) -> FormalWord:
    try:
        dom = tuple(data["dom"])
        toks = [token_from_dict(t) for t in data["tokens"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed word: {exc}") from exc
    try:
        return word(dom, *toks)
    except WordTypeError as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------------- End(SC^{h,inf})

@dataclass(frozen=True)
class EndTree:
    """A point of End(SC^{h,inf}): ``word`` maps degree 1 to degree k and
    child i (an output label or another EndTree) continues from the i-th
    full-disc leaf."""
    word: FormalWord
    children: tuple


def end_identity() -> EndTree:
    return EndTree(FormalWord(("S", 1), ()), (0,))


def end_labels(g: EndTree) -> list:
    out = []
    for ch in g.children:
        out.extend([ch] if isinstance(ch, int) else end_labels(ch))
    return out


def end_arity(g: EndTree) -> int:
    return len(end_labels(g))


def end_from_word(w: FormalWord) -> EndTree:
    kind, n = w.cod
    if tuple(w.dom) != ("S", 1) or kind != "S":
        raise WordTypeError("End words go from degree 1 to some degree in SC^{h,inf}")
    return EndTree(w, tuple(range(n)))


def _check_end(g: EndTree):
    if tuple(g.word.dom) != ("S", 1) or g.word.cod != ("S", len(g.children)):
        raise WordTypeError("End node word does not match its children")
    for ch in g.children:
        if not isinstance(ch, int):
            _check_end(ch)


def _shift(g: EndTree, off: int) -> EndTree:
    return EndTree(g.word, tuple(ch + off if isinstance(ch, int) else _shift(ch, off)
                                 for ch in g.children))


def end_normalize(ed: LittleDiscs, g: EndTree) -> EndTree:
    kids = []
    for ch in g.children:
        if isinstance(ch, int):
            kids.append(ch)
            continue
        ch = end_normalize(ed, ch)
        if not ch.word.tokens and isinstance(ch.children[0], int):
            kids.append(ch.children[0])
        else:
            kids.append(ch)
    w = word_normalize(ed, g.word)
    while len(kids) == 1 and not isinstance(kids[0], int):
        w = word_normalize(ed, word_concat(w, kids[0].word))
        kids = list(kids[0].children)
    return _sort_children(ed, w, kids)


def _child_key(ch):
    labels = [ch] if isinstance(ch, int) else end_labels(ch)
    return (0, min(labels), "") if labels else (1, 0, repr(ch))


def _relabel_word(ed, w: FormalWord, sigma) -> FormalWord:
    """Follow w by the relabeling sending old output sigma[i] to output i."""
    k = len(sigma)
    if tuple(sigma) == tuple(range(k)):
        return w
    pi = MultiHom(k, tuple(sigma), tuple(ed.identity() for _ in range(k)))
    return word_normalize(ed, word_concat(w, FormalWord(("S", k), (IOTA, act(pi), P))))


def _sort_children(ed, w: FormalWord, kids) -> EndTree:
    keys = [_child_key(ch) for ch in kids]
    sigma = sorted(range(len(kids)), key=lambda i: keys[i])
    groups, start = [], 0
    while start < len(sigma):
        end = start
        while end + 1 < len(sigma) and keys[sigma[end + 1]] == keys[sigma[start]]:
            end += 1
        if end > start:
            groups.append(range(start, end + 1))
        start = end + 1
    best = None
    for choice in itertools.product(*(itertools.permutations([sigma[i] for i in g])
                                      for g in groups)):
        s = list(sigma)
        for g, perm in zip(groups, choice):
            for i, v in zip(g, perm):
                s[i] = v
        cand = _relabel_word(ed, w, s)
        if best is None or repr(cand) < repr(best[0]):
            best = (cand, s)
    w, s = best
    return EndTree(w, tuple(kids[i] for i in s))


def end_compose(ed: LittleDiscs, f: EndTree, gs: Sequence[EndTree]) -> EndTree:
    """Plug gs[i] into output i of f; outputs of the result are numbered
    block by block."""
    _check_end(f)
    n = end_arity(f)
    if len(gs) != n:
        raise ArityMismatch(f"End element of arity {n} needs {n} inputs, got {len(gs)}")
    offs, acc = [], 0
    for g in gs:
        _check_end(g)
        offs.append(acc)
        acc += end_arity(g)

    def sub(t):
        return EndTree(t.word, tuple(_shift(gs[ch], offs[ch]) if isinstance(ch, int) else sub(ch)
                                     for ch in t.children))

    return end_normalize(ed, sub(f))


def _blockwise(op: SwissCheese, y: SChInf, fns: Sequence[Callable]):
    """Apply fns[i] to the generator holding full leaf i and regraft.

    ``fns[i](piece)`` returns (result, labels) with labels[a] the output label
    of full leaf a of the result.  Returns (tree, sorted labels) with the full
    leaves numbered by rank of label.
    """
    n = y.degree

    def build(p: Piece):
        deg = p.degree
        refs, f_pos = [], []

        def local(l):
            if l.color == "f":
                f_pos.append(l.pos)
                return Leaf("f", 0)
            refs.append(l)
            return Leaf("h", deg + len(refs) - 1)

        elem = schinf_from_tree(op, _map_leaves(p.tree, local))
        res, labels = fns[f_pos[0]](elem) if deg else (elem, [])
        kdeg = res.degree

        def back(l):
            if l.color == "f":
                return Leaf("f", ("F", labels[l.pos]))
            r = refs[l.pos - kdeg]
            if r.color == EXIT:
                return build(p.kids[r.pos])
            return Leaf("h", ("H", r.pos - n))

        return _map_leaves(res.tree, back)

    raw = build(y.pieces())
    flabels = sorted(l.pos[1] for l in iter_leaves(raw) if l.color == "f")
    rank = {lab: i for i, lab in enumerate(flabels)}
    N = len(flabels)
    tree = _map_leaves(raw, lambda l: Leaf("f", rank[l.pos[1]]) if l.color == "f"
                       else Leaf("h", N + l.pos[1]))
    return tree, flabels


def _end_eval(op: SwissCheese, g: EndTree, x: SChInf):
    y = eval_word(op, g.word, x)
    fns = []
    for ch in g.children:
        if isinstance(ch, int):
            fns.append(lambda piece, lab=ch: (piece, [lab]))
        else:
            fns.append(lambda piece, sub=ch: _end_eval(op, sub, piece))
    tree, labels = _blockwise(op, y, fns)
    return schinf_from_tree(op, tree), labels


def evaluate_end(op: SwissCheese, g: EndTree, x: SChInf) -> SChInf:
    """g applied to a degree-1 element; full leaf i of the result is output i."""
    if x.degree != 1:
        raise ArityMismatch("End elements act on degree-1 elements")
    res, labels = _end_eval(op, g, x)
    if labels != list(range(len(labels))):
        raise ValueError("End element outputs are not 0..k-1")
    return res


def apply_end(op: SwissCheese, x: SChInf, gs: Sequence[EndTree]) -> SChInf:
    """The action SC^{h,inf}(n, m) x End(k_1) x ... x End(k_n) -> SC^{h,inf}(sum k, m)."""
    if len(gs) != x.degree:
        raise ArityMismatch(f"degree {x.degree} element, {len(gs)} End elements")
    offs, acc = [], 0
    for g in gs:
        offs.append(acc)
        acc += end_arity(g)
    fns = [lambda piece, g=g, off=off: _shift_labels(_end_eval(op, g, piece), off)
           for g, off in zip(gs, offs)]
    tree, _ = _blockwise(op, x, fns)
    return schinf_from_tree(op, tree)


def _shift_labels(res, off):
    return res[0], [lab + off for lab in res[1]]


def rho_e(ed: LittleDiscs, t) -> EndTree:
    """The action of the operad E on SC^{h,inf}: each finite component becomes
    the word of its level sequence."""
    if isinstance(t, Leaf):
        return EndTree(FormalWord(("S", 1), ()), (t.pos,))

    def build(node):
        s, exits = component_to_le(ed, node)
        w = chain_from_le(normalize_le(ed, s))
        kids = tuple(ex.pos if isinstance(ex, Leaf) else build(ex.node) for ex in exits)
        return EndTree(w, kids)

    return end_normalize(ed, build(t))


# ---------------------------------------------------------------- semidirect product

@dataclass(frozen=True)
class SDElement:
    """A point of the semidirect product: color "h" with an SChInf value or
    color "f" with a point of O."""
    color: str
    value: object


class SemidirectOperad(OperadInstance):
    """SC^{h,inf} with O acting on the full-disc inputs through ``rho``."""

    colors = ("f", "h")

    def __init__(self, d: int, base: OperadInstance, rho: Callable):
        self.d = d
        self.sc = SwissCheese(d)
        self.ed = LittleDiscs(d)
        self.base = base
        self.rho = rho

    def input_colors(self, x: SDElement):
        if x.color == "f":
            return ("f",) * len(self.base.input_colors(x.value))
        return ("f",) * x.value.n + ("h",) * x.value.m

    def output_color(self, x: SDElement):
        return x.color

    def identity(self, color):
        if color == "f":
            return SDElement("f", self.base.identity(self.base.colors[0]))
        return SDElement("h", schinf_identity())

    def act(self, x: SDElement, perm):
        if x.color == "f":
            return SDElement("f", self.base.act(x.value, perm))
        return SDElement("h", schinf_act(self.sc, x.value, perm))

    def is_identity(self, x):
        if x.color == "f":
            return self.base.is_identity(x.value)
        return isinstance(x.value.tree, Leaf)

    def compose(self, x: SDElement, ys: Sequence[SDElement]):
        msg = check_composable(self, x, ys)
        if msg:
            if msg.startswith("arity"):
                raise ArityMismatch(msg)
            raise ColorMismatch(msg)
        if x.color == "f":
            return SDElement("f", self.base.compose(x.value, [y.value for y in ys]))
        n = x.value.n
        acted = apply_end(self.sc, x.value, [self.rho(y.value) for y in ys[:n]])
        return SDElement("h", compose_schinf(self.sc, acted, [y.value for y in ys[n:]]))


def rho_unit(o) -> EndTree:
    return end_identity()


# ---------------------------------------------------------------- sampling

def random_sch1(rng: random.Random, d: int, degree: int, depth: int = 2,
                lengths=LENGTH_CHOICES, identity_prob: float = 0.15) -> SCh1Element:
    """A random generator of the given degree (0 or 1)."""
    op = _sc(d)
    m_max = 1 if d == 1 else 2

    def build(dep, want_f):
        m = rng.randint(0, m_max)
        here = want_f and (m == 0 or dep <= 0 or rng.random() < 0.5)
        n = 1 if here else 0
        if n == 0 and m == 1 and rng.random() < identity_prob:
            label = op.identity("h")
        else:
            label = random_config(rng, d, HALF, n, m)
        f_child = rng.randrange(m) if want_f and not here else None
        kids = [Leaf("f", 0)] if n else []
        for j in range(m):
            if j == f_child:
                kids.append(Edge(random_length(rng, lengths), build(dep - 1, True)))
            elif dep > 0 and rng.random() < 0.4:
                kids.append(Edge(random_length(rng, lengths), build(dep - 1, False)))
            else:
                kids.append(Leaf("h", -1))
        return Node(label, tuple(kids))

    t = build(depth, degree == 1)
    order = list(range(h_count(t)))
    rng.shuffle(order)
    it = iter(order)
    t = _map_leaves(t, lambda l: Leaf("h", degree + next(it)) if l.color == "h" else l)
    return make_sch1(op, t)


def random_schinf(rng: random.Random, d: int, max_degree: int = 2, grafts: int = 3,
                  lengths=LENGTH_CHOICES) -> SChInf:
    """Graft random generators along half slots."""
    op = _sc(d)
    x = embed_leq1(random_sch1(rng, d, rng.randint(0, min(1, max_degree)), lengths=lengths))
    for _ in range(rng.randint(0, grafts)):
        if x.m == 0:
            break
        deg = rng.randint(0, 1) if x.degree < max_degree else 0
        g = embed_leq1(random_sch1(rng, d, deg, depth=1, lengths=lengths))
        ys = [schinf_identity()] * x.m
        ys[rng.randrange(x.m)] = g
        x = compose_schinf(op, x, ys)
    return x


def random_injective_hom(rng: random.Random, d: int, n_out: int) -> MultiHom:
    """A multi-hom whose fibers have size 0 or 1 (so degrees never merge)."""
    chosen = [j for j in range(n_out) if rng.random() < 0.7]
    rng.shuffle(chosen)
    f = tuple(chosen)
    parts = []
    for j in range(n_out):
        if j in chosen and rng.random() < 0.5:
            parts.append(LittleDiscs(d).identity())
        else:
            parts.append(random_config(rng, d, FULL, 1 if j in chosen else 0))
    return MultiHom(len(f), f, tuple(parts))


def random_word(rng: random.Random, d: int, dom: tuple, length: int = 8,
                times=(Fraction(0), INF)) -> FormalWord:
    """A well-typed word built from the evaluable part of the alphabet."""
    state = tuple(dom)
    toks = []
    for _ in range(length):
        kind, n = state
        if kind == "S":
            tok = IOTA
        else:
            r = rng.random()
            if r < 0.2:
                tok = P
            elif r < 0.45:
                tok = h(rng.choice(times))
            else:
                tok = act(random_injective_hom(rng, d, n))
        toks.append(tok)
        state = _step(state, tok)
    if state[0] == "W" and rng.random() < 0.7:
        toks.append(P)
    return FormalWord(tuple(dom), tuple(toks))
