"""Trees with operad-labeled vertices and edge lengths in [0, inf].

The same data type serves three purposes:

* points of the W construction, normalized by ``normalize_w``;
* level sequences (``LevelSequence``), normalized by ``normalize_le``;
* points of the operad E, stored as W-trees over E_d in which every maximal
  finite subtree is level, normalized by ``normalize_e``.

A leaf carries its color and its position in the color-major input list of
the whole tree.  A vertex lists its children in the input order of its
label.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .geometry import (FULL, INF, ParseError, config_from_dict, config_to_dict,
                       ext_scale, format_ext, parse_ext, random_config)
from .operad_core import (ArityMismatch, ColorMismatch, MultiHom, OperadInstance,
                          identity_perm, inverse_perm, multihom_compose)


@dataclass(frozen=True)
class Leaf:
    color: str
    pos: int


@dataclass(frozen=True)
class Node:
    label: object
    children: tuple


@dataclass(frozen=True)
class Edge:
    length: object
    node: Node


# ---------------------------------------------------------------- basics

def iter_leaves(t):
    if isinstance(t, Leaf):
        yield t
        return
    for ch in t.children:
        if isinstance(ch, Leaf):
            yield ch
        else:
            yield from iter_leaves(ch.node)


def tree_input_colors(t) -> tuple:
    return tuple(leaf.color for leaf in sorted(iter_leaves(t), key=lambda l: l.pos))


def tree_output_color(op: OperadInstance, t):
    return t.color if isinstance(t, Leaf) else op.output_color(t.label)


def vertex_count(t) -> int:
    if isinstance(t, Leaf):
        return 0
    return 1 + sum(vertex_count(ch.node) for ch in t.children if isinstance(ch, Edge))


def iter_edges(t, depth: int = 0):
    """Yield (depth of the upper vertex, length) for every internal edge."""
    if isinstance(t, Leaf):
        return
    for ch in t.children:
        if isinstance(ch, Edge):
            yield depth, ch.length
            yield from iter_edges(ch.node, depth + 1)


def relabel(t, mapping):
    """Replace every leaf position p by mapping[p]."""
    if isinstance(t, Leaf):
        return Leaf(t.color, mapping[t.pos])
    return Node(t.label, tuple(
        Leaf(ch.color, mapping[ch.pos]) if isinstance(ch, Leaf)
        else Edge(ch.length, relabel(ch.node, mapping)) for ch in t.children))


def _check_shape(op: OperadInstance, t):
    if isinstance(t, Leaf):
        return
    cols = op.input_colors(t.label)
    if len(cols) != len(t.children):
        raise ArityMismatch("vertex arity differs from its child count")
    for c, ch in zip(cols, t.children):
        got = ch.color if isinstance(ch, Leaf) else op.output_color(ch.node.label)
        if got != c:
            raise ColorMismatch("edge colors do not match")
        if isinstance(ch, Edge):
            _check_shape(op, ch.node)


def check_tree(op: OperadInstance, t):
    _check_shape(op, t)
    pos = sorted(leaf.pos for leaf in iter_leaves(t))
    if pos != list(range(len(pos))):
        raise ValueError("leaf positions are not 0..n-1")
    cols = tree_input_colors(t)
    order = {c: i for i, c in enumerate(op.colors)}
    if [order[c] for c in cols] != sorted(order[c] for c in cols):
        raise ValueError("leaf positions are not listed color by color")


# ---------------------------------------------------------------- grafting

def graft_origins(op: OperadInstance, inputs: Sequence) -> dict:
    """(slot, inner position) -> position in the grafted tree."""
    out, k = {}, 0
    for c in op.colors:
        for q, y in enumerate(inputs):
            for a, col in enumerate(tree_input_colors(y)):
                if col == c:
                    out[(q, a)] = k
                    k += 1
    return out


def graft(op: OperadInstance, outer, inputs: Sequence):
    """Attach ``inputs[q]`` at leaf q of ``outer``; new edges have length inf."""
    cols = tree_input_colors(outer)
    if len(cols) != len(inputs):
        raise ArityMismatch(f"{len(cols)} leaves, {len(inputs)} inputs")
    for q, (c, y) in enumerate(zip(cols, inputs)):
        if tree_output_color(op, y) != c:
            raise ColorMismatch(f"input {q} has the wrong color")
    new = graft_origins(op, inputs)
    subs = [relabel(y, {a: new[(q, a)] for a in range(len(tree_input_colors(y)))})
            for q, y in enumerate(inputs)]

    def sub(node):
        kids = []
        for ch in node.children:
            if isinstance(ch, Leaf):
                y = subs[ch.pos]
                kids.append(y if isinstance(y, Leaf) else Edge(INF, y))
            else:
                kids.append(Edge(ch.length, sub(ch.node)))
        return Node(node.label, tuple(kids))

    if isinstance(outer, Leaf):
        return subs[0]
    return sub(outer)


# ---------------------------------------------------------------- rewriting

def _flank(item):
    return INF if isinstance(item, Leaf) else item.length


def find_redexes(op: OperadInstance, t, identity_rule: str) -> list:
    """Redexes as ("R1", path to parent, slot) or ("R2", path to vertex).

    ``identity_rule`` is "sum" (delete any unary identity, summing lengths)
    or "inf" (only when both flanking lengths are inf; external edges count
    as inf).
    """
    out = []

    def walk(node, path, parent_len):
        if len(node.children) == 1 and op.is_identity(node.label):
            if identity_rule == "sum" or (parent_len is INF and _flank(node.children[0]) is INF):
                out.append(("R2", path))
        for j, ch in enumerate(node.children):
            if isinstance(ch, Edge):
                if ch.length == 0:
                    out.append(("R1", path, j))
                walk(ch.node, path + (j,), ch.length)

    if isinstance(t, Node):
        walk(t, (), INF)
    return out


def _modify(node, path, fn, parent_len=None):
    if not path:
        return fn(node, parent_len)
    j = path[0]
    ch = node.children[j]
    item = _modify(ch.node, path[1:], fn, ch.length)
    new = Node(node.label, node.children[:j] + (item,) + node.children[j + 1:])
    return new if parent_len is None else Edge(parent_len, new)


def _wrap(node, parent_len):
    return node if parent_len is None else Edge(parent_len, node)


def contract_edge(op: OperadInstance, parent: Node, slot: int) -> Node:
    """Compose the labels across the edge at ``slot``."""
    child = parent.children[slot].node
    ys = [op.identity(c) for c in op.input_colors(parent.label)]
    ys[slot] = child.label
    label = op.compose(parent.label, ys)
    kids = tuple(child.children[a] if i == slot else parent.children[i]
                 for i, a in op.origins(parent.label, ys))
    return Node(label, kids)


def apply_redex(op: OperadInstance, t, redex):
    if redex[0] == "R1":
        _, path, slot = redex
        return _modify(t, path, lambda n, pl: _wrap(contract_edge(op, n, slot), pl))

    def drop(node, parent_len):
        ch = node.children[0]
        if parent_len is None:
            return ch if isinstance(ch, Leaf) else ch.node
        if isinstance(ch, Leaf):
            return ch
        return Edge(parent_len + ch.length, ch.node)

    return _modify(t, redex[1], drop)


def _normalize(op, t, identity_rule, rng):
    while True:
        reds = find_redexes(op, t, identity_rule)
        if not reds:
            return canonicalize(op, t)
        t = apply_redex(op, t, rng.choice(reds) if rng is not None else reds[0])


def normalize_w(op: OperadInstance, t, rng: random.Random | None = None):
    """Zero-length contraction plus deletion of unary identities with the
    flanking lengths summed; ``rng`` picks the redex order."""
    return _normalize(op, t, "sum", rng)


def normalize_e(op: OperadInstance, t, rng: random.Random | None = None):
    """Zero-length contraction plus deletion of unary identities flanked by
    inf on both sides."""
    return _normalize(op, t, "inf", rng)


# ---------------------------------------------------------------- canonical form

def _min_leaf(t):
    return min((leaf.pos for leaf in iter_leaves(t)), default=None)


def canonicalize(op: OperadInstance, t):
    """Pick the representative of the isomorphism class of ``t``: children of
    each color block sorted by smallest leaf; leafless subtrees by content,
    with ties broken on the relabeled vertex label."""
    if isinstance(t, Leaf):
        return t
    kids = []
    keys = []
    for ch in t.children:
        if isinstance(ch, Leaf):
            kids.append(ch)
            keys.append((0, ch.pos, ""))
        else:
            sub = canonicalize(op, ch.node)
            item = Edge(ch.length, sub)
            kids.append(item)
            lo = _min_leaf(sub)
            keys.append((0, lo, "") if lo is not None else (1, 0, repr(item)))
    cols = op.input_colors(t.label)
    blocks: dict = {}
    for i, c in enumerate(cols):
        blocks.setdefault(c, []).append(i)
    sigma = list(range(len(cols)))
    tie_groups = []
    for idx in blocks.values():
        ordered = sorted(idx, key=lambda i: keys[i])
        for slot, old in zip(idx, ordered):
            sigma[slot] = old
        start = 0
        while start < len(ordered):
            end = start
            while end + 1 < len(ordered) and keys[ordered[end + 1]] == keys[ordered[start]]:
                end += 1
            if end > start:
                tie_groups.append([idx[s] for s in range(start, end + 1)])
            start = end + 1
    sigma = tuple(sigma)
    label = op.act(t.label, sigma) if sigma != identity_perm(len(sigma)) else t.label
    if tie_groups:
        # the tied children are equal, so only the label depends on the choice
        best = None
        for choice in itertools.product(*(itertools.permutations(g) for g in tie_groups)):
            s = list(sigma)
            for g, perm in zip(tie_groups, choice):
                vals = [sigma[i] for i in g]
                for i, p in zip(g, perm):
                    s[i] = vals[g.index(p)]
            cand = op.act(t.label, tuple(s))
            key = label_key(op, cand)
            if best is None or key < best[0]:
                best = (key, cand, tuple(s))
        label, sigma = best[1], best[2]
    return Node(label, tuple(kids[i] for i in sigma))


def label_key(op: OperadInstance, x) -> str:
    fn = getattr(op, "label_key", None)
    return fn(x) if fn is not None else repr(x)


# ---------------------------------------------------------------- W operads

class WOperad(OperadInstance):
    """The W construction on ``base`` (identity rule "sum") or the operad E
    (identity rule "inf") with grafting plus normalization as composition."""

    def __init__(self, base: OperadInstance, identity_rule: str = "sum"):
        self.base = base
        self.colors = base.colors
        self.identity_rule = identity_rule

    def input_colors(self, t):
        return tree_input_colors(t)

    def output_color(self, t):
        return tree_output_color(self.base, t)

    def normalize(self, t, rng=None):
        return _normalize(self.base, t, self.identity_rule, rng)

    def compose(self, t, ys):
        return self.normalize(graft(self.base, t, ys))

    def identity(self, color):
        return Leaf(color, 0)

    def act(self, t, perm):
        if isinstance(t, Leaf):
            return t
        return canonicalize(self.base, relabel(t, inverse_perm(perm)))

    def is_identity(self, t):
        return isinstance(t, Leaf)


def e_operad(base: OperadInstance) -> WOperad:
    return WOperad(base, "inf")


def single_vertex(op: OperadInstance, x):
    """The tree with one vertex labeled x."""
    cols = op.input_colors(x)
    return Node(x, tuple(Leaf(c, i) for i, c in enumerate(cols)))


def collapse_tree(op: OperadInstance, t):
    """Compose all labels (every length set to 0)."""
    def go(item):
        if isinstance(item, Leaf):
            return op.identity(item.color), [item.pos]
        node = item if isinstance(item, Node) else item.node
        parts = [go(ch) for ch in node.children]
        ys = [p[0] for p in parts]
        z = op.compose(node.label, ys)
        return z, [parts[i][1][a] for i, a in op.origins(node.label, ys)]

    z, leafpos = go(t)
    sigma = inverse_perm(leafpos)
    return op.act(z, sigma) if sigma != identity_perm(len(sigma)) else z


def collapse_lengths(op: OperadInstance, t):
    """The operad map E -> E_d sending every length to 0."""
    return collapse_tree(op, t)


# ---------------------------------------------------------------- random trees

LENGTH_CHOICES = (Fraction(0), Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), INF, INF)


def random_length(rng: random.Random, choices=LENGTH_CHOICES):
    """Draw from ``choices``; the default table also mixes in random fractions."""
    if choices is LENGTH_CHOICES and rng.random() < 0.2:
        return Fraction(rng.randint(1, 9), rng.randint(1, 4))
    return rng.choice(choices)


def random_wtree(rng: random.Random, op: OperadInstance, sample_label: Callable,
                 depth: int = 3, leaf_prob: float = 0.5, identity_prob: float = 0.2,
                 lengths=LENGTH_CHOICES, out_color=None):
    """A random tree; ``sample_label(rng, color)`` returns a vertex label."""
    color = out_color or op.colors[0]

    def build(c, dep):
        if rng.random() < identity_prob:
            x = op.identity(c)
        else:
            x = sample_label(rng, c)
        kids = []
        for col in op.input_colors(x):
            if dep <= 0 or rng.random() < leaf_prob:
                kids.append(Leaf(col, -1))
            else:
                kids.append(Edge(random_length(rng, lengths), build(col, dep - 1)))
        return Node(x, tuple(kids))

    t = build(color, depth)
    # number the leaves color by color in random order
    leaves = list(iter_leaves(t))
    by_color = {c: [i for i, l in enumerate(leaves) if l.color == c] for c in op.colors}
    pos = [0] * len(leaves)
    k = 0
    for c in op.colors:
        idx = by_color[c][:]
        rng.shuffle(idx)
        for i in idx:
            pos[i] = k
            k += 1
    it = iter(pos)

    def number(node):
        return Node(node.label, tuple(
            Leaf(ch.color, next(it)) if isinstance(ch, Leaf)
            else Edge(ch.length, number(ch.node)) for ch in node.children))

    return number(t)


def ed_label_sampler(d: int, max_arity: int = 3):
    def sample(rng, color):
        return random_config(rng, d, FULL, rng.randint(0, max_arity))
    return sample


# ---------------------------------------------------------------- level sequences

@dataclass(frozen=True)
class LevelSequence:
    """A point of LE_d(n_in, n_out): levels[0] is nearest the outputs."""
    n_in: int
    n_out: int
    levels: tuple = ()
    lengths: tuple = ()

    @property
    def k(self) -> int:
        return len(self.lengths)


def le_identity(n: int) -> LevelSequence:
    return LevelSequence(n, n, (), ())


def make_level_sequence(levels: Sequence[MultiHom], lengths: Sequence) -> LevelSequence:
    levels, lengths = tuple(levels), tuple(lengths)
    if not levels:
        raise ValueError("use le_identity for the empty sequence")
    if len(lengths) != len(levels) - 1:
        raise ValueError("need exactly one length between consecutive levels")
    for upper, lower in zip(levels, levels[1:]):
        if upper.n_in != lower.n_out:
            raise ArityMismatch("adjacent levels do not compose")
    for t in lengths:
        if t is not INF and (not isinstance(t, Fraction) or t < 0):
            raise ValueError(f"bad length {t!r}")
    return LevelSequence(levels[-1].n_in, levels[0].n_out, levels, lengths)


def _is_relabeling(op, a: MultiHom) -> bool:
    return (a.n_in == a.n_out and sorted(a.f) == list(range(a.n_in))
            and all(op.is_identity(x) for x in a.parts))


def _le_redexes(op, s: LevelSequence) -> list:
    out = [("R1", j) for j, t in enumerate(s.lengths) if t == 0]
    n = len(s.levels)
    for j, a in enumerate(s.levels):
        above = s.lengths[j - 1] if j > 0 else INF
        below = s.lengths[j] if j < n - 1 else INF
        if above is not INF or below is not INF or not _is_relabeling(op, a):
            continue
        if n == 1 and a.f != identity_perm(a.n_in):
            continue  # a bare permutation is not the identity
        out.append(("R2", j))
    return out


def _le_apply(op, s: LevelSequence, red) -> LevelSequence:
    levels, lengths = list(s.levels), list(s.lengths)
    kind, j = red
    if kind == "R1":
        levels[j:j + 2] = [multihom_compose(op, levels[j], levels[j + 1])]
        del lengths[j]
    elif len(levels) == 1:
        return le_identity(s.n_in)
    elif j < len(levels) - 1:
        levels[j + 1] = multihom_compose(op, levels[j], levels[j + 1])
        del levels[j]
        del lengths[j]
    else:
        levels[j - 1] = multihom_compose(op, levels[j - 1], levels[j])
        del levels[j]
        del lengths[j - 1]
    return LevelSequence(s.n_in, s.n_out, tuple(levels), tuple(lengths))


def le_forest(op, s: LevelSequence) -> list:
    """One tree per output; leaves carry the global input labels."""
    color = op.colors[0]
    last = len(s.levels)

    def vertex(i, e):
        a = s.levels[i]
        kids = []
        for c in a.fiber(e):
            if i == last - 1:
                kids.append(Leaf(color, c))
            else:
                kids.append(Edge(s.lengths[i], vertex(i + 1, c)))
        return Node(a.parts[e], tuple(kids))

    return [vertex(0, j) for j in range(s.n_out)]


def canonicalize_le(op, s: LevelSequence) -> LevelSequence:
    """Choose the representative whose intermediate sets are numbered
    breadth first (level maps monotone)."""
    if not s.levels:
        return s
    current = [canonicalize(op, t) for t in le_forest(op, s)]
    levels = []
    for i in range(len(s.levels)):
        nxt, f = [], []
        leaf_f = {}
        for idx, node in enumerate(current):
            for ch in node.children:
                if isinstance(ch, Leaf):
                    leaf_f[ch.pos] = idx
                else:
                    nxt.append(ch.node)
                    f.append(idx)
        if i == len(s.levels) - 1:
            f = [leaf_f[p] for p in range(s.n_in)]
        levels.append(MultiHom(len(f), tuple(f), tuple(n.label for n in current)))
        current = nxt
    return LevelSequence(s.n_in, s.n_out, tuple(levels), s.lengths)


def normalize_le(op, s: LevelSequence, rng: random.Random | None = None) -> LevelSequence:
    """Fixed point of the two level-sequence relations, in canonical form."""
    while True:
        reds = _le_redexes(op, s)
        if not reds:
            return canonicalize_le(op, s)
        s = _le_apply(op, s, rng.choice(reds) if rng is not None else reds[0])


def compose_le(op, s1: LevelSequence, s2: LevelSequence) -> LevelSequence:
    """s1 after s2: s2's outputs feed s1's inputs, joined by length inf."""
    if s1.n_in != s2.n_out:
        raise ArityMismatch(f"cannot compose LE({s1.n_in}, {s1.n_out}) after "
                            f"LE({s2.n_in}, {s2.n_out})")
    if not s1.levels:
        return normalize_le(op, s2)
    if not s2.levels:
        return normalize_le(op, s1)
    return normalize_le(op, LevelSequence(
        s2.n_in, s1.n_out, s1.levels + s2.levels, s1.lengths + (INF,) + s2.lengths))


def random_multihom(rng: random.Random, op, sample_label: Callable, n_in: int, n_out: int,
                    identity_prob: float = 0.3) -> MultiHom:
    f = tuple(rng.randrange(n_out) for _ in range(n_in)) if n_out else ()
    parts = []
    color = op.colors[0]
    for j in range(n_out):
        size = sum(1 for v in f if v == j)
        if size == 1 and rng.random() < identity_prob:
            parts.append(op.identity(color))
        else:
            x = sample_label(rng, size)
            parts.append(x)
    return MultiHom(n_in, f, tuple(parts))


def random_level_sequence(rng: random.Random, op, sample_label: Callable, n_out: int = 1,
                          max_levels: int = 4, max_width: int = 3,
                          lengths=LENGTH_CHOICES) -> LevelSequence:
    """``sample_label(rng, arity)`` returns an element of the given arity."""
    count = rng.randint(1, max_levels)
    levels, widths = [], [n_out]
    for _ in range(count):
        upper = widths[-1]
        if rng.random() < 0.2:
            n = upper
            a = MultiHom(n, identity_perm(n), tuple(op.identity(op.colors[0]) for _ in range(n)))
        else:
            n = rng.randint(0, max_width) if upper else 0
            a = random_multihom(rng, op, sample_label, n, upper)
        levels.append(a)
        widths.append(n)
    ts = [random_length(rng, lengths) for _ in range(count - 1)]
    return make_level_sequence(levels, ts)


def ed_arity_sampler(d: int):
    def sample(rng, n):
        return random_config(rng, d, FULL, n)
    return sample


# ---------------------------------------------------------------- the operad E

def e_from_le(op, s: LevelSequence):
    """The point of E given by a generator in LE_d(n, 1)."""
    if s.n_out != 1:
        raise ValueError("generators of E have one output")
    if not s.levels:
        return Leaf(op.colors[0], 0)
    return normalize_e(op, le_forest(op, s)[0])


def e_from_le_fibers(op, s: LevelSequence) -> tuple:
    """Split a point of LE_d(n, n') into n' points of E, one per output, each
    with its inputs renumbered within its fiber.  Returns (f, trees)."""
    if not s.levels:
        return identity_perm(s.n_in), tuple(Leaf(op.colors[0], 0) for _ in range(s.n_in))
    f = [None] * s.n_in
    out = []
    for j, t in enumerate(le_forest(op, s)):
        labels = sorted(leaf.pos for leaf in iter_leaves(t))
        for p in labels:
            f[p] = j
        out.append(normalize_e(op, relabel(t, {p: r for r, p in enumerate(labels)})))
    return tuple(f), tuple(out)


def e_compose(op, outer, inputs: Sequence):
    return normalize_e(op, graft(op, outer, inputs))


def fiberwise_perm(op, f: Sequence[int], trees: Sequence) -> tuple:
    """sigma with e_compose(x, trees) . sigma numbering inputs by f."""
    n_out = len(trees)
    fibers = [[i for i, v in enumerate(f) if v == j] for j in range(n_out)]
    origins = graft_origins(op, trees)
    glob = [fibers[q][a] for q, a in sorted(origins, key=origins.get)]
    return inverse_perm(glob)


def components(t) -> list:
    """Roots of the maximal finite subtrees with their depth in ``t``."""
    out = []

    def walk(node, depth, is_root):
        if is_root:
            out.append((node, depth))
        for ch in node.children:
            if isinstance(ch, Edge):
                walk(ch.node, depth + 1, ch.length is INF)

    if isinstance(t, Node):
        walk(t, 0, True)
    return out


def component_levels(root: Node):
    """(lengths by level, depths of exits, vertex depths) of one component."""
    lengths: dict = {}
    exits, depths = [], []

    def walk(node, depth):
        depths.append(depth)
        for ch in node.children:
            if isinstance(ch, Leaf) or ch.length is INF:
                exits.append(depth)
            else:
                lengths.setdefault(depth, set()).add(ch.length)
                walk(ch.node, depth + 1)

    walk(root, 0)
    return lengths, exits, depths


def is_level_normal(op, t) -> bool:
    """Every maximal finite subtree is level and no relation applies."""
    if find_redexes(op, t, "inf"):
        return False
    for root, _ in components(t):
        lengths, exits, depths = component_levels(root)
        if any(len(v) != 1 for v in lengths.values()):
            return False
        if exits and set(exits) != {max(depths)}:
            return False
    return True


def component_to_le(op, root: Node) -> tuple:
    """Read one finite component as a level sequence in LE_d(k, 1).

    Returns the sequence and the exits (Leaf or inf Edge) in input order.
    """
    lengths, exits, depths = component_levels(root)
    bottom = max(depths)
    levels, ts = [], []
    current = [root]
    exit_items: list = []
    for depth in range(bottom + 1):
        nxt, f = [], []
        for idx, node in enumerate(current):
            for ch in node.children:
                if isinstance(ch, Leaf) or ch.length is INF:
                    exit_items.append(ch)
                    f.append(idx)
                else:
                    nxt.append(ch.node)
                    f.append(idx)
        levels.append(MultiHom(len(f), tuple(f), tuple(n.label for n in current)))
        if depth < bottom:
            ts.append(next(iter(lengths[depth])))
        current = nxt
    return make_level_sequence(levels, ts), exit_items


def staged_collapse(op, t, depth: int, s: Fraction):
    """Scale every length hanging below vertices at ``depth`` by (1 - s)."""
    s = Fraction(s)
    if not 0 <= s <= 1:
        raise ValueError("s must lie in [0, 1]")
    if s == 0 or isinstance(t, Leaf):
        return t

    def walk(node, dep):
        kids = []
        for ch in node.children:
            if isinstance(ch, Leaf):
                kids.append(ch)
            else:
                length = ext_scale(ch.length, 1 - s) if dep == depth else ch.length
                kids.append(Edge(length, walk(ch.node, dep + 1)))
        return Node(node.label, tuple(kids))

    out = normalize_e(op, walk(t, 0))
    if not is_level_normal(op, out):
        raise ValueError(f"collapsing depth {depth} breaks the level condition; "
                         "collapse deeper strata first")
    return out


def max_edge_depth(t) -> int:
    return max((d for d, _ in iter_edges(t)), default=-1)


def collapse_by_strata(op, t):
    """Collapse the deepest stratum to 0 repeatedly until one vertex is left."""
    while max_edge_depth(t) >= 0:
        t = staged_collapse(op, t, max_edge_depth(t), Fraction(1))
    return t


def random_e_element(rng: random.Random, op, sample_label: Callable, pieces: int = 2):
    """A point of E obtained by grafting random generators."""
    t = e_from_le(op, random_level_sequence(rng, op, sample_label, max_levels=3))
    for _ in range(rng.randint(0, pieces)):
        n = len(tree_input_colors(t))
        if not n:
            break
        q = rng.randrange(n)
        g = e_from_le(op, random_level_sequence(rng, op, sample_label, max_levels=3))
        ys = [Leaf(op.colors[0], 0)] * n
        ys[q] = g
        t = e_compose(op, t, ys)
    return t


# ---------------------------------------------------------------- JSON

def tree_to_dict(t, encode: Callable = config_to_dict) -> dict:
    if isinstance(t, Leaf):
        return {"leaf": t.pos, "color": t.color}
    edges = []
    for ch in t.children:
        if isinstance(ch, Leaf):
            edges.append({"child": {"leaf": ch.pos, "color": ch.color}})
        else:
            edges.append({"len": format_ext(ch.length), "child": tree_to_dict(ch.node, encode)})
    return {"vertex": encode(t.label), "edges": edges}


def tree_from_dict(data, decode: Callable = config_from_dict):
    if not isinstance(data, dict):
        raise ParseError("a tree is a JSON object")
    if "leaf" in data:
        if not isinstance(data["leaf"], int):
            raise ParseError("leaf position must be an integer")
        return Leaf(data.get("color", "f"), data["leaf"])
    if "vertex" not in data:
        raise ParseError("a tree needs a vertex or a leaf")
    kids = []
    for e in data.get("edges", []):
        child = tree_from_dict(e.get("child"), decode)
        if isinstance(child, Leaf):
            kids.append(child)
        else:
            if "len" not in e:
                raise ParseError("internal edges need a length")
            kids.append(Edge(parse_ext(e["len"]), child))
    return Node(decode(data["vertex"]), tuple(kids))


def multihom_to_dict(a: MultiHom, encode: Callable = config_to_dict) -> dict:
    return {"map": list(a.f), "parts": [encode(x) for x in a.parts]}


def le_to_dict(s: LevelSequence, encode: Callable = config_to_dict) -> dict:
    return {"n_in": s.n_in, "n_out": s.n_out,
            "levels": [multihom_to_dict(a, encode) for a in s.levels],
            "lengths": [format_ext(t) for t in s.lengths]}


def le_from_dict(data, decode: Callable = config_from_dict) -> LevelSequence:
    try:
        levels = [MultiHom(len(lv["map"]), tuple(lv["map"]), tuple(decode(x) for x in lv["parts"]))
                  for lv in data["levels"]]
        lengths = [parse_ext(t) for t in data["lengths"]]
    except (KeyError, TypeError):
        raise ParseError("a level sequence needs levels and lengths") from None
    for a in levels:
        if any(not isinstance(v, int) or not 0 <= v < len(a.parts) for v in a.f):
            raise ParseError("level map leaves its target")
        for j, x in enumerate(a.parts):
            if getattr(x, "n", len(a.fiber(j))) != len(a.fiber(j)):
                raise ParseError(f"part {j} has the wrong arity for its fiber")
    if not levels:
        return le_identity(int(data.get("n_in", 0)))
    return make_level_sequence(levels, lengths)
