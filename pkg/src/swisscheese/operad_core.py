"""Colored operads, collections and an axiom-checking harness.

Conventions used throughout the package:

* a permutation is a tuple ``s`` of ``range(n)``; ``compose_perm(s, t)`` is
  ``i -> s[t[i]]``;
* every operad acts on the right by relabeling inputs, ``(x . s)_i = x_{s(i)}``,
  so that ``(x . s) . t == x . compose_perm(s, t)``;
* the inputs of an element are listed color by color, in the order of
  ``op.colors``; composites order their inputs of each color by
  ``(slot, inner input)``.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np


class ArityMismatch(ValueError):
    """Wrong number of inputs for a composition."""


class ColorMismatch(ValueError):
    """An input of the wrong color was supplied to a slot."""


# ---------------------------------------------------------------- permutations

def identity_perm(n: int) -> tuple:
    return tuple(range(n))


def compose_perm(s: Sequence[int], t: Sequence[int]) -> tuple:
    if len(s) != len(t):
        raise ValueError("permutation sizes differ")
    return tuple(s[i] for i in t)


def inverse_perm(s: Sequence[int]) -> tuple:
    inv = [0] * len(s)
    for i, j in enumerate(s):
        inv[j] = i
    return tuple(inv)


def is_perm(s: Sequence[int], n: int) -> bool:
    return len(s) == n and sorted(s) == list(range(n))


def random_perm(rng: random.Random, n: int) -> tuple:
    s = list(range(n))
    rng.shuffle(s)
    return tuple(s)


def sorting_perm(keys: Sequence) -> tuple:
    """The permutation ``s`` with ``keys[s[0]] <= keys[s[1]] <= ...``."""
    return tuple(sorted(range(len(keys)), key=lambda i: keys[i]))


def random_color_perm(rng: random.Random, colors: Sequence[str]) -> tuple:
    """A random permutation of positions that preserves ``colors``."""
    out = list(range(len(colors)))
    for c in dict.fromkeys(colors):
        idx = [i for i, col in enumerate(colors) if col == c]
        shuffled = idx[:]
        rng.shuffle(shuffled)
        for a, b in zip(idx, shuffled):
            out[a] = b
    return tuple(out)


# ---------------------------------------------------------------- colored sets

@dataclass(frozen=True)
class ColoredSet:
    elements: tuple
    coloring: tuple

    def __post_init__(self):
        if len(self.elements) != len(self.coloring):
            raise ValueError("coloring must be total")

    def count(self, color) -> int:
        return sum(1 for c in self.coloring if c == color)

    @classmethod
    def of_arity(cls, n: int, m: int) -> "ColoredSet":
        """The colored set written (n, m): n full inputs, m half inputs."""
        return cls(tuple(range(n + m)), ("f",) * n + ("h",) * m)


# ---------------------------------------------------------------- operads

class OperadInstance:
    """Interface for a colored operad given by callbacks.

    Subclasses provide ``colors``, ``input_colors``, ``output_color``,
    ``compose``, ``identity`` and ``act``.
    """

    colors: tuple = ("*",)

    def input_colors(self, x) -> tuple:
        raise NotImplementedError

    def output_color(self, x):
        raise NotImplementedError

    def compose(self, x, ys: Sequence):
        raise NotImplementedError

    def identity(self, color):
        raise NotImplementedError

    def act(self, x, perm: Sequence[int]):
        raise NotImplementedError

    def eq(self, a, b) -> bool:
        return a == b

    def is_identity(self, x) -> bool:
        cols = self.input_colors(x)
        return len(cols) == 1 and self.eq(x, self.identity(cols[0]))

    def origins(self, x, ys: Sequence) -> list:
        """For each input of ``compose(x, ys)``, the pair (slot, inner input)."""
        out = []
        for c in self.colors:
            for i, y in enumerate(ys):
                for a, col in enumerate(self.input_colors(y)):
                    if col == c:
                        out.append((i, a))
        return out

    def partial_compose(self, x, slot: int, y):
        ys = [self.identity(c) for c in self.input_colors(x)]
        ys[slot] = y
        return self.compose(x, ys)


def check_composable(op: OperadInstance, x, ys: Sequence) -> str | None:
    cols = op.input_colors(x)
    if len(cols) != len(ys):
        return f"arity mismatch: {len(cols)} slots, {len(ys)} inputs"
    for i, (c, y) in enumerate(zip(cols, ys)):
        if op.output_color(y) != c:
            return f"color mismatch at slot {i}"
    return None


@dataclass
class AxiomReport:
    checked: int = 0
    failures: list = field(default_factory=list)
    noncomposable: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and not self.noncomposable

    def laws_failed(self) -> set:
        return {f["law"] for f in self.failures}


def block_perm_outer(op, x, ys, sigma) -> tuple:
    """Pi with compose(x . sigma, ys') == compose(x, ys) . Pi, ys'[i] = ys[sigma[i]]."""
    ys_l = [ys[s] for s in sigma]
    lhs = op.origins(op.act(x, sigma), ys_l)
    rhs = {o: q for q, o in enumerate(op.origins(x, ys))}
    return tuple(rhs[(sigma[i], a)] for (i, a) in lhs)


def block_perm_inner(op, x, ys, taus) -> tuple:
    """Pi with compose(x, [y_i . tau_i]) == compose(x, ys) . Pi."""
    lhs = op.origins(x, ys)
    rhs = {o: q for q, o in enumerate(lhs)}
    return tuple(rhs[(i, taus[i][a])] for (i, a) in lhs)


def assoc_perm(op, x, ys, zss, xy=None, yzs=None) -> tuple:
    """Pi with compose(compose(x, ys), flat) == compose(x, [y_i o zs_i]) . Pi.

    With inputs listed color by color the two bracketings order their
    inputs differently; both are indexed by triples (slot, inner, innermost).
    """
    outer = op.origins(x, ys)
    flat = [zss[i][a] for (i, a) in outer]
    if xy is None:
        xy = op.compose(x, ys)
    if yzs is None:
        yzs = [op.compose(y, zs) for y, zs in zip(ys, zss)]
    left = [outer[q] + (k,) for q, k in op.origins(xy, flat)]
    inner = [op.origins(y, zs) for y, zs in zip(ys, zss)]
    right = {(i,) + inner[i][b]: t for t, (i, b) in enumerate(op.origins(x, yzs))}
    return tuple(right[lab] for lab in left)


def check_operad_axioms(op: OperadInstance, sampler: Callable, count: int,
                        seed: int = 0) -> AxiomReport:
    """Check associativity, unitality and equivariance on sampled cases.

    ``sampler(rng)`` returns ``(x, ys, zss)`` where ``zss[i]`` fills the
    inputs of ``ys[i]``.
    """
    rng = random.Random(seed)
    rep = AxiomReport()
    for case in range(count):
        x, ys, zss = sampler(rng)
        bad = check_composable(op, x, ys) or next(
            (m for y, zs in zip(ys, zss) if (m := check_composable(op, y, zs))), None)
        if bad:
            rep.noncomposable.append({"case": case, "reason": bad})
            continue
        rep.checked += 1
        xy = op.compose(x, ys)
        # associativity
        flat = [zss[i][a] for (i, a) in op.origins(x, ys)]
        left = op.compose(xy, flat)
        yzs = [op.compose(y, zs) for y, zs in zip(ys, zss)]
        right = op.compose(x, yzs)
        if not op.eq(left, op.act(right, assoc_perm(op, x, ys, zss, xy, yzs))):
            rep.failures.append({"law": "associativity", "case": case})
        # unitality
        if not op.eq(op.compose(op.identity(op.output_color(x)), [x]), x):
            rep.failures.append({"law": "left unit", "case": case})
        if not op.eq(op.compose(x, [op.identity(c) for c in op.input_colors(x)]), x):
            rep.failures.append({"law": "right unit", "case": case})
        # equivariance in the outer slots
        sigma = random_color_perm(rng, op.input_colors(x))
        lhs = op.compose(op.act(x, sigma), [ys[s] for s in sigma])
        if not op.eq(lhs, op.act(xy, block_perm_outer(op, x, ys, sigma))):
            rep.failures.append({"law": "equivariance", "case": case})
        # equivariance in the inner inputs
        taus = [random_color_perm(rng, op.input_colors(y)) for y in ys]
        lhs = op.compose(x, [op.act(y, t) for y, t in zip(ys, taus)])
        if not op.eq(lhs, op.act(xy, block_perm_inner(op, x, ys, taus))):
            rep.failures.append({"law": "inner equivariance", "case": case})
    return rep


class MutatedOperad(OperadInstance):
    """Wraps an operad and swaps the first two inputs of every composite."""

    def __init__(self, base: OperadInstance):
        self.base = base
        self.colors = base.colors

    def input_colors(self, x):
        return self.base.input_colors(x)

    def output_color(self, x):
        return self.base.output_color(x)

    def identity(self, color):
        return self.base.identity(color)

    def act(self, x, perm):
        return self.base.act(x, perm)

    def eq(self, a, b):
        return self.base.eq(a, b)

    def compose(self, x, ys):
        z = self.base.compose(x, ys)
        cols = self.base.input_colors(z)
        if len(cols) >= 2 and cols[0] == cols[1] and not all(self.base.is_identity(y) for y in ys):
            swap = (1, 0) + tuple(range(2, len(cols)))
            z = self.base.act(z, swap)
        return z


def check_morphism(src: OperadInstance, tgt: OperadInstance, phi: Callable,
                   cases: Iterable) -> list:
    """Return the cases ``(x, slot, y)`` where ``phi`` fails to commute with
    partial composition."""
    bad = []
    for x, slot, y in cases:
        lhs = phi(src.partial_compose(x, slot, y))
        rhs = tgt.partial_compose(phi(x), slot, phi(y))
        if not tgt.eq(lhs, rhs):
            bad.append((x, slot, y))
    return bad


# ---------------------------------------------------------------- multi-output

@dataclass(frozen=True)
class MultiHom:
    """A point of O(I; J) in the decomposed form: a map f: I -> J and, for
    each output j, an element whose inputs are the sorted fiber of j."""

    n_in: int
    f: tuple
    parts: tuple

    @property
    def n_out(self) -> int:
        return len(self.parts)

    def fiber(self, j: int) -> tuple:
        return tuple(i for i in range(self.n_in) if self.f[i] == j)


def decompose_hom(op: OperadInstance, labeled: Sequence) -> tuple:
    """Split ``((labels_j, x_j))_j`` into ``(f, parts)``.

    ``labels_j`` lists, in the input order of ``x_j``, the global inputs
    that feed output j.
    """
    seen: dict = {}
    for j, (labels, x) in enumerate(labeled):
        if len(labels) != len(op.input_colors(x)):
            raise ValueError(f"output {j}: labels do not match the arity")
        for lab in labels:
            if lab in seen:
                raise ValueError(f"input {lab} feeds two outputs")
            seen[lab] = j
    n_in = len(seen)
    if sorted(seen) != list(range(n_in)):
        raise ValueError("inputs are not a contiguous range")
    f = tuple(seen[i] for i in range(n_in))
    parts = []
    for labels, x in labeled:
        sigma = sorting_perm(labels)
        parts.append(op.act(x, sigma) if sigma != identity_perm(len(labels)) else x)
    return f, tuple(parts)


def recompose_hom(op: OperadInstance, f: Sequence[int], parts: Sequence) -> tuple:
    n_out = len(parts)
    if any(not 0 <= j < n_out for j in f):
        raise ValueError("f leaves the output set")
    out = []
    for j, x in enumerate(parts):
        labels = tuple(i for i, fi in enumerate(f) if fi == j)
        if len(labels) != len(op.input_colors(x)):
            raise ValueError(f"output {j}: fiber size does not match the arity")
        out.append((labels, x))
    return tuple(out)


def multihom(op: OperadInstance, labeled: Sequence) -> MultiHom:
    f, parts = decompose_hom(op, labeled)
    return MultiHom(len(f), f, parts)


def multihom_identity(op: OperadInstance, n: int, color="*") -> MultiHom:
    return MultiHom(n, identity_perm(n), tuple(op.identity(color) for _ in range(n)))


def multihom_is_identity(op: OperadInstance, a: MultiHom) -> bool:
    return a.n_in == a.n_out and a.f == identity_perm(a.n_in) and all(
        op.is_identity(x) for x in a.parts)


def multihom_compose(op: OperadInstance, alpha: MultiHom, beta: MultiHom) -> MultiHom:
    """alpha o beta for beta: n_in -> n_mid and alpha: n_mid -> n_out."""
    if beta.n_out != alpha.n_in:
        raise ValueError("multi-hom arities do not compose")
    labeled = []
    for j, x in enumerate(alpha.parts):
        mids = alpha.fiber(j)
        ys = [beta.parts[m] for m in mids]
        z = op.compose(x, ys)
        labels = tuple(beta.fiber(mids[i])[a] for (i, a) in op.origins(x, ys))
        labeled.append((labels, z))
    return multihom(op, labeled)


def multihom_act_inputs(op: OperadInstance, a: MultiHom, sigma: Sequence[int]) -> MultiHom:
    """Right action on the source: input i of the result is input sigma[i] of a."""
    inv = inverse_perm(sigma)
    return multihom(op, [(tuple(inv[i] for i in a.fiber(j)), x) for j, x in enumerate(a.parts)])


def multihom_reindex_outputs(a: MultiHom, pi: Sequence[int]) -> MultiHom:
    """Output j of the result is output pi[j] of a."""
    inv = inverse_perm(pi)
    return MultiHom(a.n_in, tuple(inv[j] for j in a.f), tuple(a.parts[p] for p in pi))


def count_multi_homs(component_size: Callable[[int], int], n_in: int, n_out: int) -> int:
    """|O(n_in; n_out)| computed from the decomposition into single outputs."""
    total = 0
    for f in itertools.product(range(n_out), repeat=n_in):
        prod = 1
        for j in range(n_out):
            prod *= component_size(sum(1 for v in f if v == j))
        total += prod
    return total


def enumerate_multi_homs(op: OperadInstance, components: Callable[[int], list],
                         n_in: int, n_out: int) -> list:
    out = []
    for f in itertools.product(range(n_out), repeat=n_in):
        sizes = [sum(1 for v in f if v == j) for j in range(n_out)]
        for parts in itertools.product(*(components(s) for s in sizes)):
            out.append(MultiHom(n_in, tuple(f), tuple(parts)))
    return out


# ---------------------------------------------------------------- collections

@dataclass(frozen=True)
class TensorElem:
    """A point of (X (x) Y)(n): x, y and a shuffle word w (0 marks X)."""
    x: Any
    y: Any
    w: tuple


class Collection:
    """Finite collection: degree -> list of elements, with a right action."""

    def __init__(self, components: dict, act: Callable | None = None):
        self.components = {n: list(v) for n, v in components.items() if v}
        self._act = act or (lambda e, s: e)

    def degree(self, n: int) -> list:
        return self.components.get(n, [])

    def act(self, e, perm):
        return self._act(e, perm)

    def degrees(self) -> list:
        return sorted(self.components)

    def sizes(self) -> dict:
        return {n: len(v) for n, v in self.components.items()}


def _shuffle_words(n1: int, n2: int) -> list:
    out = []
    for zeros in itertools.combinations(range(n1 + n2), n1):
        zs = set(zeros)
        out.append(tuple(0 if i in zs else 1 for i in range(n1 + n2)))
    return out


def _tensor_act(X: Collection, Y: Collection):
    def act(e: TensorElem, sigma):
        w = e.w
        w2 = tuple(w[s] for s in sigma)
        rank = {}
        counts = [0, 0]
        for p, b in enumerate(w):
            rank[p] = counts[b]
            counts[b] += 1
        alpha, beta = [], []
        for p, b in enumerate(w2):
            (alpha if b == 0 else beta).append(rank[sigma[p]])
        return TensorElem(X.act(e.x, tuple(alpha)), Y.act(e.y, tuple(beta)), w2)
    return act


def tensor_coll(X: Collection, Y: Collection) -> Collection:
    """Day tensor; the induction is realized by shuffle representatives."""
    comps: dict = {}
    for n1 in X.degrees():
        for n2 in Y.degrees():
            words = _shuffle_words(n1, n2)
            comps.setdefault(n1 + n2, []).extend(
                TensorElem(x, y, w) for x in X.degree(n1) for y in Y.degree(n2) for w in words)
    return Collection(comps, _tensor_act(X, Y))


def unit_collection() -> Collection:
    return Collection({0: ["*"]})


def braid(e: TensorElem) -> TensorElem:
    return TensorElem(e.y, e.x, tuple(1 - b for b in e.w))


def unit_iso(e: TensorElem):
    """X (x) I -> X."""
    if any(e.w):
        raise ValueError("not in the image of X (x) I")
    return e.x


def flatten_left(e: TensorElem) -> tuple:
    """((x, y), z) -> (x, y, z, word over {0,1,2})."""
    inner = e.x
    ranks = iter(inner.w)
    w = tuple(next(ranks) if b == 0 else 2 for b in e.w)
    return inner.x, inner.y, e.y, w


def flatten_right(e: TensorElem) -> tuple:
    """(x, (y, z)) -> (x, y, z, word over {0,1,2})."""
    inner = e.y
    ranks = iter(inner.w)
    w = tuple(0 if b == 0 else 1 + next(ranks) for b in e.w)
    return e.x, inner.x, inner.y, w


@dataclass(frozen=True)
class CollLeq1:
    c0: tuple
    c1: tuple


def tensor_coll_leq1(c: CollLeq1, d: CollLeq1) -> CollLeq1:
    zero = tuple((a, b) for a in c.c0 for b in d.c0)
    one = tuple(("01", a, b) for a in c.c0 for b in d.c1) + tuple(
        ("10", a, b) for a in c.c1 for b in d.c0)
    return CollLeq1(zero, one)


def braid_leq1(e):
    if len(e) == 2:
        return (e[1], e[0])
    tag, a, b = e
    return ("10" if tag == "01" else "01", b, a)


LEQ1_UNIT = CollLeq1(("*",), ())


# ---------------------------------------------------------------- Coll functors

class ForgetH:
    """View the h-output part of an {f,h}-colored operad as an operad in
    collections: O^h(n, m) has degree n and arity m."""

    def __init__(self, op: OperadInstance):
        if tuple(op.colors) != ("f", "h"):
            raise ValueError("forget_h needs an {f,h}-colored operad")
        self.op = op

    def degree(self, x) -> int:
        return self.op.input_colors(x).count("f")

    def arity(self, x) -> int:
        return self.op.input_colors(x).count("h")

    def identity(self):
        return self.op.identity("h")

    def compose(self, x, ys: Sequence):
        if self.op.output_color(x) != "h" or any(self.op.output_color(y) != "h" for y in ys):
            raise ValueError("only h-output elements live in Coll")
        if len(ys) != self.arity(x):
            raise ValueError("arity mismatch")
        fulls = [self.op.identity("f")] * self.degree(x)
        return self.op.compose(x, fulls + list(ys))


def forget_h(op: OperadInstance) -> ForgetH:
    return ForgetH(op)


class DegreeOverflow(ValueError):
    pass


class TruncLeq1:
    """Degree 0 and 1 part of an operad in collections."""

    def __init__(self, coll_op: ForgetH):
        self.base = coll_op

    def degree(self, x) -> int:
        return self.base.degree(x)

    def compose(self, x, ys: Sequence):
        degs = [self.base.degree(x)] + [self.base.degree(y) for y in ys]
        if any(d > 1 for d in degs):
            raise DegreeOverflow("inputs must have degree 0 or 1")
        if sum(degs) > 1:
            raise DegreeOverflow("the composite has degree 2, which is discarded")
        return self.base.compose(x, ys)

    def compose_00(self, x, ys):
        return self._typed(x, ys, (0, 0))

    def compose_10(self, x, ys):
        return self._typed(x, ys, (1, 0))

    def compose_01(self, x, ys):
        return self._typed(x, ys, (0, 1))

    def _typed(self, x, ys, kind):
        dx = self.base.degree(x)
        dys = sum(self.base.degree(y) for y in ys)
        if (dx, dys) != kind:
            raise ValueError(f"expected degrees {kind}, got {(dx, dys)}")
        return self.compose(x, ys)


def truncate_leq1(coll_op: ForgetH) -> TruncLeq1:
    return TruncLeq1(coll_op)


# ---------------------------------------------------------------- End(B, A)

@dataclass(frozen=True, eq=False)
class EndMap:
    """A multilinear map from B^n (x) A^m to B (out 'f') or A (out 'h').

    ``tensor`` has one axis per input (in ``ins`` order) and a last output axis.
    """
    out: str
    ins: tuple
    tensor: np.ndarray

    def __eq__(self, other):
        return (isinstance(other, EndMap) and self.out == other.out and self.ins == other.ins
                and np.array_equal(self.tensor, other.tensor))

    def __hash__(self):
        return hash((self.out, self.ins, self.tensor.tobytes()))


class EndOperadDiscrete(OperadInstance):
    """The endomorphism operad of a pair (B, A) of F_p vector spaces."""

    colors = ("f", "h")

    def __init__(self, p: int, dim_b: int, dim_a: int):
        self.p = p
        self.dims = {"f": dim_b, "h": dim_a}

    def make(self, out: str, ins: Sequence[str], tensor) -> EndMap:
        ins = tuple(ins)
        if list(ins) != sorted(ins):
            raise ValueError("inputs must be listed full first")
        shape = tuple(self.dims[c] for c in ins) + (self.dims[out],)
        t = np.asarray(tensor, dtype=np.int64).reshape(shape) % self.p
        return EndMap(out, ins, t)

    def input_colors(self, x):
        return x.ins

    def output_color(self, x):
        return x.out

    def identity(self, color):
        return self.make(color, (color,), np.eye(self.dims[color], dtype=np.int64))

    def act(self, x, perm):
        perm = tuple(perm)
        ins = tuple(x.ins[s] for s in perm)
        if ins != x.ins:
            raise ValueError("permutation does not preserve colors")
        return EndMap(x.out, ins, np.transpose(x.tensor, perm + (len(perm),)))

    def compose(self, x, ys):
        msg = check_composable(self, x, ys)
        if msg:
            raise ValueError(msg)
        k = len(ys)
        # contraction labels: x's slots are 0..k-1, its output is k
        nxt = k + 1
        operands = [x.tensor, list(range(k)) + [k]]
        flat_labels = []
        for i, y in enumerate(ys):
            labs = list(range(nxt, nxt + len(y.ins)))
            nxt += len(y.ins)
            operands += [y.tensor, labs + [i]]
            flat_labels.append(labs)
        origins = self.origins(x, ys)
        out_labels = [flat_labels[i][a] for (i, a) in origins] + [k]
        if nxt > 52:
            raise ValueError("too many indices for a dense contraction")
        t = np.einsum(*operands, out_labels) % self.p
        ins = tuple(ys[i].ins[a] for (i, a) in origins)
        return EndMap(x.out, ins, t)

    def partial_compose(self, x, slot: int, y):
        if x.ins[slot] != y.out:
            raise ColorMismatch(f"slot {slot} has color {x.ins[slot]}, input has {y.out}")
        k, l = len(x.ins), len(y.ins)
        t = np.tensordot(y.tensor, x.tensor, axes=([l], [slot]))
        # axes of t: y inputs, x inputs other than slot, output
        slots = [(s, a) for s in range(k) for a in (range(l) if s == slot else (0,))]
        color = {(s, a): (y.ins[a] if s == slot else x.ins[s]) for s, a in slots}
        order = [o for c in self.colors for o in slots if color[o] == c]
        axes = [a if s == slot else l + (s if s < slot else s - 1) for s, a in order]
        t = np.transpose(t, axes + [len(axes)]) % self.p
        return EndMap(x.out, tuple(color[o] for o in order), t)


class UnitOperad(OperadInstance):
    """The initial operad: one point, in arity 1."""

    colors = ("f",)
    POINT = "1"

    def input_colors(self, x):
        return ("f",)

    def output_color(self, x):
        return "f"

    def compose(self, x, ys):
        if len(ys) != 1:
            raise ArityMismatch("the unit operad only has arity 1")
        return self.POINT

    def identity(self, color="f"):
        return self.POINT

    def act(self, x, perm):
        return x
