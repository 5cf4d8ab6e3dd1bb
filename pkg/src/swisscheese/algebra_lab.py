"""Desk-scale linear models over F_p.

Operads here are discrete: each component of a configuration space is a
word.  A full-output word lists the full inputs from left to right (the
associative operad); a half-output word starts with the anchored half input,
if any, and then lists the full inputs to its right (components of SC_1^h).

Conventions:

* A right module: the half interval sits at the left end, so the full discs
  to its right act on A from the right, ``a . b``.  ``rho[a, b, c]`` is the
  coefficient of e_c in e_a . e_b.
* End(A) is the algebra of matrices acting on row vectors, a -> a M, so
  b -> (matrix of a -> a . b) is an algebra map.
* Every discrete operad used here has free symmetric actions, so each orbit
  of components has a single representative.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import FULL, Configuration, pi0_invariant_d1
from .operad_core import EndOperadDiscrete, OperadInstance, inverse_perm, is_perm


class EnumerationBound(ValueError):
    pass


class CutoffError(ValueError):
    pass


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, int(p ** 0.5) + 1))


@dataclass(frozen=True)
class FieldScalar:
    """A residue modulo the prime p."""
    value: int
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        object.__setattr__(self, "value", self.value % self.p)

    def _other(self, o):
        if isinstance(o, FieldScalar):
            if o.p != self.p:
                raise ValueError("scalars over different fields")
            return o.value
        return int(o)

    def __add__(self, o):
        return FieldScalar(self.value + self._other(o), self.p)

    def __sub__(self, o):
        return FieldScalar(self.value - self._other(o), self.p)

    def __mul__(self, o):
        return FieldScalar(self.value * self._other(o), self.p)

    def __neg__(self):
        return FieldScalar(-self.value, self.p)

    def inverse(self):
        if not self.value:
            raise ZeroDivisionError("zero has no inverse")
        return FieldScalar(pow(self.value, -1, self.p), self.p)

    def __int__(self):
        return self.value


# ---------------------------------------------------------------- linear algebra mod p

def rref(M, p: int):
    """Reduced row echelon form mod p; returns (rows, pivot columns)."""
    A = np.array(M, dtype=np.int64) % p
    if A.ndim != 2 or A.size == 0:
        return A.reshape(0, A.shape[1] if A.ndim == 2 else 0), []
    rows, cols = A.shape
    pivots, r = [], 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        col = A[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            A[hit] = (A[hit] - np.outer(col[hit], A[r])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank_mod(M, p: int) -> int:
    return len(rref(M, p)[1])


def nullspace_mod(M, p: int, ncols: int | None = None) -> np.ndarray:
    """Basis (as rows) of {x : M x = 0}."""
    M = np.array(M, dtype=np.int64)
    n = M.shape[1] if M.ndim == 2 and M.size else (ncols or 0)
    if M.size == 0:
        return np.eye(n, dtype=np.int64)
    R, piv = rref(M, p)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = np.zeros(n, dtype=np.int64)
        v[f] = 1
        for row, c in zip(R, piv):
            v[c] = (-row[f]) % p
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(basis), n)


def inv_mod(M, p: int) -> np.ndarray:
    M = np.array(M, dtype=np.int64) % p
    n = M.shape[0]
    R, piv = rref(np.hstack([M, np.eye(n, dtype=np.int64)]), p)
    if piv[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return R[:n, n:]


@dataclass
class Quotient:
    """V / span(relations) for V with a given ordered basis.

    ``reps`` are the basis positions kept as coordinates and ``proj[c]`` is
    the class of basis vector c in those coordinates.
    """
    p: int
    size: int
    reps: list
    proj: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.reps)


def quotient(p: int, size: int, relations: list) -> Quotient:
    if relations:
        R, piv = rref(np.array(relations, dtype=np.int64), p)
    else:
        R, piv = np.zeros((0, size), dtype=np.int64), []
    free = [c for c in range(size) if c not in set(piv)]
    col = {c: i for i, c in enumerate(free)}
    proj = np.zeros((size, len(free)), dtype=np.int64)
    for c in free:
        proj[c, col[c]] = 1
    for row, c in zip(R, piv):
        proj[c] = (-row[free]) % p
    return Quotient(p, size, free, proj)


# ---------------------------------------------------------------- associative algebras

@dataclass(frozen=True, eq=False)
class AssocAlgebra:
    """Structure constants mul[i, j, k] (e_i e_j = sum_k mul[i,j,k] e_k) and a unit."""
    p: int
    dim: int
    mul: np.ndarray
    unit: np.ndarray

    def product(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.mul) % self.p

    def __eq__(self, other):
        return (isinstance(other, AssocAlgebra) and self.p == other.p and self.dim == other.dim
                and np.array_equal(self.mul, other.mul) and np.array_equal(self.unit, other.unit))

    def __hash__(self):
        return hash((self.p, self.dim, self.mul.tobytes(), self.unit.tobytes()))


def algebra_violations(p: int, mul: np.ndarray, unit: np.ndarray) -> list:
    out = []
    left = np.einsum("ijk,klm->ijlm", mul, mul) % p   # (e_i e_j) e_l
    right = np.einsum("jlk,ikm->ijlm", mul, mul) % p  # e_i (e_j e_l)
    if not np.array_equal(left, right):
        out.append("associativity")
    n = mul.shape[0]
    eye = np.eye(n, dtype=np.int64)
    if not np.array_equal(np.einsum("i,ijk->jk", unit, mul) % p, eye):
        out.append("left unit")
    if not np.array_equal(np.einsum("j,ijk->ik", unit, mul) % p, eye):
        out.append("right unit")
    return out


def make_algebra(p: int, mul, unit) -> AssocAlgebra:
    mul = np.array(mul, dtype=np.int64) % p
    unit = np.array(unit, dtype=np.int64) % p
    n = unit.shape[0]
    if mul.shape != (n, n, n):
        raise ValueError("structure constants must have shape (n, n, n)")
    bad = algebra_violations(p, mul, unit)
    if bad:
        raise ValueError("not a unital associative algebra: " + ", ".join(bad))
    return AssocAlgebra(p, n, mul, unit)


def field_algebra(p: int) -> AssocAlgebra:
    return make_algebra(p, [[[1]]], [1])


def zero_algebra(p: int) -> AssocAlgebra:
    return AssocAlgebra(p, 0, np.zeros((0, 0, 0), dtype=np.int64), np.zeros(0, dtype=np.int64))


def dual_numbers(p: int) -> AssocAlgebra:
    """k[x]/(x^2) with basis (1, x)."""
    mul = np.zeros((2, 2, 2), dtype=np.int64)
    mul[0, 0, 0] = mul[0, 1, 1] = mul[1, 0, 1] = 1
    return make_algebra(p, mul, [1, 0])


def product_algebra(p: int) -> AssocAlgebra:
    """k x k with basis the two idempotents."""
    mul = np.zeros((2, 2, 2), dtype=np.int64)
    mul[0, 0, 0] = mul[1, 1, 1] = 1
    return make_algebra(p, mul, [1, 1])


def end_algebra(p: int, n: int) -> AssocAlgebra:
    """n x n matrices, basis E_ab at index a n + b, with the matrix product."""
    mul = np.zeros((n * n, n * n, n * n), dtype=np.int64)
    for a, b, c in itertools.product(range(n), repeat=3):
        mul[a * n + b, b * n + c, a * n + c] = 1
    unit = np.zeros(n * n, dtype=np.int64)
    for a in range(n):
        unit[a * n + a] = 1
    return make_algebra(p, mul, unit)


def enumerate_algebras(p: int, dim: int, limit: int = 1 << 16) -> list:
    """All unital associative structures on F_p^dim (structure constants
    enumerated; the unit of an algebra is unique)."""
    if dim == 0:
        return [zero_algebra(p)]
    count = p ** (dim ** 3)
    if count > limit:
        raise EnumerationBound(f"{count} structure tensors exceed the bound {limit}")
    out = []
    units = [np.array(u, dtype=np.int64) for u in itertools.product(range(p), repeat=dim)]
    for flat in itertools.product(range(p), repeat=dim ** 3):
        mul = np.array(flat, dtype=np.int64).reshape(dim, dim, dim)
        for u in units:
            if not algebra_violations(p, mul, u):
                out.append(AssocAlgebra(p, dim, mul, u))
                break
    return out


def algebra_to_dict(B: AssocAlgebra) -> dict:
    mul = []
    for i in range(B.dim):
        for j in range(B.dim):
            mul.append([[k, int(B.mul[i, j, k])] for k in range(B.dim) if B.mul[i, j, k]])
    return {"p": B.p, "dim": B.dim, "mul": mul, "unit": [int(v) for v in B.unit]}


def algebra_from_dict(data) -> AssocAlgebra:
    p, n = int(data["p"]), int(data["dim"])
    mul = np.zeros((n, n, n), dtype=np.int64)
    for idx, entries in enumerate(data["mul"]):
        i, j = divmod(idx, n)
        for k, c in entries:
            mul[i, j, int(k)] = int(c)
    return make_algebra(p, mul, data["unit"])


def is_algebra_map(B: AssocAlgebra, C: AssocAlgebra, g: np.ndarray) -> bool:
    """g has shape (B.dim, C.dim): row i is the image of e_i."""
    p = B.p
    if not np.array_equal((B.unit @ g) % p, C.unit % p):
        return False
    lhs = np.einsum("ijk,kl->ijl", B.mul, g) % p
    rhs = np.einsum("ia,jb,abl->ijl", g, g, C.mul) % p
    return np.array_equal(lhs, rhs)


# ---------------------------------------------------------------- discrete operads

@dataclass(frozen=True)
class Word:
    """A component: output color and the inputs read left to right."""
    color: str
    letters: tuple

    @property
    def n(self) -> int:
        return sum(1 for c, _ in self.letters if c == "f")

    @property
    def m(self) -> int:
        return sum(1 for c, _ in self.letters if c == "h")


class DiscreteOperad(OperadInstance):
    """Word operads: the associative operad, E_0, the unit operad and pi_0 SC_1.

    ``f_arities`` restricts the full-output components (None: all orderings);
    ``half`` adds the half color with at most one half input.
    """

    def __init__(self, name: str, f_arities=None, half: bool = False):
        self.name = name
        self.f_arities = None if f_arities is None else frozenset(f_arities)
        self.half = half
        self.colors = ("f", "h") if half else ("f",)

    def _f_ok(self, n):
        return self.f_arities is None or n in self.f_arities

    def components(self, color: str, n: int, m: int = 0) -> list:
        if color == "f":
            if m or not self._f_ok(n):
                return []
            return [Word("f", tuple(("f", i) for i in w)) for w in itertools.permutations(range(n))]
        if not self.half or m > 1:
            return []
        head = (("h", 0),) if m else ()
        return [Word("h", head + tuple(("f", i) for i in w)) for w in itertools.permutations(range(n))]

    def reps(self, color: str, n: int, m: int = 0) -> list:
        if (color == "f" and (m or not self._f_ok(n))) or (color == "h" and (not self.half or m > 1)):
            return []
        head = (("h", 0),) if m else ()
        return [Word(color, head + tuple(("f", i) for i in range(n)))]

    def canon(self, x: Word):
        """(rep, sigma) with x == act(rep, sigma)."""
        rep = self.reps(x.color, x.n, x.m)[0]
        fpos = [i for c, i in x.letters if c == "f"]
        sigma = inverse_perm(fpos) + tuple(x.n + j for j in range(x.m))
        return rep, sigma

    def input_colors(self, x: Word):
        return ("f",) * x.n + ("h",) * x.m

    def output_color(self, x: Word):
        return x.color

    def identity(self, color):
        return Word(color, ((color, 0),))

    def act(self, x: Word, perm):
        perm = tuple(perm)
        n = x.n
        if not is_perm(perm, n + x.m) or any(p >= n for p in perm[:n]):
            raise ValueError("permutation must preserve the color blocks")
        inv = inverse_perm(perm)
        return Word(x.color, tuple((c, inv[i] if c == "f" else inv[n + i] - n)
                                   for c, i in x.letters))

    def compose(self, x: Word, ys: Sequence[Word]):
        cols = self.input_colors(x)
        if len(cols) != len(ys):
            raise ValueError("arity mismatch")
        for c, y in zip(cols, ys):
            if y.color != c:
                raise ValueError("color mismatch")
        origins = self.origins(x, ys)
        where = {}
        counts = {"f": 0, "h": 0}
        for q, a in origins:
            c = self.input_colors(ys[q])[a]
            where[(q, a)] = (c, counts[c])
            counts[c] += 1
        letters = []
        for c, i in x.letters:
            slot = i if c == "f" else x.n + i
            y = ys[slot]
            for yc, yi in y.letters:
                inner = yi if yc == "f" else y.n + yi
                letters.append(where[(slot, inner)])
        w = Word(x.color, tuple(letters))
        if w.color == "f" and not self._f_ok(w.n):
            raise ValueError("composite leaves the operad")
        return w

    def arity(self, x: Word) -> int:
        return x.n + x.m


def word_of_config(cfg: Configuration) -> Word:
    """The component of a d = 1 configuration."""
    return Word("f" if cfg.target == FULL else "h", pi0_invariant_d1(cfg))


def assoc_operad() -> DiscreteOperad:
    return DiscreteOperad("assoc")


def e0_operad() -> DiscreteOperad:
    return DiscreteOperad("e0", f_arities={0, 1})


def unit_word_operad() -> DiscreteOperad:
    return DiscreteOperad("unit", f_arities={1})


def pi0_sc1() -> DiscreteOperad:
    """Components of SC_1: orderings of intervals, the half interval anchored
    at the left end."""
    return DiscreteOperad("pi0-sc1", half=True)


def semidirect_unit_d1() -> DiscreteOperad:
    """Components of SC_1^{h,inf} with the unit operad on the full color."""
    return DiscreteOperad("sc-inf-unit", f_arities={1}, half=True)


def all_components(op: DiscreteOperad, max_arity: int) -> list:
    out = []
    for total in range(max_arity + 1):
        for m in ((0, 1) if op.half else (0,)):
            if m <= total:
                out.extend(op.components("f", total - m, m) if m == 0 else [])
                out.extend(op.components("h", total - m, m))
    return out


def word_name(w: Word) -> str:
    return w.color + ":" + " ".join(f"{c}{i}" for c, i in w.letters)


def discrete_operad_to_dict(op: DiscreteOperad, max_arity: int = 3) -> dict:
    """Table format: components keyed by "color:n,m" and every partial
    composition whose result stays within ``max_arity``."""
    comps = all_components(op, max_arity)
    arity_components: dict = {}
    for w in comps:
        arity_components.setdefault(f"{w.color}:{w.n},{w.m}", []).append(word_name(w))
    table = []
    for x in comps:
        for slot, c in enumerate(op.input_colors(x)):
            for y in comps:
                if y.color != c or op.arity(x) + op.arity(y) - 1 > max_arity:
                    continue
                try:
                    z = op.partial_compose(x, slot, y)
                except ValueError:
                    continue
                table.append([word_name(x), slot, word_name(y), word_name(z)])
    return {"name": op.name, "max_arity": max_arity,
            "arity_components": arity_components, "composition": table}


class TableOperad:
    """A discrete operad truncated at some arity, read from the table format.

    Elements are the component names; only partial composition is available.
    """

    def __init__(self, data: dict):
        try:
            self.name = data.get("name", "")
            self.max_arity = int(data["max_arity"])
            self._profile = {}
            for key, names in data["arity_components"].items():
                color, nm = key.split(":")
                n, m = (int(v) for v in nm.split(","))
                for name in names:
                    self._profile[name] = (color, ("f",) * n + ("h",) * m)
            self._table = {}
            for x, slot, y, z in data["composition"]:
                for e in (x, y, z):
                    if e not in self._profile:
                        raise ValueError(f"unknown component {e!r}")
                self._table[(x, int(slot), y)] = z
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed operad table: {exc}") from exc

    def components(self) -> list:
        return sorted(self._profile)

    def output_color(self, x: str) -> str:
        return self._profile[x][0]

    def input_colors(self, x: str) -> tuple:
        return self._profile[x][1]

    def partial_compose(self, x: str, slot: int, y: str) -> str:
        if self.input_colors(x)[slot] != self.output_color(y):
            raise ValueError("color mismatch")
        try:
            return self._table[(x, slot, y)]
        except KeyError:
            raise ValueError("composite is not in the table") from None


def discrete_operad_from_dict(data: dict) -> TableOperad:
    return TableOperad(data)


def check_discrete_operad(op: DiscreteOperad, max_arity: int = 4) -> list:
    """Exhaustive operad axioms on components up to ``max_arity``."""
    comps = all_components(op, max_arity)
    bad = []
    for x in comps:
        cols = op.input_colors(x)
        ident = [op.identity(c) for c in cols]
        if op.compose(x, ident) != x or op.compose(op.identity(x.color), [x]) != x:
            bad.append(("unit", x))
        for sigma in itertools.permutations(range(x.n)):
            s = tuple(sigma) + tuple(range(x.n, x.n + x.m))
            if op.act(op.act(x, s), inverse_perm(s)) != x:
                bad.append(("action", x, s))
        for i, c in enumerate(cols):
            for y in comps:
                if y.color != c or op.arity(x) + op.arity(y) - 1 > max_arity:
                    continue
                try:
                    xy = op.partial_compose(x, i, y)
                except ValueError:
                    continue
                for j, c2 in enumerate(op.input_colors(y)):
                    for z in comps:
                        if z.color != c2 or op.arity(xy) + op.arity(z) - 1 > max_arity:
                            continue
                        try:
                            left = op.partial_compose(xy, _slot_after(op, x, i, y, j), z)
                            right = op.partial_compose(x, i, op.partial_compose(y, j, z))
                        except ValueError:
                            continue
                        if left != right:
                            bad.append(("associativity", x, i, y, j, z))
    return bad


def _slot_after(op, x, i, y, j) -> int:
    ys = [op.identity(c) for c in op.input_colors(x)]
    ys[i] = y
    return op.origins(x, ys).index((i, j))


# ---------------------------------------------------------------- algebras over word operads

@dataclass
class PairAlgebra:
    """Structure maps for a word operad on (B, A): B's product and unit,
    A's point u and the right action rho.  Missing pieces are None."""
    p: int
    dim_b: int
    dim_a: int
    mul: np.ndarray | None = None
    unit: np.ndarray | None = None
    u: np.ndarray | None = None
    rho: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def end(self) -> EndOperadDiscrete:
        return EndOperadDiscrete(self.p, self.dim_b, self.dim_a)

    def theta(self, w: Word):
        got = self._cache.get(w)
        if got is None:
            got = self._cache[w] = self._theta(w)
        return got

    def _theta(self, w: Word):
        p = self.p
        fs = [i for c, i in w.letters if c == "f"]
        k = len(fs)
        if w.color == "f":
            if k == 0:
                T = self.unit.copy()
            else:
                T = np.eye(self.dim_b, dtype=np.int64)
                for _ in fs[1:]:
                    T = np.einsum("...i,ijk->...jk", T, self.mul) % p
            ins = ("f",) * k
        else:
            if w.m:
                T = np.eye(self.dim_a, dtype=np.int64)
            else:
                T = self.u.copy()
            for _ in fs:
                T = np.einsum("...i,ijk->...jk", T, self.rho) % p
            ins = ("f",) * k + ("h",) * w.m
        # axes are in letter order (half input first); move to input order
        letter_axes = ([("h", 0)] if (w.color == "h" and w.m) else []) + [("f", i) for i in fs]
        pos = {lab: ax for ax, lab in enumerate(letter_axes)}
        order = [pos[("f", i)] for i in range(k)] + ([pos[("h", 0)]] if ("h", 0) in pos else [])
        T = np.transpose(T, tuple(order) + (len(order),)) if order else T
        out = "f" if w.color == "f" else "h"
        return self.end().make(out, ins, T)


def generating_instances(op: DiscreteOperad) -> list:
    """The partial compositions that present pi_0 SC_1-style algebras:
    product associativity and unit on B, action associativity and unit."""
    f = lambda *xs: Word("f", tuple(("f", i) for i in xs))
    hf = Word("h", (("h", 0), ("f", 0)))
    out = []
    if op.f_arities is None:
        out += [(f(0, 1), 0, f(0, 1)), (f(0, 1), 0, f()), (f(0, 1), 1, f())]
    if op.half:
        out += [(hf, 1, hf)]
        if op.f_arities is None:
            out += [(hf, 0, f(0, 1)), (hf, 0, f())]
    return out


def all_instances(op: DiscreteOperad, cutoff: int) -> list:
    key = (op.name, op.f_arities, op.half, cutoff)
    got = _INSTANCES.get(key)
    if got is None:
        comps = all_components(op, cutoff)
        got = []
        for x in comps:
            for i, c in enumerate(op.input_colors(x)):
                for y in comps:
                    if y.color == c and op.arity(x) + op.arity(y) - 1 <= cutoff:
                        got.append((x, i, y))
        _INSTANCES[key] = got
    return got


_INSTANCES: dict = {}
_COMPOSITES: dict = {}


def _composite(op, x, i, y):
    key = (op.name, x, i, y)
    z = _COMPOSITES.get(key)
    if z is None:
        z = _COMPOSITES[key] = op.partial_compose(x, i, y)
    return z


def check_action_diagrams(op: DiscreteOperad, alg: PairAlgebra, cutoff: int = 4,
                          instances: list | None = None, stop_early: bool = False) -> list:
    """Every partial composition x o_i y with arity <= cutoff must be sent to
    the composite of structure maps, and the symmetric actions must match.
    Returns the failing instances."""
    end = alg.end()
    bad = []
    insts = all_instances(op, cutoff) if instances is None else instances
    for x, i, y in insts:
        lhs = alg.theta(_composite(op, x, i, y))
        rhs = end.partial_compose(alg.theta(x), i, alg.theta(y))
        if lhs != rhs:
            bad.append(("composition", x, i, y))
            if stop_early:
                return bad
    if instances is None:
        for x in all_components(op, min(cutoff, 3)):
            for sigma in itertools.permutations(range(x.n)):
                s = tuple(sigma) + tuple(range(x.n, x.n + x.m))
                if alg.theta(op.act(x, s)) != end.act(alg.theta(x), s):
                    bad.append(("equivariance", x, s))
        for c in op.colors:
            if alg.theta(op.identity(c)) != end.identity(c):
                bad.append(("identity", c))
    return bad


# ---------------------------------------------------------------- modules and End(A)

def module_violations(B: AssocAlgebra, rho: np.ndarray) -> list:
    """Right module axioms for rho[a, b, c]."""
    p = B.p
    out = []
    dim_a = rho.shape[0]
    if not np.array_equal(np.einsum("abc,b->ac", rho, B.unit) % p, np.eye(dim_a, dtype=np.int64)):
        out.append("unit")
    left = np.einsum("abc,cde->abde", rho, rho) % p           # (a.b).b'
    right = np.einsum("bdk,ake->abde", B.mul, rho) % p        # a.(b b')
    if not np.array_equal(left, right):
        out.append("associativity")
    return out


@dataclass(frozen=True, eq=False)
class ModuleStructure:
    """A right B-module structure on F_p^dim_a."""
    B: AssocAlgebra
    dim_a: int
    rho: np.ndarray


def make_module(B: AssocAlgebra, rho) -> ModuleStructure:
    rho = np.array(rho, dtype=np.int64) % B.p
    if rho.ndim != 3 or rho.shape[1] != B.dim or rho.shape[0] != rho.shape[2]:
        raise ValueError("action tensor must have shape (dim A, dim B, dim A)")
    bad = module_violations(B, rho)
    if bad:
        raise ValueError("not a module: " + ", ".join(bad))
    return ModuleStructure(B, rho.shape[0], rho)


def rho_to_map(rho: np.ndarray) -> np.ndarray:
    """rho -> phi with phi[b] the matrix of a -> a . e_b."""
    return np.transpose(rho, (1, 0, 2)).copy()


def map_to_rho(phi: np.ndarray) -> np.ndarray:
    return np.transpose(phi, (1, 0, 2)).copy()


def is_algebra_map_to_end(B: AssocAlgebra, phi: np.ndarray) -> bool:
    p = B.p
    dim_a = phi.shape[1]
    if not np.array_equal(np.einsum("b,bij->ij", B.unit, phi) % p, np.eye(dim_a, dtype=np.int64)):
        return False
    lhs = np.einsum("xyk,kij->xyij", B.mul, phi) % p
    rhs = np.einsum("xil,ylj->xyij", phi, phi) % p
    return np.array_equal(lhs, rhs)


def _all_tensors(p: int, shape: tuple, limit: int):
    size = int(np.prod(shape)) if shape else 1
    if p ** size > limit:
        raise EnumerationBound(f"{p}^{size} candidates exceed the bound {limit}")
    for flat in itertools.product(range(p), repeat=size):
        yield np.array(flat, dtype=np.int64).reshape(shape)


def _key(t: np.ndarray) -> bytes:
    return np.ascontiguousarray(t, dtype=np.int64).tobytes()


@dataclass
class Bijection:
    left: list
    right: list
    forward_ok: bool
    backward_ok: bool
    inverse_ok: bool

    @property
    def ok(self) -> bool:
        return (len(self.left) == len(self.right) and self.forward_ok and self.backward_ok
                and self.inverse_ok)


def _pairing(left, right, fwd, bwd) -> Bijection:
    rset = {_key(r) for r in right}
    lset = {_key(l) for l in left}
    forward_ok = all(_key(fwd(l)) in rset for l in left)
    backward_ok = all(_key(bwd(r)) in lset for r in right)
    inverse_ok = (all(np.array_equal(bwd(fwd(l)), l) for l in left)
                  and all(np.array_equal(fwd(bwd(r)), r) for r in right))
    return Bijection(left, right, forward_ok, backward_ok, inverse_ok)


def module_map_bijection(B: AssocAlgebra, dim_a: int, limit: int = 1 << 12) -> Bijection:
    """Right B-module structures on F_p^dim_a against algebra maps B -> End(A)."""
    p = B.p
    mods = [r for r in _all_tensors(p, (dim_a, B.dim, dim_a), limit)
            if not module_violations(B, r)]
    maps = [f for f in _all_tensors(p, (B.dim, dim_a, dim_a), limit)
            if is_algebra_map_to_end(B, f)]
    return _pairing(mods, maps, rho_to_map, map_to_rho)


def sc1_actions(B: AssocAlgebra, dim_a: int, u, cutoff: int = 4, limit: int = 1 << 12,
                op: DiscreteOperad | None = None) -> list:
    """Actions of pi_0 SC_1 on (B, A) restricting to B's product and to the
    point u of A, found by testing every candidate right action against the
    operad: first the generating compositions, then all of them up to
    ``cutoff``."""
    op = op or pi0_sc1()
    p = B.p
    u = np.array(u, dtype=np.int64) % p
    gens = generating_instances(op)
    full = all_instances(op, cutoff)
    out = []
    for rho in _all_tensors(p, (dim_a, B.dim, dim_a), limit):
        alg = PairAlgebra(p, B.dim, dim_a, B.mul, B.unit, u, rho)
        if check_action_diagrams(op, alg, instances=gens, stop_early=True):
            continue
        if not check_action_diagrams(op, alg, cutoff, instances=full, stop_early=True):
            out.append(rho)
    return out


def sc1_bijection(B: AssocAlgebra, dim_a: int, u, cutoff: int = 4,
                  limit: int = 1 << 12) -> Bijection:
    acts = sc1_actions(B, dim_a, u, cutoff, limit)
    maps = [f for f in _all_tensors(B.p, (B.dim, dim_a, dim_a), limit)
            if is_algebra_map_to_end(B, f)]
    return _pairing(acts, maps, rho_to_map, map_to_rho)


def pullback_action(rho: np.ndarray, g: np.ndarray, p: int) -> np.ndarray:
    """Restrict an action of B' along g: B -> B' (g[i] is the image of e_i)."""
    return np.einsum("abc,xb->axc", rho, g) % p


def naturality_check(B: AssocAlgebra, B2: AssocAlgebra, g: np.ndarray, dim_a: int, u,
                     cutoff: int = 4) -> bool:
    """Restricting actions along g corresponds to precomposing algebra maps with g."""
    p = B.p
    if not is_algebra_map(B, B2, g):
        raise ValueError("g is not an algebra map")
    acts2 = sc1_actions(B2, dim_a, u, cutoff)
    acts = {_key(r) for r in sc1_actions(B, dim_a, u, cutoff)}
    for rho2 in acts2:
        rho = pullback_action(rho2, g, p)
        if _key(rho) not in acts:
            return False
        if not np.array_equal(rho_to_map(rho), np.einsum("xb,bij->xij", g, rho_to_map(rho2)) % p):
            return False
    return True


# ---------------------------------------------------------------- O-A modules

@dataclass
class OAlgebra:
    """An algebra over a single-colored word operad on F_p^dim."""
    op: DiscreteOperad
    p: int
    dim: int
    mul: np.ndarray | None = None
    unit: np.ndarray | None = None

    def eval(self, w: Word, vecs: Sequence[np.ndarray]) -> np.ndarray:
        p = self.p
        if w.n == 0:
            return self.unit.copy() % p
        order = [i for _, i in w.letters]
        v = np.array(vecs[order[0]], dtype=np.int64)
        for i in order[1:]:
            v = np.einsum("i,j,ijk->k", v, vecs[i], self.mul) % p
        return v % p


def assoc_oalgebra(B: AssocAlgebra) -> OAlgebra:
    return OAlgebra(assoc_operad(), B.p, B.dim, B.mul, B.unit)


def e0_oalgebra(p: int, dim: int, u) -> OAlgebra:
    return OAlgebra(e0_operad(), p, dim, None, np.array(u, dtype=np.int64) % p)


def unit_oalgebra(p: int, dim: int) -> OAlgebra:
    return OAlgebra(unit_word_operad(), p, dim)


def _basis_vec(n: int, i: int) -> np.ndarray:
    v = np.zeros(n, dtype=np.int64)
    v[i] = 1
    return v


@dataclass
class OAModule:
    """An O-A module on F_p^dim given by ``act(x, i, a_idx, m_vec)`` for
    representative components x, with the module input at position i and
    A basis vectors a_idx at the others."""
    alg: OAlgebra
    dim: int
    act_rep: Callable

    @property
    def op(self):
        return self.alg.op

    @property
    def p(self):
        return self.alg.p

    def act(self, x: Word, i: int, avecs: Sequence[np.ndarray], mvec: np.ndarray) -> np.ndarray:
        """Action of any component, with A inputs given as vectors."""
        rep, sigma = self.op.canon(x)
        k = x.n
        # x(z_0..) = rep(z') with z'[sigma[j]] = z_j
        slots = [None] * k
        for j in range(k):
            slots[sigma[j]] = ("M", None) if j == i else ("A", avecs[j if j < i else j - 1])
        mpos = next(j for j, s in enumerate(slots) if s[0] == "M")
        avs = [s[1] for s in slots if s[0] == "A"]
        out = np.zeros(self.dim, dtype=np.int64)
        for idx in itertools.product(*(range(self.alg.dim) for _ in avs)):
            coeff = 1
            for v, t in zip(avs, idx):
                coeff = coeff * int(v[t]) % self.p
                if not coeff:
                    break
            if coeff:
                out = (out + coeff * self.act_rep(rep, mpos, idx, mvec)) % self.p
        return out


OAModuleInstance = OAModule


def regular_module(alg: OAlgebra) -> OAModule:
    """A as a module over itself."""
    def act_rep(x, i, a_idx, mvec):
        vecs = [_basis_vec(alg.dim, t) for t in a_idx]
        vecs.insert(i, mvec)
        return alg.eval(x, vecs)
    return OAModule(alg, alg.dim, act_rep)


def trivial_module(alg: OAlgebra, dim: int) -> OAModule:
    """Only the identity acts (the E_0 and unit-operad case)."""
    def act_rep(x, i, a_idx, mvec):
        if x.n != 1:
            raise ValueError("only the identity component acts")
        return np.array(mvec, dtype=np.int64) % alg.p
    return OAModule(alg, dim, act_rep)


def module_axiom_failures(mod: OAModule, cutoff: int = 4) -> list:
    """Compatibility of the action with partial composition in O."""
    op = mod.op
    comps = [w for k in range(1, cutoff + 1) for w in op.reps("f", k)]
    ycomps = [w for k in range(0, cutoff + 1) for w in op.components("f", k)]
    bad = []
    for x in comps:
        for i in range(x.n):
            for j in range(x.n):
                for y in ycomps:
                    if x.n + y.n - 1 > cutoff or (j == i and y.n == 0):
                        continue
                    z = op.partial_compose(x, j, y)
                    bad.extend(_check_one(mod, x, i, j, y, z, cutoff))
                    if len(bad) > 20:
                        return bad
    return bad


def _check_one(mod, x, i, j, y, z, cutoff):
    """All basis inputs of x o_j y with the module input coming from slot i."""
    op, alg, p = mod.op, mod.alg, mod.p
    da, dm = alg.dim, mod.dim
    ys = [op.identity("f")] * x.n
    ys[j] = y
    origins = op.origins(x, ys)
    if j == i:
        zi_candidates = [q for q, (s, a) in enumerate(origins) if s == i]
    else:
        zi_candidates = [origins.index((i, 0))]
    bad = []
    for zi in zi_candidates:
        inner_m = origins[zi][1]
        nA = z.n - 1
        for aidx in itertools.product(range(da), repeat=nA):
            for mi in range(dm):
                mv = _basis_vec(dm, mi)
                avecs = [_basis_vec(da, t) for t in aidx]
                # arrange z's inputs
                zin = list(avecs)
                zin.insert(zi, None)
                lhs = mod.act(z, zi, avecs, mv)
                # rhs: evaluate y first
                if j == i:
                    yin = [zin[q] for q, (s, a) in enumerate(origins) if s == j]
                    ya = [v for v in yin if v is not None]
                    inner = mod.act(y, inner_m, ya, mv)
                    xa = [zin[origins.index((s, 0))] for s in range(x.n) if s != i]
                    rhs = mod.act(x, i, xa, inner)
                else:
                    yin = [zin[q] for q, (s, a) in enumerate(origins) if s == j]
                    yv = alg.eval(y, yin)
                    xa = []
                    for s in range(x.n):
                        if s == i:
                            continue
                        xa.append(yv if s == j else zin[origins.index((s, 0))])
                    rhs = mod.act(x, i, xa, mv)
                if not np.array_equal(lhs % p, rhs % p):
                    bad.append((x, i, j, y, aidx, mi))
    return bad


class FreeOAModule:
    """The free O-A module on k, as the coequalizer of
    F1(F0 A, k) => F1(A, k) truncated at arity ``cutoff``.  Since the module
    input occurs exactly once, the free module on M is this space tensored
    with M.

    Basis of F1(A, k): (rep x, module position, A basis indices), ordered
    with high arities first so quotient representatives have low arity.
    """

    def __init__(self, alg: OAlgebra, cutoff: int = 4):
        self.alg = alg
        self.op = alg.op
        self.p = alg.p
        self.cutoff = cutoff
        keys = []
        for k in range(cutoff, 0, -1):
            for x in self.op.reps("f", k):
                for i in range(k):
                    for aidx in itertools.product(range(alg.dim), repeat=k - 1):
                        keys.append((x, i, aidx))
        self.keys = keys
        self.index = {key: c for c, key in enumerate(keys)}
        self.q = quotient(self.p, len(keys), self._relations())
        self.rep_keys = [keys[c] for c in self.q.reps]

    @property
    def dim(self) -> int:
        return self.q.dim

    def key_of(self, z: Word, mpos: int, avecs_idx: Sequence[int]):
        """Canonical key for component z with module input mpos and A basis
        indices for the remaining inputs (in order)."""
        rep, sigma = self.op.canon(z)
        slots = [None] * z.n
        it = iter(avecs_idx)
        for j in range(z.n):
            slots[sigma[j]] = "M" if j == mpos else next(it)
        mp = slots.index("M")
        return (rep, mp, tuple(s for s in slots if s != "M"))

    def _relations(self) -> list:
        op, alg, p = self.op, self.alg, self.p
        da = alg.dim
        ycomps = {k: op.reps("f", k) for k in range(0, self.cutoff + 1)}
        rels = []
        for m in range(1, self.cutoff + 1):
            for x in op.reps("f", m):
                for i in range(m):
                    others = [j for j in range(m) if j != i]
                    budget = self.cutoff - 1
                    for ks in itertools.product(range(0, budget + 1), repeat=len(others)):
                        if sum(ks) > budget:
                            continue
                        for ychoice in itertools.product(*(ycomps[k] for k in ks)):
                            if all(y.n == 1 for y in ychoice):
                                continue
                            ys = [op.identity("f")] * m
                            for j, y in zip(others, ychoice):
                                ys[j] = y
                            try:
                                z = op.compose(x, ys)
                            except ValueError:
                                continue
                            origins = op.origins(x, ys)
                            zm = origins.index((i, 0))
                            for aidx in itertools.product(range(da), repeat=sum(ks)):
                                rels.append(self._relation(x, i, others, ychoice, ks, aidx,
                                                           z, origins, zm))
        return [r for r in rels if r.any()]

    def _relation(self, x, i, others, ychoice, ks, aidx, z, origins, zm):
        alg, p = self.alg, self.p
        vec = np.zeros(len(self.keys), dtype=np.int64)
        # evaluate the inner operations in A
        pos, vals = 0, []
        by_slot = {}
        for j, y, k in zip(others, ychoice, ks):
            chunk = aidx[pos:pos + k]
            pos += k
            by_slot[j] = chunk
            vals.append(alg.eval(y, [_basis_vec(alg.dim, t) for t in chunk]))
        for idx in itertools.product(*(range(alg.dim) for _ in vals)):
            coeff = 1
            for v, t in zip(vals, idx):
                coeff = coeff * int(v[t]) % p
            if coeff:
                vec[self.index[(x, i, tuple(idx))]] += coeff
        # compose in O
        zidx = []
        for q, (s, a) in enumerate(origins):
            if q == zm:
                continue
            zidx.append(by_slot[s][a])
        key = self.key_of(z, zm, zidx)
        vec[self.index[key]] -= 1
        return vec % p

    def class_of(self, key) -> np.ndarray:
        return self.q.proj[self.index[key]]

    def unit_map(self) -> np.ndarray:
        """eta: k -> F(k), the class of the identity component."""
        return self.class_of((self.op.reps("f", 1)[0], 0, ()))

    def plug(self, x: Word, i: int, aidx: Sequence[int], v: np.ndarray) -> np.ndarray:
        """Action of x on F(k) with v at input i."""
        op, p = self.op, self.p
        out = np.zeros(self.dim, dtype=np.int64)
        for r, coeff in enumerate(v):
            if not coeff:
                continue
            zx, zi, zidx = self.rep_keys[r]
            ys = [op.identity("f")] * x.n
            ys[i] = zx
            comp = op.compose(x, ys)
            origins = op.origins(x, ys)
            outer = list(aidx)
            slots = []
            for s, a in origins:
                if s == i:
                    slots.append("M" if a == zi else zidx[a if a < zi else a - 1])
                else:
                    slots.append(outer[s if s < i else s - 1])
            mpos = slots.index("M")
            if len(slots) > self.cutoff:
                raise CutoffError(f"composite of arity {len(slots)} exceeds the cutoff {self.cutoff}")
            key = self.key_of(comp, mpos, [s for s in slots if s != "M"])
            out = (out + int(coeff) * self.class_of(key)) % p
        return out

    def multiplication(self) -> np.ndarray:
        """mu: F(F(k)) = F(k) (x) F(k) -> F(k); entry [r1, r2] is the class of
        rep r1 with rep r2 plugged into its module input."""
        n = self.dim
        mu = np.zeros((n, n, n), dtype=np.int64)
        for r1, (x, i, aidx) in enumerate(self.rep_keys):
            for r2 in range(n):
                mu[r1, r2] = self.plug(x, i, aidx, _basis_vec(n, r2))
        return mu

    def module(self, dim_m: int) -> OAModule:
        """F(M) = F(k) (x) M with coordinates r * dim_m + m."""
        n = self.dim

        def act_rep(x, i, aidx, mvec):
            out = np.zeros(n * dim_m, dtype=np.int64)
            for r in range(n):
                block = mvec[r * dim_m:(r + 1) * dim_m]
                if not block.any():
                    continue
                cls = self.plug(x, i, aidx, _basis_vec(n, r))
                out = (out + np.kron(cls, block)) % self.p
            return out

        return OAModule(self.alg, n * dim_m, act_rep)


def free_oa_module(alg: OAlgebra, cutoff: int = 4) -> FreeOAModule:
    """Free module at ``cutoff``, checked against ``cutoff + 1``: the
    representatives must agree, otherwise the truncation has not stabilized."""
    lo = FreeOAModule(alg, cutoff)
    hi = FreeOAModule(alg, cutoff + 1)
    if lo.rep_keys != hi.rep_keys:
        raise CutoffError(f"free module not stable at arity {cutoff}: "
                          f"dims {lo.dim} and {hi.dim} at arities {cutoff} and {cutoff + 1}")
    return hi


def monad_law_failures(F: FreeOAModule) -> list:
    """Unit and associativity of (F, eta, mu) on all basis elements."""
    p, n = F.p, F.dim
    mu = F.multiplication()
    eta = F.unit_map()
    eye = np.eye(n, dtype=np.int64)
    bad = []
    if not np.array_equal(np.einsum("r,rsk->sk", eta, mu) % p, eye):
        bad.append("left unit")
    if not np.array_equal(np.einsum("s,rsk->rk", eta, mu) % p, eye):
        bad.append("right unit")
    left = np.einsum("abk,kcl->abcl", mu, mu) % p   # mu(mu(a, b), c)
    right = np.einsum("bck,akl->abcl", mu, mu) % p  # mu(a, mu(b, c))
    if not np.array_equal(left, right):
        bad.append("associativity")
    return bad


def free_assoc_dim_closed_form(dim_a: int, dim_m: int) -> int:
    """Free bimodule over a unital algebra: A (x) M (x) A."""
    return dim_a * dim_a * dim_m


def hom_oa(src: OAModule, tgt: OAModule, cutoff: int = 4) -> np.ndarray:
    """Basis of module maps src -> tgt (each row a flattened dim_tgt x dim_src
    matrix acting on column vectors), solving the equalizer equations on
    all representative components up to ``cutoff``."""
    alg, op, p = src.alg, src.op, src.p
    ds, dt = src.dim, tgt.dim
    nunk = dt * ds
    eqs = []
    for k in range(1, cutoff + 1):
        for x in op.reps("f", k):
            for i in range(k):
                for aidx in itertools.product(range(alg.dim), repeat=k - 1):
                    avecs = [_basis_vec(alg.dim, t) for t in aidx]
                    for c in range(ds):
                        s_out = src.act(x, i, avecs, _basis_vec(ds, c))
                        t_cols = [tgt.act(x, i, avecs, _basis_vec(dt, r)) for r in range(dt)]
                        for row in range(dt):
                            e = np.zeros(nunk, dtype=np.int64)
                            for cc in range(ds):
                                e[row * ds + cc] += s_out[cc]
                            for r in range(dt):
                                e[r * ds + c] -= t_cols[r][row]
                            e %= p
                            if e.any():
                                eqs.append(e)
    if not eqs:
        return np.eye(nunk, dtype=np.int64)
    return nullspace_mod(np.array(eqs), p, nunk)


def hom_oa_brute_force(src: OAModule, tgt: OAModule, cutoff: int = 4,
                       limit: int = 1 << 12) -> int:
    """Count module maps by testing every matrix."""
    alg, op, p = src.alg, src.op, src.p
    ds, dt = src.dim, tgt.dim
    tests = []
    for k in range(1, cutoff + 1):
        for x in op.reps("f", k):
            for i in range(k):
                for aidx in itertools.product(range(alg.dim), repeat=k - 1):
                    avecs = [_basis_vec(alg.dim, t) for t in aidx]
                    S = np.array([src.act(x, i, avecs, _basis_vec(ds, c)) for c in range(ds)]).T
                    T = np.array([tgt.act(x, i, avecs, _basis_vec(dt, r)) for r in range(dt)]).T
                    tests.append((S.reshape(ds, ds), T.reshape(dt, dt)))
    count = 0
    for f in _all_tensors(p, (dt, ds), limit):
        if all(np.array_equal(f @ S % p, T @ f % p) for S, T in tests):
            count += 1
    return count


# ---------------------------------------------------------------- A^{sc} at d = 1

@dataclass
class ASC:
    """A^{sc} for pi_0 SC_1 and an E_0-algebra A."""
    alg: OAlgebra
    keys: list
    q: Quotient
    p_matrix: np.ndarray        # p_A on coordinates: (dim A^{sc}, dim A)

    @property
    def dim(self) -> int:
        return self.q.dim

    def module(self) -> OAModule:
        return trivial_module(self.alg, self.dim)


def _forget_full(w: Word) -> Word:
    """The component of E_0 obtained by deleting the single full input."""
    return Word("f", tuple(("f", 0) for c, _ in w.letters if c == "h"))


def a_sc_discrete(alg: OAlgebra, cutoff: int = 4, op: DiscreteOperad | None = None) -> ASC:
    """Generators [x] (x) a_1 .. a_m for x in pi_0 SC_1^h(1, m), m <= cutoff,
    modulo [x o (id, y_1..y_m)] (x) a = [x] (x) (y_1(a..), ..); the
    projection forgets the full input."""
    op = op or pi0_sc1()
    p, da = alg.p, alg.dim
    e0 = alg.op
    keys = []
    for m in range(cutoff, -1, -1):
        for x in op.reps("h", 1, m):
            for aidx in itertools.product(range(da), repeat=m):
                keys.append((x, aidx))
    index = {k: i for i, k in enumerate(keys)}
    rels = []
    for m in range(0, cutoff + 1):
        for x in op.reps("h", 1, m):
            choices = [[w for k in range(0, cutoff + 1) for w in e0.components("f", k)]] * m
            for ys in itertools.product(*choices):
                if all(y.n == 1 for y in ys) or sum(y.n for y in ys) > cutoff:
                    continue
                lifted = [Word("h", tuple(("h", i) for _, i in y.letters)) for y in ys]
                z = op.compose(x, [op.identity("f")] + lifted)
                for aidx in itertools.product(range(da), repeat=sum(y.n for y in ys)):
                    vec = np.zeros(len(keys), dtype=np.int64)
                    pos, vals = 0, []
                    for y in ys:
                        chunk = aidx[pos:pos + y.n]
                        pos += y.n
                        vals.append(alg.eval(y, [_basis_vec(da, t) for t in chunk]))
                    for idx in itertools.product(*(range(da) for _ in vals)):
                        coeff = 1
                        for v, t in zip(vals, idx):
                            coeff = coeff * int(v[t]) % p
                        if coeff:
                            vec[index[(x, tuple(idx))]] += coeff
                    vec[index[(z, tuple(aidx))]] -= 1
                    vec %= p
                    if vec.any():
                        rels.append(vec)
    q = quotient(p, len(keys), rels)
    # p_A on generators, then on coordinates
    gen_p = np.zeros((len(keys), da), dtype=np.int64)
    for c, (x, aidx) in enumerate(keys):
        gen_p[c] = alg.eval(_forget_full(x), [_basis_vec(da, t) for t in aidx])
    for r in rels:
        if ((r @ gen_p) % p).any():
            raise ValueError("p_A does not vanish on the relations")
    p_matrix = gen_p[q.reps]
    return ASC(alg, keys, q, p_matrix)


def a_sc_functor(src: ASC, tgt: ASC, g: np.ndarray) -> np.ndarray:
    """The map A^{sc} -> A'^{sc} induced by g: A -> A' (rows: images of basis vectors)."""
    p = src.alg.p
    index = {k: i for i, k in enumerate(tgt.keys)}
    out = np.zeros((src.dim, tgt.dim), dtype=np.int64)
    for r, c in enumerate(src.q.reps):
        x, aidx = src.keys[c]
        vecs = [g[t] for t in aidx]
        for idx in itertools.product(*(range(tgt.alg.dim) for _ in vecs)):
            coeff = 1
            for v, t in zip(vecs, idx):
                coeff = coeff * int(v[t]) % p
            if coeff:
                out[r] = (out[r] + coeff * tgt.q.proj[index[(x, tuple(idx))]]) % p
    return out


@dataclass
class HochschildResult:
    dim: int
    basis: np.ndarray               # module maps A^{sc} -> A, rows flattened (dim A x dim A^{sc})
    iso: np.ndarray                 # basis element -> matrix in hom(A, A)
    p_class_to_identity: bool


def hochschild_d1(alg: OAlgebra, cutoff: int = 4) -> HochschildResult:
    """hom of E_0-A modules from A^{sc} to A, compared with hom(A, A) through
    p_A: A^{sc} -> A."""
    p, da = alg.p, alg.dim
    asc = a_sc_discrete(alg, cutoff)
    src, tgt = asc.module(), trivial_module(alg, da)
    basis = hom_oa(src, tgt, cutoff)
    if asc.dim != da:
        raise ValueError("p_A is not an isomorphism")
    # p_A as a column-vector map A^{sc} -> A is p_matrix.T; its inverse gives the chase
    P = asc.p_matrix.T % p
    Pinv = inv_mod(P, p) if da else np.zeros((0, 0), dtype=np.int64)
    iso = np.array([(b.reshape(da, asc.dim) @ Pinv) % p for b in basis]).reshape(len(basis), da, da)
    # p_A itself is a module map and goes to the identity
    coords = P.reshape(-1)
    ok = True
    if da:
        if not np.array_equal((P @ Pinv) % p, np.eye(da, dtype=np.int64)):
            ok = False
        span = np.vstack([basis, coords[None, :]]) if len(basis) else coords[None, :]
        ok = ok and rank_mod(span, p) == rank_mod(basis, p)
    return HochschildResult(len(basis), basis, iso, ok)


def mod_sc_leq1_count(alg: OAlgebra, dim_m: int, cutoff: int = 4,
                      limit: int = 1 << 12) -> tuple:
    """Degree-1 data on (A, M) against module maps A^{sc} -> M.

    Degree-1 data: m0 in M (the lone full interval) and psi: A -> M (the
    half interval followed by one full interval), subject to
    m0 = psi(u) from composing with the point of A.  Returns
    (count of data, count of module maps, explicit bijection verified).
    """
    p, da = alg.p, alg.dim
    u = alg.unit
    data = []
    for m0 in _all_tensors(p, (dim_m,), limit):
        for psi in _all_tensors(p, (da, dim_m), limit):
            if np.array_equal((u @ psi) % p, m0):
                data.append((m0, psi))
    asc = a_sc_discrete(alg, cutoff)
    src, tgt = asc.module(), trivial_module(alg, dim_m)
    maps = [f for f in _all_tensors(p, (dim_m, asc.dim), limit)
            if _is_module_map(src, tgt, f, cutoff)]
    # generator values of a map A^{sc} -> M
    op = pi0_sc1()
    lone, hf = op.reps("h", 1, 0)[0], op.reps("h", 1, 1)[0]
    index = {k: i for i, k in enumerate(asc.keys)}

    def to_data(f):
        m0 = (f @ asc.q.proj[index[(lone, ())]]) % p
        psi = np.array([(f @ asc.q.proj[index[(hf, (t,))]]) % p for t in range(da)])
        return m0, psi.reshape(da, dim_m)

    def from_data(m0, psi):
        # values on representatives; every representative is a generator
        f = np.zeros((dim_m, asc.dim), dtype=np.int64)
        for r, c in enumerate(asc.q.reps):
            x, aidx = asc.keys[c]
            f[:, r] = m0 if x == lone else psi[aidx[0]]
        return f % p

    dset = {(_key(m0), _key(psi)) for m0, psi in data}
    ok = all((_key(a), _key(b)) in dset for a, b in (to_data(f) for f in maps))
    ok = ok and all(np.array_equal(to_data(from_data(m0, psi))[0], m0)
                    and np.array_equal(to_data(from_data(m0, psi))[1], psi) for m0, psi in data)
    ok = ok and all(any(np.array_equal(from_data(m0, psi), f) for f in maps) for m0, psi in data)
    return len(data), len(maps), ok


def _is_module_map(src: OAModule, tgt: OAModule, f: np.ndarray, cutoff: int) -> bool:
    alg, op, p = src.alg, src.op, src.p
    for k in range(1, cutoff + 1):
        for x in op.reps("f", k):
            for i in range(k):
                for aidx in itertools.product(range(alg.dim), repeat=k - 1):
                    avecs = [_basis_vec(alg.dim, t) for t in aidx]
                    for c in range(src.dim):
                        lhs = f @ src.act(x, i, avecs, _basis_vec(src.dim, c)) % p
                        rhs = tgt.act(x, i, avecs, (f[:, c]) % p)
                        if not np.array_equal(lhs % p, rhs % p):
                            return False
    return True


# ---------------------------------------------------------------- universal cheese at d = 1

def hoch_o_structure(op: DiscreteOperad, dim_a: int, p: int):
    """The O-algebra structure on H = End(A) read off from the operad: a
    component w of O plugged into the full input of the half-then-full
    generator gives a chain, evaluated with its i-th full interval acting
    by the i-th matrix."""
    hf = Word("h", (("h", 0), ("f", 0)))

    def theta(w: Word, mats: Sequence[np.ndarray]) -> np.ndarray:
        chain = op.compose(hf, [w, op.identity("h")])
        out = np.eye(dim_a, dtype=np.int64)
        for c, i in chain.letters:
            if c == "f":
                out = out @ mats[i] % p
        return out % p

    return theta


def universal_cheese_discrete(kind: str, B, dim_a: int, u, p: int = 2, cutoff: int = 4,
                              limit: int = 1 << 12, target=None, g=None) -> dict:
    """Actions of the discrete SC^{h,inf} x O on (B, A) extending the point u
    of A, against O-algebra maps B -> H = End(A).

    ``kind`` is "assoc" (B an AssocAlgebra) or "unit" (B an int dimension).
    """
    u = np.array(u, dtype=np.int64) % p
    if kind == "assoc":
        op = pi0_sc1()
        dim_b, mul, unit = B.dim, B.mul, B.unit
        o_comps = [w for k in range(cutoff + 1) for w in op.components("f", k)]
    elif kind == "unit":
        op = semidirect_unit_d1()
        dim_b, mul, unit = int(B), None, None
        o_comps = [op.identity("f")]
    else:
        raise ValueError(f"unknown operad {kind!r}")
    theta_h = hoch_o_structure(op, dim_a, p)
    acts = _cheese_actions(op, p, dim_b, dim_a, mul, unit, u, cutoff, limit)
    maps = _o_maps(kind, p, dim_b, dim_a, mul, unit, o_comps, theta_h, limit)
    bij = _pairing(acts, maps, rho_to_map, map_to_rho)
    report = {"operad": kind, "dim_b": dim_b, "dim_a": dim_a, "actions": len(acts),
              "maps": len(maps), "bijection": bij.ok}
    if target is not None:
        # naturality along g: B -> target
        g = np.array(g, dtype=np.int64) % p
        if kind == "assoc":
            dim_t, tmul, tunit = target.dim, target.mul, target.unit
        else:
            dim_t, tmul, tunit = int(target), None, None
        acts_t = _cheese_actions(op, p, dim_t, dim_a, tmul, tunit, u, cutoff, limit)
        have = {_key(r) for r in acts}
        ok = True
        for rho_t in acts_t:
            rho = pullback_action(rho_t, g, p)
            ok = ok and _key(rho) in have and np.array_equal(
                rho_to_map(rho), np.einsum("xb,bij->xij", g, rho_to_map(rho_t)) % p)
        report["naturality"] = ok
    return report


def _cheese_actions(op, p, dim_b, dim_a, mul, unit, u, cutoff, limit):
    acts = []
    gens = generating_instances(op)
    full = all_instances(op, cutoff)
    for rho in _all_tensors(p, (dim_a, dim_b, dim_a), limit):
        alg = PairAlgebra(p, dim_b, dim_a, mul, unit, u, rho)
        if check_action_diagrams(op, alg, instances=gens, stop_early=True):
            continue
        if not check_action_diagrams(op, alg, instances=full, stop_early=True):
            acts.append(rho)
    return acts


def _o_maps(kind, p, dim_b, dim_a, mul, unit, o_comps, theta_h, limit):
    maps = []
    for phi in _all_tensors(p, (dim_b, dim_a, dim_a), limit):
        ok = True
        for w in o_comps:
            k = w.n
            for idx in itertools.product(range(dim_b), repeat=k):
                if k == 0:
                    lhs = np.einsum("b,bij->ij", unit, phi) % p
                elif kind == "assoc":
                    order = [i for _, i in w.letters]
                    v = _basis_vec(dim_b, idx[order[0]])
                    for i in order[1:]:
                        v = np.einsum("i,j,ijk->k", v, _basis_vec(dim_b, idx[i]), mul) % p
                    lhs = np.einsum("b,bij->ij", v, phi) % p
                else:
                    lhs = phi[idx[0]] % p
                rhs = theta_h(w, [phi[t] for t in idx])
                if not np.array_equal(lhs, rhs):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            maps.append(phi)
    return maps
