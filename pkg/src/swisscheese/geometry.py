"""Exact little full-disc and half-disc configurations.

A little disc is the affine map x -> r x + c of the closed unit disc into
itself.  Half discs have their center on the hyperplane x_d = 0 and are
stored with d - 1 center coordinates.  All arithmetic is in ``Fraction``.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .operad_core import (ArityMismatch, ColorMismatch, OperadInstance, is_perm)

FULL = "full"
HALF = "half"


# ---------------------------------------------------------------- scalars

class _Infinity:
    """The extra point of [0, inf]."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __hash__(self):
        return hash("INF")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__


INF = _Infinity()


class ParseError(ValueError):
    pass


def parse_scalar(text) -> Fraction:
    """Parse "p/q" (or an integer) into a normalized Fraction."""
    if isinstance(text, bool):
        raise ParseError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"rationals are written as \"p/q\" text, got {text!r}")
    parts = text.strip().split("/")
    try:
        if len(parts) == 1:
            return Fraction(int(parts[0]))
        if len(parts) == 2:
            num, den = int(parts[0]), int(parts[1])
            if den == 0:
                raise ParseError(f"zero denominator in {text!r}")
            return Fraction(num, den)
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed rational {text!r}") from None
    raise ParseError(f"malformed rational {text!r}")


def format_scalar(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_ext(text):
    if text == "inf":
        return INF
    x = parse_scalar(text)
    if x < 0:
        raise ParseError(f"lengths are nonnegative, got {text!r}")
    return x


def format_ext(t) -> str:
    return "inf" if t is INF else format_scalar(t)


def ext_scale(t, factor: Fraction):
    """factor * t on [0, inf], with 0 * inf = 0."""
    if t is INF:
        return INF if factor > 0 else Fraction(0)
    return t * factor


# ---------------------------------------------------------------- configurations

@dataclass(frozen=True)
class Disc:
    r: Fraction
    c: tuple


@dataclass(frozen=True)
class Configuration:
    """Labeled full discs and half discs inside the unit full or half disc.

    Labels are positions in ``full`` and ``half``, counted independently.
    """
    d: int
    target: str
    full: tuple = ()
    half: tuple = ()

    @property
    def n(self) -> int:
        return len(self.full)

    @property
    def m(self) -> int:
        return len(self.half)


def _disc(r, c) -> Disc:
    return Disc(Fraction(r), tuple(Fraction(v) for v in c))


def make_config(d: int, target: str, full=(), half=()) -> Configuration:
    """Build a configuration from (r, center) pairs of numbers."""
    return Configuration(d, target, tuple(_disc(r, c) for r, c in full),
                         tuple(_disc(r, c) for r, c in half))


def _sq(v: Sequence[Fraction]) -> Fraction:
    return sum((x * x for x in v), Fraction(0))


def _dist_sq(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum(((x - y) * (x - y) for x, y in zip(a, b)), Fraction(0))


def validate_config(cfg: Configuration) -> list:
    """Return the list of violated invariants; empty means valid."""
    d = cfg.d
    bad = []
    if cfg.target not in (FULL, HALF):
        return [f"unknown target {cfg.target!r}"]
    if d < 0 or (d == 0 and cfg.target == HALF):
        return [f"dimension {d} does not admit target {cfg.target}"]
    if cfg.target == FULL and cfg.half:
        bad.append("half-disc inside a full target")
    placed = []
    for kind, discs in (("f", cfg.full), ("h", cfg.half)):
        for i, disc in enumerate(discs):
            name = f"{kind}{i}"
            c = disc.c
            if kind == "h":
                if len(c) == d and d > 0:
                    if c[-1] != 0:
                        bad.append(f"{name}: half-disc not anchored")
                        continue
                    c = c[:-1]
                elif len(c) != d - 1:
                    bad.append(f"{name}: center has {len(c)} coordinates, expected {d - 1}")
                    continue
            elif len(c) != d:
                bad.append(f"{name}: center has {len(c)} coordinates, expected {d}")
                continue
            r = disc.r
            if not 0 < r <= 1:
                bad.append(f"{name}: radius {r} outside (0, 1]")
                continue
            if _sq(c) > (1 - r) ** 2:
                bad.append(f"{name}: image leaves the unit disc")
            if kind == "f" and cfg.target == HALF and c[-1] < r:
                bad.append(f"{name}: full disc crosses the boundary of the half disc")
            placed.append((name, r, c if kind == "f" else tuple(c) + (Fraction(0),)))
    for a in range(len(placed)):
        for b in range(a + 1, len(placed)):
            na, ra, ca = placed[a]
            nb, rb, cb = placed[b]
            gap = _dist_sq(ca, cb) - (ra + rb) ** 2
            if gap < 0:
                bad.append(f"{na},{nb}: images overlap")
            elif gap == 0:
                bad.append(f"{na},{nb}: tangent images overlap at a point")
    return bad


def is_valid(cfg: Configuration) -> bool:
    return not validate_config(cfg)


def identity_config(d: int, target: str) -> Configuration:
    if target == FULL:
        return Configuration(d, FULL, (Disc(Fraction(1), (Fraction(0),) * d),), ())
    if d < 1:
        raise ValueError("half discs need d >= 1")
    return Configuration(d, HALF, (), (Disc(Fraction(1), (Fraction(0),) * (d - 1)),))


def empty_config(d: int, target: str) -> Configuration:
    return Configuration(d, target, (), ())


def _place(outer: Disc, inner: Disc, lift: bool) -> Disc:
    """Image of ``inner`` under the affine map of ``outer``.

    ``lift`` pads a half-disc center of the outer map to d coordinates so it
    can move a full disc.
    """
    R, C = outer.r, outer.c
    if lift:
        C = C + (Fraction(0),)
    return Disc(R * inner.r, tuple(R * x + y for x, y in zip(inner.c, C)))


def _check_dims(outer: Configuration, inputs: Sequence[Configuration]):
    for cfg in inputs:
        if cfg.d != outer.d:
            raise ValueError(f"dimension mismatch: {cfg.d} vs {outer.d}")


def compose_full(outer: Configuration, inputs: Sequence[Configuration]) -> Configuration:
    if outer.target != FULL:
        raise ColorMismatch("compose_full needs a full target")
    if len(inputs) != outer.n:
        raise ArityMismatch(f"{outer.n} slots, {len(inputs)} inputs")
    _check_dims(outer, inputs)
    out = []
    for slot, x in zip(outer.full, inputs):
        if x.target != FULL:
            raise ColorMismatch("full slots take full-target configurations")
        out.extend(_place(slot, disc, False) for disc in x.full)
    return Configuration(outer.d, FULL, tuple(out), ())


def compose_mixed(outer: Configuration, full_inputs: Sequence[Configuration],
                  half_inputs: Sequence[Configuration]) -> Configuration:
    """Fill the n full slots with E_d configurations and the m half slots with
    half-target configurations.  Slots are ordered full first."""
    if outer.target != HALF:
        raise ColorMismatch("compose_mixed needs a half target")
    if len(full_inputs) != outer.n or len(half_inputs) != outer.m:
        raise ArityMismatch(f"slots ({outer.n}, {outer.m}), inputs "
                            f"({len(full_inputs)}, {len(half_inputs)})")
    _check_dims(outer, list(full_inputs) + list(half_inputs))
    full_out, half_out = [], []
    for slot, x in zip(outer.full, full_inputs):
        if x.target != FULL:
            raise ColorMismatch("full slots take full-target configurations")
        full_out.extend(_place(slot, disc, False) for disc in x.full)
    for slot, x in zip(outer.half, half_inputs):
        if x.target != HALF:
            raise ColorMismatch("half slots take half-target configurations")
        full_out.extend(_place(slot, disc, True) for disc in x.full)
        half_out.extend(_place(slot, disc, False) for disc in x.half)
    return Configuration(outer.d, HALF, tuple(full_out), tuple(half_out))


def compose(outer: Configuration, inputs: Sequence[Configuration]) -> Configuration:
    """Composition with the slots listed full first."""
    if outer.target == FULL:
        return compose_full(outer, inputs)
    if len(inputs) != outer.n + outer.m:
        raise ArityMismatch(f"{outer.n + outer.m} slots, {len(inputs)} inputs")
    return compose_mixed(outer, inputs[:outer.n], inputs[outer.n:])


def sigma_act(cfg: Configuration, perm_full: Sequence[int],
              perm_half: Sequence[int] = ()) -> Configuration:
    """Right action: disc i of the result is disc perm[i] of ``cfg``."""
    if not is_perm(perm_full, cfg.n) or not is_perm(perm_half, cfg.m):
        raise ValueError("permutation sizes must match the disc counts")
    return Configuration(cfg.d, cfg.target, tuple(cfg.full[i] for i in perm_full),
                         tuple(cfg.half[i] for i in perm_half))


def identify_half_lower(cfg: Configuration) -> Configuration:
    """SC_d^h(0, m) -> E_{d-1}(m)."""
    if cfg.target != HALF:
        raise ColorMismatch("expected a half-target configuration")
    if cfg.full:
        raise ValueError("full discs present")
    return Configuration(cfg.d - 1, FULL, cfg.half, ())


def lift_half_lower(cfg: Configuration) -> Configuration:
    """E_{d-1}(m) -> SC_d^h(0, m), inverse of identify_half_lower."""
    if cfg.target != FULL:
        raise ColorMismatch("expected a full-target configuration")
    return Configuration(cfg.d + 1, HALF, (), cfg.full)


def project_forget_full(cfg: Configuration) -> Configuration:
    if cfg.target != HALF or cfg.n != 1:
        raise ValueError(f"expected exactly one full disc, found {cfg.n}")
    return identify_half_lower(Configuration(cfg.d, HALF, (), cfg.half))


def pi0_invariant_d1(cfg: Configuration) -> tuple:
    """Labels read from left to right, e.g. (('h', 0), ('f', 1), ('f', 0))."""
    if cfg.d != 1:
        raise ValueError("pi0_invariant_d1 needs d = 1")
    items = [(Fraction(0), ("h", j)) for j in range(cfg.m)]
    items += [(disc.c[0], ("f", i)) for i, disc in enumerate(cfg.full)]
    items.sort(key=lambda t: t[0])
    return tuple(label for _, label in items)


# ---------------------------------------------------------------- JSON

def config_to_dict(cfg: Configuration) -> dict:
    discs = [{"color": "full", "r": format_scalar(d.r), "c": [format_scalar(v) for v in d.c]}
             for d in cfg.full]
    discs += [{"color": "half", "r": format_scalar(d.r), "c": [format_scalar(v) for v in d.c]}
              for d in cfg.half]
    return {"d": cfg.d, "target": cfg.target, "discs": discs}


def config_from_dict(data) -> Configuration:
    try:
        d = data["d"]
        target = data["target"]
        discs = data["discs"]
    except (KeyError, TypeError):
        raise ParseError("a configuration needs keys d, target, discs") from None
    if not isinstance(d, int) or isinstance(d, bool) or target not in (FULL, HALF):
        raise ParseError("d must be an integer and target full or half")
    full, half = [], []
    for item in discs:
        if not isinstance(item, dict) or item.get("color") not in (FULL, HALF):
            raise ParseError(f"bad disc entry {item!r}")
        disc = Disc(parse_scalar(item.get("r")), tuple(parse_scalar(v) for v in item.get("c", [])))
        if item["color"] == FULL:
            full.append(disc)
        else:
            if len(disc.c) == d and d > 0 and disc.c[-1] == 0:
                disc = Disc(disc.r, disc.c[:-1])
            half.append(disc)
    return Configuration(d, target, tuple(full), tuple(half))


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed separators."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def config_to_json(cfg: Configuration) -> str:
    return dumps(config_to_dict(cfg))


def config_from_json(text: str) -> Configuration:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return config_from_dict(data)


# ---------------------------------------------------------------- operads

class LittleDiscs(OperadInstance):
    colors = ("f",)

    def __init__(self, d: int):
        self.d = d

    def input_colors(self, x):
        return ("f",) * x.n

    def output_color(self, x):
        return "f"

    def compose(self, x, ys):
        return compose_full(x, ys)

    def identity(self, color="f"):
        return identity_config(self.d, FULL)

    def act(self, x, perm):
        return sigma_act(x, perm, ())

    def is_identity(self, x):
        return x.n == 1 and x.full[0].r == 1


class SwissCheese(OperadInstance):
    colors = ("f", "h")

    def __init__(self, d: int):
        self.d = d

    def input_colors(self, x):
        return ("f",) * x.n + ("h",) * x.m

    def output_color(self, x):
        return "f" if x.target == FULL else "h"

    def compose(self, x, ys):
        return compose(x, list(ys))

    def identity(self, color):
        return identity_config(self.d, FULL if color == "f" else HALF)

    def act(self, x, perm):
        n = x.n
        return sigma_act(x, tuple(perm[:n]), tuple(p - n for p in perm[n:]))

    def is_identity(self, x):
        return x.n + x.m == 1 and (x.full or x.half)[0].r == 1


# ---------------------------------------------------------------- sampling

def _rand_coord(rng: random.Random, lo: Fraction, hi: Fraction, den: int) -> Fraction:
    a = -((-lo * den) // 1)  # ceil
    b = (hi * den) // 1
    if a > b:
        return (lo + hi) / 2
    return Fraction(rng.randint(int(a), int(b)), den)


def _try_place(rng, d, target, kinds, den, max_den):
    placed: list = []  # (kind, disc, center padded to d coordinates)
    for kind in kinds:
        if len(kinds) == 1 and rng.random() < 0.2:
            r = Fraction(1) if (kind == "h" or target == FULL) else Fraction(1, 2)
        else:
            r = Fraction(1, rng.randint(2, max_den))
        for attempt in range(200):
            if attempt and attempt % 40 == 0:
                r /= 2
            den = max(den, 4 * r.denominator)
            lim = 1 - r
            if kind == "h":
                c = tuple(_rand_coord(rng, -lim, lim, den) for _ in range(d - 1))
                pad = c + (Fraction(0),)
            elif target == HALF:
                c = tuple(_rand_coord(rng, -lim, lim, den) for _ in range(d - 1))
                c = c + (_rand_coord(rng, r, lim, den),)
                pad = c
            else:
                c = tuple(_rand_coord(rng, -lim, lim, den) for _ in range(d))
                pad = c
            if _sq(c) > lim * lim:
                continue
            if kind == "f" and target == HALF and c[-1] < r:
                continue
            if any(_dist_sq(pad, q) <= (r + disc.r) ** 2 for _, disc, q in placed):
                continue
            placed.append((kind, Disc(r, c), pad))
            break
        else:
            return None
    return [(kind, disc) for kind, disc, _ in placed]


def random_config(rng: random.Random, d: int, target: str, n: int, m: int = 0,
                  den: int = 32) -> Configuration:
    """A random valid configuration with n full and m half discs."""
    if target == FULL and m:
        raise ValueError("full targets carry no half discs")
    if target == HALF and d == 1 and m > 1:
        raise ValueError("at d = 1 at most one half disc fits")
    if target == FULL and d == 0 and n > 1:
        raise ValueError("E_0 has at most one disc")
    kinds = ["h"] * m + ["f"] * n
    total = n + m
    for restart in range(20):
        placed = _try_place(rng, d, target, kinds, den, 2 + 2 * total + 4 * restart)
        if placed is not None:
            break
    else:
        raise RuntimeError("could not place the discs")
    full = [disc for kind, disc in placed if kind == "f"]
    half = [disc for kind, disc in placed if kind == "h"]
    rng.shuffle(full)
    return Configuration(d, target, tuple(full), tuple(half))


def random_full_sample(rng: random.Random, d: int, max_arity: int = 3):
    """A composable triple (x, ys, zss) in E_d."""
    x = random_config(rng, d, FULL, rng.randint(0, max_arity))
    ys = [random_config(rng, d, FULL, rng.randint(0, max_arity)) for _ in range(x.n)]
    zss = [[random_config(rng, d, FULL, rng.randint(0, 2)) for _ in range(y.n)] for y in ys]
    return x, ys, zss


def _random_sc(rng: random.Random, d: int, color: str, max_arity: int) -> Configuration:
    if color == "f":
        return random_config(rng, d, FULL, rng.randint(0, max_arity))
    m_max = 1 if d == 1 else max_arity
    m = rng.randint(0, m_max)
    return random_config(rng, d, HALF, rng.randint(0, max_arity - m if max_arity > m else 0), m)


def random_sc_sample(rng: random.Random, d: int, max_arity: int = 3):
    """A composable triple (x, ys, zss) in SC_d with an h-output outer element."""
    op = SwissCheese(d)
    x = _random_sc(rng, d, "h", max_arity)
    ys = [_random_sc(rng, d, c, max_arity) for c in op.input_colors(x)]
    zss = [[_random_sc(rng, d, c, 2) for c in op.input_colors(y)] for y in ys]
    return x, ys, zss


# ---------------------------------------------------------------- rendering

def render_svg(obj, **kwargs) -> str:
    """SVG text for a configuration (d = 1 or 2) or a decorated tree."""
    from . import render
    if isinstance(obj, Configuration):
        return render.config_svg(obj)
    return render.tree_svg(obj, **kwargs)
