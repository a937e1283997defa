"""Exact combinatorics of regular trees and their boundaries.

Two backends share one vertex/boundary protocol:

* `BruhatTitsTree(q)` - vertices are balls of the Laurent field, encoded as
  (level, center) where the canonical center zeroes every coefficient at or
  above the level.  Ends are coefficient streams (Laurent windows, quadratic
  irrationals with on-demand re-expansion, eventually periodic streams) plus
  the distinguished end above the base point.
* `CayleyTree(k)` - the 2k-regular Cayley tree of the rank-k free group;
  vertices are reduced words, ends are eventually periodic infinite reduced
  words.

On top of the protocol: Busemann cocycles, closest-point projections to
convex subsets, the boundary distance seen from a convex set with its exact
case formula and truncated-limit oracle, the horospherical (Hamenstaedt)
distance at the distinguished end, distances between geodesic lines, shadows
and exactly-measured cylinder unions, the double-coset table of a rank-k free
group relative to a generator axis, and neighborhoods of translated axis
ends.  Every quantity in this module is an integer, half-integer exponent or
exact rational mass; no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactnum import ExactError, Laurent, PrecisionExhausted

NEG_INF = float("-inf")  # sentinel exponent for coincident boundary points

_STREAM_CAP = 4096  # maximal depth consulted before declaring streams equal


class ProjectionAtInfinity(ExactError):
    """The point to project lies in the boundary of the convex set."""


# ---------------------------------------------------------------------------
# Boundary points
# ---------------------------------------------------------------------------


class Infinity:
    """The end above the base point of the Bruhat-Tits backend."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "oo"


INF = Infinity()


class LaurentEnd:
    """End of the Bruhat-Tits tree given by a Laurent coefficient window."""

    def __init__(self, series: Laurent):
        if series.is_exact_zero:
            series = Laurent.make(series.q, 0, (), 10**9)
        self.series = series

    def coeff(self, i: int) -> int:
        return self.series.coeff(i)

    @property
    def first_exp(self) -> int:
        return self.series.val if self.series.coeffs else self.series.abs_prec

    def depth_limit(self) -> int | None:
        return self.series.abs_prec

    def __repr__(self):
        return f"End({self.series})"


class QuadIrrEnd:
    """End backed by a quadratic irrational; extends its window on demand."""

    def __init__(self, alpha, prec: int = 24):
        self.alpha = alpha
        self._series = alpha.expand(prec)
        self._prec = prec

    def coeff(self, i: int) -> int:
        while self._series.abs_prec is not None and i >= self._series.abs_prec:
            self._prec *= 2
            self._series = self.alpha.expand(self._prec)
        return self._series.coeff(i)

    @property
    def first_exp(self) -> int:
        return self._series.val

    def depth_limit(self) -> int | None:
        return None

    def __repr__(self):
        return f"End({self.alpha})"


class PeriodicEnd:
    """Eventually periodic coefficient stream: exact to any depth."""

    def __init__(self, q: int, start_exp: int, pre: tuple[int, ...], per: tuple[int, ...]):
        if not per:
            raise ExactError("period must be nonempty")
        self.q, self.start_exp = q, start_exp
        self.pre, self.per = tuple(c % q for c in pre), tuple(c % q for c in per)

    def coeff(self, i: int) -> int:
        j = i - self.start_exp
        if j < 0:
            return 0
        if j < len(self.pre):
            return self.pre[j]
        return self.per[(j - len(self.pre)) % len(self.per)]

    @property
    def first_exp(self) -> int:
        return self.start_exp

    def depth_limit(self) -> int | None:
        return None


def ends_equal(a, b, cap: int = _STREAM_CAP) -> bool:
    if a is INF or b is INF:
        return a is b
    if a is b:
        return True
    lo = min(a.first_exp, b.first_exp)
    limits = [x.depth_limit() for x in (a, b) if x.depth_limit() is not None]
    hi = min([lo + cap] + limits)
    for i in range(lo, hi):
        if a.coeff(i) != b.coeff(i):
            return False
    return True


# Cayley ends: infinite reduced words, eventually periodic.


class WordEnd:
    def __init__(self, k: int, pre: tuple[int, ...], per: tuple[int, ...]):
        if not per:
            raise ExactError("period must be nonempty")
        self.k = k
        self.pre, self.per = tuple(pre), tuple(per)
        probe = list(pre) + list(per) * 2
        for a, b in zip(probe, probe[1:]):
            if b == a ^ 1:
                raise ExactError("stream is not reduced")

    def letter(self, i: int) -> int:
        if i < len(self.pre):
            return self.pre[i]
        return self.per[(i - len(self.pre)) % len(self.per)]

    def depth_limit(self) -> int | None:
        return None

    def __repr__(self):
        return f"WordEnd({self.pre}|{self.per})"


def word_ends_equal(a: WordEnd, b: WordEnd, cap: int = _STREAM_CAP) -> bool:
    if a is b:
        return True
    n = len(a.pre) + len(b.pre) + len(a.per) * len(b.per) + 1
    return all(a.letter(i) == b.letter(i) for i in range(min(n, cap)))


# ---------------------------------------------------------------------------
# Tree backends
# ---------------------------------------------------------------------------


class BruhatTitsTree:
    """(q+1)-regular tree of balls of F_q((1/X)).

    A vertex is (level n, center), center a tuple of (exponent, coefficient)
    pairs with exponent < n and nonzero coefficient: the ball of elements
    agreeing with the center at every exponent below n.  Children refine the
    ball by one coefficient; the parent forgets one.
    """

    def __init__(self, q: int):
        if q < 2:
            raise ExactError("branching needs q >= 2")
        self.q = q
        self.degree = q + 1
        self.base = (0, ())

    # -- vertices ---------------------------------------------------------

    def parent(self, v):
        n, c = v
        if c and c[-1][0] == n - 1:
            return (n - 1, c[:-1])
        return (n - 1, c)

    def child(self, v, coeff: int):
        n, c = v
        coeff %= self.q
        if coeff:
            return (n + 1, c + ((n, coeff),))
        return (n + 1, c)

    def dist(self, u, v) -> int:
        (m, cu), (n, cv) = u, v
        agree = self._first_disagreement(cu, cv)
        meet = min(m, n, agree)
        return (m - meet) + (n - meet)

    @staticmethod
    def _first_disagreement(cu, cv) -> float:
        i = j = 0
        while i < len(cu) and j < len(cv):
            eu, au = cu[i]
            ev, av = cv[j]
            if eu == ev:
                if au != av:
                    return eu
                i += 1
                j += 1
            elif eu < ev:
                return eu
            else:
                return ev
        if i < len(cu):
            return cu[i][0]
        if j < len(cv):
            return cv[j][0]
        return float("inf")

    def contains_end(self, v, xi) -> bool:
        """Does the end descend through the ball v?"""
        if xi is INF:
            return False
        n, c = v
        lo = min(xi.first_exp, c[0][0] if c else n)
        idx = {e: a for e, a in c}
        for i in range(lo, n):
            if xi.coeff(i) != idx.get(i, 0):
                return False
        return True

    def step_toward(self, v, xi):
        """Next vertex from v on the geodesic to the end xi."""
        if xi is INF:
            return self.parent(v)
        if self.contains_end(v, xi):
            return self.child(v, xi.coeff(v[0]))
        return self.parent(v)

    def step_toward_vertex(self, v, w):
        if v == w:
            raise ExactError("no step from a vertex to itself")
        p = self.parent(v)
        if self.dist(p, w) < self.dist(v, w):
            return p
        return self.child(v, dict(w[1]).get(v[0], 0))

    def end_of_laurent(self, series: Laurent) -> LaurentEnd:
        return LaurentEnd(series)

    def end_of_quadirr(self, alpha) -> QuadIrrEnd:
        return QuadIrrEnd(alpha)

    def ends_equal(self, a, b) -> bool:
        return ends_equal(a, b)

    def hamenstadt_exponent(self, xi, eta) -> int:
        """log of the horospherical distance at the end above the base point:
        exactly the valuation of the difference of the two streams."""
        if xi is INF or eta is INF:
            raise ExactError("points must differ from the distinguished end")
        lo = min(xi.first_exp, eta.first_exp)
        limits = [x.depth_limit() for x in (xi, eta) if x.depth_limit() is not None]
        hi = min([lo + _STREAM_CAP] + limits)
        for i in range(lo, hi):
            if xi.coeff(i) != eta.coeff(i):
                return -i
        raise PrecisionExhausted("streams agree through the tracked window")

    def ball_vertex(self, xi, level: int):
        """Vertex at the given level on the geodesic from INF to xi."""
        c = []
        for i in range(min(xi.first_exp, level), level):
            a = xi.coeff(i)
            if a:
                c.append((i, a))
        return (level, tuple(c))


class CayleyTree:
    """2k-regular Cayley tree of the free group on k letters.

    Letters are 0..2k-1 with involution g -> g^1; vertices are reduced words
    (tuples).  The branching number is 2k-1.
    """

    def __init__(self, k: int):
        if k < 2:
            raise ExactError("free group rank must be >= 2")
        self.k = k
        self.q = 2 * k - 1  # branching
        self.degree = 2 * k
        self.base = ()

    @staticmethod
    def reduce(word) -> tuple[int, ...]:
        out: list[int] = []
        for g in word:
            if out and out[-1] == g ^ 1:
                out.pop()
            else:
                out.append(g)
        return tuple(out)

    def dist(self, u, v) -> int:
        cp = 0
        for a, b in zip(u, v):
            if a != b:
                break
            cp += 1
        return len(u) + len(v) - 2 * cp

    def contains_end(self, v, xi: WordEnd) -> bool:
        return all(xi.letter(i) == g for i, g in enumerate(v))

    def step_toward(self, v, xi: WordEnd):
        if self.contains_end(v, xi):
            return v + (xi.letter(len(v)),)
        return v[:-1]

    def step_toward_vertex(self, v, w):
        if v == w:
            raise ExactError("no step from a vertex to itself")
        cp = 0
        for a, b in zip(v, w):
            if a != b:
                break
            cp += 1
        if cp == len(v):
            return v + (w[len(v)],)
        return v[:-1]

    def ends_equal(self, a: WordEnd, b: WordEnd) -> bool:
        return word_ends_equal(a, b)

    def end_of_word_power(self, word: tuple[int, ...]) -> WordEnd:
        """The end w^infinity for a cyclically reduced word."""
        return WordEnd(self.k, (), tuple(word))

    def end_through(self, word, tail_letter: int | None = None) -> WordEnd:
        """End extending the vertex word by repeating a letter."""
        word = tuple(word)
        t = tail_letter if tail_letter is not None else (word[-1] if word else 0)
        if word and t == word[-1] ^ 1:
            raise ExactError("tail would cancel")
        return WordEnd(self.k, word, (t,))

    def left_translate_vertex(self, w, v):
        return self.reduce(tuple(w) + tuple(v))

    def left_translate_end(self, w, xi: WordEnd) -> WordEnd:
        w = tuple(w)
        pre = list(xi.pre)
        while len(pre) < len(w) + 1:
            pre.extend(xi.per)
        head = list(self.reduce(w + tuple(pre)))
        return WordEnd(self.k, tuple(head), xi.per)


# ---------------------------------------------------------------------------
# Convex subsets and projections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VertexSet:
    """A single vertex as a (degenerate) convex set."""

    v: object


@dataclass(frozen=True)
class Line:
    """Bi-infinite geodesic given by its two distinct ends."""

    xi: object
    eta: object


@dataclass(frozen=True)
class FiniteSubtree:
    vertices: frozenset

    def __post_init__(self):
        if not self.vertices:
            raise ExactError("empty subtree")


@dataclass(frozen=True)
class LineNeighborhood:
    """All points within distance radius of a line; still convex."""

    line: Line
    radius: int


def _on_line(tree, v, line: Line) -> bool:
    return tree.step_toward(v, line.xi) != tree.step_toward(v, line.eta)


def vertex_on_line(tree, line: Line):
    """Some vertex on the line: walk from the base until the ends separate."""
    v = tree.base
    for _ in range(_STREAM_CAP):
        if _on_line(tree, v, line):
            return v
        v = tree.step_toward(v, line.xi)
    raise PrecisionExhausted("line not located within the stream cap")


def _project_onto_line(tree, line: Line, target_step) -> object:
    """Walk along the line in the target's direction until it leaves."""
    v = vertex_on_line(tree, line)
    for _ in range(_STREAM_CAP):
        s = target_step(v)
        if s is None or not _on_line(tree, s, line):
            return v
        v = s
    raise PrecisionExhausted("projection walk exceeded the stream cap")


def project(tree, C, xi):
    """Closest-point projection of the end xi onto the convex set C."""
    if isinstance(C, VertexSet):
        return C.v
    if isinstance(C, Line):
        if tree.ends_equal(xi, C.xi) or tree.ends_equal(xi, C.eta):
            raise ProjectionAtInfinity("end lies in the boundary of the line")
        return _project_onto_line(tree, C, lambda v: tree.step_toward(v, xi))
    if isinstance(C, FiniteSubtree):
        v = next(iter(C.vertices))
        for _ in range(_STREAM_CAP):
            s = tree.step_toward(v, xi)
            if s not in C.vertices:
                return v
            v = s
        raise PrecisionExhausted("projection walk exceeded the stream cap")
    if isinstance(C, LineNeighborhood):
        p = project(tree, C.line, xi)
        for _ in range(C.radius):
            p = tree.step_toward(p, xi)
        return p
    raise ExactError(f"unsupported convex set {type(C).__name__}")


def project_vertex(tree, C, x):
    """Closest-point projection of a vertex onto the convex set C."""
    if isinstance(C, VertexSet):
        return C.v
    if isinstance(C, Line):
        def step(v):
            return None if v == x else tree.step_toward_vertex(v, x)

        return _project_onto_line(tree, C, step)
    if isinstance(C, FiniteSubtree):
        v = next(iter(C.vertices))
        while v != x:
            s = tree.step_toward_vertex(v, x)
            if s not in C.vertices:
                return v
            v = s
        return v
    if isinstance(C, LineNeighborhood):
        p = project_vertex(tree, C.line, x)
        for _ in range(C.radius):
            if p == x:
                break
            p = tree.step_toward_vertex(p, x)
        return p
    raise ExactError(f"unsupported convex set {type(C).__name__}")


def walk(tree, start, xi, steps: int):
    v = start
    for _ in range(steps):
        v = tree.step_toward(v, xi)
    return v


def ray_overlap(tree, p, xi, eta, cap: int = _STREAM_CAP) -> int:
    """Length of the common prefix of the rays from p to xi and to eta."""
    v = p
    n = 0
    for _ in range(cap):
        a = tree.step_toward(v, xi)
        b = tree.step_toward(v, eta)
        if a != b:
            return n
        v = a
        n += 1
    raise PrecisionExhausted("rays agree through the stream cap")


# ---------------------------------------------------------------------------
# Busemann cocycle and boundary distances
# ---------------------------------------------------------------------------


def busemann(tree, xi, x, y) -> int:
    """Asymptotic difference d(x, xi_t) - d(y, xi_t), exact.

    Computed at two stabilization depths; equality certifies the limit.
    """
    t = tree.dist(x, y) + 2
    while True:
        xt = walk(tree, y, xi, t)
        a = tree.dist(x, xt) - t
        xt2 = tree.step_toward(xt, xi)
        b = tree.dist(x, xt2) - (t + 1)
        if a == b:
            return a
        t *= 2
        if t > _STREAM_CAP:
            raise PrecisionExhausted("Busemann walk exceeded the stream cap")


def boundary_gap_exponent(tree, C, xi, eta):
    """log of the boundary distance seen from the convex set C.

    Case split: distinct projections give half the distance between them;
    equal projections give minus the overlap of the two rays leaving the
    projection.  Coincident ends return the -infinity sentinel.
    """
    if tree.ends_equal(xi, eta):
        return NEG_INF
    p = project(tree, C, xi)
    p2 = project(tree, C, eta)
    if p != p2:
        return Fraction(tree.dist(p, p2), 2)
    return Fraction(-ray_overlap(tree, p, xi, eta))


def boundary_gap_limit(tree, C, xi, eta, t: int):
    """Truncated limit definition: half the distance between the depth-t
    points of the rays, minus t.  Stabilizes once t clears the bridge."""
    p = project(tree, C, xi)
    p2 = project(tree, C, eta)
    xt = walk(tree, p, xi, t)
    yt = walk(tree, p2, eta, t)
    return Fraction(tree.dist(xt, yt), 2) - t


def boundary_gap_limit_rebased(tree, C, xi, eta, t: int, base_xi, base_eta):
    """Limit formula along rays from arbitrary base vertices: half of
    (d(xi_t, eta_t) - d(xi_t, p_xi) - d(eta_t, p_eta))."""
    p = project(tree, C, xi)
    p2 = project(tree, C, eta)
    xt = walk(tree, base_xi, xi, t)
    yt = walk(tree, base_eta, eta, t)
    s = tree.dist(xt, yt) - tree.dist(xt, p) - tree.dist(yt, p2)
    return Fraction(s, 2)


def line_distance(tree, l1: Line, l2: Line) -> int:
    """Distance between two geodesic lines; 0 when they meet or share an end."""
    for a in (l1.xi, l1.eta):
        for b in (l2.xi, l2.eta):
            if tree.ends_equal(a, b):
                return 0
    p = project(tree, l1, l2.xi)
    p2 = project(tree, l1, l2.eta)
    if p != p2:
        return 0
    s = project(tree, l2, l1.xi)
    return tree.dist(p, s)


def convex_to_line_distance(tree, C, line: Line) -> int:
    """d(C, line): project a line point onto C, then back onto the line."""
    if isinstance(C, Line):
        return line_distance(tree, C, line)
    if isinstance(C, VertexSet):
        f = project_vertex(tree, line, C.v)
        return tree.dist(C.v, f)
    w = vertex_on_line(tree, line)
    p = project_vertex(tree, C, w)
    f = project_vertex(tree, line, p)
    return tree.dist(p, f)


# ---------------------------------------------------------------------------
# Cylinders and exact boundary measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    """Ends through the directed edge (u, v): the boundary of the subtree
    hanging at v away from u.  Mass is for the visual measure at the base
    vertex, normalized so each of the degree-many depth-1 branches at the
    base weighs 1/degree."""

    tree: object
    u: object
    v: object

    def __post_init__(self):
        if self.tree.dist(self.u, self.v) != 1:
            raise ExactError("branch requires an edge")

    def mass(self) -> Fraction:
        t = self.tree
        deg, q = t.degree, t.q
        du, dv = t.dist(t.base, self.u), t.dist(t.base, self.v)
        if dv == du + 1:  # points away from the base
            return Fraction(1, deg * q ** (dv - 1))
        rev = Fraction(1, deg * q ** (du - 1))
        return 1 - rev

    def contains_end(self, xi) -> bool:
        return self.tree.step_toward(self.u, xi) == self.v

    def contains_vertex(self, w) -> bool:
        return self.tree.dist(self.u, w) == 1 + self.tree.dist(self.v, w)

    def subset_of(self, other: "Branch") -> bool:
        if self == other:
            return True
        return other.contains_vertex(self.u) and other.contains_vertex(self.v)

    def disjoint_from(self, other: "Branch") -> bool:
        return not (self.subset_of(other) or other.subset_of(self))


@dataclass(frozen=True)
class CylinderUnion:
    branches: tuple[Branch, ...]

    @classmethod
    def of(cls, branches, check: bool = True) -> "CylinderUnion":
        bs = tuple(branches)
        if check:
            for i in range(len(bs)):
                for j in range(i + 1, len(bs)):
                    if not bs[i].disjoint_from(bs[j]):
                        raise ExactError("branches are not pairwise disjoint")
        return cls(bs)

    def mass(self) -> Fraction:
        return sum((b.mass() for b in self.branches), Fraction(0))

    def contains_end(self, xi) -> bool:
        return any(b.contains_end(xi) for b in self.branches)

    def union(self, other: "CylinderUnion") -> "CylinderUnion":
        """Union, reduced to maximal branches (branch families are laminar)."""
        merged = list(self.branches) + list(other.branches)
        fast = _word_away_union(merged)
        if fast is not None:
            return fast
        keep = []
        for i, b in enumerate(merged):
            if any(i != j and b != merged[j] and b.subset_of(merged[j]) for j in range(len(merged))):
                continue
            if b not in keep:
                keep.append(b)
        return CylinderUnion(tuple(keep))

    def intersect(self, other: "CylinderUnion") -> "CylinderUnion":
        out = []
        for a in self.branches:
            for b in other.branches:
                if a.subset_of(b):
                    out.append(a)
                elif b.subset_of(a):
                    out.append(b)
        dedup = []
        for b in out:
            if b not in dedup:
                dedup.append(b)
        return CylinderUnion(tuple(dedup))

    def intersects(self, other: "CylinderUnion") -> bool:
        return any(not a.disjoint_from(b) for a in self.branches for b in other.branches)

    def subset_of(self, other: "CylinderUnion") -> bool:
        return all(any(a.subset_of(b) for b in other.branches) for a in self.branches)

    def disjoint_from(self, other: "CylinderUnion") -> bool:
        return not self.intersects(other)


def _word_away_union(branches) -> "CylinderUnion | None":
    """Fast laminar reduction when every branch hangs below a word vertex
    (head = parent plus one letter): keep heads with no kept proper prefix."""
    for b in branches:
        if not (isinstance(b.v, tuple) and b.u == b.v[:-1] and b.v):
            return None
    kept: set[tuple] = set()
    out = []
    for b in sorted(branches, key=lambda b: len(b.v)):
        v = b.v
        if any(v[:i] in kept for i in range(1, len(v) + 1)):
            continue
        kept.add(v)
        out.append(b)
    return CylinderUnion(tuple(out))


def full_boundary(tree) -> CylinderUnion:
    """The whole boundary as the union of the depth-1 branches at the base."""
    if isinstance(tree, CayleyTree):
        nbrs = [(g,) for g in range(2 * tree.k)]
    else:
        nbrs = [tree.parent(tree.base)] + [tree.child(tree.base, c) for c in range(tree.q)]
    return CylinderUnion.of([Branch(tree, tree.base, v) for v in nbrs])


def shadow(tree, x, v) -> CylinderUnion:
    """Ends of rays from x through v (x != v): the branch entered at v."""
    if x == v:
        raise ExactError("shadow from the vertex itself is the whole boundary")
    u = tree.step_toward_vertex(v, x)
    return CylinderUnion.of([Branch(tree, u, v)])


# ---------------------------------------------------------------------------
# Free-group double cosets relative to the axis of the first generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DoubleCoset:
    """Coset of the axis subgroup: canonical word w with no leading or
    trailing first-generator letter; depth = distance between the axis and
    its w-translate, which for canonical words is the word length."""

    word: tuple[int, ...]
    depth: int


def axis_line(tree: CayleyTree) -> Line:
    """Axis of the first generator: the line through the base joining the
    two ends repeating letter 0 and letter 1."""
    return Line(tree.end_of_word_power((0,)), tree.end_of_word_power((1,)))


def translated_axis(tree: CayleyTree, w) -> Line:
    base = axis_line(tree)
    return Line(
        tree.left_translate_end(w, base.xi), tree.left_translate_end(w, base.eta)
    )


def canonical_coset_words(k: int, max_len: int):
    """All reduced words of length <= max_len starting and ending away from
    the axis letters; deterministic depth-first order, streamed."""
    letters = list(range(2 * k))
    inner = [g for g in letters if g not in (0, 1)]

    def rec(word, remaining):
        for g in letters if word else inner:
            if word and g == word[-1] ^ 1:
                continue
            nxt = word + (g,)
            if nxt[-1] not in (0, 1):
                yield nxt
            if remaining > 1:
                yield from rec(nxt, remaining - 1)

    yield from rec((), max_len)


def count_cosets_by_depth(k: int, d_max: int) -> dict[int, int]:
    """Exact count of canonical words per length, by transfer recursion."""
    # state: last letter class (axis letters 0/1 cannot start or end)
    counts: dict[int, int] = {}
    prev = {g: (1 if g not in (0, 1) else 0) for g in range(2 * k)}
    counts[1] = sum(v for g, v in prev.items() if g not in (0, 1))
    for n in range(2, d_max + 1):
        cur = {g: 0 for g in range(2 * k)}
        for g, v in prev.items():
            if not v:
                continue
            for h in range(2 * k):
                if h != g ^ 1:
                    cur[h] += v
        counts[n] = sum(v for g, v in cur.items() if g not in (0, 1))
        prev = cur
    return counts


def free_group_double_cosets(k: int, d_max: int, budget: int = 2_000_000):
    """Complete table of double cosets with depth <= d_max.

    Depth equals canonical word length because no cancellation can occur at
    the junctions; module tests verify this against line distances.
    """
    out = []
    for w in canonical_coset_words(k, d_max):
        out.append(DoubleCoset(w, len(w)))
        if len(out) > budget:
            raise ExactError("double coset budget exceeded")
    return out


def coset_depth_by_lines(tree: CayleyTree, w) -> int:
    """Depth via the line distance between the axis and its translate."""
    return line_distance(tree, axis_line(tree), translated_axis(tree, w))


def target_neighborhood(tree: CayleyTree, word, m: int) -> CylinderUnion:
    """Exact sublevel set {gap from the axis <= e^-m} around the two ends of
    the translated axis, for integer m >= 1: one branch along each ray from
    the base through word (they coincide up to the word's length)."""
    if not isinstance(m, int):
        raise ExactError("radius exponent off the realizable grid (integer required)")
    if m < 1:
        raise ExactError("neighborhood radius must be below 1 (m >= 1)")
    word = tuple(word)
    if not word or word[0] in (0, 1) or word[-1] in (0, 1):
        raise ExactError("word must be a canonical coset representative")
    if m <= len(word):
        u, v = word[: m - 1], word[:m]
        return CylinderUnion.of([Branch(tree, u, v)])
    tail_a = word + (0,) * (m - len(word))
    tail_b = word + (1,) * (m - len(word))
    return CylinderUnion.of(
        [Branch(tree, tail_a[:-1], tail_a), Branch(tree, tail_b[:-1], tail_b)]
    )


def snap_exponent_to_grid(m: Fraction) -> int:
    """Radii below 1 are realized only at integer exponents; snapping down
    (to the next integer up in exponent) leaves the sublevel set unchanged."""
    from math import ceil

    return max(1, ceil(m))


# ---------------------------------------------------------------------------
# Dumps
# ---------------------------------------------------------------------------


def edge_list_lines(tree, vertices) -> list[str]:
    """Text edge list of the induced subtree on the given vertices."""
    vset = set(vertices)
    names = {v: str(i) for i, v in enumerate(sorted(vset, key=repr))}
    lines = []
    for v in sorted(vset, key=repr):
        for w in sorted(vset, key=repr):
            if repr(w) <= repr(v):
                continue
            if tree.dist(v, w) == 1:
                lines.append(f"{names[v]} {names[w]}")
    return lines


def coset_table_csv_rows(cosets) -> list[tuple[str, int]]:
    return [("".join(_LETTER_NAMES[g] for g in c.word), c.depth) for c in cosets]


_LETTER_NAMES = {0: "a", 1: "A", 2: "b", 3: "B", 4: "c", 5: "C", 6: "d", 7: "D"}
