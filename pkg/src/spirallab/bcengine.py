"""Exactly-measured limsup dichotomy engine on tree boundaries.

An instance is a level-indexed family of shrinking boundary sets B_i(eps)
(cylinder unions, exact rational masses) together with rate functions
f1..f4 on levels and a radius-scaling function f5.  Radii live on the exact
exponent grid: a radius eps = e^-m is passed as the exponent m, so every
hypothesis check is an equality or an exact rational comparison, never a
tolerance.

The engine checks the seven structural conditions

  (1) f3 <= f2                 (2) 1/(f5 o f2) <= f4 f1
  (3) f5(eps') <= c'' f5(eps) whenever eps' <= c' eps
  (4) card I_n  within [f1/c, c f1]
  (5) mass B_i(eps) within [f4 f5/c, c f4 f5] for eps <= f2
  (6) same-level sets disjoint at radius f2
  (7) lower-level hit forces containment at radius c f3

computes truncated limsup masses exactly, and issues a verdict by combining
a declared series heuristic for sum f1 f4 f5(f3) with the measured masses:
convergent series with vanishing tails give measure zero; divergent series
give positive measure either through conditions (1)-(7) or through exact
pairwise quasi-independence of the level sets.  Anything else stays
inconclusive: the engine never upgrades a truncation to a certainty.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .exactnum import ExactError
from .treespace import (
    Branch,
    CayleyTree,
    CylinderUnion,
    canonical_coset_words,
    target_neighborhood,
)


class InstanceError(ExactError):
    pass


@dataclass
class Rates:
    """Level rates; radii are exponent-valued (eps = e^-m for exponent m)."""

    f1: object  # n -> Fraction
    f2_exp: object  # n -> int  (radius exponent of f2)
    f3_exp: object  # n -> int
    f4: object  # n -> Fraction
    f5: object  # exponent m -> Fraction
    c_prime_exp: int = 1  # c' = e^{c_prime_exp}
    c_dblprime: Fraction = Fraction(81)  # c'' bound used in condition (3)

    def series_term(self, n: int) -> Fraction:
        return self.f1(n) * self.f4(n) * self.f5(self.f3_exp(n))


@dataclass
class Item:
    key: str
    level: int
    ball: object  # exponent m -> CylinderUnion, monotone (smaller set for larger m)


@dataclass
class LimsupInstance:
    tree: object
    items: list[Item]
    rates: Rates
    level_cap: int
    flags: dict = field(default_factory=dict)

    def levels(self) -> dict[int, list[Item]]:
        out: dict[int, list[Item]] = {}
        for it in self.items:
            out.setdefault(it.level, []).append(it)
        return out

    def snapped_ball(self, item: Item, m) -> CylinderUnion:
        mm = m if isinstance(m, int) else None
        if mm is None:
            mm = ceil(m)
            if mm != m:
                warnings.warn(f"radius exponent {m} snapped to grid value {mm}")
        return item.ball(mm)


@dataclass
class ConditionReport:
    ok: dict[int, bool]
    detail: dict[int, str]
    smallest_c: Fraction | None  # smallest band constant for (4) and (5)
    containment_shift: int | None  # smallest grid shift realizing (7)

    def all_ok(self) -> bool:
        return all(self.ok.values())

    def failing(self) -> list[int]:
        return sorted(k for k, v in self.ok.items() if not v)


@dataclass
class Verdict:
    kind: str  # measure-zero | positive-measure | hypotheses-violated | inconclusive
    detail: str
    diagnostics: dict


# ---------------------------------------------------------------------------
# Hypothesis checks
# ---------------------------------------------------------------------------


def check_conditions(
    inst: LimsupInstance, n_max: int | None = None, eps_span: int = 4
) -> ConditionReport:
    """Exact verification of conditions (1)-(7) up to the level cap.

    Masses and set relations are exact; the radius grid for (5) samples
    eps_span grid exponents at and below f2.  The report carries the
    smallest constant c that makes (4), (5) and (7) hold on the checked
    range.
    """
    r = inst.rates
    n_max = inst.level_cap if n_max is None else min(n_max, inst.level_cap)
    levels = inst.levels()
    ns = sorted(n for n in levels if n <= n_max)
    ok: dict[int, bool] = {}
    detail: dict[int, str] = {}
    need_c: list[Fraction] = [Fraction(1)]

    # (1) f3 <= f2: radii shrink, so exponents grow
    bad = [n for n in ns if r.f3_exp(n) < r.f2_exp(n)]
    ok[1], detail[1] = (not bad, f"f3 > f2 at levels {bad}" if bad else "f3 <= f2")

    # (2) 1/(f5 o f2) <= f4 f1
    bad = [n for n in ns if Fraction(1) / r.f5(r.f2_exp(n)) > r.f4(n) * r.f1(n)]
    ok[2], detail[2] = (not bad, f"fails at levels {bad}" if bad else "1/(f5 o f2) <= f4 f1")

    # (3) eps' <= c' eps implies f5(eps') <= c'' f5(eps); on the exponent
    # grid: m' >= m - c_prime_exp
    exps = sorted({r.f2_exp(n) for n in ns} | {r.f3_exp(n) for n in ns})
    viol = []
    for m in exps:
        for m2 in range(m - r.c_prime_exp, max(exps) + eps_span + 1):
            if r.f5(m2) > r.c_dblprime * r.f5(m):
                viol.append((m2, m))
    ok[3] = not viol
    detail[3] = f"f5 jump too large at exponents {viol[:3]}" if not ok[3] else "f5 regular"

    # (4) level cardinalities against f1
    worst = Fraction(1)
    bad = []
    for n in ns:
        card = Fraction(len(levels[n]))
        f1 = r.f1(n)
        if card == 0:
            bad.append(n)
            continue
        worst = max(worst, card / f1, f1 / card)
    ok[4] = not bad
    detail[4] = f"empty levels {bad}" if bad else f"cardinality ratio within {worst}"
    if not bad:
        need_c.append(worst)

    # (5) ball masses against f4 f5 on the sampled radius grid
    worst5 = Fraction(1)
    bad5 = None
    for n in ns:
        for it in levels[n]:
            base = r.f2_exp(n)
            for m in range(base, base + eps_span + 1):
                mass = it.ball(m).mass()
                ref = r.f4(n) * r.f5(m)
                if mass == 0 or ref == 0:
                    bad5 = (it.key, m)
                    break
                worst5 = max(worst5, mass / ref, ref / mass)
    ok[5] = bad5 is None
    detail[5] = (
        f"zero mass or rate at {bad5}" if bad5 else f"mass band ratio within {worst5}"
    )
    if bad5 is None:
        need_c.append(worst5)

    # (6) same-level disjointness at radius f2
    witness = None
    for n in ns:
        balls = [(it.key, it.ball(r.f2_exp(n))) for it in levels[n]]
        if _equal_depth_branches(balls):
            clash = _prefix_collision(balls)
        else:
            clash = _pairwise_overlap(balls)
        if clash:
            witness = (n, clash)
            break
    ok[6] = witness is None
    detail[6] = f"overlap at level {witness}" if witness else "levels pairwise disjoint"

    # (7) cross-level hits force containment within radius c f3, c = e^shift
    # on the grid; record the largest shift needed
    worst_shift = 0
    witness7 = None
    index = _prefix_index(inst, ns)
    for nj in ns:
        for it_j in levels[nj]:
            bj3 = it_j.ball(r.f3_exp(nj))
            for it_i in _candidates(index, inst, bj3, nj):
                ni = it_i.level
                if ni >= nj:
                    continue
                bi3 = it_i.ball(r.f3_exp(ni))
                if not bj3.intersects(bi3):
                    continue
                bj2 = it_j.ball(r.f2_exp(nj))
                shift = 0
                contained = False
                while shift <= r.f3_exp(ni) - 1:
                    if bj2.subset_of(it_i.ball(r.f3_exp(ni) - shift)):
                        contained = True
                        break
                    shift += 1
                if not contained:
                    witness7 = (it_i.key, it_j.key)
                    break
                worst_shift = max(worst_shift, shift)
            if witness7:
                break
        if witness7:
            break
    ok[7] = witness7 is None
    detail[7] = (
        f"hit without containment for pair {witness7}"
        if witness7
        else f"containment within {worst_shift} grid steps"
    )

    smallest = max(need_c) if ok[4] and ok[5] else None
    return ConditionReport(ok, detail, smallest, worst_shift if ok[7] else None)


def _equal_depth_branches(balls) -> bool:
    depths = set()
    for _, b in balls:
        for br in b.branches:
            anchor = br.v
            depths.add(len(anchor) if isinstance(anchor, tuple) else None)
    return len(depths) == 1 and None not in depths


def _prefix_collision(balls):
    seen = {}
    for key, b in balls:
        for br in b.branches:
            if br.v in seen and seen[br.v] != key:
                return (seen[br.v], key)
            seen[br.v] = key
    return None


def _pairwise_overlap(balls):
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            if balls[i][1].intersects(balls[j][1]):
                return (balls[i][0], balls[j][0])
    return None


def _prefix_index(inst, ns):
    """Map head vertex -> items, for fast cross-level candidate lookup."""
    index: dict[object, list[Item]] = {}
    r = inst.rates
    for n in ns:
        for it in inst.levels().get(n, []):
            for br in it.ball(r.f3_exp(n)).branches:
                index.setdefault(br.v, []).append(it)
    return index


def _candidates(index, inst, ball: CylinderUnion, level: int):
    """Items whose f3-ball could intersect the given ball: heads on the
    ancestor chain of this ball's heads (word-vertex trees), else all."""
    out = []
    seen = set()
    for br in ball.branches:
        v = br.v
        if not isinstance(v, tuple):
            return [it for its in index.values() for it in its]
        for cut in range(len(v) + 1):
            for it in index.get(v[:cut], []):
                if id(it) not in seen:
                    seen.add(id(it))
                    out.append(it)
    return out


# ---------------------------------------------------------------------------
# Truncated limsup masses
# ---------------------------------------------------------------------------


def level_set(inst: LimsupInstance, n: int) -> CylinderUnion:
    """A_n: union of the level-n balls at radius f3."""
    levels = inst.levels()
    acc = CylinderUnion(())
    for it in levels.get(n, []):
        acc = acc.union(inst.snapped_ball(it, inst.rates.f3_exp(n)))
    return acc


def truncated_masses(inst: LimsupInstance, n0: int, n_max: int | None = None):
    """Masses of the tail unions U(k) = A_k u ... u A_nmax for k = n0..n_max.

    U is non-increasing in k and non-decreasing in n_max; the deepest tail is
    the truncation proxy for the limsup set.
    """
    n_max = inst.level_cap if n_max is None else min(n_max, inst.level_cap)
    if n0 > n_max:
        raise InstanceError("empty truncation range")
    tails: dict[int, Fraction] = {}
    acc = CylinderUnion(())
    for k in range(n_max, n0 - 1, -1):
        acc = acc.union(level_set(inst, k))
        tails[k] = acc.mass()
    return {
        "union_mass": tails[n0],
        "tail_masses": {k: tails[k] for k in range(n0, n_max + 1)},
        "deepest_tail": tails[n_max],
    }


def pairwise_quasi_independence(inst: LimsupInstance, n_max: int | None = None):
    """Smallest exact c with mass(A_n & A_m) <= c mass(A_n) mass(A_m)
    for n < m in range, or None when some level has zero mass."""
    n_max = inst.level_cap if n_max is None else min(n_max, inst.level_cap)
    ns = sorted(n for n in inst.levels() if n <= n_max)
    sets = {n: level_set(inst, n) for n in ns}
    masses = {n: sets[n].mass() for n in ns}
    if any(m == 0 for m in masses.values()):
        return None, None
    c = Fraction(0)
    total = sum(masses.values())
    cross = Fraction(0)
    for i, n in enumerate(ns):
        for m in ns[i + 1 :]:
            inter = sets[n].intersect(sets[m]).mass()
            cross += 2 * inter
            c = max(c, inter / (masses[n] * masses[m]))
    # second-moment lower bound (sum mu A_n)^2 / sum_{n,m} mu(A_n & A_m)
    denom = cross + total
    ks_bound = (total * total) / denom if denom > 0 else Fraction(0)
    return c, ks_bound


# ---------------------------------------------------------------------------
# Series heuristic and verdict
# ---------------------------------------------------------------------------


def classify_series(rates: Rates, n_max: int) -> tuple[str, list[Fraction]]:
    """Declared heuristic: geometric-tail ratio test on the truncation range."""
    terms = [rates.series_term(n) for n in range(1, n_max + 1)]
    tail = terms[max(0, len(terms) - 6) :]
    if all(t == 0 for t in tail):
        return "convergent", terms
    ratios = [b / a for a, b in zip(tail, tail[1:]) if a > 0]
    if ratios and max(ratios) <= Fraction(9, 10):
        return "convergent", terms
    if ratios and min(ratios) >= 1:
        return "divergent", terms
    return "unknown", terms


def verdict(inst: LimsupInstance, eps_span: int = 3) -> Verdict:
    """Dichotomy verdict from exact truncations plus the series heuristic.

    Never overclaims: disagreement between the heuristic and the measured
    truncations yields `inconclusive`, and a divergent series without either
    the structural conditions or exact quasi-independence reports the
    violated condition instead of a measure statement.
    """
    report = check_conditions(inst, eps_span=eps_span)
    kind, terms = classify_series(inst.rates, inst.level_cap)
    half = max(2, inst.level_cap // 2)
    masses_half = truncated_masses(inst, n0=half, n_max=inst.level_cap)
    masses_half_budget = truncated_masses(inst, n0=max(2, half // 2), n_max=half)
    diagnostics = {
        "series": kind,
        "series_terms": [str(t) for t in terms[:12]],
        "conditions": {k: report.ok[k] for k in range(1, 8)},
        "condition_detail": report.detail,
        "smallest_c": str(report.smallest_c) if report.smallest_c else None,
        "tail_mass_full": str(masses_half["union_mass"]),
        "tail_mass_half_budget": str(masses_half_budget["union_mass"]),
        "flags": dict(inst.flags),
    }
    if inst.flags.get("enumeration_incomplete"):
        return Verdict("inconclusive", "instance built from an incomplete enumeration", diagnostics)

    if kind == "convergent":
        # [A]-side needs only the upper bounds among the conditions
        upper_ok = report.ok[1] and report.ok[4] and report.ok[5]
        union = masses_half["union_mass"]
        deepest = masses_half["deepest_tail"]
        shrinking = union == 0 or deepest * 10 <= union
        if upper_ok and shrinking:
            return Verdict("measure-zero", "convergent series and vanishing exact tails", diagnostics)
        if not upper_ok:
            return Verdict(
                "hypotheses-violated",
                f"conditions {report.failing()} fail",
                diagnostics,
            )
        return Verdict("inconclusive", "tails shrink too slowly at this truncation", diagnostics)

    if kind == "divergent":
        if report.all_ok():
            return Verdict(
                "positive-measure",
                "divergent series with the seven structural conditions exactly verified",
                diagnostics,
            )
        # fall back to exact pairwise quasi-independence (classical route);
        # only computed here because intersections are the expensive part
        qi_c, ks = pairwise_quasi_independence(inst)
        diagnostics["quasi_independence_c"] = str(qi_c) if qi_c is not None else None
        diagnostics["second_moment_lower_bound"] = str(ks) if ks is not None else None
        if qi_c is not None and ks is not None and ks > 0:
            return Verdict(
                "positive-measure",
                "divergent series with exact pairwise quasi-independence "
                f"(c = {qi_c}); failing conditions {report.failing()} not needed",
                diagnostics,
            )
        return Verdict(
            "hypotheses-violated",
            f"conditions {report.failing()} fail and no quasi-independence route",
            diagnostics,
        )

    return Verdict("inconclusive", "series behaviour undetermined on the range", diagnostics)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def spiral_instance(
    k: int,
    d_max: int,
    g_exp=lambda n: 0,
    enumeration_complete: bool = True,
) -> LimsupInstance:
    """Spiraling-target instance on the rank-k free group.

    Items are double cosets of the first-generator axis at depth <= d_max
    with window width 1; the ball families are the exact neighborhoods of
    the translated axis ends, radii e^{-(n + g(n))}.
    """
    tree = CayleyTree(k)
    qt = tree.q
    items = []
    for w in canonical_coset_words(k, d_max):
        items.append(
            Item(
                key="".join("abABcdCD"[g] if g < 8 else str(g) for g in w),
                level=len(w),
                ball=_axis_ball_family(tree, w),
            )
        )
    # f1 at the pure growth rate: level cardinalities then sit inside an
    # exact two-sided band, and 1/(f5 o f2) = f1 f4 holds with equality
    rates = Rates(
        f1=lambda n: Fraction(qt**n),
        f2_exp=lambda n: n,
        f3_exp=lambda n: n + max(0, int(g_exp(n))),
        f4=lambda n: Fraction(1),
        f5=lambda m: Fraction(1, qt**m) if m >= 0 else Fraction(qt ** (-m)),
    )
    inst = LimsupInstance(tree, items, rates, level_cap=d_max)
    if not enumeration_complete:
        inst.flags["enumeration_incomplete"] = True
    return inst


def _axis_ball_family(tree, w):
    cache: dict[int, CylinderUnion] = {}

    def ball(m: int) -> CylinderUnion:
        if m not in cache:
            cache[m] = target_neighborhood(tree, w, max(1, m))
        return cache[m]

    return ball


def point_instance(k: int, r_max: int, g_exp=lambda n: 0) -> LimsupInstance:
    """Orbit-point instance on the rank-k free group: one item per vertex,
    level = distance to the base, balls = visual balls around the outward
    ray direction through the vertex."""
    tree = CayleyTree(k)
    qt = tree.q
    items = []

    def gen_words(prefix, remaining):
        if prefix:
            yield prefix
        if remaining == 0:
            return
        for g in range(2 * k):
            if prefix and g == prefix[-1] ^ 1:
                continue
            yield from gen_words(prefix + (g,), remaining - 1)

    for w in gen_words((), r_max):
        items.append(
            Item(
                key="".join("abABcdCD"[g] if g < 8 else str(g) for g in w),
                level=len(w),
                ball=_ray_ball_family(tree, w),
            )
        )
    counts = {}
    for it in items:
        counts[it.level] = counts.get(it.level, 0) + 1
    rates = Rates(
        f1=lambda n: Fraction(counts.get(n, 1)),
        f2_exp=lambda n: n,
        f3_exp=lambda n: n + max(0, int(g_exp(n))),
        f4=lambda n: Fraction(1),
        f5=lambda m: Fraction(1, qt**m) if m >= 0 else Fraction(qt ** (-m)),
    )
    return LimsupInstance(tree, items, rates, level_cap=r_max)


def _ray_ball_family(tree, w):
    cache: dict[int, CylinderUnion] = {}

    def ball(m: int) -> CylinderUnion:
        if m not in cache:
            mm = max(1, m)
            tail = w[-1]
            ext = w + (tail,) * max(0, mm - len(w))
            head = ext[:mm]
            cache[m] = CylinderUnion.of([Branch(tree, head[:-1], head)])
        return cache[m]

    return ball


# -- constructed fixtures -----------------------------------------------------


def nested_instance(k: int, depth: int) -> LimsupInstance:
    """One shrinking ball per level along a fixed ray: limsup is a point."""
    tree = CayleyTree(k)
    qt = tree.q
    ray = tuple(2 for _ in range(3 * depth + 8))  # covers f3 plus the scan span
    items = []
    for n in range(1, depth + 1):
        def ball(m: int, n=n) -> CylinderUnion:
            mm = max(n, max(1, m))
            return CylinderUnion.of([Branch(tree, ray[: mm - 1], ray[:mm])])

        items.append(Item(key=f"n{n}", level=n, ball=ball))
    rates = Rates(
        f1=lambda n: Fraction(1),
        f2_exp=lambda n: n,
        f3_exp=lambda n: 2 * n,
        f4=lambda n: Fraction(1),
        f5=lambda m: Fraction(1, qt**m) if m >= 0 else Fraction(qt ** (-m)),
    )
    return LimsupInstance(tree, items, rates, level_cap=depth)


def independent_instance(k: int, depth: int) -> LimsupInstance:
    """Product-structured fixture inside the reference cylinder of ends
    starting with the third letter.

    Inside that cylinder the successive continuation choices are exactly
    uniform among 2k-1 options; level n fixes the n-th choice to the lowest
    one.  Relative to the cylinder the levels are genuinely independent:
    mass(A_n & A_m) * mass(cylinder) = mass(A_n) * mass(A_m) exactly.
    """
    tree = CayleyTree(k)
    items = []
    for n in range(1, depth + 1):
        items.append(Item(key=f"n{n}", level=n, ball=_choice_cylinder(tree, n)))
    qt = tree.q
    level_mass = Fraction(1, 2 * k * qt)  # mass of every level set, exactly

    rates = Rates(
        f1=lambda n: Fraction(2 * k * qt),
        f2_exp=lambda n: n,
        f3_exp=lambda n: n,
        f4=lambda n: level_mass,
        f5=lambda m: Fraction(1),
        c_dblprime=Fraction(2),
    )
    return LimsupInstance(tree, items, rates, level_cap=depth)


def _choice_cylinder(tree, n):
    """Ends starting with letter 2 whose n-th continuation is the lowest
    admissible letter: a union of depth-(n+1) branches."""
    cache: dict[int, CylinderUnion] = {}

    def ball(m: int) -> CylinderUnion:
        if 0 not in cache:
            branches = []

            def rec(word):
                if len(word) == n:
                    g = min(h for h in range(2 * tree.k) if h != word[-1] ^ 1)
                    full = word + (g,)
                    branches.append(Branch(tree, word, full))
                    return
                for g in range(2 * tree.k):
                    if g == word[-1] ^ 1:
                        continue
                    rec(word + (g,))

            rec((2,))
            cache[0] = CylinderUnion.of(branches, check=False)
        return cache[0]

    return ball


def overlap_violation_instance(k: int, depth: int) -> LimsupInstance:
    """Two identical items on one level: breaks same-level disjointness."""
    base = nested_instance(k, depth)
    twin = Item(key="twin", level=1, ball=base.items[0].ball)
    return LimsupInstance(base.tree, base.items + [twin], base.rates, depth)


def rate_violation_instance(k: int, depth: int) -> LimsupInstance:
    """f3 above f2 somewhere: breaks condition (1)."""
    base = nested_instance(k, depth)
    r = base.rates
    bad = Rates(r.f1, r.f2_exp, lambda n: r.f2_exp(n) - 1, r.f4, r.f5)
    return LimsupInstance(base.tree, base.items, bad, depth)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def export_instance(inst: LimsupInstance, radius_exponents=None) -> str:
    """Serialize levels, sampled ball branch lists and rate tables."""
    tree = inst.tree
    if not isinstance(tree, CayleyTree):
        raise InstanceError("only free-group instances serialize")
    r = inst.rates
    ns = sorted(inst.levels())
    data = {
        "schema": 1,
        "tree": {"model": "free-group", "rank": tree.k},
        "level_cap": inst.level_cap,
        "flags": inst.flags,
        "rates": {
            "f1": {n: str(r.f1(n)) for n in ns},
            "f2_exp": {n: r.f2_exp(n) for n in ns},
            "f3_exp": {n: r.f3_exp(n) for n in ns},
            "f4": {n: str(r.f4(n)) for n in ns},
            "f5": {m: str(r.f5(m)) for m in range(0, max(r.f3_exp(n) for n in ns) + 4)},
        },
        "items": [],
    }
    for it in inst.items:
        ms = radius_exponents or [r.f2_exp(it.level), r.f3_exp(it.level)]
        balls = {}
        for m in ms:
            balls[str(m)] = [[list(b.u), list(b.v)] for b in it.ball(m).branches]
        data["items"].append({"key": it.key, "level": it.level, "balls": balls})
    return json.dumps(data, sort_keys=True)


def import_instance(text: str) -> LimsupInstance:
    data = json.loads(text)
    tree = CayleyTree(data["tree"]["rank"])
    rt = data["rates"]

    def table(d, cast):
        t = {int(k): cast(v) for k, v in d.items()}
        return lambda n: t[n]

    rates = Rates(
        f1=table(rt["f1"], Fraction),
        f2_exp=table(rt["f2_exp"], int),
        f3_exp=table(rt["f3_exp"], int),
        f4=table(rt["f4"], Fraction),
        f5=table(rt["f5"], Fraction),
    )
    items = []
    for rec in data["items"]:
        balls = {
            int(m): CylinderUnion.of(
                [Branch(tree, tuple(u), tuple(v)) for u, v in brs], check=False
            )
            for m, brs in rec["balls"].items()
        }

        def ball(m, balls=balls):
            if m in balls:
                return balls[m]
            raise InstanceError(f"radius exponent {m} not in the imported table")

        items.append(Item(key=rec["key"], level=rec["level"], ball=ball))
    inst = LimsupInstance(tree, items, rates, data["level_cap"])
    inst.flags = dict(data.get("flags", {}))
    return inst


def verdict_json(v: Verdict) -> str:
    return json.dumps(
        {"verdict": v.kind, "detail": v.detail, "diagnostics": v.diagnostics},
        sort_keys=True,
    )
