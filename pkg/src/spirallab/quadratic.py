"""Quadratic irrationals over F_q(X): embeddings into the Laurent field,
Galois conjugates, heights, Artin continued fractions and the homography
action of SL_2(F_q[X]) with breadth-first orbit enumeration.

A value is the root of A Y^2 + B Y + C with A, B, C in F_q[X], primitive and
A monic.  Writing w for the canonical square root of (B^2 - 4AC) / (2A)^2 in
F_q((1/X)) (leading coefficient the smallest-representative root mod q), the
two roots are -B/(2A) +- w and `sigma` selects the sign in front of w.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .exactnum import (
    ExactError,
    Laurent,
    Poly,
    QMag,
    RatFunc,
    embed_ratfunc,
    poly_sqrt,
    sqrt_mod,
)


class BudgetExceeded(ExactError):
    """An enumeration or expansion hit its configured state budget."""


@dataclass(frozen=True)
class QuadIrr:
    A: Poly
    B: Poly
    C: Poly
    sigma: int  # +1 or -1

    @classmethod
    def of(cls, A: Poly, B: Poly, C: Poly, sigma: int = 1) -> "QuadIrr":
        if A.is_zero:
            raise ExactError("leading quadratic coefficient must be nonzero")
        if sigma not in (1, -1):
            raise ExactError("sigma must be +1 or -1")
        A, B, C = _primitive_monic(A, B, C)
        disc = B * B - A * C.scale(4)
        if disc.is_zero or poly_sqrt(disc) is not None:
            raise ExactError("discriminant is a polynomial square: rational root")
        if disc.degree % 2 != 0:
            raise ExactError("odd-degree discriminant: roots live outside F_q((1/X))")
        if sqrt_mod(disc.lead, A.q) is None:
            raise ExactError("discriminant leading coefficient is not a square mod q")
        return cls(A, B, C, sigma)

    @property
    def q(self) -> int:
        return self.A.q

    def disc(self) -> Poly:
        return self.B * self.B - self.A * self.C.scale(4)

    def conjugate(self) -> "QuadIrr":
        return QuadIrr(self.A, self.B, self.C, -self.sigma)

    def height(self) -> QMag:
        """h = 1/|root - conjugate| = q^(deg A - deg(disc)/2), an exact q-power."""
        return QMag(self.q, -self.height_exponent())

    def height_exponent(self) -> int:
        """log_q of the height."""
        return self.A.degree - self.disc().degree // 2

    def expand(self, prec: int) -> Laurent:
        """Laurent expansion of the selected root, prec known coefficients."""
        d = self.disc()
        a2 = self.A * self.A.scale(4)
        # w = sqrt(disc / (2A)^2); expand with slack so the shift by -B/(2A)
        # still leaves prec coefficients after the leading terms settle.
        shift = max(0, a2.degree - d.degree // 2) + 4
        t = embed_ratfunc(RatFunc.of(d, a2), prec + shift)
        w = t.sqrt()
        head = embed_ratfunc(RatFunc.of(-self.B, self.A.scale(2)), prec + shift + 8)
        root = head + (w if self.sigma == 1 else -w)
        if root.is_zero:
            return root
        return root.truncate(root.val + prec)

    def key(self) -> tuple:
        return (self.A.coeffs, self.B.coeffs, self.C.coeffs, self.sigma)

    def to_json(self) -> str:
        return json.dumps(
            {
                "A": list(self.A.coeffs),
                "B": list(self.B.coeffs),
                "C": list(self.C.coeffs),
                "sigma": self.sigma,
                "height_exponent": self.height_exponent(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, q: int, line: str) -> "QuadIrr":
        d = json.loads(line)
        return cls.of(
            Poly.of(q, d["A"]), Poly.of(q, d["B"]), Poly.of(q, d["C"]), d["sigma"]
        )


def _primitive_monic(A: Poly, B: Poly, C: Poly) -> tuple[Poly, Poly, Poly]:
    g = A.gcd(B).gcd(C)
    if not g.is_zero and g.degree > 0:
        A, B, C = A // g, B // g, C // g
    inv = pow(A.lead, A.q - 2, A.q)
    return A.scale(inv), B.scale(inv), C.scale(inv)


# ---------------------------------------------------------------------------
# Homography action
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mobius:
    a: Poly
    b: Poly
    c: Poly
    d: Poly

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det != Poly.const(self.a.q, 1):
            raise ExactError("determinant must be 1")

    @property
    def q(self) -> int:
        return self.a.q

    @classmethod
    def identity(cls, q: int) -> "Mobius":
        one, zero = Poly.const(q, 1), Poly.zero(q)
        return cls(one, zero, zero, one)

    @classmethod
    def translation(cls, b: Poly) -> "Mobius":
        one, zero = Poly.const(b.q, 1), Poly.zero(b.q)
        return cls(one, b, zero, one)

    @classmethod
    def inversion(cls, q: int) -> "Mobius":
        """[[0, 1], [-1, 0]]: y -> -1/y."""
        one, zero = Poly.const(q, 1), Poly.zero(q)
        return cls(zero, one, -one, zero)

    def __mul__(self, other: "Mobius") -> "Mobius":
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def apply_laurent(self, x: Laurent, prec: int | None = None) -> Laurent:
        rel = prec if prec is not None else (x.precision or 24)
        num = Laurent.from_poly(self.a) * x + Laurent.from_poly(self.b)
        den = Laurent.from_poly(self.c) * x + Laurent.from_poly(self.d)
        return num * den.inverse(rel)


def _transformed_triple(g: Mobius, alpha: QuadIrr) -> tuple[Poly, Poly, Poly]:
    """Canonical minimal-polynomial coefficients of the image; exact.

    Unimodular substitution preserves primitivity of the coefficient triple,
    so only the monic rescale is needed here.
    """
    A, B, C = alpha.A, alpha.B, alpha.C
    a, b, c, d = g.a, g.b, g.c, g.d
    A2 = A * d * d - B * c * d + C * c * c
    B2 = (B * (a * d + b * c)) - (A * b * d).scale(2) - (C * a * c).scale(2)
    C2 = A * b * b - B * a * b + C * a * a
    inv = pow(A2.lead, A2.q - 2, A2.q)
    return A2.scale(inv), B2.scale(inv), C2.scale(inv)


def _resolve_sigma(A2: Poly, B2: Poly, C2: Poly, image: Laurent) -> QuadIrr:
    """Pick the branch of the transformed triple matching the image series.

    The two candidate roots agree below the height exponent e and differ
    exactly there (by twice the square-root part), so a single coefficient
    comparison at e decides the selector.
    """
    q = A2.q
    base = QuadIrr(A2, B2, C2, 1)
    e = base.height_exponent()
    if image.is_zero or (image.abs_prec is not None and image.abs_prec <= e):
        raise ExactError("image window too small to resolve the branch selector")
    disc = base.disc()
    w_lead = sqrt_mod(disc.lead * pow(4, q - 2, q) % q, q)
    if B2.is_zero:
        head_c = 0
    else:
        v_head = A2.degree - B2.degree  # valuation of -B/(2A)
        if e < v_head:
            head_c = 0
        else:
            head = embed_ratfunc(RatFunc.of(-B2, A2.scale(2)), e - v_head + 1)
            head_c = head.coeff(e)
    img_c = image.coeff(e)
    if img_c == (head_c + w_lead) % q:
        return base
    if img_c == (head_c - w_lead) % q:
        return base.conjugate()
    raise ExactError("image matches neither branch (inconsistent state)")


def _translate_triple(alpha: QuadIrr, b: Poly) -> tuple[Poly, Poly, Poly]:
    A, B, C = alpha.A, alpha.B, alpha.C
    return A, B - (A * b).scale(2), A * b * b - B * b + C


def act(g: Mobius, alpha: QuadIrr, prec: int = 32) -> QuadIrr:
    """Image of alpha under the homography, as a canonical quadratic irrational.

    Translations keep the discriminant and the square-root part, hence the
    selector, and need no series work.  Other maps resolve the selector by a
    coefficient comparison on the image expansion, retrying at doubled
    precision if the first window is too small.
    """
    one = Poly.const(alpha.q, 1)
    if g.c.is_zero and g.a == one and g.d == one:
        A2, B2, C2 = _translate_triple(alpha, g.b)
        return QuadIrr(A2, B2, C2, alpha.sigma)
    A2, B2, C2 = _transformed_triple(g, alpha)
    base = QuadIrr.of(A2, B2, C2, 1)  # full validation of the derived triple
    A2, B2, C2 = base.A, base.B, base.C
    last = None
    for _ in range(6):
        try:
            image = g.apply_laurent(alpha.expand(prec))
            return _resolve_sigma(A2, B2, C2, image)
        except ExactError as e:
            last = e
            prec *= 2
    raise ExactError(f"could not resolve branch selector: {last}")


# ---------------------------------------------------------------------------
# Artin continued fractions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CFExpansion:
    preperiod: tuple[Poly, ...]
    period: tuple[Poly, ...]

    def quotients(self, n: int) -> list[Poly]:
        """First n partial quotients, unrolling the period."""
        out = list(self.preperiod)
        while len(out) < n:
            out.extend(self.period)
        return out[:n]


def _surd_state(alpha: QuadIrr) -> tuple[Poly, Poly, Poly, Poly]:
    """Rewrite the root as (P + W)/Q with W the canonical Laurent square root
    of the discriminant; returns (P, Q, D, s), s = polynomial part of W."""
    q = alpha.q
    D = alpha.disc()
    W = Laurent.from_poly(D).sqrt(D.degree // 2 + 2)
    s = Poly.of(q, [W.coeff(-k) for k in range(0, -W.val + 1)])
    # alpha = -B/(2A) + sigma*w with w = eps*W/(2A); fold signs into (P, Q).
    inv2 = pow(2, q - 2, q)
    lead = W.coeffs[0] * inv2 % q  # A monic, so this is the lead of W/(2A)
    eps = 1 if lead <= q - lead else -1
    if alpha.sigma * eps == 1:
        return -alpha.B, alpha.A.scale(2), D, s
    return alpha.B, alpha.A.scale(-2), D, s


def cf_expand(alpha: QuadIrr, max_states: int = 10_000) -> CFExpansion:
    """Artin continued fraction, computed exactly on surd states (P, Q).

    No Laurent truncation enters the loop: the polynomial part of each
    complete quotient is a polynomial division once the integer part s of W
    is known.  Terminates at the first repeated state; the reported period is
    the minimal cyclic period of the quotient word.
    """
    P, Q, D, s = _surd_state(alpha)
    quotients: list[Poly] = []
    seen: dict[tuple, int] = {}
    for step in range(max_states):
        key = (P.coeffs, Q.coeffs)
        if key in seen:
            start = seen[key]
            return CFExpansion(
                tuple(quotients[:start]),
                tuple(_minimize_period(quotients[start:step])),
            )
        seen[key] = step
        a = (P + s) // Q
        quotients.append(a)
        P = a * Q - P
        Q, rem = (D - P * P).divmod(Q)
        if not rem.is_zero:
            raise ExactError("surd state invariant broken")
    raise BudgetExceeded(f"no period within {max_states} states")


def _minimize_period(per: list[Poly]) -> list[Poly]:
    n = len(per)
    for d in range(1, n + 1):
        if n % d == 0 and per == per[:d] * (n // d):
            return per[:d]
    return per


def cf_expand_rational(r: RatFunc) -> list[Poly]:
    """Terminating expansion of a rational function (polynomial Euclid)."""
    num, den = r.num, r.den
    out = []
    while not den.is_zero:
        a, rem = num.divmod(den)
        out.append(a)
        num, den = den, rem
    return out


def convergents(quotients: list[Poly]) -> list[tuple[Poly, Poly]]:
    """(p_n, q_n) with p_n/q_n = [a_0; a_1, ..., a_n]."""
    q = quotients[0].q
    p_prev, p_cur = Poly.const(q, 1), quotients[0]
    q_prev, q_cur = Poly.zero(q), Poly.const(q, 1)
    out = [(p_cur, q_cur)]
    for a in quotients[1:]:
        p_cur, p_prev = a * p_cur + p_prev, p_cur
        q_cur, q_prev = a * q_cur + q_prev, q_cur
        out.append((p_cur, q_cur))
    return out


# ---------------------------------------------------------------------------
# Orbit enumeration
# ---------------------------------------------------------------------------


@dataclass
class OrbitResult:
    elements: dict[tuple, QuadIrr]
    values: dict[tuple, Laurent]  # cached root expansions
    complete: bool
    rounds: int
    applications: int
    hmax_exp: int

    def with_height_at_most(self, exp: int) -> list[QuadIrr]:
        return [e for e in self.elements.values() if e.height_exponent() <= exp]

    def shell(self, exp: int) -> list[QuadIrr]:
        return [e for e in self.elements.values() if e.height_exponent() == exp]

    def dump_jsonl(self, path: str, note: str | None = None):
        with open(path, "w") as fh:
            if note:
                fh.write(json.dumps({"note": note, "complete": self.complete}) + "\n")
            for k in sorted(self.elements):
                fh.write(self.elements[k].to_json() + "\n")


def generator_set(q: int, d_max: int = 3) -> list[Mobius]:
    """Inversion plus all nonzero polynomial translations of degree <= d_max.

    Constant translations together with the inversion already generate the
    constant-matrix subgroup, so no separate constant generators are needed.
    """
    gens = [Mobius.inversion(q)]
    coeffs = [0] * (d_max + 1)
    while True:
        i = 0
        while i <= d_max and coeffs[i] == q - 1:
            coeffs[i] = 0
            i += 1
        if i > d_max:
            break
        coeffs[i] += 1
        gens.append(Mobius.translation(Poly.of(q, coeffs)))
    return gens


_VALUE_PREC = 24  # cached root windows; covers every height used at desk scale


def _translation_polys(q: int, d_max: int) -> list[Poly]:
    out = []
    coeffs = [0] * (d_max + 1)
    while True:
        i = 0
        while i <= d_max and coeffs[i] == q - 1:
            coeffs[i] = 0
            i += 1
        if i > d_max:
            break
        coeffs[i] += 1
        out.append(Poly.of(q, coeffs))
    return out


def orbit_enumerate(
    alpha: QuadIrr,
    hmax_exp: int,
    budget: int = 400_000,
    d_max: int = 3,
    overshoot: int = 1,
) -> OrbitResult:
    """BFS closure of alpha under the generator set, keeping heights <= q^hmax.

    Traversal is allowed through elements up to q^(hmax+overshoot) so that
    descents through slightly taller intermediates are found.  Completeness
    means two consecutive rounds added nothing at or below the cap; running
    out of budget returns the partial set flagged incomplete.

    Translations keep height, discriminant and selector, so they move only
    the middle and last coefficients and shift the cached window; inversion
    swaps the outer coefficients and resolves its selector by one coefficient
    comparison.
    """
    q = alpha.q
    trans = _translation_polys(q, d_max)
    cap = hmax_exp + overshoot
    seen: dict[tuple, QuadIrr] = {alpha.key(): alpha}
    values: dict[tuple, Laurent] = {alpha.key(): alpha.expand(_VALUE_PREC)}
    frontier = [alpha]
    applications = 0
    rounds = 0
    stale_rounds = 0
    complete = False

    def register(img: QuadIrr, val: Laurent | None, h_exp: int, bucket: list):
        nonlocal added_low
        k = img.key()
        if k in seen:
            return
        seen[k] = img
        if val is not None and val.precision is not None and val.precision >= _VALUE_PREC:
            values[k] = val.truncate(val.val + _VALUE_PREC)
        elif val is not None and val.precision is None:
            values[k] = val
        else:
            values[k] = img.expand(_VALUE_PREC)
        bucket.append(img)
        if h_exp <= hmax_exp:
            added_low += 1

    while frontier:
        rounds += 1
        new_frontier: list[QuadIrr] = []
        added_low = 0
        for beta in frontier:
            beta_val = values[beta.key()]
            h_beta = beta.height_exponent()
            # translation block: height and sigma are unchanged
            if h_beta <= cap:
                for b in trans:
                    applications += 1
                    if applications > budget:
                        return OrbitResult(seen, values, False, rounds, applications, hmax_exp)
                    A2, B2, C2 = _translate_triple(beta, b)
                    k = (A2.coeffs, B2.coeffs, C2.coeffs, beta.sigma)
                    if k in seen:
                        continue
                    img = QuadIrr(A2, B2, C2, beta.sigma)
                    register(img, beta_val + Laurent.from_poly(b), h_beta, new_frontier)
            # inversion step: outer coefficients swap
            applications += 1
            if applications > budget:
                return OrbitResult(seen, values, False, rounds, applications, hmax_exp)
            scale = pow(beta.C.lead, q - 2, q)
            A2 = beta.C.scale(scale)
            B2 = (-beta.B).scale(scale)
            C2 = beta.A.scale(scale)
            h_exp = A2.degree - beta.disc().degree // 2  # disc only rescales by a square
            if h_exp > cap:
                continue
            kp = (A2.coeffs, B2.coeffs, C2.coeffs, 1)
            km = (A2.coeffs, B2.coeffs, C2.coeffs, -1)
            if kp in seen and km in seen:
                continue
            image = -beta_val.inverse(_VALUE_PREC)
            try:
                img = _resolve_sigma(A2, B2, C2, image)
            except ExactError:
                image = -beta.expand(4 * _VALUE_PREC).inverse(4 * _VALUE_PREC)
                img = _resolve_sigma(A2, B2, C2, image)
            register(img, image, h_exp, new_frontier)
        stale_rounds = 0 if added_low else stale_rounds + 1
        if stale_rounds >= 2:
            complete = True
            break
        frontier = new_frontier
    else:
        complete = True
    return OrbitResult(seen, values, complete, rounds, applications, hmax_exp)
