"""Exact arithmetic over F_q, F_q[X], F_q(X) and truncated F_q((1/X)).

A Laurent value represents a series sum_{i >= v} a_i X^(-i) with a_v != 0.
Its valuation is v and its magnitude is q^(-v).  Every value carries the
window of coefficients it knows exactly: `abs_prec` means all coefficients
of X^(-i) with i < abs_prec are known.  Binary operations propagate the
minimum window; nothing is ever silently padded with zeros.

Zero is a distinguished value (empty coefficient tuple).  An exact zero has
abs_prec None; a computation that cancels every known coefficient yields a
zero known only "to precision", keeping the window it could certify.

Magnitudes are kept as exact integer exponents of q (class QMag), never as
floats.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction


class ExactError(ValueError):
    """Domain error in exact arithmetic (bad modulus, inversion of zero...)."""


class PrecisionExhausted(ExactError):
    """A query needed coefficients beyond the tracked window."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_modulus(q: int) -> int:
    """Validate the coefficient field size: an odd prime >= 3."""
    if not is_prime(q) or q < 3:
        raise ExactError(f"modulus must be an odd prime >= 3, got {q}")
    return q


def sqrt_mod(a: int, q: int) -> int | None:
    """Smallest-representative square root of a mod q, or None.

    Canonical choice: of the two roots r and q-r, return min(r, q-r).
    """
    a %= q
    if a == 0:
        return 0
    if pow(a, (q - 1) // 2, q) != 1:
        return None
    # q is small in practice; brute force keeps this dependency-free.
    for r in range(1, q):
        if r * r % q == a:
            return min(r, q - r)
    return None


# ---------------------------------------------------------------------------
# Polynomials over F_q
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Poly:
    """Polynomial over F_q, coefficients ascending, no trailing zeros."""

    q: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if self.coeffs and self.coeffs[-1] % self.q == 0:
            raise ExactError("non-normalized polynomial (zero leading coefficient)")

    @classmethod
    def of(cls, q: int, coeffs) -> "Poly":
        cs = [c % q for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        return cls(q, tuple(cs))

    @classmethod
    def zero(cls, q: int) -> "Poly":
        return cls(q, ())

    @classmethod
    def const(cls, q: int, c: int) -> "Poly":
        return cls.of(q, [c])

    @classmethod
    def x(cls, q: int) -> "Poly":
        return cls(q, (0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> int:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0

    @property
    def lead(self) -> int:
        if self.is_zero:
            raise ExactError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def _check(self, other: "Poly"):
        if self.q != other.q:
            raise ExactError("mixed moduli")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly.of(self.q, [self.coeff(i) + other.coeff(i) for i in range(n)])

    def __neg__(self) -> "Poly":
        return Poly.of(self.q, [-c for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        if self.is_zero or other.is_zero:
            return Poly.zero(self.q)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly.of(self.q, out)

    def scale(self, c: int) -> "Poly":
        return Poly.of(self.q, [c * a for a in self.coeffs])

    def shift(self, k: int) -> "Poly":
        """Multiply by X^k, k >= 0."""
        if self.is_zero:
            return self
        return Poly(self.q, (0,) * k + self.coeffs)

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        self._check(other)
        if other.is_zero:
            raise ExactError("polynomial division by zero")
        q, inv_lead = self.q, pow(other.lead, self.q - 2, self.q)
        rem = list(self.coeffs)
        quo = [0] * max(0, len(rem) - len(other.coeffs) + 1)
        d = other.degree
        while len(rem) - 1 >= d and any(rem):
            while rem and rem[-1] % q == 0:
                rem.pop()
            if len(rem) - 1 < d:
                break
            k = len(rem) - 1 - d
            c = rem[-1] * inv_lead % q
            quo[k] = c
            for j, b in enumerate(other.coeffs):
                rem[k + j] = (rem[k + j] - c * b) % q
            rem.pop()
        return Poly.of(q, quo), Poly.of(q, rem)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero:
            return self
        return self.scale(pow(self.lead, self.q - 2, self.q))

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero:
            a, b = b, a % b
        return a.monic() if not a.is_zero else a

    def __call__(self, x: "Laurent") -> "Laurent":
        """Evaluate at a Laurent value by Horner's rule."""
        acc = Laurent.zero(self.q)
        for c in reversed(self.coeffs):
            acc = acc * x + Laurent.const(self.q, c)
        return acc

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"{c}*X" if c != 1 else "X")
            else:
                parts.append(f"{c}*X^{i}" if c != 1 else f"X^{i}")
        return " + ".join(reversed(parts))


def poly_sqrt(p: Poly) -> Poly | None:
    """Exact polynomial square root, or None when p is not a square."""
    if p.is_zero:
        return Poly.zero(p.q)
    if p.degree % 2 != 0:
        return None
    q = p.q
    r0 = sqrt_mod(p.lead, q)
    if r0 is None:
        return None
    half = p.degree // 2
    # Solve s^2 = p coefficient by coefficient from the top.
    s = [0] * (half + 1)
    s[half] = r0
    inv2r0 = pow(2 * r0 % q, q - 2, q)
    for k in range(1, half + 1):
        # coefficient of X^(2*half - k) in s^2
        acc = 0
        for j in range(1, k):
            acc += s[half - j] * s[half - (k - j)]
        target = p.coeff(2 * half - k)
        s[half - k] = (target - acc) * inv2r0 % q
    cand = Poly.of(q, s)
    return cand if cand * cand == p else None


@dataclass(frozen=True)
class RatFunc:
    """Reduced rational function: gcd(num, den) = 1, den monic and nonzero."""

    num: Poly
    den: Poly

    @classmethod
    def of(cls, num: Poly, den: Poly) -> "RatFunc":
        if den.is_zero:
            raise ExactError("zero denominator")
        g = num.gcd(den)
        if not g.is_zero and g.degree > 0:
            num, den = num // g, den // g
        c = pow(den.lead, den.q - 2, den.q)
        return cls(num.scale(c), den.scale(c))

    @property
    def q(self) -> int:
        return self.den.q

    def __add__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc.of(self.num * other.den + other.num * self.den, self.den * other.den)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc.of(self.num * other.num, self.den * other.den)

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def inverse(self) -> "RatFunc":
        if self.num.is_zero:
            raise ExactError("inverting the zero rational function")
        return RatFunc.of(self.den, self.num)


# ---------------------------------------------------------------------------
# Magnitudes: exact powers of q
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QMag:
    """Magnitude q^(-exp); exp None is the distinguished zero magnitude."""

    q: int
    exp: int | None

    @classmethod
    def zero(cls, q: int) -> "QMag":
        return cls(q, None)

    @property
    def is_zero(self) -> bool:
        return self.exp is None

    def __mul__(self, other: "QMag") -> "QMag":
        if self.q != other.q:
            raise ExactError("mixed moduli")
        if self.is_zero or other.is_zero:
            return QMag.zero(self.q)
        return QMag(self.q, self.exp + other.exp)

    def inverse(self) -> "QMag":
        if self.is_zero:
            raise ExactError("zero magnitude has no inverse")
        return QMag(self.q, -self.exp)

    def __pow__(self, k: int) -> "QMag":
        if self.is_zero:
            if k <= 0:
                raise ExactError("zero magnitude to a non-positive power")
            return self
        return QMag(self.q, self.exp * k)

    def _key(self):
        # q^(-exp): smaller exp means larger magnitude; zero is smallest.
        return float("-inf") if self.is_zero else -self.exp

    def __lt__(self, other: "QMag"):
        return self._key() < other._key()

    def __le__(self, other: "QMag"):
        return self._key() <= other._key()

    def __gt__(self, other: "QMag"):
        return self._key() > other._key()

    def __ge__(self, other: "QMag"):
        return self._key() >= other._key()

    def as_fraction(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        if self.exp >= 0:
            return Fraction(1, self.q**self.exp)
        return Fraction(self.q ** (-self.exp))

    def __float__(self) -> float:
        return 0.0 if self.is_zero else float(self.q) ** (-self.exp)

    def __str__(self):
        return "0" if self.is_zero else f"{self.q}^{-self.exp}"


# ---------------------------------------------------------------------------
# Truncated Laurent series in 1/X
# ---------------------------------------------------------------------------

_UNBOUNDED = None


def _min_prec(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass(frozen=True)
class Laurent:
    """Truncated series sum a_i X^(-i), i from val; coeffs[0] != 0 unless zero."""

    q: int
    val: int
    coeffs: tuple[int, ...]
    abs_prec: int | None  # all coefficients with exponent < abs_prec are known

    # -- constructors ------------------------------------------------------

    @classmethod
    def make(cls, q: int, val: int, coeffs, abs_prec: int | None = None) -> "Laurent":
        """Normalize a coefficient window; abs_prec None means exact."""
        cs = [c % q for c in coeffs]
        if abs_prec is not None:
            cs = cs[: max(0, abs_prec - val)]
        while cs and cs[0] == 0:
            cs.pop(0)
            val += 1
        while cs and cs[-1] == 0:  # known-zero tail is recorded by abs_prec
            cs.pop()
        if not cs:
            return cls(q, 0, (), abs_prec)
        return cls(q, val, tuple(cs), abs_prec)

    @classmethod
    def zero(cls, q: int) -> "Laurent":
        return cls(q, 0, (), _UNBOUNDED)

    @classmethod
    def zero_to(cls, q: int, abs_prec: int) -> "Laurent":
        return cls(q, 0, (), abs_prec)

    @classmethod
    def const(cls, q: int, c: int) -> "Laurent":
        c %= q
        if c == 0:
            return cls.zero(q)
        return cls(q, 0, (c,), _UNBOUNDED)

    @classmethod
    def monomial(cls, q: int, c: int, exp: int) -> "Laurent":
        """c * X^(-exp), exact."""
        c %= q
        if c == 0:
            return cls.zero(q)
        return cls(q, exp, (c,), _UNBOUNDED)

    @classmethod
    def from_poly(cls, p: Poly) -> "Laurent":
        if p.is_zero:
            return cls.zero(p.q)
        return cls.make(p.q, -p.degree, tuple(reversed(p.coeffs)), _UNBOUNDED)

    # -- predicates and accessors -----------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_exact_zero(self) -> bool:
        return not self.coeffs and self.abs_prec is None

    @property
    def is_exact(self) -> bool:
        return self.abs_prec is None

    @property
    def precision(self) -> int | None:
        """Count of known coefficients from the valuation on (None = exact)."""
        if self.abs_prec is None:
            return None
        return self.abs_prec - self.val if self.coeffs else self.abs_prec

    def coeff(self, i: int) -> int:
        """Coefficient of X^(-i); raises beyond the tracked window."""
        if self.abs_prec is not None and i >= self.abs_prec:
            raise PrecisionExhausted(f"coefficient at exponent {i} beyond window {self.abs_prec}")
        if not self.coeffs:
            return 0
        j = i - self.val
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else 0

    def valuation(self) -> int:
        if self.is_exact_zero:
            raise ExactError("exact zero has no finite valuation")
        if self.is_zero:
            raise PrecisionExhausted(
                f"series vanishes to tracked precision (valuation >= {self.abs_prec})"
            )
        return self.val

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Laurent"):
        if self.q != other.q:
            raise ExactError("mixed moduli")

    def __add__(self, other: "Laurent") -> "Laurent":
        self._check(other)
        if self.is_exact_zero:
            return other
        if other.is_exact_zero:
            return self
        prec = _min_prec(self.abs_prec, other.abs_prec)
        if self.is_zero and other.is_zero:
            return Laurent.zero_to(self.q, prec)
        vals = [x.val for x in (self, other) if x.coeffs]
        lo = min(vals)
        if prec is not None and prec <= lo:
            raise PrecisionExhausted("empty coefficient window in addition")
        hi = prec if prec is not None else max(x.val + len(x.coeffs) for x in (self, other))
        out = [(self.coeff(i) + other.coeff(i)) % self.q for i in range(lo, hi)]
        return Laurent.make(self.q, lo, out, prec)

    def __neg__(self) -> "Laurent":
        return Laurent(self.q, self.val, tuple(-c % self.q for c in self.coeffs), self.abs_prec)

    def __sub__(self, other: "Laurent") -> "Laurent":
        return self + (-other)

    def __mul__(self, other: "Laurent") -> "Laurent":
        self._check(other)
        if self.is_zero or other.is_zero:
            if self.is_exact_zero or other.is_exact_zero:
                return Laurent.zero(self.q)
            # |f*g| <= q^-(A_f + val_g): keep the certified window
            cands = []
            for z, nz in ((self, other), (other, self)):
                if z.is_zero and z.abs_prec is not None:
                    shift = nz.val if nz.coeffs else (nz.abs_prec or 0)
                    cands.append(z.abs_prec + shift)
            return Laurent.zero_to(self.q, min(cands))
        rel = _min_prec(self.precision, other.precision)
        v = self.val + other.val
        if rel is None:
            n = len(self.coeffs) + len(other.coeffs) - 1
            out = [0] * n
            for i, a in enumerate(self.coeffs):
                if a:
                    for j, b in enumerate(other.coeffs):
                        out[i + j] += a * b
            return Laurent.make(self.q, v, out, None)
        out = [0] * rel
        for i, a in enumerate(self.coeffs[:rel]):
            if a:
                bmax = rel - i
                for j, b in enumerate(other.coeffs[:bmax]):
                    out[i + j] += a * b
        return Laurent.make(self.q, v, out, v + rel)

    def inverse(self, prec: int | None = None) -> "Laurent":
        """Multiplicative inverse, to own relative precision (capped by prec).

        The inverse of an exact value is an infinite series in general, so the
        result always carries a finite window (prec coefficients, default a
        few more than the input length).
        """
        if self.is_zero:
            raise ExactError("inversion of zero")
        rel = self.precision
        if rel is None:
            rel = prec if prec is not None else len(self.coeffs) + 4
        elif prec is not None:
            rel = min(rel, prec)
        q = self.q
        inv0 = pow(self.coeffs[0], q - 2, q)
        g = [inv0]
        support = [s for s in range(1, len(self.coeffs)) if self.coeffs[s]]
        for t in range(1, rel):
            acc = 0
            for s in support:
                if s > t:
                    break
                acc += self.coeffs[s] * g[t - s]
            g.append(-acc * inv0 % q)
        return Laurent.make(q, -self.val, g, -self.val + rel)

    def truncate(self, abs_prec: int) -> "Laurent":
        """Forget coefficients at exponents >= abs_prec."""
        new = _min_prec(self.abs_prec, abs_prec)
        return Laurent.make(self.q, self.val, self.coeffs, new)

    def sqrt(self, prec: int | None = None) -> "Laurent":
        """Canonical square root: the branch whose leading coefficient is the
        smallest-representative root mod q.  Requires even valuation and a
        residue leading coefficient."""
        if self.is_zero:
            if self.is_exact_zero:
                return self
            raise PrecisionExhausted("square root of a series known only to be ~0")
        if self.val % 2 != 0:
            raise ExactError("odd valuation: no square root in the Laurent field")
        q = self.q
        r0 = sqrt_mod(self.coeffs[0], q)
        if r0 is None or r0 == 0:
            raise ExactError("leading coefficient is not a nonzero square mod q")
        rel = self.precision
        if rel is None:
            rel = prec if prec is not None else len(self.coeffs) + 4
        elif prec is not None:
            rel = min(rel, prec)
        g = [r0]
        inv2r0 = pow(2 * r0 % q, q - 2, q)
        for t in range(1, rel):
            acc = 0
            for s in range(1, t):
                acc += g[s] * g[t - s]
            a = self.coeffs[t] if t < len(self.coeffs) else 0
            g.append((a - acc) * inv2r0 % q)
        v = self.val // 2
        return Laurent.make(q, v, g, v + rel)

    # -- queries -----------------------------------------------------------

    def magnitude(self) -> QMag:
        if self.is_exact_zero:
            return QMag.zero(self.q)
        return QMag(self.q, self.valuation())

    def agrees_with(self, other: "Laurent", through_exp: int) -> bool:
        """Exact coefficient agreement for all exponents <= through_exp."""
        lo = min((x.val for x in (self, other) if x.coeffs), default=through_exp)
        return all(self.coeff(i) == other.coeff(i) for i in range(lo, through_exp + 1))

    def serialize(self) -> str:
        return f"{self.q}:{self.val}:" + ",".join(str(c) for c in self.coeffs)

    @classmethod
    def deserialize(cls, s: str) -> "Laurent":
        qs, vs, cs = s.split(":")
        coeffs = [int(c) for c in cs.split(",")] if cs else []
        return cls.make(int(qs), int(vs), coeffs)

    def __str__(self):
        if self.is_zero:
            tail = "" if self.is_exact else f" + O(X^{-self.abs_prec})"
            return "0" + tail
        parts = []
        for j, c in enumerate(self.coeffs):
            i = self.val + j
            if c == 0:
                continue
            if i == 0:
                parts.append(f"{c}")
            elif i < 0:
                parts.append(f"{c}*X^{-i}" if c != 1 else f"X^{-i}")
            else:
                parts.append(f"{c}*X^-{i}" if c != 1 else f"X^-{i}")
        s = " + ".join(parts) if parts else "0"
        if self.abs_prec is not None:
            s += f" + O(X^-{self.abs_prec})"
        return s


# ---------------------------------------------------------------------------
# Spec-level operation surface
# ---------------------------------------------------------------------------


def lau_arith(op: str, f: Laurent, g: Laurent | None = None, prec: int | None = None) -> Laurent:
    """Field operations with tracked precision: op in {add, mul, inv}."""
    if op == "add":
        out = f + g
    elif op == "mul":
        out = f * g
    elif op == "inv":
        out = f.inverse(prec)
    else:
        raise ExactError(f"unknown operation {op!r}")
    if prec is not None and not out.is_zero:
        out = out.truncate(out.val + prec)
    return out


def valuation_abs(f: Laurent) -> tuple[int | None, QMag]:
    """(valuation, magnitude q^-valuation); zero maps to (None, zero)."""
    if f.is_exact_zero:
        return None, QMag.zero(f.q)
    v = f.valuation()
    return v, QMag(f.q, v)


def embed_ratfunc(r: RatFunc, prec: int) -> Laurent:
    """Expand num/den by long division, exact to prec coefficients."""
    num, den = r.num, r.den
    q = den.q
    if num.is_zero:
        return Laurent.zero(q)
    v = den.degree - num.degree
    d = den.degree
    a: list[int] = []
    inv_lead = pow(den.lead, q - 2, q)
    # den coefficient of X^(d-k) for the term k steps behind the current one
    back = [den.coeff(d - k) for k in range(1, d + 1)]
    for t in range(prec):
        i = v + t  # solving for coefficient a_i at X^(-i)
        acc = 0
        for k, dc in enumerate(back, start=1):
            if k > t:
                break
            if dc:
                acc += a[t - k] * dc
        target = num.coeff(d - i) if d - i >= 0 else 0
        a.append((target - acc) * inv_lead % q)
    return Laurent.make(q, v, a, v + prec)


def lau_sqrt(f: Laurent, prec: int | None = None) -> Laurent:
    return f.sqrt(prec)


def sample_haar(q: int, valuation_floor: int, prec: int, seed: int) -> Laurent:
    """Draw prec i.i.d. uniform coefficients starting at the given exponent.

    The reference normalization gives the full ball {v >= valuation_floor}
    mass 1; a cylinder fixing k coefficients then has mass q^-k.
    """
    check_modulus(q)
    if prec < 1:
        raise ExactError("prec must be >= 1")
    rng = random.Random(seed)
    coeffs = [rng.randrange(q) for _ in range(prec)]
    return Laurent.make(q, valuation_floor, coeffs, valuation_floor + prec)
