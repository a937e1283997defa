import random

import pytest

from spirallab.exactnum import ExactError, Laurent, Poly, QMag, RatFunc, embed_ratfunc
from spirallab.quadratic import (
    CFExpansion,
    Mobius,
    QuadIrr,
    act,
    cf_expand,
    cf_expand_rational,
    convergents,
    generator_set,
    orbit_enumerate,
)

Q = 3


def base_alpha(q=Q):
    """Root of Y^2 - (X^2+1)."""
    return QuadIrr.of(
        Poly.const(q, 1), Poly.zero(q), -Poly.of(q, [1, 0, 1]), sigma=1
    )


def random_quadirr(rng, q=Q, max_deg=2):
    while True:
        try:
            A = Poly.of(q, [rng.randrange(q) for _ in range(rng.randint(0, max_deg))] + [1])
            B = Poly.of(q, [rng.randrange(q) for _ in range(rng.randint(0, max_deg + 1))])
            C = Poly.of(q, [rng.randrange(q) for _ in range(rng.randint(1, max_deg + 1))])
            return QuadIrr.of(A, B, C, rng.choice([1, -1]))
        except ExactError:
            continue


def residual(alpha, x):
    """A x^2 + B x + C as a Laurent value."""
    Af = Laurent.from_poly(alpha.A)
    Bf = Laurent.from_poly(alpha.B)
    Cf = Laurent.from_poly(alpha.C)
    return Af * x * x + Bf * x + Cf


# -- validation and expansion --------------------------------------------------


def test_rational_discriminant_rejected():
    with pytest.raises(ExactError):
        QuadIrr.of(Poly.const(Q, 1), Poly.zero(Q), -Poly.of(Q, [0, 0, 1]))  # Y^2 - X^2


def test_expand_satisfies_minimal_polynomial():
    a = base_alpha()
    x = a.expand(20)
    assert x.val == -1 and x.coeffs[0] == 1 and x.coeffs[2] == 2  # X + 2/X + ...
    r = residual(a, x)
    assert r.is_zero  # vanishes through the tracked window
    assert r.abs_prec >= 15


def test_sigma_branches_negate_when_b_zero():
    a = base_alpha()
    plus, minus = a.expand(12), a.conjugate().expand(12)
    s = plus + minus
    assert s.is_zero


def test_expand_random_residuals():
    rng = random.Random(5)
    for _ in range(25):
        a = random_quadirr(rng)
        x = a.expand(18)
        r = residual(a, x)
        assert r.is_zero and r.abs_prec is not None and r.abs_prec >= 8


# -- heights -------------------------------------------------------------------


def test_height_of_base_alpha():
    # |root - conjugate| = |2 sqrt(X^2+1)| = q, so h = q^-1
    a = base_alpha()
    assert a.height() == QMag(Q, 1)
    assert a.height_exponent() == -1


def test_height_translation_invariant():
    a = base_alpha()
    for b in (Poly.x(Q), Poly.of(Q, [2, 1, 1]), Poly.const(Q, 2)):
        assert act(Mobius.translation(b), a).height() == a.height()


def test_height_inversion_ratio():
    # h(-1/a)/h(a) = |C|/|A|; minimal polynomial of -1/a is (C, -B, A)
    rng = random.Random(11)
    S = Mobius.inversion(Q)
    for _ in range(50):
        a = random_quadirr(rng)
        img = act(S, a)
        lhs = img.height_exponent() - a.height_exponent()
        rhs = a.C.degree - a.A.degree
        assert lhs == rhs


def test_height_cross_check_via_expansion():
    rng = random.Random(13)
    for _ in range(20):
        a = random_quadirr(rng)
        diff = a.expand(16) - a.conjugate().expand(16)
        assert diff.valuation() == a.height_exponent()


# -- homography action ----------------------------------------------------------


def test_identity_action():
    a = base_alpha()
    assert act(Mobius.identity(Q), a) == a


def test_translation_formula():
    # [[1,b],[0,1]] sends (A, B, C) to (A, B - 2Ab, Ab^2 - Bb + C)
    rng = random.Random(3)
    for _ in range(20):
        a = random_quadirr(rng)
        b = Poly.of(Q, [rng.randrange(Q) for _ in range(3)] + [rng.randrange(1, Q)])
        img = act(Mobius.translation(b), a)
        A, B, C = a.A, a.B, a.C
        expA = A
        expB = B - (A * b).scale(2)
        expC = A * b * b - B * b + C
        g = expA.gcd(expB).gcd(expC)
        assert (img.A, img.B, img.C) == (expA, expB, expC) or g.degree > 0


def test_inversion_swaps_outer_coefficients():
    a = base_alpha()
    img = act(Mobius.inversion(Q), a)
    # minimal polynomial (C, -B, A) up to monic normalization
    scale = pow(a.C.lead, Q - 2, Q)
    assert img.A == a.C.scale(scale)
    assert img.B == (-a.B).scale(scale)
    assert img.C == a.A.scale(scale)


def test_action_is_left_group_action():
    rng = random.Random(17)
    gens = generator_set(Q, d_max=1)
    for _ in range(50):
        a = random_quadirr(rng)
        g1, g2 = rng.choice(gens), rng.choice(gens)
        assert act(g1 * g2, a) == act(g1, act(g2, a))


def test_conjugation_commutes_with_action():
    rng = random.Random(19)
    gens = generator_set(Q, d_max=1)
    for _ in range(30):
        a = random_quadirr(rng)
        g = rng.choice(gens)
        assert act(g, a.conjugate()) == act(g, a).conjugate()


def test_mobius_apply_laurent_consistency():
    # the resolved image really is the mobius transform of the root
    a = base_alpha()
    g = Mobius.translation(Poly.x(Q)) * Mobius.inversion(Q)
    img = act(g, a)
    lhs = img.expand(12)
    rhs = g.apply_laurent(a.expand(40))
    assert lhs.agrees_with(rhs, lhs.abs_prec - 1)


# -- continued fractions ---------------------------------------------------------


def test_cf_rational_euclid():
    # X^2/(X+1) = [X-1; X+1]
    r = RatFunc.of(Poly.of(Q, [0, 0, 1]), Poly.of(Q, [1, 1]))
    cf = cf_expand_rational(r)
    assert cf == [Poly.of(Q, [-1, 1]), Poly.of(Q, [1, 1])]


def test_cf_periodic_and_quotient_degrees():
    a = base_alpha()
    cf = cf_expand(a)
    assert len(cf.period) >= 1
    for p in cf.quotients(10)[1:]:
        assert p.degree >= 1


def test_cf_random_state_recurrence():
    rng = random.Random(23)
    for _ in range(60):
        q = rng.choice([3, 5])
        a = random_quadirr(rng, q=q)
        cf = cf_expand(a, max_states=4000)
        assert len(cf.period) >= 1


def test_cf_convergents_approximation_quality():
    # |alpha - p_n/q_n| = 1/(|q_n| |q_{n+1}|) exactly
    a = base_alpha()
    cf = cf_expand(a)
    quots = cf.quotients(7)
    convs = convergents(quots)
    x = a.expand(60)
    for n in range(len(convs) - 1):
        p_n, q_n = convs[n]
        diff = x - embed_ratfunc(RatFunc.of(p_n, q_n), 50)
        expected = q_n.degree + convs[n + 1][1].degree
        assert diff.valuation() == expected


def test_cf_resummed_convergents_approach_root():
    a = base_alpha()
    convs = convergents(cf_expand(a).quotients(9))
    x = a.expand(60)
    vals = []
    for p_n, q_n in convs:
        diff = x - embed_ratfunc(RatFunc.of(p_n, q_n), 50)
        vals.append(diff.valuation())
    assert vals == sorted(vals) and vals[-1] > vals[0]


def test_cf_translation_preserves_period_cyclically():
    # regression guard, not a theorem: translations keep the cyclic period word
    rng = random.Random(29)
    hits = 0
    for _ in range(20):
        a = random_quadirr(rng)
        b = Poly.of(Q, [rng.randrange(Q), rng.randrange(1, Q)])
        p1 = [p.coeffs for p in cf_expand(a).period]
        p2 = [p.coeffs for p in cf_expand(act(Mobius.translation(b), a)).period]
        if len(p1) == len(p2):
            dbl = p2 + p2
            if any(dbl[i : i + len(p1)] == p1 for i in range(len(p2))):
                hits += 1
    assert hits >= 16


# -- orbit enumeration ------------------------------------------------------------


def test_orbit_contains_base_and_closure():
    a = base_alpha()
    res = orbit_enumerate(a, hmax_exp=1, budget=150_000, d_max=1)
    assert a.key() in res.elements
    gens = generator_set(Q, d_max=1)
    if res.complete:
        sample = list(res.elements.values())[::7][:20]
        for beta in sample:
            for g in gens:
                img = act(g, beta)
                if img.height_exponent() <= 1:
                    assert img.key() in res.elements


def test_orbit_values_match_elements():
    a = base_alpha()
    res = orbit_enumerate(a, hmax_exp=2, budget=30_000, d_max=2)
    for k, beta in list(res.elements.items())[::11][:30]:
        cached = res.values[k]
        fresh = beta.expand(10)
        assert fresh.agrees_with(cached, fresh.abs_prec - 1)


def test_orbit_shell_growth():
    a = base_alpha()
    res = orbit_enumerate(a, hmax_exp=4, budget=250_000, d_max=2)
    counts = {n: len(res.shell(n)) for n in range(1, 5)}
    assert all(counts[n] > 0 for n in range(1, 5))
    # log-slope of shell counts approximates log q
    import math

    ratios = [counts[n + 1] / counts[n] for n in range(1, 4)]
    geo = math.exp(sum(math.log(r) for r in ratios) / len(ratios))
    assert 0.55 * Q <= geo <= 1.6 * Q


def test_orbit_budget_flag():
    a = base_alpha()
    res = orbit_enumerate(a, hmax_exp=6, budget=500)
    assert not res.complete


def test_orbit_jsonl_roundtrip(tmp_path):
    a = base_alpha()
    res = orbit_enumerate(a, hmax_exp=1, budget=30_000, d_max=1)
    path = tmp_path / "orbit.jsonl"
    res.dump_jsonl(str(path), note="test")
    lines = path.read_text().strip().split("\n")
    assert len(lines) == len(res.elements) + 1
    back = QuadIrr.from_json(Q, lines[1])
    assert back.key() in res.elements


def test_orbit_heights_match_expansion_separation():
    # the polynomial height formula agrees with the expansion-based one on
    # every enumerated element
    a = base_alpha()
    res = orbit_enumerate(a, hmax_exp=2, budget=30_000, d_max=1)
    for beta in res.elements.values():
        sep = beta.expand(12) - beta.conjugate().expand(12)
        assert sep.valuation() == beta.height_exponent()


def test_cf_state_budget_flagged():
    from spirallab.quadratic import BudgetExceeded

    with pytest.raises(BudgetExceeded):
        cf_expand(base_alpha(), max_states=1)
