"""Exact angular-momentum algebra for hyperfine branching and drive weights.

Wigner 6-j symbols and Clebsch-Gordan coefficients are evaluated with
integer factorial arithmetic (``fractions.Fraction``), so squared
quantities used for branching tables are exact rationals.  Half-integer
angular momenta are passed as floats or Fractions and validated to be
multiples of 1/2.

The formulas are the standard Racah closed forms; see any angular
momentum text.  This module is deliberately independent of sympy so the
test suite can cross-check it against ``sympy.physics.wigner``.
"""

from fractions import Fraction
from math import factorial, isqrt, sqrt


def _two(j):
    """Return 2*j as an exact int, rejecting non-half-integer input."""
    f = Fraction(j).limit_denominator(4)
    t = f * 2
    if t.denominator != 1 or Fraction(j) != f:
        raise ValueError(f"not a half-integer angular momentum: {j!r}")
    return int(t)


def _fact2(two_n):
    """(n)! where n is given as 2n; requires 2n even and nonnegative."""
    if two_n < 0 or two_n % 2:
        raise ValueError("factorial of negative or half-integer value")
    return factorial(two_n // 2)


def _triangle(two_a, two_b, two_c):
    """Triangle coefficient Delta(a,b,c) as an exact Fraction.

    Returns None when the triad violates the triangle inequalities.
    """
    s1 = two_a + two_b - two_c
    s2 = two_a - two_b + two_c
    s3 = -two_a + two_b + two_c
    if s1 < 0 or s2 < 0 or s3 < 0 or (two_a + two_b + two_c) % 2:
        return None
    return Fraction(
        _fact2(s1) * _fact2(s2) * _fact2(s3),
        _fact2(two_a + two_b + two_c + 2),
    )


def _sqrt_fraction(f):
    """sqrt of a nonnegative Fraction, exact when possible."""
    num, den = f.numerator, f.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return sqrt(num / den)


def wigner_6j_signed_square(a, b, c, d, e, f):
    """(sign, value**2) of the 6-j symbol {a b c; d e f}, value**2 exact."""
    ta, tb, tc, td, te, tf = (_two(x) for x in (a, b, c, d, e, f))
    tris = [
        _triangle(ta, tb, tc),
        _triangle(ta, te, tf),
        _triangle(td, tb, tf),
        _triangle(td, te, tc),
    ]
    if any(t is None for t in tris):
        return 0, Fraction(0)
    t_min = max(ta + tb + tc, ta + te + tf, td + tb + tf, td + te + tc) // 2
    t_max = min(ta + tb + td + te, tb + tc + te + tf, ta + tc + td + tf) // 2
    total = Fraction(0)
    for t in range(t_min, t_max + 1):
        num = factorial(t + 1)
        den = (
            factorial(t - (ta + tb + tc) // 2)
            * factorial(t - (ta + te + tf) // 2)
            * factorial(t - (td + tb + tf) // 2)
            * factorial(t - (td + te + tc) // 2)
            * factorial((ta + tb + td + te) // 2 - t)
            * factorial((tb + tc + te + tf) // 2 - t)
            * factorial((ta + tc + td + tf) // 2 - t)
        )
        total += Fraction((-1) ** t * num, den)
    prod = tris[0] * tris[1] * tris[2] * tris[3]
    sign = (total > 0) - (total < 0)
    return sign, total * total * prod


def wigner_6j(a, b, c, d, e, f):
    """Signed floating-point 6-j symbol."""
    sign, sq = wigner_6j_signed_square(a, b, c, d, e, f)
    return sign * _sqrt_fraction_float(sq)


def _sqrt_fraction_float(f):
    return sqrt(f.numerator / f.denominator)


def clebsch_gordan_signed_square(j1, m1, j2, m2, j3, m3):
    """(sign, value**2) of <j1 m1; j2 m2 | j3 m3>, value**2 exact."""
    tj1, tm1 = _two(j1), _two(m1)
    tj2, tm2 = _two(j2), _two(m2)
    tj3, tm3 = _two(j3), _two(m3)
    if tm1 + tm2 != tm3 or abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm3) > tj3:
        return 0, Fraction(0)
    tri = _triangle(tj1, tj2, tj3)
    if tri is None:
        return 0, Fraction(0)
    pref = (
        Fraction(tj3 + 1)
        * tri
        * _fact2(tj3 + tm3)
        * _fact2(tj3 - tm3)
        * _fact2(tj1 - tm1)
        * _fact2(tj1 + tm1)
        * _fact2(tj2 - tm2)
        * _fact2(tj2 + tm2)
    )
    k_min = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    k_max = min(
        (tj1 + tj2 - tj3) // 2,
        (tj1 - tm1) // 2,
        (tj2 + tm2) // 2,
    )
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        den = (
            factorial(k)
            * _fact2(tj1 + tj2 - tj3 - 2 * k)
            * _fact2(tj1 - tm1 - 2 * k)
            * _fact2(tj2 + tm2 - 2 * k)
            * _fact2(tj3 - tj2 + tm1 + 2 * k)
            * _fact2(tj3 - tj1 - tm2 + 2 * k)
        )
        total += Fraction((-1) ** k, den)
    sign = (total > 0) - (total < 0)
    return sign, total * total * pref


def clebsch_gordan(j1, m1, j2, m2, j3, m3):
    """Signed floating-point Clebsch-Gordan coefficient."""
    sign, sq = clebsch_gordan_signed_square(j1, m1, j2, m2, j3, m3)
    return sign * _sqrt_fraction_float(sq)


# ---------------------------------------------------------------------------
# hyperfine decay and excitation weights


def decay_strength(j_ground, j_excited, f_excited, f_ground, i_nuc):
    """Relative decay strength |F_e> -> F_g manifold, exact Fraction.

    (2F_g+1)(2J_e+1) {J_g J_e 1; F_e F_g I}^2.  Summed over all allowed
    F_g this is exactly 1 (6-j orthogonality), which makes per-level
    branching tables close without normalization fudging.
    """
    _, sq = wigner_6j_signed_square(j_ground, j_excited, 1, f_excited, f_ground, i_nuc)
    tfg = _two(f_ground)
    tje = _two(j_excited)
    return Fraction((tfg + 1) * (tje + 1)) * sq


def branching_from_excited(j_excited, f_excited, m_excited, *, j_ground, i_nuc, f_grounds):
    """Branching of |F_e, m_e> into each ground |F_g, m_g>, exact.

    Returns ``{F_g: {m_g: Fraction}}`` covering the three dipole emission
    polarizations.  The total over all destinations is exactly 1.
    """
    out = {}
    for fg in f_grounds:
        strength = decay_strength(j_ground, j_excited, f_excited, fg, i_nuc)
        per_m = {}
        for q in (-1, 0, 1):
            mg = m_excited - q
            if abs(mg) > fg:
                continue
            _, cg2 = clebsch_gordan_signed_square(fg, mg, 1, q, f_excited, m_excited)
            if cg2:
                per_m[mg] = per_m.get(mg, Fraction(0)) + strength * cg2
        out[fg] = per_m
    return out


def sigma_plus_weight(j_ground, j_excited, f_ground, f_excited, i_nuc):
    """Signed relative Rabi amplitude for sigma+ drive |F_g,0> -> |F_e,1>.

    Explicit sum over the electron-nuclear decomposition,

        sum_mj <j_g mj; I -mj | F_g 0> <j_g mj; 1 +1 | j_e mj+1>
               <j_e mj+1; I -mj | F_e 1>,

    with the reduced fine-structure matrix element divided out.  The
    explicit sum fixes the relative signs between hyperfine paths, which
    set whether multi-path two-photon amplitudes add or cancel.
    """
    tjg = _two(j_ground)
    tje = _two(j_excited)
    total = 0.0
    for tmj in range(-tjg, tjg + 1, 2):
        mj = Fraction(tmj, 2)
        mi = -mj
        mj_e = mj + 1
        if abs(_two(mj_e)) > tje or abs(_two(mi)) > _two(i_nuc):
            continue
        sa, qa = clebsch_gordan_signed_square(j_ground, mj, i_nuc, mi,
                                              f_ground, 0)
        sb, qb = clebsch_gordan_signed_square(j_ground, mj, 1, 1,
                                              j_excited, mj_e)
        sc, qc = clebsch_gordan_signed_square(j_excited, mj_e, i_nuc, mi,
                                              f_excited, 1)
        total += sa * sb * sc * _sqrt_fraction_float(qa * qb * qc)
    return total


def rydberg_coupling_weight(j_excited, f_excited, m_excited, j_rydberg,
                            mj_rydberg, i_nuc):
    """Signed amplitude for sigma+ drive |F_e, m_e> -> |j_r, mj_r>.

    The Rydberg state is a fine-structure level (hyperfine unresolved),
    so the nuclear projection is a spectator fixed by the magnetic
    quantum numbers: mj_e = mj_r - 1 and mI = m_e - mj_e.  Reduced
    fine-structure matrix element divided out.
    """
    mj_e = Fraction(mj_rydberg) - 1
    mi = Fraction(m_excited) - mj_e
    if abs(_two(mj_e)) > _two(j_excited) or abs(_two(mi)) > _two(i_nuc):
        return 0.0
    sa, qa = clebsch_gordan_signed_square(j_excited, mj_e, i_nuc, mi,
                                          f_excited, m_excited)
    sb, qb = clebsch_gordan_signed_square(j_excited, mj_e, 1, 1,
                                          j_rydberg, mj_rydberg)
    return sa * sb * _sqrt_fraction_float(qa * qb)
