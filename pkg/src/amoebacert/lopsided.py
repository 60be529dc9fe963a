"""Lopsidedness, cyclic-product refinement and closed-form certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polycore import (
    ComplexPoly,
    DimensionError,
    GaussianRational,
    RealPoly,
    cyclic_product,
    rational_sqrt,
    realify,
    scale_substitute,
    DEFAULT_SIZE_BUDGET,
)
from .soscert import Certificate, gram_from_squares, identity_polynomial
from .systems import GeneratorSystem, amoeba_generators, monomial_generators


class NotLopsidedError(ValueError):
    pass


class OrderError(ArithmeticError):
    """Dominant exponent of the cyclic product is not divisible by r^n."""


@dataclass(frozen=True)
class ModuliSequence:
    values: tuple[float, ...]
    dominant: int | None


def is_lopsided(values: ModuliSequence | Sequence[float]) -> int | None:
    """Index of the entry strictly exceeding the sum of the others, if any."""
    vals = values.values if isinstance(values, ModuliSequence) else tuple(values)
    if not vals:
        return None
    j = int(np.argmax(vals))
    rest = math.fsum(vals) - vals[j]
    return j if vals[j] > rest else None


def moduli_sequence(f: ComplexPoly, v: Sequence[float]) -> ModuliSequence:
    """``|b_j| * exp(<alpha(j), v>)`` for every term, in canonical term order."""
    if len(v) != f.n:
        raise DimensionError(f"v has length {len(v)}, expected {f.n}")
    vals = tuple(
        abs(complex(c)) * math.exp(sum(a * x for a, x in zip(e, v))) for e, c in f.terms.items()
    )
    return ModuliSequence(vals, is_lopsided(vals))


@dataclass(frozen=True)
class RefinedResult:
    outside: bool
    order: tuple[int, ...] | None
    r: int
    moduli: ModuliSequence

    def __str__(self):
        if self.outside:
            return f"OUTSIDE order=({','.join(map(str, self.order))})"
        return "UNRESOLVED"


def purbhoo_membership(
    f: ComplexPoly, v: Sequence[float], r: int = 1, budget: int = DEFAULT_SIZE_BUDGET
) -> RefinedResult:
    """Lopsidedness of the cyclic product ``f~_r`` at the log point ``v``.

    The polynomial is first rescaled so that the query sits at ``v = 0``.
    """
    if len(v) != f.n:
        raise DimensionError(f"v has length {len(v)}, expected {f.n}")
    g = scale_substitute(f.to_float(), [math.exp(x) for x in v])
    prod = cyclic_product(g, r, budget=budget)
    seq = moduli_sequence(prod, [0.0] * f.n)
    if seq.dominant is None:
        return RefinedResult(False, None, r, seq)
    top = prod.exponents()[seq.dominant]
    q = r**f.n
    if any(a % q for a in top):
        raise OrderError(f"dominant exponent {top} not divisible by {q}")
    return RefinedResult(True, tuple(a // q for a in top), r, seq)


# -- explicit certificates ------------------------------------------------------------------


def _modulus(c, exact: bool):
    if not exact:
        return abs(complex(c))
    m = rational_sqrt(GaussianRational.of(c).abs2())
    if m is None:
        raise ValueError(f"|{c}| is irrational; use floating mode")
    return m


def _unit_term(f: ComplexPoly, e, c, exact: bool) -> ComplexPoly:
    """``b * Z^e / |b|`` as a complex polynomial."""
    mod = _modulus(c, exact)
    coeff = GaussianRational.of(c) / GaussianRational.of(mod) if exact else complex(c) / mod
    return ComplexPoly(f.n, {e: coeff}, exact=exact)


def explicit_system(f: ComplexPoly) -> GeneratorSystem:
    """Monomial system at the all-ones point: ``f_re, f_im, |m_j|^2 - 1``."""
    return monomial_generators(f, [1] * f.n, normalize=False, require_span=False)


def explicit_certificate(f: ComplexPoly, dominant: int | None = None) -> tuple[Certificate, GeneratorSystem]:
    """Closed-form certificate for ``f`` lopsided at the all-ones point.

    With ``w_i = b_i m_i / |b_i|`` and ``S`` the sum of the non-dominant
    moduli, the multipliers are ``(-b_1 m_1 + sum_{i>1} b_i m_i)`` (real and
    imaginary parts), ``|b_1|^2`` and ``-|b_i| S``; the square part is
    ``sum_{1<i<j} |b_i||b_j| |w_i - w_j|^2`` and the scale ``1/(|b_1|^2 - S^2)``.
    """
    exact = f.exact
    sys = explicit_system(f)
    terms = list(f.terms.items())
    mods = [_modulus(c, exact) for _, c in terms]
    j = is_lopsided([float(m) for m in mods])
    if j is None or (dominant is not None and dominant != j):
        raise NotLopsidedError(f"{f} is not lopsided at 1 with the requested dominant term")
    others = [i for i in range(len(terms)) if i != j]
    S = sum((mods[i] for i in others), Fraction(0) if exact else 0.0)

    e1, b1 = terms[j]
    U = ComplexPoly(f.n, {e1: b1}, exact=exact)
    Rest = ComplexPoly(f.n, {terms[i][0]: terms[i][1] for i in others}, exact=exact)
    p_re, p_im = realify(Rest - U)
    mults = [p_re, p_im]
    N = 2 * f.n
    for i in range(len(terms)):
        w = mods[j] ** 2 if i == j else -mods[i] * S
        mults.append(RealPoly(N, {(0,) * N: w}, exact=exact))

    squares = []
    for a_pos, a in enumerate(others):
        wa = _unit_term(f, terms[a][0], terms[a][1], exact)
        for b in others[a_pos + 1 :]:
            wb = _unit_term(f, terms[b][0], terms[b][1], exact)
            d_re, d_im = realify(wa - wb)
            weight = mods[a] * mods[b]
            squares += [(weight, d_re), (weight, d_im)]
    if squares:
        basis, Q = gram_from_squares(squares, N, exact=exact)
    else:
        basis = ((0,) * N,)
        Q = np.array([[Fraction(0)]], dtype=object) if exact else np.zeros((1, 1))
    scale = 1 / (mods[j] ** 2 - S**2)
    d = f.total_degree()
    cert = Certificate(tuple(mults), tuple(basis), Q, scale, (d, 2 * d), sys.generators)
    return cert, sys


def literal_identity_residual(f: ComplexPoly) -> float | Fraction:
    """Largest coefficient left over when the componentwise formulas are used verbatim.

    Here ``s_i = (b_re/|b| * m_re)^2 + (b_im/|b| * m_im)^2 - 1`` and the squares
    in ``H`` pair ``b_re/|b| * m_re`` and ``b_im/|b| * m_im`` separately.
    """
    exact = f.exact
    cert, sys = explicit_certificate(f)
    terms = list(f.terms.items())
    mods = [_modulus(c, exact) for _, c in terms]
    N = 2 * f.n
    j = is_lopsided([float(m) for m in mods])
    one = Fraction(1) if exact else 1.0

    def parts(i):
        e, c = terms[i]
        gc = GaussianRational.of(c) if exact else complex(c)
        m_re, m_im = realify(ComplexPoly(f.n, {e: one}, exact=exact))
        return m_re * (gc.real / mods[i]), m_im * (gc.imag / mods[i])

    gens = list(sys.generators[:2])
    for i in range(len(terms)):
        a, b = parts(i)
        gens.append(a * a + b * b - one)
    others = [i for i in range(len(terms)) if i != j]
    squares = []
    for pos, a in enumerate(others):
        for b in others[pos + 1 :]:
            (ar, ai), (br, bi) = parts(a), parts(b)
            weight = mods[a] * mods[b]
            squares += [(weight, ar - br), (weight, ai - bi)]
    if squares:
        basis, Q = gram_from_squares(squares, N, exact=exact)
    else:
        basis, Q = cert.gram_basis, cert.gram
    literal = Certificate(cert.multipliers, tuple(basis), Q, cert.scale, cert.declared_degree)
    coeffs = identity_polynomial(literal, gens)
    return max(abs(v) for v in coeffs.values())


def linear_region_value(a, b, c, lam):
    """``(a^2+ab) lam1^2 + (b^2+ab) lam2^2 - c^2``."""
    return (a * a + a * b) * lam[0] ** 2 + (b * b + a * b) * lam[1] ** 2 - c * c


def _linear_parts(a, b, c, lam, exact: bool):
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if exact:
        a, b, c = Fraction(a), Fraction(b), Fraction(c)
        lam = [Fraction(x) for x in lam]
    coeff = GaussianRational.of if exact else complex
    f = ComplexPoly(2, {(1, 0): coeff(a), (0, 1): coeff(b), (0, 0): coeff(c)}, exact=exact)
    sys = amoeba_generators([f], lam, normalize=False)
    one = Fraction(1) if exact else 1.0
    X1, X2, Y1, Y2 = (RealPoly(4, {tuple(int(i == k) for i in range(4)): one}, exact=exact) for k in range(4))
    mults = (
        X1 * a + X2 * b - c,
        Y1 * a + Y2 * b,
        X1.constant(-(a * a + a * b)),
        X1.constant(-(b * b + a * b)),
    )
    squares = [(a * b, X1 - X2), (a * b, Y1 - Y2)]
    return mults, squares, sys, linear_region_value(a, b, c, lam)


def linear_region_expansion(a, b, c, lam, exact: bool = True) -> RealPoly:
    """Expanded ``sum p_i g_i + ab (X1-X2)^2 + ab (Y1-Y2)^2`` (a constant polynomial)."""
    mults, squares, sys, _ = _linear_parts(a, b, c, lam, exact)
    total = sum((p * g for p, g in zip(mults, sys.generators)), sys.generators[0].zero())
    for w, q in squares:
        total = total + q * q * w
    return total


def linear_region_certificate(a, b, c, lam, exact: bool = False) -> tuple[Certificate, GeneratorSystem] | None:
    """Degree-2 certificate for ``a Z1 + b Z2 + c`` (``a, b > 0``) at ``lam``, if the region test passes.

    Built on the unnormalized standard system from the difference squares
    ``(X1 - X2)^2`` and ``(Y1 - Y2)^2``.
    """
    mults, squares, sys, E = _linear_parts(a, b, c, lam, exact)
    if not E < 0:
        return None
    basis, Q = gram_from_squares(squares, 4, exact=exact)
    return Certificate(mults, basis, Q, 1 / (-E), (1, 2), sys.generators), sys
