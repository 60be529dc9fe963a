"""Sparse multivariate polynomials over complex and real coefficients.

Polynomials are immutable maps from exponent tuples to coefficients.  Two
coefficient modes exist: double precision (``complex`` / ``float``) and an
exact mode (:class:`GaussianRational` / :class:`fractions.Fraction`) used when
polynomial identities have to be checked without rounding.

Real polynomials produced by :func:`realify` live in ``2n`` variables ordered
``X1..Xn, Y1..Yn`` where ``Zk = Xk + i*Yk``.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, ...]

PRUNE_RELATIVE = 1e-12
DEFAULT_SIZE_BUDGET = 4096


class PolySyntaxError(ValueError):
    """Raised when polynomial text does not follow the grammar."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}: {text!r}")


class DimensionError(ValueError):
    pass


class SizeBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    @staticmethod
    def of(value) -> GaussianRational:
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return GaussianRational(Fraction(value.real), Fraction(value.imag))
        return GaussianRational(Fraction(value), Fraction(0))

    def __add__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.of(other) - self

    def __mul__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.of(other)
        den = o.abs2()
        num = self * o.conjugate()
        return GaussianRational(num.re / den, num.im / den)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __eq__(self, other):
        if isinstance(other, (GaussianRational, int, Fraction, float, complex)):
            o = GaussianRational.of(other)
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self) -> GaussianRational:
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    @property
    def real(self) -> Fraction:
        return self.re

    @property
    def imag(self) -> Fraction:
        return self.im

    def __abs__(self) -> Fraction:
        """Exact modulus; only defined when it is rational."""
        root = rational_sqrt(self.abs2())
        if root is None:
            raise ValueError(f"modulus of {self} is irrational")
        return root


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Square root of a nonnegative rational, or None when irrational."""
    q = Fraction(q)
    if q < 0:
        return None
    num, den = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return None


def grlex_key(e: Exponent):
    """Sort key for the canonical (descending graded lexicographic) order."""
    return (-sum(e), tuple(-x for x in e))


def monomials_up_to(nvars: int, degree: int) -> list[Exponent]:
    """All exponents in ``nvars`` variables of total degree <= ``degree``.

    Ordered by ascending degree, then descending lex within a degree.
    """
    out: list[Exponent] = []
    for d in range(degree + 1):
        out.extend(_monomials_of_degree(nvars, d))
    return out


def _monomials_of_degree(nvars: int, d: int) -> list[Exponent]:
    if nvars == 0:
        return [()] if d == 0 else []
    if nvars == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in _monomials_of_degree(nvars - 1, d - first):
            out.append((first,) + rest)
    return out


def _is_zero(c) -> bool:
    return c == 0


def _modulus(c) -> float:
    if isinstance(c, GaussianRational):
        return abs(complex(c))
    return abs(c)


class _SparsePoly:
    """Shared machinery for :class:`ComplexPoly` and :class:`RealPoly`."""

    __slots__ = ("n", "terms", "exact")

    def __init__(self, n: int, terms: Mapping[Exponent, object] | None = None, exact: bool = False):
        self.n = int(n)
        self.exact = bool(exact)
        clean: dict[Exponent, object] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != self.n:
                raise DimensionError(f"exponent {e} has length {len(e)}, expected {self.n}")
            if any(x < 0 for x in e):
                raise DimensionError(f"negative exponent {e}")
            c = self._coerce(c)
            clean[e] = clean[e] + c if e in clean else c
        self.terms = self._prune(clean)

    # -- coefficient handling -------------------------------------------------
    def _coerce(self, c):
        raise NotImplementedError

    def _prune(self, terms: dict) -> dict:
        if self.exact:
            kept = {e: c for e, c in terms.items() if not _is_zero(c)}
        else:
            if not terms:
                return {}
            top = max(_modulus(c) for c in terms.values())
            if not math.isfinite(top):
                raise ValueError("non-finite coefficient")
            cut = PRUNE_RELATIVE * top
            kept = {e: c for e, c in terms.items() if _modulus(c) >= cut and top > 0}
            if kept and isinstance(next(iter(kept.values())), complex):
                kept = {
                    e: complex(c.real if abs(c.real) >= cut else 0.0, c.imag if abs(c.imag) >= cut else 0.0)
                    for e, c in kept.items()
                }
        return {e: kept[e] for e in sorted(kept, key=grlex_key)}

    def _new(self, terms, n=None):
        return type(self)(self.n if n is None else n, terms, exact=self.exact)

    # -- basic protocol --------------------------------------------------------
    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, _SparsePoly):
            if isinstance(other, (int, float, complex, Fraction, GaussianRational)):
                return self == self.constant(other)
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(self.terms.items())))

    def coeff(self, e: Sequence[int]):
        return self.terms.get(tuple(e), self._coerce(0))

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def exponents(self) -> list[Exponent]:
        return list(self.terms)

    def coefficients(self) -> list:
        return list(self.terms.values())

    def constant(self, value):
        return self._new({(0,) * self.n: value})

    def zero(self):
        return self._new({})

    # -- arithmetic ------------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, _SparsePoly):
            if other.n != self.n:
                raise DimensionError(f"variable counts differ: {self.n} vs {other.n}")
            return other
        return self.constant(other)

    def __add__(self, other):
        o = self._lift(other)
        acc = dict(self.terms)
        for e, c in o.terms.items():
            acc[e] = acc[e] + c if e in acc else c
        return self._new(acc)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, _SparsePoly):
            c0 = self._coerce(other)
            return self._new({e: c * c0 for e, c in self.terms.items()})
        o = self._lift(other)
        acc: dict[Exponent, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 * c2
                acc[e] = acc[e] + v if e in acc else v
        return self._new(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = self.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def compose(self, images: Sequence[_SparsePoly]):
        """Substitute ``images[k]`` for variable ``k`` (all images share a ring)."""
        if len(images) != self.n:
            raise DimensionError(f"need {self.n} images, got {len(images)}")
        if not images:
            return self
        target = images[0]
        powers: list[dict[int, _SparsePoly]] = [{0: target.constant(1)} for _ in images]

        def power(k, a):
            cache = powers[k]
            if a not in cache:
                lower = max(p for p in cache if p < a)
                value = cache[lower]
                for _ in range(a - lower):
                    value = value * images[k]
                cache[a] = value
            return cache[a]

        acc: dict[Exponent, object] = {}
        for e, c in self.terms.items():
            term = target.constant(c)
            for k, a in enumerate(e):
                if a:
                    term = term * power(k, a)
            for e2, c2 in term.terms.items():
                acc[e2] = acc[e2] + c2 if e2 in acc else c2
        return type(target)(target.n, acc, exact=target.exact)

    def evaluate(self, point: Sequence):
        if len(point) != self.n:
            raise DimensionError(f"point has length {len(point)}, expected {self.n}")
        total = 0
        for e, c in self.terms.items():
            v = c
            for x, a in zip(point, e):
                if a:
                    v = v * x**a
            total = total + v
        return total

    def to_float(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_text()!r}, n={self.n})"

    def __str__(self):
        return self.to_text()

    def to_text(self) -> str:
        raise NotImplementedError


class ComplexPoly(_SparsePoly):
    """Polynomial in ``Z1..Zn`` with complex (or Gaussian-rational) coefficients."""

    __slots__ = ()

    def _coerce(self, c):
        if self.exact:
            return GaussianRational.of(c)
        return complex(c)

    def to_float(self) -> ComplexPoly:
        return ComplexPoly(self.n, {e: complex(c) for e, c in self.terms.items()})

    def to_text(self) -> str:
        return _format_terms(self.terms, _z_names(self.n), complex_coeffs=True)

    def real_part_coeffs(self):
        return {e: c.real for e, c in self.terms.items()}


class RealPoly(_SparsePoly):
    """Polynomial with real (or rational) coefficients, usually in ``X1..Xn,Y1..Yn``."""

    __slots__ = ()

    def _coerce(self, c):
        if self.exact:
            if isinstance(c, GaussianRational):
                if c.im != 0:
                    raise TypeError("complex coefficient in RealPoly")
                return c.re
            return Fraction(c)
        if isinstance(c, complex):
            if c.imag != 0:
                raise TypeError("complex coefficient in RealPoly")
            return c.real
        return float(c)

    def to_float(self) -> RealPoly:
        return RealPoly(self.n, {e: float(c) for e, c in self.terms.items()})

    def to_text(self) -> str:
        return _format_terms(self.terms, _xy_names(self.n), complex_coeffs=False)


def _z_names(n):
    return [f"Z{k + 1}" for k in range(n)]


def _xy_names(n):
    if n % 2:
        return [f"T{k + 1}" for k in range(n)]
    h = n // 2
    return [f"X{k + 1}" for k in range(h)] + [f"Y{k + 1}" for k in range(h)]


# -- printing ---------------------------------------------------------------------


def _fmt_real(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


def _format_terms(terms: Mapping[Exponent, object], names: list[str], complex_coeffs: bool) -> str:
    if not terms:
        return "0"
    parts: list[str] = []
    for e, c in terms.items():
        mono = "*".join(
            names[k] if a == 1 else f"{names[k]}^{a}" for k, a in enumerate(e) if a
        )
        re_, im_ = (c.real, c.imag) if complex_coeffs else (c, 0)
        if im_ != 0:
            sign = "+"
            body = f"({_fmt_real(re_)}{'+' if im_ >= 0 else '-'}{_fmt_real(abs(im_))}i)"
        else:
            sign = "-" if re_ < 0 else "+"
            mag = -re_ if re_ < 0 else re_
            body = "" if (mag == 1 and mono) else _fmt_real(mag)
        if mono:
            body = f"{body}*{mono}" if body else mono
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# -- parsing ------------------------------------------------------------------------

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?(/\d+)?")
_VARIABLE = re.compile(r"([A-Z])(\d+)")


class _Parser:
    def __init__(self, text: str, letters: dict[str, int], nvars: int, exact: bool):
        self.text = text
        self.pos = 0
        self.letters = letters
        self.nvars = nvars
        self.exact = exact

    def error(self, message: str):
        raise PolySyntaxError(message, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def number(self):
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.error("expected number")
        self.pos = m.end()
        lit = m.group(0)
        if self.exact:
            return Fraction(lit)
        if "/" in lit:
            return float(Fraction(lit))
        return float(lit)

    def signed_number(self):
        sign = 1
        if self.peek() in "+-":
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        return sign * self.number()

    def coeff(self):
        if self.peek() == "(":
            self.pos += 1
            re_ = self.signed_number()
            im_ = 0
            if self.peek() in "+-":
                sign = -1 if self.text[self.pos] == "-" else 1
                self.pos += 1
                im_ = sign * self.number()
                self.take("i")
            elif self.peek() == "i":
                self.pos += 1
                re_, im_ = 0, re_
            self.take(")")
            return (re_, im_)
        return (self.number(), 0)

    def factor(self, exps: list[int]):
        self.skip()
        m = _VARIABLE.match(self.text, self.pos)
        if not m or m.group(1) not in self.letters:
            self.error("expected variable " + "/".join(sorted(self.letters)))
        index = int(m.group(2))
        half = self.nvars
        if index < 1 or index > half:
            self.error(f"variable index {index} out of range 1..{half}")
        self.pos = m.end()
        power = 1
        if self.peek() == "^":
            self.pos += 1
            self.skip()
            m2 = re.compile(r"\d+").match(self.text, self.pos)
            if not m2:
                self.error("expected exponent")
            power = int(m2.group(0))
            self.pos = m2.end()
        exps[self.letters[m.group(1)] * half + index - 1] += power

    def term(self, width: int):
        exps = [0] * width
        ch = self.peek()
        if ch == "(" or ch.isdigit() or ch == ".":
            c = self.coeff()
            if self.peek() == "*":
                self.pos += 1
                self.monomial(exps)
        else:
            c = (1, 0)
            self.monomial(exps)
        return tuple(exps), c

    def monomial(self, exps):
        self.factor(exps)
        while self.peek() == "*":
            self.pos += 1
            self.factor(exps)

    def poly(self, width: int):
        out = []
        sign = 1
        if self.peek() in "+-":
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        while True:
            e, (re_, im_) = self.term(width)
            out.append((e, sign * re_, sign * im_))
            ch = self.peek()
            if ch == "":
                return out
            if ch not in "+-":
                self.error("expected '+' or '-'")
            sign = -1 if ch == "-" else 1
            self.pos += 1


def parse_poly(text: str, n: int, exact: bool = False) -> ComplexPoly:
    """Parse a polynomial in ``Z1..Zn``.

    >>> parse_poly("Z1^2*Z2 + Z1*Z2^2 - 4*Z1*Z2 + 1", 2).total_degree()
    3
    """
    if n < 1:
        raise DimensionError("n must be positive")
    p = _Parser(text, {"Z": 0}, n, exact)
    terms: dict[Exponent, object] = {}
    for e, re_, im_ in p.poly(n):
        c = GaussianRational(Fraction(re_), Fraction(im_)) if exact else complex(re_, im_)
        terms[e] = terms[e] + c if e in terms else c
    return ComplexPoly(n, terms, exact=exact)


def parse_real_poly(text: str, n: int, exact: bool = False) -> RealPoly:
    """Parse a polynomial in ``X1..Xn, Y1..Yn`` (``2n`` real variables)."""
    p = _Parser(text, {"X": 0, "Y": 1}, n, exact)
    terms: dict[Exponent, object] = {}
    for e, re_, im_ in p.poly(2 * n):
        if im_ != 0:
            raise PolySyntaxError("complex coefficient in real polynomial", text, p.pos)
        c = Fraction(re_) if exact else float(re_)
        terms[e] = terms[e] + c if e in terms else c
    return RealPoly(2 * n, terms, exact=exact)


def infer_nvars(text: str) -> int:
    """Largest variable index occurring in polynomial text (at least 1)."""
    return max([int(m.group(2)) for m in _VARIABLE.finditer(text)] or [1])


# -- realification and substitutions ----------------------------------------------


def _unit(exact: bool, imaginary: bool = False):
    if exact:
        return GaussianRational(Fraction(0), Fraction(1)) if imaginary else GaussianRational(Fraction(1))
    return 1j if imaginary else 1.0


def _linear_images(n: int, exact: bool, squared_real: bool = False) -> list[ComplexPoly]:
    """Images of ``Zk`` as ``Xk + i*Yk`` (or ``Xk^2 + i*Yk``) in 2n variables."""
    images = []
    for k in range(n):
        ex = [0] * (2 * n)
        ey = [0] * (2 * n)
        ex[k] = 2 if squared_real else 1
        ey[n + k] = 1
        images.append(
            ComplexPoly(2 * n, {tuple(ex): _unit(exact), tuple(ey): _unit(exact, True)}, exact=exact)
        )
    return images


def split_complex(g: ComplexPoly) -> tuple[RealPoly, RealPoly]:
    """Real and imaginary coefficient parts of a complex polynomial."""
    re_ = {e: c.real for e, c in g.terms.items()}
    im_ = {e: c.imag for e, c in g.terms.items()}
    return RealPoly(g.n, re_, exact=g.exact), RealPoly(g.n, im_, exact=g.exact)


def realify(f: ComplexPoly) -> tuple[RealPoly, RealPoly]:
    """Split ``f(X + iY)`` into ``(f_re, f_im)`` over ``X1..Xn, Y1..Yn``."""
    return split_complex(f.compose(_linear_images(f.n, f.exact)))


def realify_squared(f: ComplexPoly) -> tuple[RealPoly, RealPoly]:
    """Real/imaginary parts of ``f(X1^2 + iY1, ..., Xn^2 + iYn)``."""
    return split_complex(f.compose(_linear_images(f.n, f.exact, squared_real=True)))


def scale_substitute(f: ComplexPoly, lam: Sequence) -> ComplexPoly:
    """``f(lam1*Z1, ..., lamn*Zn)``: coefficient of ``Z^a`` becomes ``b_a * lam^a``."""
    if len(lam) != f.n:
        raise DimensionError("scaling vector has wrong length")
    if any(not (x > 0) for x in lam):
        raise ValueError("scaling entries must be positive")
    if f.exact:
        lam = [Fraction(x) for x in lam]
    out = {}
    for e, c in f.terms.items():
        w = 1
        for x, a in zip(lam, e):
            w = w * x**a
        out[e] = c * w
    return ComplexPoly(f.n, out, exact=f.exact)


def phase_substitute(f: ComplexPoly, mu: Sequence[float]) -> ComplexPoly:
    """``f(Z1 e^{i mu1}, ..., Zn e^{i mun})``."""
    if len(mu) != f.n:
        raise DimensionError("angle vector has wrong length")
    if f.exact:
        raise TypeError("phase substitution needs floating coefficients")
    out = {}
    for e, c in f.terms.items():
        out[e] = c * cmath.exp(1j * sum(a * m for a, m in zip(e, mu)))
    return ComplexPoly(f.n, out)


def cyclic_product(f: ComplexPoly, r: int, budget: int = DEFAULT_SIZE_BUDGET) -> ComplexPoly:
    """Product of ``f`` over all coordinatewise r-th root of unity rotations."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if r == 1:
        return f
    if r**f.n * len(f) > budget:
        raise SizeBudgetError(f"r^n * terms = {r ** f.n * len(f)} exceeds budget {budget}")
    result = None
    for ks in product(range(r), repeat=f.n):
        rotated = phase_substitute(f, [2 * math.pi * k / r for k in ks])
        result = rotated if result is None else result * rotated
    # The product is invariant under each rotation, so only exponents that are
    # multiples of r survive; anything else is rounding noise.
    kept = {e: c for e, c in result.terms.items() if all(a % r == 0 for a in e)}
    return ComplexPoly(f.n, kept)


def monomial_pullback(f: ComplexPoly, gamma: Sequence[Sequence[int]]) -> ComplexPoly:
    """Replace ``Zi`` by the monomial with exponent column ``gamma[i]``."""
    if len(gamma) != f.n:
        raise DimensionError(f"map has {len(gamma)} columns, polynomial has {f.n} variables")
    widths = {len(col) for col in gamma}
    if len(widths) != 1:
        raise DimensionError("map columns differ in length")
    N = widths.pop()
    if any(x < 0 for col in gamma for x in col):
        raise DimensionError("negative exponents are not supported")
    out: dict[Exponent, object] = {}
    for e, c in f.terms.items():
        new = tuple(sum(a * gamma[i][j] for i, a in enumerate(e)) for j in range(N))
        out[new] = out[new] + c if new in out else c
    return ComplexPoly(N, out, exact=f.exact)


def evaluate(f: _SparsePoly, z: Sequence):
    return f.evaluate(z)


# -- Newton support -----------------------------------------------------------------


@dataclass(frozen=True)
class NewtonSupport:
    points: frozenset
    hull: tuple[Exponent, ...]


def convex_hull_2d(points: Iterable[Sequence[int]]) -> list[Exponent]:
    """Counterclockwise strictly convex hull (Andrew's monotone chain)."""
    pts = sorted({tuple(p) for p in points})
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def newton_support(f: ComplexPoly) -> NewtonSupport:
    if f.n > 2:
        raise DimensionError("Newton hull is only supported for n <= 2")
    pts = [e if f.n == 2 else (e[0], 0) for e in f.exponents()]
    return NewtonSupport(frozenset(f.exponents()), tuple(convex_hull_2d(pts)))


def twice_hull_area(hull: Sequence[Sequence[int]]) -> int:
    """Twice the polygon area by the shoelace formula (an exact integer)."""
    if len(hull) < 3:
        return 0
    s = 0
    for (x0, y0), (x1, y1) in zip(hull, list(hull[1:]) + [hull[0]]):
        s += x0 * y1 - x1 * y0
    return abs(s)


def coamoeba_component_bound(f: ComplexPoly) -> int:
    """``2! * area(New f)`` for bivariate ``f``, a bound on coamoeba complement components."""
    if f.n != 2:
        raise DimensionError("component bound is only implemented for n = 2")
    return twice_hull_area(newton_support(f).hull)
