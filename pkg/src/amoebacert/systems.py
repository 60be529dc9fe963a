"""Real generator systems whose common real zeros encode a membership query.

Three constructions are provided:

* ``AMOEBA_STANDARD``: real and imaginary parts of every input polynomial plus
  one circle ``Xk^2 + Yk^2 - lam_k^2`` per coordinate.
* ``AMOEBA_MONOMIAL``: real/imaginary parts of a single polynomial plus one
  modulus equation ``|m_j|^2 - mu_j^2`` per term, ``mu_j = lam^alpha(j)``.
* ``COAMOEBA``: parts of ``f(X^2 + iY)`` after rotating by the query angles,
  plus the linear polynomials ``Yj``.

A fourth kind, ``SPHERE_EXCLUSION``, is used by the diameter search.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polycore import (
    ComplexPoly,
    DimensionError,
    RealPoly,
    phase_substitute,
    realify,
    realify_squared,
    scale_substitute,
)


class SystemKind(enum.Enum):
    AMOEBA_STANDARD = "amoeba-standard"
    AMOEBA_MONOMIAL = "amoeba-monomial"
    COAMOEBA = "coamoeba"
    SPHERE_EXCLUSION = "sphere-exclusion"


class SpanningError(ValueError):
    """The exponent vectors of a polynomial do not span R^n."""


@dataclass(frozen=True)
class GeneratorSystem:
    kind: SystemKind
    generators: tuple[RealPoly, ...]
    point: tuple
    normalized: bool
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def nvars(self) -> int:
        return self.generators[0].n

    @property
    def degrees(self) -> list[int]:
        return [g.total_degree() for g in self.generators]

    def evaluate(self, x: Sequence[float]) -> np.ndarray:
        return np.array([complex(g.to_float().evaluate(x)).real for g in self.generators])


def _check_positive(lam):
    if any(not (x > 0) for x in lam):
        raise ValueError(f"point must be strictly positive, got {tuple(lam)}")


def _circle(n: int, k: int, radius_sq, exact: bool) -> RealPoly:
    ex = [0] * (2 * n)
    ey = [0] * (2 * n)
    ex[k] = 2
    ey[n + k] = 2
    return RealPoly(2 * n, {tuple(ex): 1, tuple(ey): 1, (0,) * (2 * n): -radius_sq}, exact=exact)


def _modulus_sq(e, exact: bool) -> RealPoly:
    """``(m^re)^2 + (m^im)^2`` for the monomial ``Z^e``."""
    one = 1 if not exact else Fraction(1)
    m = ComplexPoly(len(e), {tuple(e): one}, exact=exact)
    re_, im_ = realify(m)
    return re_ * re_ + im_ * im_


def amoeba_generators(
    fs: Sequence[ComplexPoly], lam: Sequence, normalize: bool = True
) -> GeneratorSystem:
    """Standard system for the unlog-amoeba query at ``lam``."""
    fs = list(fs)
    if not fs:
        raise ValueError("need at least one polynomial")
    n = fs[0].n
    if any(f.n != n for f in fs):
        raise DimensionError("polynomials live in different rings")
    if len(lam) != n:
        raise DimensionError(f"point has length {len(lam)}, expected {n}")
    _check_positive(lam)
    exact = fs[0].exact
    if exact:
        lam = tuple(Fraction(x) for x in lam)
    gens: list[RealPoly] = []
    for f in fs:
        g = scale_substitute(f, lam) if normalize else f
        gens.extend(realify(g))
    for k in range(n):
        gens.append(_circle(n, k, 1 if normalize else lam[k] ** 2, exact))
    return GeneratorSystem(
        SystemKind.AMOEBA_STANDARD,
        tuple(gens),
        tuple(lam),
        normalize,
        {"sources": [str(f) for f in fs]},
    )


def exponent_rank(f: ComplexPoly) -> int:
    if not f.terms:
        return 0
    return int(np.linalg.matrix_rank(np.array(f.exponents(), dtype=float)))


def monomial_generators(
    f: ComplexPoly, lam: Sequence, normalize: bool = False, require_span: bool = True
) -> GeneratorSystem:
    """Monomial-based system: parts of ``f`` plus ``|m_j|^2 - mu_j^2`` per term."""
    if len(lam) != f.n:
        raise DimensionError(f"point has length {len(lam)}, expected {f.n}")
    _check_positive(lam)
    if require_span and exponent_rank(f) < f.n:
        raise SpanningError(f"exponent vectors of {f} span rank {exponent_rank(f)} < {f.n}")
    exact = f.exact
    if exact:
        lam = tuple(Fraction(x) for x in lam)
    g = scale_substitute(f, lam) if normalize else f
    gens = list(realify(g))
    for e in g.exponents():
        if normalize:
            mu = 1
        else:
            mu = 1
            for x, a in zip(lam, e):
                mu = mu * x**a
        gens.append(_modulus_sq(e, exact) - mu * mu)
    return GeneratorSystem(
        SystemKind.AMOEBA_MONOMIAL,
        tuple(gens),
        tuple(lam),
        normalize,
        {"sources": [str(f)], "exponents": g.exponents()},
    )


def monomial_moduli(f: ComplexPoly, lam: Sequence) -> list[float]:
    """``mu_j = lam^alpha(j)`` in canonical term order."""
    out = []
    for e in f.exponents():
        v = 1.0
        for x, a in zip(lam, e):
            v *= float(x) ** a
        out.append(v)
    return out


def coamoeba_generators(fs: Sequence[ComplexPoly], mu: Sequence[float]) -> GeneratorSystem:
    """System whose real infeasibility is equivalent to ``mu`` lying outside ``C'_I``."""
    fs = list(fs)
    n = fs[0].n
    if len(mu) != n:
        raise DimensionError(f"angle vector has length {len(mu)}, expected {n}")
    gens: list[RealPoly] = []
    for f in fs:
        rotated = phase_substitute(f.to_float(), mu)
        gens.extend(realify_squared(rotated))
    for j in range(n):
        e = [0] * (2 * n)
        e[n + j] = 1
        gens.append(RealPoly(2 * n, {tuple(e): 1.0}))
    return GeneratorSystem(
        SystemKind.COAMOEBA, tuple(gens), tuple(float(m) for m in mu), False,
        {"sources": [str(f) for f in fs]},
    )


def sphere_generators(f: ComplexPoly, delta: Sequence[float], d: float) -> GeneratorSystem:
    """Sphere-exclusion system ``{sum_i (|delta_i|^2 - |Z_i|^2)^2 - d^2/4, f_re, f_im}``.

    Real infeasibility means no variety point has squared moduli on the sphere
    of radius ``d/2`` around ``(|delta_i|^2)``.
    """
    n = f.n
    if len(delta) != n:
        raise DimensionError("delta has wrong length")
    f = f.to_float()
    s1 = RealPoly(2 * n, {})
    for i in range(n):
        circle = _circle(n, i, float(delta[i]) ** 2, False)
        s1 = s1 + circle * circle
    s1 = s1 - d * d / 4.0
    re_, im_ = realify(f)
    return GeneratorSystem(
        SystemKind.SPHERE_EXCLUSION,
        (s1, re_, im_),
        tuple(float(x) for x in delta),
        False,
        {"sources": [str(f)], "diameter": d},
    )
