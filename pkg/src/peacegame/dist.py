"""Continuous type distributions with piecewise polynomial CDFs.

Every equilibrium formula in the package reduces to integrals of the form
``∫ ds / F⁻¹(s)`` over some probability range.  Substituting ``s = F(v)``
turns them into ``∫ f(v) / v dv``, which has a closed-form antiderivative for
polynomial pieces, so these integrals are evaluated exactly rather than by
quadrature.  An integral that reaches ``v = 0`` with a positive density there
diverges and is reported as ``math.inf``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateSupportError, DomainError

#: Agreement required between adjacent pieces and at the support endpoints.
CONTINUITY_TOL = 1e-12

# Short intervals are integrated by Gauss-Legendre instead of differencing the
# antiderivative, which would cancel catastrophically.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)
_SHORT = 0.05


def _horner(coeffs: Sequence[float], v: float) -> float:
    acc = 0.0
    for a in reversed(coeffs):
        acc = acc * v + a
    return acc


def _trim(coeffs: Iterable[float]) -> tuple[float, ...]:
    out = [float(a) for a in coeffs]
    while len(out) > 1 and out[-1] == 0.0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class Piece:
    """One CDF segment: ``F(v) = sum(coeffs[k] * v**k)`` on ``[lo, hi]``."""

    lo: float
    hi: float
    coeffs: tuple[float, ...]

    def value(self, v: float) -> float:
        return _horner(self.coeffs, v)

    def density(self, v: float) -> float:
        return _horner([k * a for k, a in enumerate(self.coeffs)][1:], v)

    @property
    def density_at_zero(self) -> float:
        return self.coeffs[1] if len(self.coeffs) > 1 else 0.0

    def _recip_antiderivative(self, v: float) -> float:
        # d/dv of this is f(v)/v with f = sum k a_k v^(k-1).
        total = self.density_at_zero * math.log(v) if self.density_at_zero else 0.0
        for k in range(2, len(self.coeffs)):
            total += k * self.coeffs[k] * v ** (k - 1) / (k - 1)
        return total

    def recip_integral(self, u: float, w: float) -> float:
        """``∫_u^w f(v)/v dv`` for ``lo <= u <= w <= hi``."""
        if w <= u:
            return 0.0
        if u == 0.0:
            if self.density_at_zero > 0.0:
                return math.inf
            # f(v)/v is a polynomial here (no 1/v term).
            return self._recip_antiderivative(w) - self._recip_antiderivative_at_zero()
        if w - u <= _SHORT * u:
            half, mid = 0.5 * (w - u), 0.5 * (w + u)
            nodes = mid + half * _GL_NODES
            return half * float(
                sum(wt * self.density(float(t)) / float(t) for wt, t in zip(_GL_WEIGHTS, nodes))
            )
        return self._recip_antiderivative(w) - self._recip_antiderivative(u)

    def _recip_antiderivative_at_zero(self) -> float:
        return 0.0

    def mass(self, u: float, w: float) -> float:
        """``F(w) - F(u)`` inside this piece, without cancellation for short spans."""
        if w <= u:
            return 0.0
        if w - u <= _SHORT * max(abs(u), abs(w)):
            half, mid = 0.5 * (w - u), 0.5 * (w + u)
            nodes = mid + half * _GL_NODES
            return half * float(sum(wt * self.density(float(t)) for wt, t in zip(_GL_WEIGHTS, nodes)))
        return self.value(w) - self.value(u)

    def solve(self, target: float) -> float:
        """The ``v`` in ``[lo, hi]`` with ``value(v) == target``."""
        c = self.coeffs
        deg = len(c) - 1
        if deg == 1:
            v = (target - c[0]) / c[1]
        elif deg == 2:
            a, b, k = c[2], c[1], c[0] - target
            disc = max(b * b - 4.0 * a * k, 0.0)
            q = -0.5 * (b + math.copysign(math.sqrt(disc), b if b != 0.0 else 1.0))
            cands = [r for r in ((q / a) if a else math.nan, (k / q) if q else 0.0)]
            inside = [r for r in cands if self.lo - 1e-9 <= r <= self.hi + 1e-9]
            v = inside[0] if inside else self._bracketed(target)
        else:
            v = self._bracketed(target)
        return min(max(v, self.lo), self.hi)

    def _bracketed(self, target: float) -> float:
        g = lambda v: self.value(v) - target  # noqa: E731
        if g(self.lo) >= 0.0:
            return self.lo
        if g(self.hi) <= 0.0:
            return self.hi
        return brentq(g, self.lo, self.hi, xtol=1e-12, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class Dist:
    """An atomless distribution on ``[support_lo, support_hi]``.

    The CDF is continuous and strictly increasing on the support; each piece
    carries polynomial coefficients in ``v`` (not shifted to the piece start).
    """

    pieces: tuple[Piece, ...]
    _knots: list = field(init=False, repr=False, compare=False)
    _levels: list = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        pieces = tuple(
            p if isinstance(p, Piece) else Piece(float(p[0]), float(p[1]), _trim(p[2]))
            for p in self.pieces
        )
        object.__setattr__(self, "pieces", pieces)
        if not pieces:
            raise DegenerateSupportError("a distribution needs at least one piece")
        for p in pieces:
            if not p.hi > p.lo:
                raise DegenerateSupportError(f"piece [{p.lo}, {p.hi}] is empty")
            if not math.isfinite(p.lo) or not math.isfinite(p.hi):
                raise DomainError("supports must be bounded")
        if pieces[0].lo < 0.0:
            raise DomainError("valuations must be nonnegative")
        for left, right in zip(pieces, pieces[1:]):
            if abs(left.hi - right.lo) > CONTINUITY_TOL * max(1.0, abs(left.hi)):
                raise DomainError(f"pieces leave a gap between {left.hi} and {right.lo}")
            if abs(left.value(left.hi) - right.value(right.lo)) > CONTINUITY_TOL:
                raise DomainError(f"CDF jumps at v={right.lo}")
        if abs(pieces[0].value(pieces[0].lo)) > CONTINUITY_TOL:
            raise DomainError("CDF must be 0 at the support infimum")
        if abs(pieces[-1].value(pieces[-1].hi) - 1.0) > CONTINUITY_TOL:
            raise DomainError("CDF must be 1 at the support supremum")
        for p in pieces:
            for v in np.linspace(p.lo, p.hi, 17):
                if p.density(float(v)) < -CONTINUITY_TOL:
                    raise DomainError(f"negative density at v={float(v)}")
            if not p.value(p.hi) > p.value(p.lo):
                raise DomainError(f"CDF is flat on [{p.lo}, {p.hi}]")
        object.__setattr__(self, "_knots", [p.lo for p in pieces] + [pieces[-1].hi])
        levels = [0.0] + [p.value(p.hi) for p in pieces[:-1]] + [1.0]
        object.__setattr__(self, "_levels", levels)

    # -- construction ---------------------------------------------------

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "Dist":
        lo, hi = float(lo), float(hi)
        if not hi > lo:
            raise DegenerateSupportError(f"uniform[{lo}, {hi}] is degenerate")
        w = hi - lo
        return cls((Piece(lo, hi, (-lo / w, 1.0 / w)),))

    @classmethod
    def piecewise(cls, pieces: Iterable[Any]) -> "Dist":
        """Build from ``(lo, hi, coeffs)`` triples or ``{"lo","hi","coeffs"}`` dicts."""
        out = []
        for p in pieces:
            if isinstance(p, dict):
                out.append(Piece(float(p["lo"]), float(p["hi"]), _trim(p["coeffs"])))
            else:
                lo, hi, coeffs = p
                out.append(Piece(float(lo), float(hi), _trim(coeffs)))
        return cls(tuple(out))

    @classmethod
    def from_literal(cls, lit: dict) -> "Dist":
        """Parse ``{"kind": "uniform", ...}`` or ``{"kind": "piecewise", ...}``."""
        if not isinstance(lit, dict):
            raise DomainError("distribution literal must be an object")
        kind = lit.get("kind")
        if kind == "uniform":
            extra = set(lit) - {"kind", "lo", "hi"}
            if extra:
                raise DomainError(f"unknown keys in uniform literal: {sorted(extra)}")
            return cls.uniform(lit["lo"], lit["hi"])
        if kind == "piecewise":
            extra = set(lit) - {"kind", "pieces"}
            if extra:
                raise DomainError(f"unknown keys in piecewise literal: {sorted(extra)}")
            for p in lit["pieces"]:
                bad = set(p) - {"lo", "hi", "coeffs"}
                if bad:
                    raise DomainError(f"unknown keys in piece: {sorted(bad)}")
            return cls.piecewise(lit["pieces"])
        raise DomainError(f"unknown distribution kind {kind!r}")

    def to_literal(self) -> dict:
        return {
            "kind": "piecewise",
            "pieces": [{"lo": p.lo, "hi": p.hi, "coeffs": list(p.coeffs)} for p in self.pieces],
        }

    # -- basic functions ------------------------------------------------

    @property
    def support_lo(self) -> float:
        return self.pieces[0].lo

    @property
    def support_hi(self) -> float:
        return self.pieces[-1].hi

    def _piece_at(self, v: float) -> int:
        i = bisect.bisect_right(self._knots, v) - 1
        return min(max(i, 0), len(self.pieces) - 1)

    def cdf(self, v: float) -> float:
        """``F(v)``, clamped to 0 below and 1 above the support."""
        if v <= self.support_lo:
            return 0.0
        if v >= self.support_hi:
            return 1.0
        return min(max(self.pieces[self._piece_at(v)].value(v), 0.0), 1.0)

    def pdf(self, v: float) -> float:
        if v < self.support_lo or v > self.support_hi:
            return 0.0
        return self.pieces[self._piece_at(v)].density(v)

    def quantile(self, p: float) -> float:
        """Generalized inverse: the smallest ``v`` in the support with ``F(v) >= p``."""
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"probability {p} outside [0, 1]")
        if p == 0.0:
            return self.support_lo
        if p == 1.0:
            return self.support_hi
        i = bisect.bisect_left(self._levels, p) - 1
        i = min(max(i, 0), len(self.pieces) - 1)
        return self.pieces[i].solve(p)

    def mass(self, u: float, w: float) -> float:
        """``F(w) - F(u)`` for ``u <= w``, accurate when the interval is short."""
        u, w = max(u, self.support_lo), min(w, self.support_hi)
        total = 0.0
        for p in self.pieces:
            a, b = max(u, p.lo), min(w, p.hi)
            if b > a:
                total += p.mass(a, b)
        return total

    # -- reciprocal integrals ---------------------------------------------

    def recip_integral(self, u: float, w: float) -> float:
        """``∫_u^w f(v)/v dv`` over the part of ``[u, w]`` inside the support.

        Equals ``∫ ds / F⁻¹(s)`` over ``s`` in ``[F(u), F(w)]``.  Returns
        ``math.inf`` when the range starts at ``v = 0`` with positive density.
        """
        u, w = max(u, self.support_lo), min(w, self.support_hi)
        total = 0.0
        for p in self.pieces:
            a, b = max(u, p.lo), min(w, p.hi)
            if b > a:
                total += p.recip_integral(a, b)
        return total

    def recip_quantile_integral(self, c_lo: float, c_hi: float) -> float:
        """``∫_{c_lo}^{c_hi} ds / F⁻¹(s)``; ``math.inf`` when it diverges."""
        if not 0.0 <= c_lo <= c_hi <= 1.0:
            raise DomainError(f"need 0 <= c_lo <= c_hi <= 1, got {c_lo}, {c_hi}")
        if c_hi == c_lo:
            return 0.0
        return self.recip_integral(self.quantile(c_lo), self.quantile(c_hi))

    def recip_integral_above(self, x: float) -> float:
        """``∫_0^1 ds / Q(s)`` where ``Q`` is the quantile of ``v`` given ``v >= x``.

        Decreasing in ``x``; finite whenever ``x > 0``.
        """
        if not self.support_lo <= x < self.support_hi:
            raise DegenerateSupportError(
                f"cannot condition on v >= {x} for support [{self.support_lo}, {self.support_hi}]"
            )
        tail = self.mass(x, self.support_hi)
        return self.recip_integral(x, self.support_hi) / tail

    def recip_integral_below(self, x: float, c: float = 0.0) -> float:
        """``∫_c^1 ds / Q(s)`` where ``Q`` is the quantile of ``v`` given ``v <= x``."""
        if not self.support_lo < x <= self.support_hi:
            raise DegenerateSupportError(f"cannot condition on v <= {x}")
        if not 0.0 <= c <= 1.0:
            raise DomainError(f"probability {c} outside [0, 1]")
        head = self.mass(self.support_lo, x)
        if head <= 0.0:
            raise DegenerateSupportError(f"no mass below {x}")
        start = self.quantile(min(c * head, 1.0)) if c > 0.0 else self.support_lo
        return self.recip_integral(start, x) / head

    # -- truncations ----------------------------------------------------

    def truncate_below(self, x: float) -> "Dist":
        """The distribution of ``v`` conditional on ``v >= x``."""
        if x >= self.support_hi:
            raise DegenerateSupportError(f"truncation at {x} leaves no support")
        if x <= self.support_lo:
            return self
        fx = self.cdf(x)
        tail = self.mass(x, self.support_hi)
        out = []
        for p in self.pieces:
            if p.hi <= x:
                continue
            lo = max(p.lo, x)
            coeffs = [a / tail for a in p.coeffs]
            coeffs[0] = (p.coeffs[0] - fx) / tail
            out.append(Piece(lo, p.hi, _trim(coeffs)))
        return _renormalized(out)

    def truncate_above(self, x: float) -> "Dist":
        """The distribution of ``v`` conditional on ``v <= x``."""
        if x <= self.support_lo:
            raise DegenerateSupportError(f"truncation at {x} leaves no support")
        if x >= self.support_hi:
            return self
        head = self.mass(self.support_lo, x)
        if head <= 0.0:
            raise DegenerateSupportError(f"no mass below {x}")
        out = []
        for p in self.pieces:
            if p.lo >= x:
                continue
            out.append(Piece(p.lo, min(p.hi, x), _trim(a / head for a in p.coeffs)))
        return _renormalized(out)


def _renormalized(pieces: list[Piece]) -> Dist:
    # Rounding in the truncation can leave the endpoint values a few ulps off
    # 0 and 1; shift the constant terms so the endpoint checks hold exactly.
    first, last = pieces[0], pieces[-1]
    c0 = list(first.coeffs)
    c0[0] -= first.value(first.lo)
    pieces[0] = Piece(first.lo, first.hi, tuple(c0))
    if len(pieces) == 1:
        last = pieces[0]
    drift = last.value(last.hi) - 1.0
    if abs(drift) > 0.0 and len(pieces) > 1:
        cl = list(last.coeffs)
        cl[0] -= drift
        pieces[-1] = Piece(last.lo, last.hi, tuple(cl))
    elif abs(drift) > 0.0:
        # Single piece: rescale the non-constant part so F(hi) == 1 and F(lo) stays 0.
        p = pieces[0]
        span = p.value(p.hi) - p.value(p.lo)
        scaled = [a / span for a in p.coeffs]
        scaled[0] = p.coeffs[0] / span - p.value(p.lo) / span
        pieces[0] = Piece(p.lo, p.hi, tuple(scaled))
    return Dist(tuple(pieces))
