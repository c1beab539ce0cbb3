"""Truncated mixed Taylor-polynomial (jet) arithmetic.

A jet stores the Taylor coefficients of a scalar field f(x, y) around a base
point of the slit tangent bundle, with x-multi-indices up to total order kx
and y-multi-indices up to total order ky (rectangular cap: |alpha| <= kx AND
|beta| <= ky).  Sums, products, quotients, square roots and rational powers
are exact on the truncated algebra, so extracted mixed partial derivatives
carry no step-size error.  All higher-level curvature computations are built
on this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class JetError(ValueError):
    """Base class for jet arithmetic failures."""


class JetSpecError(JetError):
    """Requested order exceeds the jet's truncation spec, or specs clash."""


class JetBaseMismatch(JetError):
    """Binary operation between jets anchored at different base points."""


class JetDomainError(JetError):
    """Division by a zero-valued jet or sqrt/power of a non-positive one."""


def multi_indices(dim: int, max_order: int) -> list[tuple[int, ...]]:
    """All multi-indices of `dim` variables with total order <= max_order.

    Graded order (by total degree, lexicographic within a degree), so the
    indices of any lower cap form a prefix of the list.  That prefix property
    is what makes truncation a plain array slice.
    """
    out: list[tuple[int, ...]] = []
    for degree in range(max_order + 1):
        out.extend(_compositions(dim, degree))
    return out


def _compositions(dim: int, total: int) -> list[tuple[int, ...]]:
    if dim == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        for rest in _compositions(dim - 1, total - first):
            out.append((first,) + rest)
    return out


@dataclass(frozen=True)
class JetSpec:
    """Truncation budget: chart dimension plus max x- and y-orders."""

    dim: int
    kx: int
    ky: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise JetSpecError(f"dimension must be >= 1, got {self.dim}")
        if self.kx < 0 or self.ky < 0:
            raise JetSpecError(f"orders must be >= 0, got kx={self.kx} ky={self.ky}")

    def meet(self, other: "JetSpec") -> "JetSpec":
        if self.dim != other.dim:
            raise JetSpecError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return JetSpec(self.dim, min(self.kx, other.kx), min(self.ky, other.ky))

    def covers(self, other: "JetSpec") -> bool:
        return self.dim == other.dim and self.kx >= other.kx and self.ky >= other.ky

    @property
    def nx(self) -> int:
        return _tables(self).nx

    @property
    def ny(self) -> int:
        return _tables(self).ny


def _axis_triples(indices, rank, cap):
    """(ia, ib, iout) for all pairs of multi-indices whose sum stays under the
    cap: the graded convolution structure of one variable group."""
    ia, ib, io = [], [], []
    for i, a in enumerate(indices):
        for j, b in enumerate(indices):
            s = tuple(p + q for p, q in zip(a, b))
            if sum(s) <= cap:
                ia.append(i)
                ib.append(j)
                io.append(rank[s])
    return np.asarray(ia), np.asarray(ib), np.asarray(io)


class _SpecTables:
    """Precomputed index machinery for one spec: rank maps, flattened product
    triples, differentiation gathers.  Cached per spec via `_tables`."""

    def __init__(self, spec: JetSpec):
        self.spec = spec
        self.x_indices = multi_indices(spec.dim, spec.kx)
        self.y_indices = multi_indices(spec.dim, spec.ky)
        self.x_rank = {mi: r for r, mi in enumerate(self.x_indices)}
        self.y_rank = {mi: r for r, mi in enumerate(self.y_indices)}
        self.nx = len(self.x_indices)
        self.ny = len(self.y_indices)

        xa, xb, xo = _axis_triples(self.x_indices, self.x_rank, spec.kx)
        ya, yb, yo = _axis_triples(self.y_indices, self.y_rank, spec.ky)
        # Flat (row-major) combined triples: the bivariate graded convolution
        # is the tensor product of the per-group structures.
        self.mul_a = (xa[:, None] * self.ny + ya[None, :]).ravel()
        self.mul_b = (xb[:, None] * self.ny + yb[None, :]).ravel()
        self.mul_o = (xo[:, None] * self.ny + yo[None, :]).ravel()

        # factorial(alpha) * factorial(beta) per slot, for partial extraction
        self.x_fact = np.array([_mi_factorial(a) for a in self.x_indices], dtype=float)
        self.y_fact = np.array([_mi_factorial(b) for b in self.y_indices], dtype=float)

        # d/dx_i: rows of the (kx-1, ky) spec gather from rank(alpha + e_i)
        # with multiplier alpha_i + 1; same for d/dy_i on columns.
        self.dx_maps = [self._diff_map(self.x_indices, self.x_rank, spec.kx, i)
                        for i in range(spec.dim)]
        self.dy_maps = [self._diff_map(self.y_indices, self.y_rank, spec.ky, i)
                        for i in range(spec.dim)]

    @staticmethod
    def _diff_map(indices, rank, cap, i):
        src, fac = [], []
        for mi in indices:
            if sum(mi) > cap - 1:
                break  # graded order: shorter caps are prefixes
            up = list(mi)
            up[i] += 1
            src.append(rank[tuple(up)])
            fac.append(mi[i] + 1)
        return np.asarray(src), np.asarray(fac, dtype=float)


@lru_cache(maxsize=None)
def _tables(spec: JetSpec) -> _SpecTables:
    return _SpecTables(spec)


def _mi_factorial(mi: tuple[int, ...]) -> int:
    out = 1
    for p in mi:
        out *= math.factorial(p)
    return out


def _binomial_series(r: float, nterms: int) -> list[float]:
    """Coefficients of (1+u)^r up to u^(nterms-1)."""
    coeffs = [1.0]
    for k in range(1, nterms):
        coeffs.append(coeffs[-1] * (r - (k - 1)) / k)
    return coeffs


class Jet:
    """Truncated Taylor expansion of a scalar field at one base point.

    Coefficient layout: 2-D array `c[ix, iy]` over the graded multi-index
    lists of the spec; `c[ix, iy]` is the mixed partial divided by
    alpha! * beta!.  Jets are immutable by convention: operations return new
    instances and never mutate `c` in place.
    """

    __slots__ = ("spec", "x0", "y0", "c")

    def __init__(self, spec: JetSpec, x0, y0, coeffs: np.ndarray):
        self.spec = spec
        self.x0 = tuple(float(v) for v in x0)
        self.y0 = tuple(float(v) for v in y0)
        self.c = coeffs

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(spec: JetSpec, x0, y0, value: float) -> "Jet":
        t = _tables(spec)
        c = np.zeros((t.nx, t.ny))
        c[0, 0] = value
        return Jet(spec, x0, y0, c)

    # -- basics ------------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.c[0, 0])

    def partial(self, alpha, beta) -> float:
        """Mixed partial d^alpha_x d^beta_y f at the base point."""
        alpha = tuple(int(a) for a in alpha)
        beta = tuple(int(b) for b in beta)
        t = _tables(self.spec)
        if len(alpha) != self.spec.dim or len(beta) != self.spec.dim:
            raise JetSpecError("multi-index length does not match dimension")
        if any(a < 0 for a in alpha) or any(b < 0 for b in beta):
            raise JetSpecError("multi-index entries must be >= 0")
        if sum(alpha) > self.spec.kx or sum(beta) > self.spec.ky:
            raise JetSpecError(
                f"order ({sum(alpha)},{sum(beta)}) exceeds spec "
                f"({self.spec.kx},{self.spec.ky})")
        ix = t.x_rank[alpha]
        iy = t.y_rank[beta]
        return float(self.c[ix, iy]) * _mi_factorial(alpha) * _mi_factorial(beta)

    def truncate(self, spec: JetSpec) -> "Jet":
        if spec == self.spec:
            return self
        if not self.spec.covers(spec):
            raise JetSpecError(f"cannot truncate {self.spec} to larger {spec}")
        return Jet(spec, self.x0, self.y0, self.c[:spec.nx, :spec.ny])

    def same_base(self, other: "Jet") -> bool:
        return self.x0 == other.x0 and self.y0 == other.y0

    # -- differentiation ---------------------------------------------------

    def dx(self, i: int) -> "Jet":
        """Jet of df/dx_i; x-order budget drops by one."""
        if self.spec.kx < 1:
            raise JetSpecError("no x-order budget left to differentiate")
        self._check_axis(i)
        sub = JetSpec(self.spec.dim, self.spec.kx - 1, self.spec.ky)
        src, fac = _tables(self.spec).dx_maps[i]
        return Jet(sub, self.x0, self.y0, self.c[src, :] * fac[:, None])

    def dy(self, i: int) -> "Jet":
        """Jet of df/dy_i; y-order budget drops by one."""
        if self.spec.ky < 1:
            raise JetSpecError("no y-order budget left to differentiate")
        self._check_axis(i)
        sub = JetSpec(self.spec.dim, self.spec.kx, self.spec.ky - 1)
        src, fac = _tables(self.spec).dy_maps[i]
        return Jet(sub, self.x0, self.y0, self.c[:, src] * fac[None, :])

    def _check_axis(self, i: int) -> None:
        if not 0 <= i < self.spec.dim:
            raise JetSpecError(f"coordinate index {i} out of range for dim {self.spec.dim}")

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Jet | None":
        if isinstance(other, Jet):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet.constant(self.spec, self.x0, self.y0, float(other))
        return None

    def _aligned(self, other: "Jet") -> tuple["Jet", "Jet"]:
        if not self.same_base(other):
            raise JetBaseMismatch(
                f"base points differ: {self.x0},{self.y0} vs {other.x0},{other.y0}")
        spec = self.spec.meet(other.spec)
        return self.truncate(spec), other.truncate(spec)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._aligned(o)
        return Jet(a.spec, a.x0, a.y0, a.c + b.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.spec, self.x0, self.y0, -self.c)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._aligned(o)
        return Jet(a.spec, a.x0, a.y0, a.c - b.c)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.spec, self.x0, self.y0, self.c * float(other))
        if not isinstance(other, Jet):
            return NotImplemented
        a, b = self._aligned(other)
        t = _tables(a.spec)
        flat = np.bincount(t.mul_o,
                           weights=a.c.ravel()[t.mul_a] * b.c.ravel()[t.mul_b],
                           minlength=t.nx * t.ny)
        return Jet(a.spec, a.x0, a.y0, flat.reshape(t.nx, t.ny))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            if other == 0:
                raise JetDomainError("division by zero scalar")
            return Jet(self.spec, self.x0, self.y0, self.c / float(other))
        if not isinstance(other, Jet):
            return NotImplemented
        return self * other._reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self._reciprocal()

    def _nilpotent_series(self, coeffs: list[float], scale: float) -> "Jet":
        """scale * sum_k coeffs[k] * u^k with u = self/self.value - 1.

        u has no constant term, hence is nilpotent in the truncated algebra
        (vanishes beyond total degree kx+ky), so the finite Horner sum is the
        exact result of the corresponding power series.
        """
        u_c = self.c / self.value
        u_c[0, 0] -= 1.0
        u = Jet(self.spec, self.x0, self.y0, u_c)
        acc = Jet.constant(self.spec, self.x0, self.y0, coeffs[-1])
        for k in range(len(coeffs) - 2, -1, -1):
            acc = acc * u + coeffs[k]
        return acc * scale

    def _reciprocal(self) -> "Jet":
        if self.value == 0.0:
            raise JetDomainError("division by a jet with zero value")
        n = self.spec.kx + self.spec.ky + 1
        return self._nilpotent_series(_binomial_series(-1.0, n), 1.0 / self.value)

    def sqrt(self) -> "Jet":
        if self.value <= 0.0:
            raise JetDomainError(f"sqrt of jet with non-positive value {self.value}")
        n = self.spec.kx + self.spec.ky + 1
        return self._nilpotent_series(_binomial_series(0.5, n), math.sqrt(self.value))

    def pow(self, num: int, den: int = 1) -> "Jet":
        """Rational power with exponent num/den.

        Integer exponents are exact repeated products (any base value, modulo
        zero division); fractional exponents use the binomial series and need
        a positive base value.
        """
        if den == 0:
            raise JetDomainError("zero denominator in rational exponent")
        if den < 0:
            num, den = -num, -den
        g = math.gcd(abs(num), den)
        if g:
            num //= g
            den //= g
        if den == 1:
            return self._int_pow(num)
        if self.value <= 0.0:
            raise JetDomainError(
                f"fractional power of jet with non-positive value {self.value}")
        r = num / den
        n = self.spec.kx + self.spec.ky + 1
        return self._nilpotent_series(_binomial_series(r, n), self.value ** r)

    def _int_pow(self, p: int) -> "Jet":
        if p < 0:
            return self._reciprocal()._int_pow(-p)
        out = Jet.constant(self.spec, self.x0, self.y0, 1.0)
        base = self
        while p:
            if p & 1:
                out = out * base
            base = base * base if p > 1 else base
            p >>= 1
        return out

    def __pow__(self, p):
        if isinstance(p, int):
            return self._int_pow(p)
        return NotImplemented

    def __repr__(self) -> str:
        return (f"Jet(value={self.value!r}, spec=({self.spec.dim},"
                f"{self.spec.kx},{self.spec.ky}))")


# -- module-level operations ------------------------------------------------

def lift_coordinate(spec: JetSpec, x0, y0, group: str, index: int) -> Jet:
    """Jet of the coordinate function x_index or y_index at the base point."""
    x0 = tuple(float(v) for v in x0)
    y0 = tuple(float(v) for v in y0)
    if len(x0) != spec.dim or len(y0) != spec.dim:
        raise JetSpecError("base point length does not match dimension")
    if all(v == 0.0 for v in y0):
        raise JetDomainError("base point has y = 0 (off the slit tangent bundle)")
    if not 0 <= index < spec.dim:
        raise JetSpecError(f"coordinate index {index} out of range for dim {spec.dim}")
    t = _tables(spec)
    c = np.zeros((t.nx, t.ny))
    unit = tuple(1 if i == index else 0 for i in range(spec.dim))
    if group == "x":
        c[0, 0] = x0[index]
        if spec.kx >= 1:
            c[t.x_rank[unit], 0] = 1.0
    elif group == "y":
        c[0, 0] = y0[index]
        if spec.ky >= 1:
            c[0, t.y_rank[unit]] = 1.0
    else:
        raise JetSpecError(f"coordinate group must be 'x' or 'y', got {group!r}")
    return Jet(spec, x0, y0, c)


def lift_point(spec: JetSpec, x0, y0) -> tuple[list[Jet], list[Jet]]:
    """Coordinate jets for every x_i and y_i at once."""
    xs = [lift_coordinate(spec, x0, y0, "x", i) for i in range(spec.dim)]
    ys = [lift_coordinate(spec, x0, y0, "y", i) for i in range(spec.dim)]
    return xs, ys


def extract_partial(jet: Jet, alpha, beta) -> float:
    return jet.partial(alpha, beta)


def jet_sqrt(a: Jet) -> Jet:
    return a.sqrt()
