"""Curvature tensors of a metric at a sample point, from the jet of F^2.

Everything is derived from a single jet evaluation of F^2 per sample:
fundamental tensor and its inverse, Cartan torsion, spray coefficients and
their cached partials, Berwald / mean-Berwald / Douglas / Riemann-type
curvatures, the angular projection, horizontal covariant derivatives for the
Berwald connection, and the trace-corrected projective curvature.  The jets
carry exact x- and y-partials of every intermediate quantity, so horizontal
derivatives of derived tensors never resort to finite differences (those
live in `fdcheck`, deliberately separate).

Index layout: component arrays follow the written index order of the symbol,
e.g. the Berwald curvature B_j{}^i{}_{kl} is stored as B[j, i, k, l] with
variance ('down', 'up', 'down', 'down').
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .jets import Jet, JetSpec, lift_point
from .metrics import MetricDef

UP = "up"
DOWN = "down"


class EngineError(RuntimeError):
    """Numerical failure while evaluating tensors."""


class SingularMetricError(EngineError):
    """Fundamental tensor not positive definite at the sample point."""

    def __init__(self, point, min_eig: float):
        self.point = point
        self.min_eig = min_eig
        super().__init__(
            f"fundamental tensor not positive definite at {point}; "
            f"smallest eigenvalue ~ {min_eig:.3e}")


@dataclass
class TensorValue:
    """Tensor components at one sample, tagged with index variance and the
    positive-homogeneity degree in y."""

    components: np.ndarray
    variance: tuple[str, ...]
    y_degree: int
    point: tuple[tuple[float, ...], tuple[float, ...]]

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.components).max()) if self.components.size else 0.0


# -- helpers on object arrays of jets -----------------------------------------

def jet_values(T: np.ndarray) -> np.ndarray:
    out = np.empty(T.shape)
    for idx in np.ndindex(T.shape):
        out[idx] = T[idx].value
    return out


def jet_dx_values(T: np.ndarray, dim: int) -> np.ndarray:
    """d(values)/dx^m with m appended as the last axis."""
    out = np.empty(T.shape + (dim,))
    for idx in np.ndindex(T.shape):
        j = T[idx]
        for m in range(dim):
            out[idx + (m,)] = j.dx(m).value
    return out


def jet_dy_values(T: np.ndarray, dim: int) -> np.ndarray:
    out = np.empty(T.shape + (dim,))
    for idx in np.ndindex(T.shape):
        j = T[idx]
        for m in range(dim):
            out[idx + (m,)] = j.dy(m).value
    return out


def _as_object_array(jets, shape) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        arr[idx] = jets(idx) if callable(jets) else jets[idx]
    return arr


# -- spray-level data ----------------------------------------------------------

class SprayData:
    """A spray G^i at one sample, held as jets so that every y-partial (to the
    order the jets allow) and one x-order are exact.  All spray-level tensors
    (connection, Berwald curvature, traces, Douglas and Riemann-type
    curvatures) hang off this object; metric-dependent quantities live on
    GeometryContext."""

    def __init__(self, G_jets: list[Jet], x, y):
        self.G_jet = list(G_jets)
        self.x = tuple(float(v) for v in x)
        self.y = tuple(float(v) for v in y)
        self.dim = len(self.G_jet)

    @property
    def point(self):
        return (self.x, self.y)

    @cached_property
    def _y_jets(self) -> list[Jet]:
        spec = self.G_jet[0].spec
        full = JetSpec(spec.dim, spec.kx + 1, spec.ky + 2)
        _, ys = lift_point(full, self.x, self.y)
        return ys

    # layered y-derivative caches of G

    @cached_property
    def _dG(self):
        n = self.dim
        return [[self.G_jet[i].dy(j) for j in range(n)] for i in range(n)]

    @cached_property
    def _d2G(self):
        n = self.dim
        out = [[[None] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                for k in range(j, n):
                    d = self._dG[i][j].dy(k)
                    out[i][j][k] = d
                    out[i][k][j] = d
        return out

    @cached_property
    def _d3G(self):
        n = self.dim
        out = [[[[None] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                for k in range(j, n):
                    for l in range(k, n):
                        d = self._d2G[i][j][k].dy(l)
                        for p, q, r in ((j, k, l), (j, l, k), (k, j, l),
                                        (k, l, j), (l, j, k), (l, k, j)):
                            out[i][p][q][r] = d
        return out

    # -- coefficients and connection ---------------------------------------

    @cached_property
    def G(self) -> np.ndarray:
        return np.array([j.value for j in self.G_jet])

    @cached_property
    def N_jet(self) -> np.ndarray:
        n = self.dim
        return _as_object_array(lambda idx: self._dG[idx[0]][idx[1]], (n, n))

    @cached_property
    def N(self) -> np.ndarray:
        """Nonlinear connection N^i_j = dG^i/dy^j."""
        return jet_values(self.N_jet)

    @cached_property
    def Gjk_jet(self) -> np.ndarray:
        n = self.dim
        return _as_object_array(lambda idx: self._d2G[idx[0]][idx[1]][idx[2]],
                                (n, n, n))

    @cached_property
    def Gjk(self) -> np.ndarray:
        """Berwald connection coefficients G^i_{jk} = d^2 G^i / dy^j dy^k."""
        return jet_values(self.Gjk_jet)

    # -- Berwald curvature and traces ----------------------------------------

    @cached_property
    def B_jet(self) -> np.ndarray:
        """B_j{}^i{}_{kl} as jets, axes (j, i, k, l)."""
        n = self.dim
        return _as_object_array(
            lambda idx: self._d3G[idx[1]][idx[0]][idx[2]][idx[3]], (n, n, n, n))

    @cached_property
    def B(self) -> np.ndarray:
        return jet_values(self.B_jet)

    @cached_property
    def E_jet(self) -> np.ndarray:
        n = self.dim
        out = np.empty((n, n), dtype=object)
        for j in range(n):
            for k in range(n):
                acc = self._d3G[0][j][k][0]
                for m in range(1, n):
                    acc = acc + self._d3G[m][j][k][m]
                out[j, k] = acc * 0.5
        return out

    @cached_property
    def E(self) -> np.ndarray:
        """Mean Berwald curvature E_{jk} = (1/2) B_j{}^m{}_{km}."""
        return jet_values(self.E_jet)

    @cached_property
    def E_y_jet(self) -> np.ndarray:
        n = self.dim
        return _as_object_array(lambda idx: self.E_jet[idx[0], idx[1]].dy(idx[2]),
                                (n, n, n))

    @cached_property
    def E_y(self) -> np.ndarray:
        """E_{jkl} = dE_{jk}/dy^l."""
        return jet_values(self.E_y_jet)

    @cached_property
    def S_jet(self) -> Jet:
        """Spray divergence S = dG^m/dy^m (trace of the connection)."""
        acc = self._dG[0][0]
        for m in range(1, self.dim):
            acc = acc + self._dG[m][m]
        return acc

    # -- horizontal covariant derivative (Berwald connection) ----------------

    def hcov(self, T_jet: np.ndarray, variance: tuple[str, ...]) -> np.ndarray:
        """Point values of T_{...|k}: partial_x - N-shifted partial_y plus
        connection terms, one extra down index appended."""
        n = self.dim
        Tx = jet_dx_values(T_jet, n)
        Ty = jet_dy_values(T_jet, n)
        T = jet_values(T_jet)
        out = Tx - np.einsum("...r,rk->...k", Ty, self.N)
        for axis, var in enumerate(variance):
            moved = np.moveaxis(T, axis, -1)
            if var == UP:
                term = np.einsum("...r,irk->...ik", moved, self.Gjk)
            else:
                term = -np.einsum("...r,rik->...ik", moved, self.Gjk)
            out = out + np.moveaxis(term, -2, axis)
        return out

    def hcov0(self, T_jet: np.ndarray, variance: tuple[str, ...]) -> np.ndarray:
        """Point values of T_{|m} y^m (drift along the geodesic spray)."""
        n = self.dim
        yv = np.asarray(self.y)
        Tx = jet_dx_values(T_jet, n)
        Ty = jet_dy_values(T_jet, n)
        T = jet_values(T_jet)
        out = Tx @ yv - 2.0 * (Ty @ self.G)
        for axis, var in enumerate(variance):
            moved = np.moveaxis(T, axis, -1)
            if var == UP:
                term = np.einsum("...r,ir->...i", moved, self.N)
            else:
                term = -np.einsum("...r,ri->...i", moved, self.N)
            out = out + np.moveaxis(term, -1, axis)
        return out

    # -- curvatures along the spray ------------------------------------------

    @cached_property
    def H(self) -> np.ndarray:
        """H_{jk} = E_{jk|m} y^m."""
        return self.hcov0(self.E_jet, (DOWN, DOWN))

    @cached_property
    def E_bar(self) -> np.ndarray:
        """Ebar_{jkl} = E_{jk|l} (not symmetric in all three indices)."""
        return self.hcov(self.E_jet, (DOWN, DOWN))

    def douglas_jet(self, mode: str = "definition") -> np.ndarray:
        """Douglas tensor D_j{}^i{}_{kl} as jets, axes (j, i, k, l).

        mode='definition': B - (1/(n+1)) d^3(S y^i)/dy^j dy^k dy^l.
        mode='trace_split': B - (2/(n+1)) {E_{jk} d^i_l + E_{jl} d^i_k
                             + E_{kl} d^i_j + E_{jkl} y^i}.
        """
        n = self.dim
        out = np.empty((n, n, n, n), dtype=object)
        if mode == "definition":
            fac = 1.0 / (n + 1)
            Sy = [self.S_jet * self._y_jets[i] for i in range(n)]
            for i in range(n):
                d1 = [Sy[i].dy(j) for j in range(n)]
                for j in range(n):
                    for k in range(j, n):
                        d2 = d1[j].dy(k)
                        for l in range(k, n):
                            d3 = d2.dy(l)
                            val = self.B_jet[j, i, k, l] - fac * d3
                            for p, q, r in ((j, k, l), (j, l, k), (k, j, l),
                                            (k, l, j), (l, j, k), (l, k, j)):
                                out[p, i, q, r] = val
            return out
        if mode == "trace_split":
            fac = 2.0 / (n + 1)
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        tail = self.E_y_jet[j, k, l]
                        for i in range(n):
                            term = tail * self._y_jets[i]
                            if i == l:
                                term = term + self.E_jet[j, k]
                            if i == k:
                                term = term + self.E_jet[j, l]
                            if i == j:
                                term = term + self.E_jet[k, l]
                            out[j, i, k, l] = self.B_jet[j, i, k, l] - fac * term
            return out
        raise ValueError(f"unknown douglas mode {mode!r}")

    @cached_property
    def D_jet(self) -> np.ndarray:
        return self.douglas_jet("definition")

    @cached_property
    def D(self) -> np.ndarray:
        return jet_values(self.D_jet)

    # -- Riemann-type curvature ------------------------------------------------

    @cached_property
    def R_ik_jet(self) -> np.ndarray:
        """Jacobi endomorphism R^i_k, axes (i, k):
        2 dG^i/dx^k - y^j d^2G^i/dx^j dy^k + 2 G^j d^2G^i/dy^j dy^k
        - dG^i/dy^j dG^j/dy^k."""
        n = self.dim
        dxG = [[self.G_jet[i].dx(k) for k in range(n)] for i in range(n)]
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for k in range(n):
                acc = 2.0 * dxG[i][k]
                for j in range(n):
                    acc = acc - self._y_jets[j] * dxG[i][j].dy(k)
                    acc = acc + 2.0 * self.G_jet[j] * self._d2G[i][j][k]
                    acc = acc - self._dG[i][j] * self._dG[j][k]
                out[i, k] = acc
        return out

    @cached_property
    def R_ik(self) -> np.ndarray:
        return jet_values(self.R_ik_jet)

    @cached_property
    def R4_jet(self) -> np.ndarray:
        """R_j{}^i{}_{kl}, axes (j, i, k, l), recovered from R^i_k by
        (1/3){d^2 R^i_k / dy^j dy^l - d^2 R^i_l / dy^j dy^k}."""
        n = self.dim
        dR = [[[self.R_ik_jet[i, k].dy(j) for j in range(n)] for k in range(n)]
              for i in range(n)]
        out = np.empty((n, n, n, n), dtype=object)
        for j in range(n):
            for i in range(n):
                for k in range(n):
                    for l in range(n):
                        out[j, i, k, l] = (dR[i][k][j].dy(l)
                                           - dR[i][l][j].dy(k)) * (1.0 / 3.0)
        return out

    @cached_property
    def R4(self) -> np.ndarray:
        return jet_values(self.R4_jet)

    @cached_property
    def R4_y(self) -> np.ndarray:
        """d R_j{}^i{}_{kl} / dy^m, the y-dependence of the curvature tensor."""
        return jet_dy_values(self.R4_jet, self.dim)

    @cached_property
    def Ric_jet(self) -> Jet:
        acc = self.R_ik_jet[0, 0]
        for m in range(1, self.dim):
            acc = acc + self.R_ik_jet[m, m]
        return acc

    @cached_property
    def cproj_weyl(self) -> np.ndarray:
        """Trace-corrected projective curvature W^i_k (axes (i, k)): vanishes
        exactly when R^i_k = c (F^2 d^i_k - y^i y_k) with c independent of y.

        Built from the Ricci Hessian K_{jk} = (1/2) d^2 (R^m_m)/dy^j dy^k via
        Kt_{jk} = n K_{jk} + K_{kj} + y^r dK_{kr}/dy^j and
        W^i_k = R^i_k - (1/(1-n^2)) {y^i Kt_{0k} - d^i_k Kt_{00}}.
        """
        n = self.dim
        yv = np.asarray(self.y)
        K_jet = np.empty((n, n), dtype=object)
        dRic = [self.Ric_jet.dy(j) for j in range(n)]
        for j in range(n):
            for k in range(j, n):
                K_jet[j, k] = K_jet[k, j] = dRic[j].dy(k) * 0.5
        K = jet_values(K_jet)
        K_y = jet_dy_values(K_jet, n)
        Kt = n * K + K.T + np.einsum("r,krj->jk", yv, K_y)
        Kt0 = yv @ Kt            # Kt_{0k}
        Kt00 = float(Kt0 @ yv)
        out = self.R_ik.copy()
        out -= (np.outer(yv, Kt0) - Kt00 * np.eye(n)) / (1.0 - n * n)
        return out

    @cached_property
    def ricci_identity_residual(self) -> float:
        """max |B_j{}^i{}_{ml|k} - B_j{}^i{}_{km|l} - R_j{}^i{}_{kl.m}|."""
        Bh = self.hcov(self.B_jet, (DOWN, UP, DOWN, DOWN))
        n = self.dim
        worst = 0.0
        for j in range(n):
            for i in range(n):
                for k in range(n):
                    for l in range(n):
                        for m in range(n):
                            res = (Bh[j, i, m, l, k] - Bh[j, i, k, m, l]
                                   - self.R4_y[j, i, k, l, m])
                            worst = max(worst, abs(res))
        return worst


# -- metric-level context --------------------------------------------------------

DEFAULT_SPEC_ORDERS = (2, 7)


def default_spec(dim: int) -> JetSpec:
    return JetSpec(dim, *DEFAULT_SPEC_ORDERS)


class GeometryContext:
    """All tensors of one metric at one admissible sample point.

    Construction evaluates the F^2 jet once; every tensor is computed lazily
    and cached.  Instances are cheap to create and safe to use from separate
    threads as long as each thread owns its own context.
    """

    def __init__(self, metric: MetricDef, x, y, spec: JetSpec | None = None):
        self.metric = metric
        self.x = tuple(float(v) for v in x)
        self.y = tuple(float(v) for v in y)
        self.spec = spec if spec is not None else default_spec(metric.dim)
        self.dim = metric.dim
        self.F2_jet = metric.f2_jet(self.spec, self.x, self.y)

    @property
    def point(self):
        return (self.x, self.y)

    def _tv(self, comps, variance, y_degree) -> TensorValue:
        return TensorValue(np.asarray(comps), variance, y_degree, self.point)

    @cached_property
    def F2(self) -> float:
        return self.F2_jet.value

    @cached_property
    def F_jet(self) -> Jet:
        return self.F2_jet.sqrt()

    @cached_property
    def _xy_jets(self):
        return lift_point(self.spec, self.x, self.y)

    # -- fundamental tensor --------------------------------------------------

    @cached_property
    def g_jet(self) -> np.ndarray:
        n = self.dim
        d1 = [self.F2_jet.dy(i) for i in range(n)]
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(i, n):
                out[i, j] = out[j, i] = d1[i].dy(j) * 0.5
        return out

    @cached_property
    def g(self) -> TensorValue:
        """g_{ij} = (1/2) d^2 F^2 / dy^i dy^j, certified positive definite."""
        vals = jet_values(self.g_jet)
        try:
            np.linalg.cholesky(vals)
        except np.linalg.LinAlgError:
            min_eig = float(np.linalg.eigvalsh(vals).min())
            raise SingularMetricError(self.point, min_eig) from None
        return self._tv(vals, (DOWN, DOWN), 0)

    @cached_property
    def ginv_jet(self) -> np.ndarray:
        """Jet of g^{ij}: direct solve for the point inverse, then the exact
        truncated Neumann correction g^-1 = (I + V)^-1 g0^-1 with nilpotent
        V = g0^-1 (g - g0)."""
        n = self.dim
        g0 = self.g.components
        g0inv = np.linalg.solve(g0, np.eye(n))
        spec = self.g_jet[0, 0].spec
        x0, y0 = self.g_jet[0, 0].x0, self.g_jet[0, 0].y0

        V = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                acc = None
                for k in range(n):
                    term = self.g_jet[k, j] * float(g0inv[i, k])
                    acc = term if acc is None else acc + term
                if i == j:
                    acc = acc - 1.0
                V[i, j] = acc

        ident = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                ident[i, j] = Jet.constant(spec, x0, y0, 1.0 if i == j else 0.0)

        P = ident
        for _ in range(spec.kx + spec.ky):
            nxt = np.empty((n, n), dtype=object)
            for i in range(n):
                for j in range(n):
                    acc = None
                    for k in range(n):
                        term = V[i, k] * P[k, j]
                        acc = term if acc is None else acc + term
                    nxt[i, j] = ident[i, j] - acc
            P = nxt

        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                acc = None
                for k in range(n):
                    term = P[i, k] * float(g0inv[k, j])
                    acc = term if acc is None else acc + term
                out[i, j] = acc
        return out

    @cached_property
    def ginv(self) -> TensorValue:
        return self._tv(jet_values(self.ginv_jet), (UP, UP), 0)

    @cached_property
    def y_low_jet(self) -> np.ndarray:
        n = self.dim
        _, ys = self._xy_jets
        out = np.empty(n, dtype=object)
        for i in range(n):
            acc = None
            for j in range(n):
                term = self.g_jet[i, j] * ys[j]
                acc = term if acc is None else acc + term
            out[i] = acc
        return out

    @cached_property
    def y_low(self) -> TensorValue:
        """y_i = g_{ij} y^j."""
        return self._tv(jet_values(self.y_low_jet), (DOWN,), 1)

    @cached_property
    def cartan_jet(self) -> np.ndarray:
        n = self.dim
        out = np.empty((n, n, n), dtype=object)
        d1 = [self.F2_jet.dy(i) for i in range(n)]
        for i in range(n):
            for j in range(i, n):
                d2 = d1[i].dy(j)
                for k in range(j, n):
                    val = d2.dy(k) * 0.25
                    for p, q, r in ((i, j, k), (i, k, j), (j, i, k),
                                    (j, k, i), (k, i, j), (k, j, i)):
                        out[p, q, r] = val
        return out

    @cached_property
    def cartan(self) -> TensorValue:
        """Cartan torsion C_{ijk} = (1/4) d^3 F^2 / dy^i dy^j dy^k."""
        return self._tv(jet_values(self.cartan_jet), (DOWN, DOWN, DOWN), -1)

    # -- spray ---------------------------------------------------------------

    @cached_property
    def spray(self) -> SprayData:
        """G^i = (1/4) g^{il} { d^2F^2/dx^k dy^l y^k - dF^2/dx^l }."""
        n = self.dim
        _ = self.g  # force the positive-definiteness certificate first
        xs, ys = self._xy_jets
        dxF2 = [self.F2_jet.dx(k) for k in range(n)]
        rhs = []
        for l in range(n):
            acc = None
            for k in range(n):
                term = dxF2[k].dy(l) * ys[k]
                acc = term if acc is None else acc + term
            rhs.append(acc - dxF2[l])
        G = []
        for i in range(n):
            acc = None
            for l in range(n):
                term = self.ginv_jet[i, l] * rhs[l]
                acc = term if acc is None else acc + term
            G.append(acc * 0.25)
        return SprayData(G, self.x, self.y)

    # -- metric-dependent tensors ---------------------------------------------

    @cached_property
    def angular(self) -> TensorValue:
        """Angular projection h^i_k = d^i_k - y^i y_k / F^2."""
        n = self.dim
        yv = np.asarray(self.y)
        h = np.eye(n) - np.outer(yv, self.y_low.components) / self.F2
        return self._tv(h, (UP, DOWN), 0)

    @cached_property
    def landsberg(self) -> TensorValue:
        """L_{jkl} = -(1/2) y_i B_j{}^i{}_{kl}."""
        L = -0.5 * np.einsum("i,jikl->jkl", self.y_low.components, self.spray.B)
        return self._tv(L, (DOWN, DOWN, DOWN), 1)

    @cached_property
    def gbweyl_tensor(self) -> np.ndarray:
        """Angular projection of B_{|m} y^m: h^i_r B_j{}^r{}_{kl|0}."""
        Bh0 = self.spray.hcov0(self.spray.B_jet, (DOWN, UP, DOWN, DOWN))
        return np.einsum("ir,jrkl->jikl", self.angular.components, Bh0)

    @cached_property
    def gdw_tensor(self) -> np.ndarray:
        """Angular projection of D_{|m} y^m: h^i_r D_j{}^r{}_{kl|0}."""
        Dh0 = self.spray.hcov0(self.spray.D_jet, (DOWN, UP, DOWN, DOWN))
        return np.einsum("ir,jrkl->jikl", self.angular.components, Dh0)

    @cached_property
    def flag_curvature(self) -> float:
        """Scalar K = R^m_m / ((n-1) F^2)."""
        return float(np.trace(self.spray.R_ik)) / ((self.dim - 1) * self.F2)

    @cached_property
    def scalar_curvature_residual(self) -> float:
        """max |R^i_k - K (F^2 d^i_k - y^i y_k)|: isotropy defect of R^i_k."""
        n = self.dim
        yv = np.asarray(self.y)
        model = self.flag_curvature * (self.F2 * np.eye(n)
                                       - np.outer(yv, self.y_low.components))
        return float(np.abs(self.spray.R_ik - model).max())

    # -- public tensor views ----------------------------------------------------

    def fundamental_tensor(self) -> tuple[TensorValue, TensorValue, TensorValue]:
        return self.g, self.ginv, self.y_low

    def cartan_torsion(self) -> TensorValue:
        return self.cartan

    def berwald_curvature(self) -> TensorValue:
        return self._tv(self.spray.B, (DOWN, UP, DOWN, DOWN), -1)

    def mean_berwald(self) -> tuple[TensorValue, TensorValue]:
        return (self._tv(self.spray.E, (DOWN, DOWN), -1),
                self._tv(self.spray.E_y, (DOWN, DOWN, DOWN), -2))

    def h_curvature(self) -> TensorValue:
        return self._tv(self.spray.H, (DOWN, DOWN), 0)

    def douglas_tensor(self, mode: str = "definition") -> TensorValue:
        comps = (self.spray.D if mode == "definition"
                 else jet_values(self.spray.douglas_jet(mode)))
        return self._tv(comps, (DOWN, UP, DOWN, DOWN), -1)

    def riemann_curvature(self) -> tuple[TensorValue, TensorValue]:
        return (self._tv(self.spray.R_ik, (UP, DOWN), 2),
                self._tv(self.spray.R4, (DOWN, UP, DOWN, DOWN), 0))

    def landsberg_curvature(self) -> TensorValue:
        return self.landsberg

    def cproj_weyl_curvature(self) -> TensorValue:
        return self._tv(self.spray.cproj_weyl, (UP, DOWN), 2)

    def angular_metric(self) -> TensorValue:
        return self.angular


# -- plain-point spray and geodesics ----------------------------------------------

_SPRAY_POINT_SPEC_ORDERS = (1, 2)


def spray_values(metric: MetricDef, x, y) -> np.ndarray:
    """Point values of G^i, computed with the smallest sufficient jet."""
    n = metric.dim
    spec = JetSpec(n, *_SPRAY_POINT_SPEC_ORDERS)
    f2 = metric.f2_jet(spec, x, y)
    ex = [tuple(1 if i == k else 0 for i in range(n)) for k in range(n)]
    zero = tuple(0 for _ in range(n))
    gv = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            beta = tuple(a + b for a, b in zip(ex[i], ex[j]))
            gv[i, j] = gv[j, i] = 0.5 * f2.partial(zero, beta)
    rhs = np.empty(n)
    yv = np.asarray(y, dtype=float)
    for l in range(n):
        acc = 0.0
        for k in range(n):
            acc += f2.partial(ex[k], ex[l]) * yv[k]
        rhs[l] = acc - f2.partial(ex[l], zero)
    try:
        return 0.25 * np.linalg.solve(gv, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMetricError((tuple(x), tuple(y)),
                                  float(np.linalg.eigvalsh(gv).min())) from exc


@dataclass
class GeodesicResult:
    t: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    f_values: np.ndarray
    exited: bool = False
    exit_time: float | None = None

    @property
    def f_drift(self) -> float:
        return float(np.abs(self.f_values - self.f_values[0]).max())


def integrate_geodesic(metric: MetricDef, x0, y0, t_end: float,
                       steps: int) -> GeodesicResult:
    """Fixed-step RK4 for c'' + 2 G(c, c') = 0; stops cleanly on domain exit."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n = metric.dim
    h = t_end / steps
    c = np.asarray(x0, dtype=float).copy()
    v = np.asarray(y0, dtype=float).copy()

    def rhs(state):
        ci, vi = state[:n], state[n:]
        return np.concatenate([vi, -2.0 * spray_values(metric, ci, vi)])

    ts = [0.0]
    cs = [c.copy()]
    vs = [v.copy()]
    fs = [float(metric.f_value(c, v))]
    state = np.concatenate([c, v])
    for step in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = (step + 1) * h
        if not np.all(np.isfinite(state)):
            raise EngineError(f"geodesic state became non-finite at t={t:g}")
        ci = state[:n]
        if not metric.domain.contains(ci):
            return GeodesicResult(np.asarray(ts), np.asarray(cs), np.asarray(vs),
                                  np.asarray(fs), exited=True, exit_time=t)
        ts.append(t)
        cs.append(ci.copy())
        vs.append(state[n:].copy())
        fs.append(float(metric.f_value(ci, state[n:])))
    return GeodesicResult(np.asarray(ts), np.asarray(cs), np.asarray(vs),
                          np.asarray(fs))
