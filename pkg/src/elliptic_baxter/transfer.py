"""Transfer matrices over the zero-weight chain space, the Baxter
Q-operator built from ladder modules at spectral point zero, and the
functional relations between them (product, interchange, commutativity,
TQ, and double periodicity of the normalized Q series)."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .dynamical import (
    DiffOpSeries,
    ShapeError,
    TermMatrix,
    compose_module_ops,
    series_add,
    series_compose,
    series_invert,
    series_max_residual,
    series_scale,
)
from .modules import EllipticModule, build_asymptotic, socle
from .theta import EllipticParams, SamplePlan, ThetaSum, lattice_distance, theta_eval


@dataclass(frozen=True)
class QuantumSpace:
    """Zero-weight subspace of an even-length sign chain with one inhomogeneity
    per site; basis strings are ordered lexicographically with + first."""

    sites: tuple[complex, ...]
    params: EllipticParams

    def __post_init__(self):
        L = len(self.sites)
        if L == 0 or L % 2:
            raise ValueError("the chain length must be a positive even integer")
        for a in self.sites:
            if lattice_distance(a, self.params) < self.params.lattice_tol:
                raise ValueError(f"site {a} lies on the period lattice")
        object.__setattr__(self, "_basis", tuple(self._make_basis(L)))

    @staticmethod
    def _make_basis(L):
        half = L // 2
        seen = []
        for s in sorted(set(permutations((1,) * half + (-1,) * half))):
            seen.append(s)
        # lexicographic with +1 before -1
        return sorted(seen, key=lambda s: tuple(0 if c == 1 else 1 for c in s))

    @property
    def L(self) -> int:
        return len(self.sites)

    @property
    def basis(self) -> tuple[tuple[int, ...], ...]:
        return self._basis

    @property
    def dim(self) -> int:
        return len(self._basis)

    def homogeneous_site(self) -> complex:
        a = self.sites[0]
        if any(s != a for s in self.sites):
            raise ValueError("sites are not exactly homogeneous")
        return a


@dataclass
class TransferSeries:
    """p-graded series of chain-space matrices with symbolic entries in
    (z, x); alpha0 is the leading p-exponent."""

    alpha0: complex
    tables: list[list[list[ThetaSum]]]  # tables[k][row][col]
    params: EllipticParams
    label: str = ""

    @property
    def order(self) -> int:
        return len(self.tables) - 1

    @property
    def dim(self) -> int:
        return len(self.tables[0])

    def shift_z(self, c: complex) -> "TransferSeries":
        tables = [
            [[s.shift_z(c) for s in row] for row in tab] for tab in self.tables
        ]
        return TransferSeries(self.alpha0, tables, self.params, self.label)

    @property
    def series(self) -> DiffOpSeries:
        terms = [TermMatrix.from_symbolic(tab, self.params) for tab in self.tables]
        return DiffOpSeries(self.alpha0, terms, self.dim, self.params)

    def coefficient(self, k: int, z: complex, x: complex) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for a, row in enumerate(self.tables[k]):
            for b, s in enumerate(row):
                if s:
                    out[a, b] = s.eval(z, x, self.params)
        return out


def _max_transfer_order(X: EllipticModule, L: int) -> int:
    return X.basis.levels if X.exact else X.basis.levels - L // 2


def transfer_matrix(X: EllipticModule, space: QuantumSpace, order: int) -> TransferSeries:
    """Graded trace over the auxiliary module of the site-ordered product of
    its entry operators; only zero-weight strings act on the chain space."""
    if X.params != space.params:
        raise ShapeError("module and chain space parameters differ")
    top = _max_transfer_order(X, space.L)
    if order > top or order < 0:
        raise ValueError(
            f"truncation too shallow: order {order} needs more module levels"
        )
    h = X.params.hbar
    basis = X.basis
    strings = space.basis
    shifted = {
        key: [op.shift_z(a - h) for a in space.sites] for key, op in X.L.items()
    }
    tables = [
        [[ThetaSum.zero() for _ in strings] for _ in strings]
        for _ in range(order + 1)
    ]
    sign = {1: "+", -1: "-"}
    for col, jstr in enumerate(strings):
        for row, istr in enumerate(strings):
            comp = None
            for l in range(space.L - 1, -1, -1):
                op = shifted[sign[istr[l]] + sign[jstr[l]]][l]
                comp = op if comp is None else compose_module_ops(op, comp)
            for k in range(order + 1):
                acc = ThetaSum.zero()
                off = basis.offset(k)
                for i in range(basis.dims[k]):
                    d = comp.entries.get((off + i, off + i))
                    if d:
                        acc = acc + d
                if acc:
                    tables[k][row][col] = acc
    return TransferSeries(basis.alpha0, tables, X.params, label=f"t[{X.label}]")


def q_operator(space: QuantumSpace, spin_z: complex, order: int) -> TransferSeries:
    """Transfer series of the ladder module of spin z/hbar, bound at
    spectral point zero; the returned tables depend on x only."""
    params = space.params
    K = max(order + space.L // 2, 2)
    W = build_asymptotic(spin_z / params.hbar, 0.0, K, params)
    t = transfer_matrix(W, space, order)
    tables = [[[s.shift_z(0.0) for s in row] for row in tab] for tab in t.tables]
    return TransferSeries(t.alpha0, tables, params, label=f"Q({spin_z})")


def q_tilde_coefficient(space: QuantumSpace, spin_z: complex, k: int, order: int | None = None):
    """k-th normalized-Q coefficient matrix as a function of x (z bound to 0).

    Normalizing by the leading formal power leaves the coefficient tables
    unchanged, so this is just the k-th table of the Q series.
    """
    if order is None:
        order = k
    q = q_operator(space, spin_z, max(order, k))
    return lambda x, q=q: q.coefficient(k, 0.0, x)


# ---------------------------------------------------------------------------
# Functional relations
# ---------------------------------------------------------------------------

def _pad_series(s: DiffOpSeries, order: int) -> DiffOpSeries:
    terms = list(s.terms) + [TermMatrix.zero(s.dim) for _ in range(order - s.order)]
    return DiffOpSeries(s.alpha0, terms, s.dim, s.params)


def product_residual(
    X: EllipticModule, Y: EllipticModule, XY: EllipticModule,
    space: QuantumSpace, order: int, points
) -> float:
    """t_X(z;p) t_Y(z;p) against t_{X (x) Y}(z;p)."""
    tx = transfer_matrix(X, space, order).series
    ty = transfer_matrix(Y, space, order).series
    txy = transfer_matrix(XY, space, order).series
    return series_max_residual(series_compose(tx, ty, order), txy, order, points)


def spectral_shift_residual(
    X: EllipticModule, Xshift: EllipticModule, u: complex,
    space: QuantumSpace, order: int, points
) -> float:
    """t of the spectrally twisted module against the z-shifted series."""
    lhs = transfer_matrix(Xshift, space, order)
    rhs = transfer_matrix(X, space, order).shift_z(u * X.params.hbar)
    return series_max_residual(lhs.series, rhs.series, order, points)


def commutativity_residual(
    X: EllipticModule, Y: EllipticModule, space: QuantumSpace,
    order: int, z0: complex, w0: complex, points
) -> float:
    tx = transfer_matrix(X, space, order).shift_z(z0).series.bound_z(0.0)
    ty = transfer_matrix(Y, space, order).shift_z(w0).series.bound_z(0.0)
    lhs = series_compose(tx, ty, order)
    rhs = series_compose(ty, tx, order)
    return series_max_residual(lhs, rhs, order, points)


def interchange_transfer_residual(
    l: complex, u: complex, space: QuantumSpace, order: int, points,
    flip_shift_sign: bool = False,
) -> float:
    """t_{W^l}(z) t_{W^0}(z+u*hbar) against t_{W^{l-u}}(z+u*hbar) t_{W^u}(z);
    flip_shift_sign applies the wrong-sign shift as a negative control."""
    params = space.params
    K = order + space.L // 2
    h = params.hbar
    c = (-u if flip_shift_sign else u) * h

    def t_of(spin, zshift):
        W = build_asymptotic(spin, 0.0, max(K, 2), params)
        return transfer_matrix(W, space, order).shift_z(zshift).series

    lhs = series_compose(t_of(l, 0.0), t_of(0.0, c), order)
    rhs = series_compose(t_of(l - u, c), t_of(u, 0.0), order)
    return series_max_residual(lhs, rhs, order, points)


def qq_relation_residual(
    l: complex, space: QuantumSpace, order: int, z_samples, xpoints,
    rhs_sites: QuantumSpace | None = None,
) -> float:
    """Q(z+l*hbar;p) t_{W^0}(z;p) against t_{W^l}(z;p) Q(z;p) at sampled z;
    rhs_sites substitutes a different chain on the right as a negative
    control."""
    params = space.params
    h = params.hbar
    K = max(order + space.L // 2, 2)
    other = rhs_sites if rhs_sites is not None else space
    worst = 0.0
    for z0 in z_samples:
        q_up = q_operator(space, z0 + l * h, order).series
        t0 = transfer_matrix(
            build_asymptotic(0.0, 0.0, K, params), space, order
        ).shift_z(z0).series.bound_z(0.0)
        tl = transfer_matrix(
            build_asymptotic(l, 0.0, K, params), other, order
        ).shift_z(z0).series.bound_z(0.0)
        q0 = q_operator(other, z0, order).series
        lhs = series_compose(q_up, t0, order)
        rhs = series_compose(tl, q0, order)
        pts = [(0.0, x) for x in xpoints]
        worst = max(worst, series_max_residual(lhs, rhs, order, pts))
    return worst


def tq_residual(
    n: int, space: QuantumSpace, order: int, z_samples, xpoints
) -> float:
    """Residual of the finite-spin transfer series against the two-sided
    Q-quotient sum with the site-product scalar weights."""
    if n < 0:
        raise ValueError("n must be a nonnegative integer")
    params = space.params
    h = params.hbar
    worst = 0.0
    pts = [(0.0, x) for x in xpoints]
    for z0 in z_samples:
        V = socle(build_asymptotic(float(n), 0.0, max(n, 2), params))
        t_v = transfer_matrix(V, space, n).shift_z(z0).series.bound_z(0.0)
        t_v = _pad_series(t_v, order)
        q_at = {
            j: q_operator(space, z0 + j * h, order).series
            for j in range(-1, n + 1)
        }
        rhs = None
        for j in range(n + 1):
            num = series_compose(q_at[n], q_at[-1], order)
            den = series_compose(q_at[j], q_at[j - 1], order)
            term = series_compose(num, series_invert(den, order), order)
            scalar = 1.0 + 0j
            for a in space.sites:
                scalar *= theta_eval(z0 + a + j * h, params)
            term = series_scale(term, scalar)
            rhs = term if rhs is None else series_add(rhs, term, order)
        worst = max(worst, series_max_residual(t_v, rhs, order, pts))
    return worst


def periodicity_residual(
    space: QuantumSpace, order: int, z_samples, xpoints
) -> float:
    """Double periodicity of the normalized Q coefficients for a homogeneous
    chain: unit shift gives (-1)^n, lattice-period shift gives the
    exponential cocycle."""
    a = space.homogeneous_site()
    params = space.params
    tau = params.tau
    n = space.L // 2
    sign = (-1.0) ** n
    worst = 0.0
    for z0 in z_samples:
        q = q_operator(space, z0, order)
        q1 = q_operator(space, z0 + 1, order)
        qt = q_operator(space, z0 + tau, order)
        fac = sign * cmath.exp(-n * 1j * math.pi * (tau + 2 * z0 + 2 * a))
        for k in range(order + 1):
            for x in xpoints:
                m = q.coefficient(k, 0.0, x)
                m1 = q1.coefficient(k, 0.0, x)
                mt = qt.coefficient(k, 0.0, x)
                scale = max(1.0, np.linalg.norm(m))
                worst = max(worst, float(np.linalg.norm(m1 - sign * m) / scale))
                worst = max(worst, float(np.linalg.norm(mt - fac * m) / scale))
    return worst
