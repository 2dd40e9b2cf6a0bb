"""Bethe-equation residuals and solvers: the elliptic homogeneous-chain
system with the sum-rule annotation, a damped Newton iteration on the
logarithmic residual, and the exact two-site polynomial system."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .theta import EllipticParams, PoleError, lattice_distance, lattice_reduce, theta_eval

_POLE_GUARD = 1e-8


@dataclass(frozen=True)
class BetheConfig:
    """A candidate root multiset for the homogeneous chain of length 2n."""

    n: int
    a: complex
    p: complex
    roots: tuple[complex, ...]
    sum_rule_defect: complex | None = None
    sum_rule_ok: bool | None = None

    def __post_init__(self):
        if len(self.roots) != self.n:
            raise ValueError("root count must equal n")

    def annotated(self, params: EllipticParams, tol: float = 1e-6) -> "BetheConfig":
        d = sum(self.roots) - self.n * self.a
        defect = lattice_distance(d, params)
        return BetheConfig(self.n, self.a, self.p, self.roots,
                           sum_rule_defect=complex(d), sum_rule_ok=bool(defect < tol))


def _theta_ratio(z: complex, params: EllipticParams) -> complex:
    num = theta_eval(z, params)
    den_arg = z + params.hbar
    if lattice_distance(den_arg, params) < _POLE_GUARD:
        raise PoleError(f"denominator argument {den_arg} on the lattice")
    return num / theta_eval(den_arg, params)


def elliptic_bethe_residual(cfg: BetheConfig, params: EllipticParams) -> np.ndarray:
    """Componentwise defect of the multiplicative system; the empty
    interaction product at n=1 is 1."""
    n, a, p = cfg.n, cfg.a, cfg.p
    out = np.zeros(n, dtype=complex)
    for k, zk in enumerate(cfg.roots):
        lhs = p**2 * _theta_ratio(zk + a, params) ** (2 * n)
        rhs = 1.0 + 0j
        for j, zj in enumerate(cfg.roots):
            if j == k:
                continue
            num_arg, den_arg = zk - zj - params.hbar, zk - zj + params.hbar
            if lattice_distance(den_arg, params) < _POLE_GUARD:
                raise PoleError(f"interaction pole at roots {k},{j}")
            rhs *= theta_eval(num_arg, params) / theta_eval(den_arg, params)
        out[k] = lhs - rhs
    return out


def _log_residual(roots: np.ndarray, n: int, a: complex, p: complex,
                  params: EllipticParams) -> np.ndarray:
    """Principal-branch logarithm of (LHS/RHS) per component."""
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        zk = roots[k]
        val = p**2 * _theta_ratio(zk + a, params) ** (2 * n)
        for j in range(n):
            if j == k:
                continue
            val /= (theta_eval(zk - roots[j] - params.hbar, params)
                    / theta_eval(zk - roots[j] + params.hbar, params))
        if val == 0:
            raise PoleError("vanishing Bethe ratio")
        out[k] = cmath.log(val)
    return out


@dataclass
class NewtonFailure:
    seed: tuple[complex, ...]
    iterations: int
    trace: list[float]
    reason: str


@dataclass
class SolveReport:
    solutions: list[BetheConfig]
    failures: list[NewtonFailure]


def _torus_distance(u: complex, v: complex, params: EllipticParams) -> float:
    return lattice_distance(u - v, params)


def _same_solution(r1, r2, params, tol=1e-6) -> bool:
    """Unordered root-multiset match on the torus, greedy assignment."""
    left = list(r2)
    for z in r1:
        best, best_d = None, tol
        for i, w in enumerate(left):
            d = _torus_distance(z, w, params)
            if d < best_d:
                best, best_d = i, d
        if best is None:
            return False
        left.pop(best)
    return not left


def _newton(seed, n, a, p, params, max_iter, tol, fd_step=1e-7):
    roots = np.array(seed, dtype=complex)
    trace = []
    for it in range(max_iter):
        try:
            r = _log_residual(roots, n, a, p, params)
        except PoleError:
            return None, NewtonFailure(tuple(seed), it, trace, "pole during iteration")
        nr = float(np.linalg.norm(r))
        trace.append(nr)
        if nr < tol:
            return roots, None
        jac = np.zeros((n, n), dtype=complex)
        try:
            for j in range(n):
                bumped = roots.copy()
                bumped[j] += fd_step
                jac[:, j] = (_log_residual(bumped, n, a, p, params) - r) / fd_step
            step = np.linalg.solve(jac, r)
        except (PoleError, np.linalg.LinAlgError):
            return None, NewtonFailure(tuple(seed), it, trace, "singular Jacobian")
        lam = 1.0
        for _ in range(25):
            cand = roots - lam * step
            try:
                if float(np.linalg.norm(_log_residual(cand, n, a, p, params))) < nr:
                    roots = cand
                    break
            except PoleError:
                pass
            lam *= 0.5
        else:
            return None, NewtonFailure(tuple(seed), it, trace, "no descent direction")
    return None, NewtonFailure(tuple(seed), max_iter, trace, "max iterations reached")


def _default_seeds(n, a, params, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    tries = 0
    while len(out) < count and tries < 100 * count:
        tries += 1
        pts = rng.random(n) + rng.random(n) * params.tau
        ok = all(
            lattice_distance(z + a, params) > 5e-2
            and lattice_distance(z + a + params.hbar, params) > 5e-2
            for z in pts
        )
        ok = ok and all(
            lattice_distance(pts[i] - pts[j] + params.hbar, params) > 5e-2
            for i in range(n) for j in range(n) if i != j
        )
        if ok:
            out.append(tuple(pts))
    return out


def elliptic_bethe_solve(
    n: int, a: complex, p: complex, params: EllipticParams,
    seeds=None, max_iter: int = 80, tol: float = 1e-12,
    residual_tol: float = 1e-10, seed: int = 7, seed_count: int = 40,
) -> SolveReport:
    """Damped Newton runs from many seeds, deduplicated as unordered root
    multisets on the torus, each annotated with the sum-rule defect."""
    if seeds is None:
        seeds = _default_seeds(n, a, params, seed_count, seed)
    solutions: list[BetheConfig] = []
    failures: list[NewtonFailure] = []
    for s in seeds:
        roots, fail = _newton(s, n, a, p, params, max_iter, tol)
        if roots is None:
            failures.append(fail)
            continue
        cfg = BetheConfig(n, complex(a), complex(p), tuple(roots))
        try:
            if float(np.linalg.norm(elliptic_bethe_residual(cfg, params))) > residual_tol:
                failures.append(NewtonFailure(tuple(s), max_iter, [], "converged off-solution"))
                continue
        except PoleError:
            continue
        if any(_same_solution(cfg.roots, other.roots, params) for other in solutions):
            continue
        solutions.append(cfg.annotated(params))
    solutions.sort(key=lambda c: tuple(
        (round(lattice_reduce(z, params)[0].real, 8), round(lattice_reduce(z, params)[0].imag, 8))
        for z in sorted(c.roots, key=lambda z: (lattice_reduce(z, params)[0].real,
                                                lattice_reduce(z, params)[0].imag))
    ))
    return SolveReport(solutions, failures)


# ---------------------------------------------------------------------------
# Two-site polynomial system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class YangianBetheResult:
    roots: tuple[complex, ...]
    linear: bool
    degenerate_discriminant: bool


def yangian_bethe_solve(a1: complex, a2: complex, p: complex,
                        tol: float = 1e-12) -> YangianBetheResult:
    """Roots of p(z+a1+1)(z+a2+1) = (z+a1)(z+a2)."""
    a1, a2, p = complex(a1), complex(a2), complex(p)
    qa = 1 - p
    qb = (a1 + a2) * (1 - p) - 2 * p
    qc = a1 * a2 - p * (a1 + 1) * (a2 + 1)
    if abs(qa) < tol:
        if abs(qb) < tol:
            raise ZeroDivisionError("degenerate system: no z dependence")
        return YangianBetheResult((-qc / qb,), True, False)
    disc = qb * qb - 4 * qa * qc
    crit = (a1 - a2) ** 2 + 4 * p / (1 - p) ** 2
    s = cmath.sqrt(disc)
    roots = ((-qb + s) / (2 * qa), (-qb - s) / (2 * qa))
    return YangianBetheResult(roots, False, bool(abs(crit) < tol))
