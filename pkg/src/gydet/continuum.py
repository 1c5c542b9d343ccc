"""Continuum determinant ratios from initial value problems.

Bare continuum determinants diverge, so this module only ever returns the
regularized ratio ln(det(H_V) / det(H_0)).  In one dimension that is
ln(y_V(L) / y_0(L)) with -y'' + V y = 0, y(0) = 0, y'(0) = 1; in two
dimensions (one transverse direction, Dirichlet on [0, W]) it is
ln det Y_V(L) - ln det Y_0(L) for the matrix problem truncated to K sine
modes, with -Delta_hat = diag((pi n / W)^2).

Both the potential run and the free run are integrated with the same
classical fourth-order scheme and the same step sequence, so the V = 0
ratio is exactly zero (bitwise identical arithmetic) and leading scheme
error cancels in the ratio; the analytic free factors
ln(sinh(w n L)/w n) are kept in the test suite as an independent check.
Step control is whole-interval step doubling from a 64-step floor until
the result moves less than the requested tolerance.

The first-order (Riccati) route z' = -z^2 + V is available as a 1D
diagnostic.  Its initial condition z(0) = infinity is regularized by
starting at x0 > 0 and the 1/x behaviour near the left end is handled by
integrating u = x z on a logarithmic axis: u' = u - u^2 + x^2 V(x) in
t = ln x, with u(x0) = 1.

Mode-space truncation of a genuinely two-dimensional potential is only
guaranteed to converge in K for finite-rank or summably decaying mode
couplings.  A constant mass couples every mode equally and the truncated
ratio grows like (m^2 W L / 2 pi) ln 2 per doubling of K; that logarithmic
drift is a real continuum feature, reported rather than hidden (see
check_truncation).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import NonConvergentTruncation, SignChange
from .quadrature import adaptive_quad

MIN_STEPS = 64
MAX_STEPS = 1 << 22
RESCALE_THRESHOLD = 1e100


@dataclass(frozen=True)
class Potential1D:
    """Potential V(x) on [0, L]; piecewise-continuous is fine."""

    V: Callable[[float], float]
    L: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @classmethod
    def constant(cls, c: float, L: float) -> "Potential1D":
        return cls(V=lambda x: c, L=L)


@dataclass(frozen=True)
class RatioResult:
    """ln(det H_V / det H_0) plus solver metadata."""

    log_ratio: float
    step_count: int
    estimated_error: float
    K_used: int = 0
    truncation_gap: Optional[float] = None


def _rk4_sweep_1d(V: Callable[[float], float], L: float, n_steps: int) -> float:
    """Integrate -y'' + V y = 0, y(0)=0, y'(0)=1 with n_steps RK4 steps;
    returns y(L).  State (y, p); p' = V y."""
    h = L / n_steps
    y = 0.0
    p = 1.0
    x = 0.0
    for _ in range(n_steps):
        v1 = V(x)
        k1y = p
        k1p = v1 * y
        v2 = V(x + 0.5 * h)
        k2y = p + 0.5 * h * k1p
        k2p = v2 * (y + 0.5 * h * k1y)
        k3y = p + 0.5 * h * k2p
        k3p = v2 * (y + 0.5 * h * k2y)
        v3 = V(x + h)
        k4y = p + h * k3p
        k4p = v3 * (y + h * k3y)
        y += h / 6.0 * (k1y + 2.0 * (k2y + k3y) + k4y)
        p += h / 6.0 * (k1p + 2.0 * (k2p + k3p) + k4p)
        x += h
    return y


def ratio_logdet_1d(pot: Potential1D, tol: float = 1e-10) -> RatioResult:
    """ln(y_V(L) / y_0(L)) by step-doubled RK4.

    The free solution is integrated with the identical scheme, so a
    potential that evaluates to zero gives exactly 0.0 (and y_0(L) = L to
    machine precision otherwise).  Raises SignChange when y_V(L) <= 0: a
    negative eigenvalue has been crossed and the real-valued ratio log is
    undefined.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    L = pot.L
    n = MIN_STEPS
    prev = None
    while True:
        yV = _rk4_sweep_1d(pot.V, L, n)
        y0 = _rk4_sweep_1d(lambda x: 0.0, L, n)
        if not (math.isfinite(yV) and math.isfinite(y0)):
            raise SignChange("solution left the finite range")
        if yV <= 0.0:
            raise SignChange(
                f"y(L) = {yV:.6e} <= 0: negative eigenvalue crossed"
            )
        cur = math.log(yV) - math.log(y0)
        if prev is not None:
            err = abs(cur - prev)
            if err <= tol * max(1.0, abs(cur)) or n >= MAX_STEPS:
                return RatioResult(
                    log_ratio=cur,
                    step_count=n,
                    estimated_error=err / 15.0,  # RK4 Richardson factor
                )
        prev = cur
        n *= 2


def ratio_logdet_1d_riccati(
    pot: Potential1D, tol: float = 1e-10, x0_scale: Optional[float] = None
) -> RatioResult:
    """Diagnostic first-order route: integrate the Riccati equation
    z' = -z^2 + V from z(x0) = 1/x0 and return ln x0 - ln L + int_x0^L z dx.

    Substituting u = x z, t = ln x turns the singular start into the
    smooth problem u' = u - u^2 + x^2 V with u = 1 at t0, integrated with
    the same step-doubling RK4.  x0 defaults to tol-scaled: x0 = L * tol
    (floored at 1e-12 L), making the start bias ~ V * x0^2 negligible
    against tol.  Divergence of u signals a sign change of y.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    L = pot.L
    x0 = L * (x0_scale if x0_scale is not None else max(tol, 1e-12))
    T = math.log(L / x0)
    V = pot.V

    def sweep(n_steps: int) -> float:
        h = T / n_steps
        u = 1.0
        s = 0.0  # integral of u dt = integral of z dx
        t = 0.0
        for _ in range(n_steps):
            x1 = x0 * math.exp(t)
            xm = x0 * math.exp(t + 0.5 * h)
            x2 = x0 * math.exp(t + h)
            w1 = x1 * x1 * V(x1)
            wm = xm * xm * V(xm)
            w2 = x2 * x2 * V(x2)
            k1u = u - u * u + w1
            k1s = u
            u2 = u + 0.5 * h * k1u
            k2u = u2 - u2 * u2 + wm
            k2s = u2
            u3 = u + 0.5 * h * k2u
            k3u = u3 - u3 * u3 + wm
            k3s = u3
            u4 = u + h * k3u
            k4u = u4 - u4 * u4 + w2
            k4s = u4
            u += h / 6.0 * (k1u + 2.0 * (k2u + k3u) + k4u)
            s += h / 6.0 * (k1s + 2.0 * (k2s + k3s) + k4s)
            t += h
            if not math.isfinite(u):
                raise SignChange("Riccati variable diverged: sign change")
        return s

    n = MIN_STEPS
    prev = None
    while True:
        s = sweep(n)
        cur = math.log(x0) - math.log(L) + s
        if prev is not None:
            err = abs(cur - prev)
            if err <= tol * max(1.0, abs(cur)) or n >= MAX_STEPS:
                return RatioResult(
                    log_ratio=cur, step_count=n, estimated_error=err / 15.0
                )
        prev = cur
        n *= 2


class TransversePotential2D:
    """Potential for the 2D (one transverse direction) problem.

    Either a position-space callable V(x, rho) on [0, L] x [0, W], or a
    mode-space function returning the K x K matrix of V-hat(x) in the sine
    basis u_n(rho) = sqrt(2/W) sin(pi n rho / W).  Built-in constructors
    cover constant masses, separable products f(x) g(rho), finite-rank
    mode couplings, and tabulated grids with bilinear interpolation.
    """

    def __init__(
        self,
        W: float,
        *,
        position: Callable[[float, float], float] | None = None,
        mode_matrix: Callable[[float, int], np.ndarray] | None = None,
        diagonal_modes: Callable[[float, int], np.ndarray] | None = None,
    ):
        if not W > 0:
            raise ValueError(f"W must be positive, got {W}")
        given = sum(f is not None for f in (position, mode_matrix, diagonal_modes))
        if given != 1:
            raise ValueError("give exactly one of position, mode_matrix, diagonal_modes")
        self.W = W
        self._position = position
        self._mode_matrix = mode_matrix
        self._diagonal = diagonal_modes

    @classmethod
    def constant(cls, c: float, W: float) -> "TransversePotential2D":
        c = float(c)
        return cls(W, diagonal_modes=lambda x, K: np.full(K, c))

    @classmethod
    def separable(
        cls, fx: Callable[[float], float], grho: Callable[[float], float], W: float
    ) -> "TransversePotential2D":
        return cls(W, position=lambda x, rho: fx(x) * grho(rho))

    @classmethod
    def finite_rank(
        cls, entries: dict[tuple[int, int], float], W: float
    ) -> "TransversePotential2D":
        """Constant-in-x mode-space coupling: entries maps (n, m) with
        n, m >= 1 to the coupling strength; symmetrized automatically."""

        def build(x: float, K: int) -> np.ndarray:
            V = np.zeros((K, K))
            for (n, m), c in entries.items():
                if n <= K and m <= K:
                    V[n - 1, m - 1] += c
                    if n != m:
                        V[m - 1, n - 1] += c
            return V

        return cls(W, mode_matrix=build)

    @classmethod
    def from_grid_file(
        cls, path: str | Path, N: int, M: int, L: float, W: float
    ) -> "TransversePotential2D":
        """Tabulated potential: the lattice text format (i, j, value per
        line, interior sites of an N x M grid) placed at x = i L / N,
        rho = j W / M, bilinear in between.  The boundary ring is padded
        with zeros, so values taper linearly to zero across the outermost
        half cell; interpolation is exact only inside the interior-node
        hull."""
        from .lattice import LatticeSpec, PotentialField

        spec = LatticeSpec(d=2, N=N, M=M)
        field = PotentialField.from_file(spec, path)
        # pad with the Dirichlet-style zero boundary so interpolation is
        # defined on the whole box
        grid = np.zeros((N + 1, M + 1))
        grid[1:N, 1:M] = field.values

        def position(x: float, rho: float) -> float:
            fx = min(max(x / L * N, 0.0), N)
            fr = min(max(rho / W * M, 0.0), M)
            i0 = min(int(fx), N - 1)
            j0 = min(int(fr), M - 1)
            tx = fx - i0
            tr = fr - j0
            return float(
                grid[i0, j0] * (1 - tx) * (1 - tr)
                + grid[i0 + 1, j0] * tx * (1 - tr)
                + grid[i0, j0 + 1] * (1 - tx) * tr
                + grid[i0 + 1, j0 + 1] * tx * tr
            )

        return cls(W, position=position)

    @property
    def is_mode_diagonal(self) -> bool:
        return self._diagonal is not None

    def diagonal_modes(self, x: float, K: int) -> np.ndarray:
        if self._diagonal is None:
            raise ValueError("potential is not stored mode-diagonally")
        return np.asarray(self._diagonal(x, K), dtype=float)

    def matrix_elements(self, x: float, K: int, *, tol: float = 1e-10) -> np.ndarray:
        """K x K symmetric matrix of V-hat(x) in the sine basis."""
        if K < 1:
            raise ValueError(f"K must be >= 1, got {K}")
        if self._diagonal is not None:
            return np.diag(self._diagonal(x, K))
        if self._mode_matrix is not None:
            V = np.asarray(self._mode_matrix(x, K), dtype=float)
            if V.shape != (K, K):
                raise ValueError(f"mode matrix has shape {V.shape}, expected {(K, K)}")
            return V
        W = self.W
        norm = 2.0 / W
        pos = self._position

        def sampled(r: np.ndarray) -> np.ndarray:
            # the position callable takes scalars by contract
            r = np.atleast_1d(np.asarray(r, dtype=float))
            return np.array([pos(x, float(ri)) for ri in r])

        V = np.empty((K, K))
        for n in range(1, K + 1):
            for m in range(n, K + 1):
                val = adaptive_quad(
                    lambda r: sampled(r)
                    * np.sin(math.pi * n * r / W)
                    * np.sin(math.pi * m * r / W),
                    0.0,
                    W,
                    tol=tol,
                )
                V[n - 1, m - 1] = V[m - 1, n - 1] = norm * val
        return V


def v_matrix_elements(
    pot: TransversePotential2D, x: float, K: int, *, tol: float = 1e-10
) -> np.ndarray:
    """Matrix elements of the potential at longitudinal position x in the
    K-mode sine basis (quadrature for position-space potentials,
    passthrough for mode-space ones)."""
    return pot.matrix_elements(x, K, tol=tol)


def _free_omegas(W: float, K: int) -> np.ndarray:
    n = np.arange(1, K + 1)
    return math.pi * n / W


def _sweep_diagonal(
    omega2: Callable[[float, int], np.ndarray], L: float, K: int, n_steps: int
):
    """Vectorized per-mode RK4 for mode-diagonal problems.

    State y, p per mode with y'' = omega2(x) y; per-mode power-of-two-free
    rescaling with log bookkeeping.  Returns (log|y_k(L)| array, sign array).
    """
    h = L / n_steps
    y = np.zeros(K)
    p = np.ones(K)
    logscale = np.zeros(K)
    x = 0.0
    check_every = 16
    for step in range(n_steps):
        w1 = omega2(x, K)
        wm = omega2(x + 0.5 * h, K)
        w2 = omega2(x + h, K)
        k1y = p
        k1p = w1 * y
        y2 = y + 0.5 * h * k1y
        p2 = p + 0.5 * h * k1p
        k2y = p2
        k2p = wm * y2
        y3 = y + 0.5 * h * k2y
        p3 = p + 0.5 * h * k2p
        k3y = p3
        k3p = wm * y3
        y4 = y + h * k3y
        p4 = p + h * k3p
        k4y = p4
        k4p = w2 * y4
        y = y + h / 6.0 * (k1y + 2.0 * (k2y + k3y) + k4y)
        p = p + h / 6.0 * (k1p + 2.0 * (k2p + k3p) + k4p)
        x += h
        if step % check_every == check_every - 1:
            peak = np.maximum(np.abs(y), np.abs(p))
            big = peak > RESCALE_THRESHOLD
            if big.any():
                s = peak[big]
                y[big] /= s
                p[big] /= s
                logscale[big] += np.log(s)
    ay = np.abs(y)
    if not np.isfinite(ay).all() or (ay == 0.0).any():
        raise SignChange("a mode solution vanished or diverged")
    return np.log(ay) + logscale, np.sign(y)


def _sweep_matrix(
    omega2: Callable[[float], np.ndarray], L: float, K: int, n_steps: int
):
    """Full-matrix RK4 sweep: Y'' = Omega(x) Y from Y = 0, Y' = I.

    Common rescale for the (Y, P) pair; returns (log|det Y(L)|, sign,
    K * accumulated scale log).
    """
    h = L / n_steps
    Y = np.zeros((K, K))
    P = np.eye(K)
    logscale = 0.0
    x = 0.0
    check_every = 16
    for step in range(n_steps):
        W1 = omega2(x)
        Wm = omega2(x + 0.5 * h)
        W2 = omega2(x + h)
        k1y = P
        k1p = W1 @ Y
        Y2 = Y + 0.5 * h * k1y
        P2 = P + 0.5 * h * k1p
        k2y = P2
        k2p = Wm @ Y2
        Y3 = Y + 0.5 * h * k2y
        P3 = P + 0.5 * h * k2p
        k3y = P3
        k3p = Wm @ Y3
        Y4 = Y + h * k3y
        P4 = P + h * k3p
        k4y = P4
        k4p = W2 @ Y4
        Y = Y + h / 6.0 * (k1y + 2.0 * (k2y + k3y) + k4y)
        P = P + h / 6.0 * (k1p + 2.0 * (k2p + k3p) + k4p)
        x += h
        if step % check_every == check_every - 1:
            peak = max(np.abs(Y).max(), np.abs(P).max())
            if not math.isfinite(peak):
                raise SignChange("matrix solution diverged")
            if peak > RESCALE_THRESHOLD:
                Y /= peak
                P /= peak
                logscale += math.log(peak)
    sign, log_abs = np.linalg.slogdet(Y)
    if sign == 0 or not math.isfinite(log_abs):
        raise SignChange("det Y(L) vanished: eigenvalue crossing")
    return log_abs, sign, K * logscale


def ratio_logdet_2d_truncated(
    pot: TransversePotential2D,
    L: float,
    W: float,
    K: int,
    tol: float = 1e-8,
    *,
    check_truncation: bool = False,
) -> RatioResult:
    """ln(det H_V / det H_0) in the K-mode sine-basis truncation.

    Integrates the matrix (or, for mode-diagonal potentials, the
    decoupled per-mode) initial value problem for the potential and for
    the free operator with identical step sequences and subtracts the
    log-determinants; V = 0 therefore returns exactly 0 for every K.
    With check_truncation the value at K//2 is computed as well, their
    gap reported in truncation_gap, and a NonConvergentTruncation warning
    is issued when the gap exceeds 10 * tol (constant-mass couplings
    genuinely diverge logarithmically in K; see the module docstring).
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if abs(W - pot.W) > 1e-12 * max(1.0, abs(W)):
        raise ValueError("W disagrees with the potential's transverse extent")
    om0sq = _free_omegas(W, K) ** 2

    if pot.is_mode_diagonal:
        def omega2_V(x: float, k: int) -> np.ndarray:
            return om0sq[:k] + pot.diagonal_modes(x, k)

        def omega2_0(x: float, k: int) -> np.ndarray:
            return om0sq[:k] + np.zeros(k)

        def run(n_steps: int) -> float:
            lv, sv = _sweep_diagonal(omega2_V, L, K, n_steps)
            l0, s0 = _sweep_diagonal(omega2_0, L, K, n_steps)
            if (sv <= 0).any():
                raise SignChange("a mode determinant factor went negative")
            return float((lv - l0).sum())
    else:
        cache_V: dict[float, np.ndarray] = {}

        def omega_mat(x: float) -> np.ndarray:
            got = cache_V.get(x)
            if got is None:
                got = np.diag(om0sq) + pot.matrix_elements(x, K)
                cache_V[x] = got
            return got

        om0_mat = np.diag(om0sq)

        def run(n_steps: int) -> float:
            lv, sv, scale_v = _sweep_matrix(omega_mat, L, K, n_steps)
            l0, s0, scale_0 = _sweep_matrix(lambda x: om0_mat, L, K, n_steps)
            if sv <= 0:
                raise SignChange("det Y(L) went negative: eigenvalue crossed")
            return float((lv + scale_v) - (l0 + scale_0))

    n = MIN_STEPS
    prev = None
    while True:
        cur = run(n)
        if prev is not None:
            err = abs(cur - prev)
            if err <= tol * max(1.0, abs(cur)) or n >= MAX_STEPS:
                break
        prev = cur
        n *= 2
    result = RatioResult(
        log_ratio=cur,
        step_count=n,
        estimated_error=abs(cur - prev) / 15.0 if prev is not None else 0.0,
        K_used=K,
    )
    if check_truncation and K >= 2:
        half = ratio_logdet_2d_truncated(pot, L, W, K // 2, tol)
        gap = cur - half.log_ratio
        if abs(gap) > 10.0 * tol:
            warnings.warn(
                f"truncated ratio still moving in K: value(K={K}) - "
                f"value(K={K // 2}) = {gap:.3e}",
                NonConvergentTruncation,
                stacklevel=2,
            )
        result = RatioResult(
            log_ratio=cur,
            step_count=n,
            estimated_error=result.estimated_error,
            K_used=K,
            truncation_gap=gap,
        )
    return result
