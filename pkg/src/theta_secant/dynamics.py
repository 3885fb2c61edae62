"""Pole dynamics: tau-zero tracking, the second-order zero law, the
Ruijsenaars-Schneider system, and the discrete six-factor zero identity.

The tau functions here are one-complex-variable sections tau(x, t) (or
tau(x, nu)) of a theta function; zeros eta are continued in the parameter
by warm-started Newton.  Laurent data at a simple zero:

    eta_dot = -tau_t / tau_x          (implicit differentiation)
    v0      = lim_{x->eta} [ v(x,t) - eta_dot/(x - eta) ],  v = -tau_t/tau

with v0 extracted by averaging v - eta_dot/(x-eta) over a small 5-point
circle around eta (the roots-of-unity mean kills the first four Taylor
corrections).

The zero law couples eta(t) to the field v:

    eta_ddot = eta_dot * [2 v0(t) - v(eta+1, t) - v(eta-1, t)].

Its residual is normalized by the natural term scale
|eta_ddot| + |eta_dot| (2|v0| + |v(eta+1)| + |v(eta-1)|): for genus-1
theta data the zeros move linearly and both sides vanish, so a pure
left-right relative error would be 0/0 noise.

The n-particle system

    x_i'' = sum_{j != i} x_i' x_j' F(x_i - x_j),
    F(q) = 2 zeta(q) - zeta(q+1) - zeta(q-1)

is integrated by classical RK4; zeta is 1/q (rational), (pi/L) cot(pi q/L)
(trigonometric, period L), or the odd-theta log derivative for the
elliptic case (the Weierstrass linear corrections cancel in F).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Collision,
    DegenerateZero,
    GuardFailed,
    LostZero,
    ValidationError,
)
from .scaled import ScaledComplex
from .theta import (
    DEFAULT_TOL,
    PeriodMatrix,
    ThetaCharacteristic,
    normalized_log_abs,
    theta_jet,
)

ZERO_TARGET = 1e-10
SIMPLE_ZERO_GUARD = 1e-10
FACTOR_GUARD = 1e-8


# ----------------------------------------------------------------------
# tau sections
# ----------------------------------------------------------------------

class ThetaTau:
    """tau(x, t) = theta(x U + t V + Z | B) with analytic x/t derivatives."""

    def __init__(self, U, V, Z, B: PeriodMatrix, tol: float = DEFAULT_TOL):
        self.U = np.atleast_1d(np.asarray(U, complex))
        self.V = np.atleast_1d(np.asarray(V, complex))
        self.Z = np.atleast_1d(np.asarray(Z, complex))
        self.B = B
        self.tol = tol

    def arg(self, x: complex, t: float):
        return x * self.U + t * self.V + self.Z

    def jet(self, x: complex, t: float):
        """(tau, tau_x, tau_t) as ScaledComplex triple."""
        w = self.arg(x, t)
        j = theta_jet(w, self.B, dirs=(self.U, self.V), tol=self.tol)
        return j["f"], j["d0"], j["d1"]

    def hat_abs(self, x: complex, t: float) -> float:
        w = self.arg(x, t)
        la = normalized_log_abs(theta_jet(w, self.B, tol=self.tol)["f"], self.B, w)
        return 0.0 if la == -math.inf else math.exp(la)

    def hat_abs_of(self, value: ScaledComplex, x: complex, t: float) -> float:
        la = normalized_log_abs(value, self.B, self.arg(x, t))
        return 0.0 if la == -math.inf else math.exp(la)

    def v(self, x: complex, t: float) -> complex:
        f, _, ft = self.jet(x, t)
        return -(ft / f).to_complex()


class PerturbedTau:
    """tau plus an additive non-theta term, for negative controls.

    The term is pinned to the lattice-invariant Gaussian scale of theta at
    the reference argument (not the theta value there, which may sit on
    the divisor), so it is O(epsilon) relative to generic tau values on
    the tracked region while staying analytic in x.

    mode "const" adds a constant; mode "oscillatory" adds
    epsilon * scale * exp(i pi x), which alternates sign across the unit
    x-steps of the lattice identities.  Constants are close to the tangent
    space of theta-family deformations (argument shifts and rescalings,
    under which the identities are exact), so their first-order effect on
    the six-factor ratio largely cancels; the oscillatory term does not.
    """

    def __init__(self, base, epsilon: float, x_ref: complex = 0j,
                 t_ref: float = 0.0, mode: str = "const"):
        from .theta import gauss_exponent
        if mode not in ("const", "oscillatory"):
            raise ValidationError(f"unknown perturbation mode {mode!r}")
        self.base = base
        self.offset = ScaledComplex.make(
            epsilon, gauss_exponent(base.B, base.arg(x_ref, t_ref)))
        self.mode = mode
        self.B = base.B

    def arg(self, x, t):
        return self.base.arg(x, t)

    def _term(self, x: complex):
        if self.mode == "const":
            return self.offset, ScaledComplex.zero()
        osc = self.offset * complex(np.exp(1j * np.pi * complex(x)))
        return osc, osc * (1j * np.pi)

    def jet(self, x, t):
        f, fx, ft = self.base.jet(x, t)
        term, dterm = self._term(x)
        fx = fx + dterm if not dterm.is_zero() else fx
        return f + term, fx, ft

    def hat_abs(self, x, t):
        f, _, _ = self.jet(x, t)
        return self.base.hat_abs_of(f, x, t)

    def hat_abs_of(self, value, x, t):
        return self.base.hat_abs_of(value, x, t)

    def v(self, x, t):
        f, _, ft = self.jet(x, t)
        return -(ft / f).to_complex()


# ----------------------------------------------------------------------
# zero location and tracking
# ----------------------------------------------------------------------

def newton_zero(tau, x0: complex, t: float, max_iter: int = 60,
                step_cap: float = 0.5) -> complex:
    x = complex(x0)
    for _ in range(max_iter):
        f, fx, _ = tau.jet(x, t)
        if tau.hat_abs_of(f, x, t) <= ZERO_TARGET:
            return x
        if fx.is_zero():
            raise LostZero("vanishing x-derivative during Newton")
        try:
            dx = (f / fx).to_complex()
        except OverflowError as exc:
            raise LostZero("Newton step overflow") from exc
        if abs(dx) > step_cap:
            dx *= step_cap / abs(dx)
        x = x - dx
    raise LostZero(f"Newton failed to converge near x={x0:.4g}")


def scan_zero(tau, t: float, center: complex = 0j, span: float = 2.0,
              n: int = 21) -> complex:
    """Coarse |tau| scan followed by Newton; finds some zero on the line."""
    xs = np.linspace(-span, span, n)
    best, best_val = None, math.inf
    for a in xs:
        for b in xs:
            x = center + complex(a, b)
            v = tau.hat_abs(x, t)
            if v < best_val:
                best, best_val = x, v
    return newton_zero(tau, best, t)


@dataclass
class ZeroPath:
    """A tracked zero with per-point Laurent data."""

    t: np.ndarray
    eta: np.ndarray
    etadot: np.ndarray
    v0: np.ndarray
    tau_abs: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_csv(self, path):
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re_eta", "im_eta", "re_v0", "im_v0"])
            for k in range(len(self.t)):
                w.writerow([self.t[k], self.eta[k].real, self.eta[k].imag,
                            self.v0[k].real, self.v0[k].imag])


def _laurent_data(tau, x: complex, t: float, fit_radius: float = 0.01):
    f, fx, ft = tau.jet(x, t)
    scale = tau.hat_abs_of(fx, x, t)
    if scale < SIMPLE_ZERO_GUARD:
        raise DegenerateZero(f"|tau_x| ~ {scale:.2e} at tracked zero")
    etadot = -(ft / fx).to_complex()
    rho = fit_radius * (1.0 + abs(x))
    acc = 0j
    for k in range(5):
        xk = x + rho * np.exp(2j * np.pi * k / 5.0)
        fk, _, ftk = tau.jet(xk, t)
        vk = -(ftk / fk).to_complex()
        acc += vk - etadot / (xk - x)
    return etadot, acc / 5.0


def track_zero(tau, grid, x0: complex | None = None,
               guard_shifts: bool = True) -> ZeroPath:
    """Continue a zero of tau(., t) across the parameter grid."""
    grid = np.asarray(grid, dtype=float)
    if len(grid) < 2:
        raise ValidationError("grid needs at least two points")
    eta = np.zeros(len(grid), complex)
    etadot = np.zeros(len(grid), complex)
    v0 = np.zeros(len(grid), complex)
    tau_abs = np.zeros(len(grid))
    x = scan_zero(tau, grid[0]) if x0 is None else newton_zero(tau, x0, grid[0])
    for k, t in enumerate(grid):
        if k > 0:
            dt = grid[k] - grid[k - 1]
            pred = eta[k - 1] + etadot[k - 1] * dt
            x = newton_zero(tau, eta[k - 1], t)
            # Newton warm-starts from the previous point; a converged zero
            # far from the velocity prediction means we hopped to another
            # sheet of the zero set (grid too coarse for the motion)
            if abs(x - pred) > 0.05 * (1.0 + abs(pred - eta[k - 1])):
                raise LostZero(
                    f"zero at t={t:.4g} is {abs(x - pred):.3g} from the "
                    "continuation prediction; refine the grid")
            limit = 10.0 * abs(dt) * (abs(etadot[k - 1]) + 1.0)
            if abs(x - eta[k - 1]) > limit:
                raise LostZero(f"zero jumped by {abs(x - eta[k-1]):.3g} "
                               f"(limit {limit:.3g}) at t={t:.4g}")
        eta[k] = x
        tau_abs[k] = tau.hat_abs(x, t)
        etadot[k], v0[k] = _laurent_data(tau, x, t)
        if guard_shifts:
            for off in (1.0, -1.0):
                if tau.hat_abs(x + off, t) < FACTOR_GUARD:
                    raise GuardFailed(f"tau(eta{off:+g}, t) vanishes at t={t:.4g}")
    return ZeroPath(grid, eta, etadot, v0, tau_abs)


def track_tau_zero(U, V, Z, B: PeriodMatrix, grid, x0: complex | None = None,
                   tol: float = DEFAULT_TOL, tau=None) -> ZeroPath:
    """Track a zero of theta(xU + tV + Z) in x along the t grid.

    A custom tau section (any object with the ThetaTau interface) may be
    supplied for perturbed-tau controls.
    """
    if tau is None:
        tau = ThetaTau(U, V, Z, B, tol=tol)
    return track_zero(tau, grid, x0=x0)


def cm5_residual(path: ZeroPath, U, V, Z, B: PeriodMatrix,
                 tol: float = DEFAULT_TOL, tau=None) -> float:
    """Zero-law residual: eta_ddot vs eta_dot [2 v0 - v(eta+1) - v(eta-1)].

    eta_ddot comes from a 5-point central difference of the tracked path
    (an oracle independent of the analytic Laurent data); the right side
    is fully analytic.  Normalization uses the term scale, see module doc.
    """
    if tau is None:
        tau = ThetaTau(U, V, Z, B, tol=tol)
    t, eta = path.t, path.eta
    if len(t) < 5:
        raise ValidationError("need at least 5 grid points")
    h = t[1] - t[0]
    if np.max(np.abs(np.diff(t) - h)) > 1e-12 * max(abs(h), 1.0):
        raise ValidationError("cm5 residual needs a uniform grid")
    worst = 0.0
    for k in range(2, len(t) - 2):
        ddot = (-eta[k - 2] + 16 * eta[k - 1] - 30 * eta[k]
                + 16 * eta[k + 1] - eta[k + 2]) / (12.0 * h * h)
        for off in (1.0, -1.0):
            if tau.hat_abs(eta[k] + off, t[k]) < FACTOR_GUARD:
                raise GuardFailed(f"tau(eta{off:+g}) vanished at t={t[k]:.4g}")
        vp = tau.v(eta[k] + 1.0, t[k])
        vm = tau.v(eta[k] - 1.0, t[k])
        rhs = path.etadot[k] * (2.0 * path.v0[k] - vp - vm)
        scale = (abs(ddot) + abs(path.etadot[k])
                 * (2.0 * abs(path.v0[k]) + abs(vp) + abs(vm)))
        if scale <= 1e-9 * (1.0 + abs(eta[k])):
            # statically trivial: both sides vanish below numerical noise
            continue
        worst = max(worst, abs(ddot - rhs) / (scale + 1e-300))
    return worst


# ----------------------------------------------------------------------
# Ruijsenaars-Schneider integration
# ----------------------------------------------------------------------

class RationalKernel:
    name = "rational"

    def F(self, q: complex) -> complex:
        return 2.0 / q - 1.0 / (q + 1.0) - 1.0 / (q - 1.0)

    def guard(self, q: complex) -> bool:
        return min(abs(q), abs(q + 1.0), abs(q - 1.0)) > 1e-6


class TrigKernel:
    """Trigonometric kernel with period L (L must not divide 1)."""

    name = "trigonometric"

    def __init__(self, period: float = 2.0):
        if abs(period) < 1e-9 or abs(period - 1.0) < 1e-9:
            raise ValidationError("trig period must differ from 0 and 1")
        self.L = period

    def _zeta(self, q: complex) -> complex:
        return (np.pi / self.L) / np.tan(np.pi * q / self.L)

    def F(self, q: complex) -> complex:
        return 2.0 * self._zeta(q) - self._zeta(q + 1.0) - self._zeta(q - 1.0)

    def guard(self, q: complex) -> bool:
        s = min(abs(np.sin(np.pi * (q + d) / self.L)) for d in (0.0, 1.0, -1.0))
        return s > 1e-6


class EllipticKernel:
    """Elliptic kernel on the lattice omega1 (Z + tau Z), via odd theta.

    zeta-like log derivative: L(q) = theta1'(q/omega1) / theta1(q/omega1)
    / omega1 with theta1 the odd characteristic (1/2,1/2) theta of modulus
    tau.  The Weierstrass eta-linear corrections cancel in
    F(q) = 2 L(q) - L(q+1) - L(q-1), which is genuinely doubly periodic.
    """

    name = "elliptic"

    def __init__(self, tau: complex, omega1: complex = 1.0,
                 tol: float = DEFAULT_TOL):
        if complex(tau).imag <= 0:
            raise ValidationError("elliptic kernel needs Im tau > 0")
        self.tau = complex(tau)
        self.omega1 = complex(omega1)
        self.B = PeriodMatrix([[self.tau]])
        self.char = ThetaCharacteristic((0.5,), (0.5,))
        self.tol = tol

    def _logderiv(self, v: complex) -> complex:
        j = theta_jet(np.array([v]), self.B, dirs=(np.array([1.0 + 0j]),),
                      char=self.char, tol=self.tol)
        return (j["d0"] / j["f"]).to_complex()

    def _theta1_hat(self, v: complex) -> float:
        w = np.array([v])
        j = theta_jet(w, self.B, char=self.char, tol=self.tol)
        la = normalized_log_abs(j["f"], self.B, w)
        return 0.0 if la == -math.inf else math.exp(la)

    def F(self, q: complex) -> complex:
        L = lambda u: self._logderiv(u / self.omega1) / self.omega1
        return 2.0 * L(q) - L(q + 1.0) - L(q - 1.0)

    def guard(self, q: complex) -> bool:
        return min(self._theta1_hat((q + d) / self.omega1)
                   for d in (0.0, 1.0, -1.0)) > 1e-8


def make_kernel(spec) -> object:
    """Kernel from a spec: "rational", ("trig", L), ("elliptic", tau, omega1)."""
    if spec == "rational" or getattr(spec, "name", None) == "rational":
        return RationalKernel() if spec == "rational" else spec
    if isinstance(spec, tuple):
        if spec[0] in ("trig", "trigonometric"):
            return TrigKernel(*spec[1:])
        if spec[0] == "elliptic":
            return EllipticKernel(*spec[1:])
    if hasattr(spec, "F"):
        return spec
    raise ValidationError(f"unknown kernel spec {spec!r}")


@dataclass
class RSState:
    """Positions and velocities of the interacting zeros."""

    x: np.ndarray
    xdot: np.ndarray
    kernel: object = "rational"

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, complex))
        self.xdot = np.atleast_1d(np.asarray(self.xdot, complex))
        if self.x.shape != self.xdot.shape:
            raise ValidationError("positions and velocities differ in length")
        self.kernel = make_kernel(self.kernel)

    @property
    def N(self) -> int:
        return len(self.x)


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray        # shape (steps+1, N)
    xdot: np.ndarray

    def to_csv(self, path):
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "i", "re_x", "im_x", "re_xdot", "im_xdot"])
            for k, tk in enumerate(self.t):
                for i in range(self.x.shape[1]):
                    w.writerow([tk, i, self.x[k, i].real, self.x[k, i].imag,
                                self.xdot[k, i].real, self.xdot[k, i].imag])


def _accel(kernel, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    N = len(x)
    a = np.zeros(N, complex)
    for i in range(N):
        s = 0j
        for j in range(N):
            if j == i:
                continue
            q = x[i] - x[j]
            if not kernel.guard(q):
                raise Collision(f"particles {i} and {j} at separation {q:.4g}")
            s += v[j] * kernel.F(q)
        a[i] = v[i] * s
    return a


def rs_integrate(state: RSState, t_end: float, h: float,
                 t_start: float = 0.0) -> Trajectory:
    """Classical fixed-step RK4 on (x, xdot); aborts on collision guard."""
    if h <= 0 or t_end <= t_start:
        raise ValidationError("need h > 0 and t_end > t_start")
    steps = int(round((t_end - t_start) / h))
    kernel = state.kernel
    x = state.x.copy()
    v = state.xdot.copy()
    ts = [t_start]
    xs = [x.copy()]
    vs = [v.copy()]
    for _ in range(steps):
        k1x, k1v = v, _accel(kernel, x, v)
        k2x, k2v = v + 0.5 * h * k1v, _accel(kernel, x + 0.5 * h * k1x,
                                             v + 0.5 * h * k1v)
        k3x, k3v = v + 0.5 * h * k2v, _accel(kernel, x + 0.5 * h * k2x,
                                             v + 0.5 * h * k2v)
        k4x, k4v = v + h * k3v, _accel(kernel, x + h * k3x, v + h * k3v)
        x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        ts.append(ts[-1] + h)
        xs.append(x.copy())
        vs.append(v.copy())
    return Trajectory(np.array(ts), np.array(xs), np.array(vs))


def elliptic_zero_crosscheck(tau_mod: complex, U: complex, V: complex, Z: complex,
                             t_end: float = 0.5, h: float = 1e-3,
                             samples: int = 26, tol: float = DEFAULT_TOL):
    """Two tracked theta zeros versus the N=2 elliptic flow.

    The zeros of theta(xU + tV + Z | tau_mod) in x form one lattice family
    eta(t) + (Z + tau_mod Z)/U.  Viewing them as two particles per cell of
    the index-2 sublattice generated by 2/U and tau_mod/U, the particles
    sit a half period apart, where the elliptic kernel vanishes (the
    zeta-difference combination is constant around a half period), so the
    integrated flow must reproduce the independently tracked zeros.  A
    wrong kernel normalization makes the particles accelerate and the
    comparison fail.

    Returns (max deviation, the two ZeroPaths, the trajectory).
    """
    B1 = PeriodMatrix([[tau_mod]])
    omega1 = 1.0 / U
    grid = np.linspace(0.0, t_end, samples)
    tau = ThetaTau(np.array([U]), np.array([V]), np.array([Z]), B1, tol=tol)
    path1 = track_zero(tau, grid)
    path2 = track_zero(tau, grid, x0=path1.eta[0] + omega1)
    kernel = EllipticKernel(tau_mod / 2.0, omega1=2.0 * omega1, tol=tol)
    state = RSState(x=np.array([path1.eta[0], path2.eta[0]]),
                    xdot=np.array([path1.etadot[0], path2.etadot[0]]),
                    kernel=kernel)
    traj = rs_integrate(state, t_end, h)
    stride = (len(traj.t) - 1) // (samples - 1)
    dev = 0.0
    for k in range(samples):
        xk = traj.x[k * stride]
        dev = max(dev, abs(xk[0] - path1.eta[k]), abs(xk[1] - path2.eta[k]))
    return dev, (path1, path2), traj


# ----------------------------------------------------------------------
# discrete six-factor identity
# ----------------------------------------------------------------------

class DiscreteTau:
    """tau(x, nu) = theta((x/2)(U-V) + ((nu+1)/2)(U+V) + Z)."""

    def __init__(self, U, V, Z, B: PeriodMatrix, tol: float = DEFAULT_TOL):
        U = np.atleast_1d(np.asarray(U, complex))
        V = np.atleast_1d(np.asarray(V, complex))
        self.W = 0.5 * (U - V)
        self.S = 0.5 * (U + V)
        self.Z = np.atleast_1d(np.asarray(Z, complex))
        self.B = B
        self.tol = tol

    def arg(self, x: complex, nu: float):
        return x * self.W + (nu + 1.0) * self.S + self.Z

    def jet(self, x: complex, nu: float):
        w = self.arg(x, nu)
        j = theta_jet(w, self.B, dirs=(self.W,), tol=self.tol)
        return j["f"], j["d0"], None

    def value(self, x: complex, nu: float) -> ScaledComplex:
        return self.jet(x, nu)[0]

    def hat_abs(self, x: complex, nu: float) -> float:
        w = self.arg(x, nu)
        la = normalized_log_abs(theta_jet(w, self.B, tol=self.tol)["f"], self.B, w)
        return 0.0 if la == -math.inf else math.exp(la)

    def hat_abs_of(self, value, x, nu):
        la = normalized_log_abs(value, self.B, self.arg(x, nu))
        return 0.0 if la == -math.inf else math.exp(la)


class PerturbedDiscreteTau(PerturbedTau):
    """Additive perturbation of a DiscreteTau (same interface)."""

    def __init__(self, base: DiscreteTau, epsilon: float, x_ref=0j,
                 nu_ref=0.0, mode: str = "const"):
        super().__init__(base, epsilon, x_ref=x_ref, t_ref=nu_ref, mode=mode)

    def value(self, x, nu):
        return self.jet(x, nu)[0]


def find_tau_zero(tau, nu: float, x_guess: complex | None = None) -> complex:
    """A zero of x -> tau(x, nu), scanned if no warm start is given."""

    class _Wrap:
        def jet(self, x, t):
            return tau.jet(x, t)

        def hat_abs(self, x, t):
            return tau.hat_abs(x, t)

        def hat_abs_of(self, v, x, t):
            return tau.hat_abs_of(v, x, t)

    w = _Wrap()
    if x_guess is None:
        return scan_zero(w, nu, span=2.5, n=25)
    return newton_zero(w, x_guess, nu)


def f2d_residual(U, V, Z, B: PeriodMatrix, nu: float,
                 x_guess: complex | None = None, tol: float = DEFAULT_TOL,
                 tau=None) -> float:
    """|ratio + 1| for the six-factor ratio at a zero eta of tau(., nu).

    ratio = tau(eta+1,nu+1) tau(eta-2,nu) tau(eta+1,nu-1)
          / [tau(eta-1,nu+1) tau(eta+2,nu) tau(eta-1,nu-1)].
    """
    if tau is None:
        tau = DiscreteTau(U, V, Z, B, tol=tol)
    eta = find_tau_zero(tau, nu, x_guess)
    factors = [(eta + 1.0, nu + 1.0), (eta - 2.0, nu), (eta + 1.0, nu - 1.0),
               (eta - 1.0, nu + 1.0), (eta + 2.0, nu), (eta - 1.0, nu - 1.0)]
    vals = []
    for (x, n) in factors:
        val = tau.value(x, n)
        if tau.hat_abs_of(val, x, n) < 1e-10:
            raise GuardFailed(f"factor tau({x:.3g}, {n:g}) too close to zero")
        vals.append(val)
    num = vals[0] * vals[1] * vals[2]
    den = vals[3] * vals[4] * vals[5]
    ratio = (num / den).to_complex()
    return abs(ratio + 1.0)
