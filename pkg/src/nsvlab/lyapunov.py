"""Tangent frames under the linearized flow and trace functionals.

A frame of n fields is kept orthonormal in the alpha-weighted inner product
while it is transported by the linearization along a base trajectory.  The
time-averaged trace of the linearized operator over the frame, q_hat(n),
estimates the sum of the first n global Lyapunov exponents; the first n with
q_hat(n) < 0 bounds the attractor dimension.

The supremum over trajectories and bases in the definition of q(n) is
approximated by one long run with an evolving frame and periodic
re-orthonormalization; reports carry the averaging window used.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .dynamics import InsufficientDurationWarning, SimConfig
from .errors import (
    DegenerateFrameError,
    GridMismatchError,
    IntegrationDivergedError,
    InvalidParameterError,
    StaleFrameError,
)
from .spectral import (
    TORUS_AREA,
    VELOCITY,
    VORTICITY,
    AlphaMetric,
    SpectralField,
    SpectralGrid,
)


@dataclass
class TangentFrame:
    """n spectral fields stacked along the leading axis, with their metric."""

    grid: SpectralGrid
    role: str
    metric: AlphaMetric
    vectors: np.ndarray  # (n, 2, N, N) velocity or (n, N, N) vorticity

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def random(cls, grid: SpectralGrid, n: int, metric: AlphaMetric, seed: int,
               role: str = VELOCITY, decay: float = 3.0) -> "TangentFrame":
        rng = np.random.default_rng(seed)
        vecs = np.stack([
            sp.random_field(grid, role, seed=0, decay=decay, rng=rng).coeffs
            for _ in range(n)
        ])
        frame = cls(grid=grid, role=role, metric=metric, vectors=vecs)
        return alpha_gram_schmidt(frame)[0]

    @classmethod
    def from_fields(cls, fields, metric: AlphaMetric) -> "TangentFrame":
        first = fields[0]
        for f in fields[1:]:
            if f.grid != first.grid or f.role != first.role:
                raise GridMismatchError("frame fields must share grid and role")
        vecs = np.stack([f.coeffs for f in fields])
        return cls(grid=first.grid, role=first.role, metric=metric, vectors=vecs)

    def field(self, j: int) -> SpectralField:
        return SpectralField(self.grid, self.role, self.vectors[j].copy())


def _weighted_inner(a: np.ndarray, b: np.ndarray, w: np.ndarray) -> float:
    return TORUS_AREA * float(np.sum(w * (a * np.conj(b)).real))


def frame_gram(frame: TangentFrame) -> np.ndarray:
    """Gram matrix of the frame in the alpha inner product."""
    w = frame.metric.weights(frame.grid)
    v = frame.vectors.reshape(frame.n, -1)
    wf = np.broadcast_to(w, frame.grid.coeff_shape(frame.role)).reshape(-1)
    return TORUS_AREA * (v * wf) @ np.conj(v).T


def alpha_gram_schmidt(frame: TangentFrame, tol: float = 1e-12):
    """Modified Gram-Schmidt in the alpha inner product.

    Returns the orthonormalized frame and the diagonal normalization factors
    (the per-vector alpha-norm of the residual, the log of which accumulates
    Lyapunov exponents).  Raises DegenerateFrameError naming the first vector
    that falls into the span of its predecessors.
    """
    w = frame.metric.weights(frame.grid)
    v = frame.vectors.copy()
    n = v.shape[0]
    factors = np.empty(n)
    for j in range(n):
        original = math.sqrt(max(_weighted_inner(v[j], v[j], w), 0.0))
        for i in range(j):
            proj = _weighted_inner(v[j], v[i], w)
            v[j] -= proj * v[i]
        r = math.sqrt(max(_weighted_inner(v[j], v[j], w), 0.0))
        if r <= tol * max(original, tol):
            raise DegenerateFrameError(index=j)
        v[j] /= r
        factors[j] = r
    return TangentFrame(frame.grid, frame.role, frame.metric, v), factors


def gram_deviation(frame: TangentFrame) -> float:
    g = frame_gram(frame)
    return float(np.max(np.abs(np.real(g) - np.eye(frame.n))))


# ----------------------------------------------------------------------------
# linearized operators

def linearized_apply_velocity(theta: SpectralField, u: SpectralField,
                              cfg: SimConfig) -> SpectralField:
    """L_u theta = -nu A(1+aA)^{-1} theta - (1+aA)^{-1}[B(theta,u) + B(u,theta)]."""
    sp.require_role(theta, VELOCITY, "linearized_apply_velocity")
    sp.require_role(u, VELOCITY, "linearized_apply_velocity")
    if theta.grid != u.grid:
        raise GridMismatchError("theta and u must share a grid")
    total = (-cfg.nu) * sp.stokes_apply(theta, 2.0) \
        - sp.bilinear_b(theta, u) - sp.bilinear_b(u, theta)
    return sp.helmholtz_solve(total, cfg.metric)


def linearized_apply_vorticity(phi: SpectralField, omega: SpectralField,
                               cfg: SimConfig) -> SpectralField:
    """L_w phi = -(1-aD)^{-1}[u.grad phi + v_phi.grad w - nu D phi] with
    u, v_phi the divergence-free velocities of w and phi."""
    sp.require_role(phi, VORTICITY, "linearized_apply_vorticity")
    sp.require_role(omega, VORTICITY, "linearized_apply_vorticity")
    if phi.grid != omega.grid:
        raise GridMismatchError("phi and omega must share a grid")
    u = sp.velocity_from_vorticity(omega)
    v_phi = sp.velocity_from_vorticity(phi)
    total = (-cfg.nu) * sp.stokes_apply(phi, 2.0) \
        - sp.advect_scalar(u, phi) - sp.advect_scalar(v_phi, omega)
    return sp.helmholtz_solve(total, cfg.metric)


def _linearized_batch(grid: SpectralGrid, role: str, thetas: np.ndarray,
                      base: np.ndarray, nu: float, weights: np.ndarray) -> np.ndarray:
    """Vectorized linearized right-hand side for a stacked frame."""
    out = -(nu * grid.k2) * thetas
    if base.any():
        mask = grid.dealias_mask
        if role == VELOCITY:
            uh = base * mask
            th = thetas * mask
            u_phys = sp.to_physical(uh)
            dudx = sp.to_physical(1j * grid.kx * uh)
            dudy = sp.to_physical(1j * grid.ky * uh)
            t_phys = sp.to_physical(th)
            dtdx = sp.to_physical(1j * grid.kx * th)
            dtdy = sp.to_physical(1j * grid.ky * th)
            adv = (u_phys[0] * dtdx + u_phys[1] * dtdy
                   + t_phys[:, :1] * dudx[None] + t_phys[:, 1:2] * dudy[None])
            nl = sp.from_physical(adv) * mask
            nl[..., 0, 0] = 0.0
            nl = sp.leray_project_coeffs(grid, nl)
        else:
            wh = base * mask
            ph = thetas * mask
            uc = sp.velocity_from_vorticity_coeffs(grid, wh)
            vc = sp.velocity_from_vorticity_coeffs(grid, ph)
            u_phys = sp.to_physical(uc)
            v_phys = sp.to_physical(vc)
            dpdx = sp.to_physical(1j * grid.kx * ph)
            dpdy = sp.to_physical(1j * grid.ky * ph)
            dwdx = sp.to_physical(1j * grid.kx * wh)
            dwdy = sp.to_physical(1j * grid.ky * wh)
            adv = (u_phys[0] * dpdx + u_phys[1] * dpdy
                   + v_phys[:, 0] * dwdx[None] + v_phys[:, 1] * dwdy[None])
            nl = sp.from_physical(adv) * mask
            nl[..., 0, 0] = 0.0
        out -= nl
    out /= weights
    return out


def _base_rhs(grid: SpectralGrid, role: str, c: np.ndarray, g: np.ndarray,
              nu: float, weights: np.ndarray) -> np.ndarray:
    if role == VELOCITY:
        out = g - sp.bilinear_coeffs(grid, c, c) if c.any() else g.copy()
    else:
        if c.any():
            uc = sp.velocity_from_vorticity_coeffs(grid, c)
            out = g - sp.advect_scalar_coeffs(grid, uc, c)
        else:
            out = g.copy()
    out -= nu * grid.k2 * c
    out /= weights
    out[..., 0, 0] = 0.0
    return out


# ----------------------------------------------------------------------------
# traces

def trace_n(frame: TangentFrame, base: SpectralField, cfg: SimConfig,
            gram_tol: float = 1e-6) -> float:
    """Sum of (L theta_j, theta_j)_alpha over the frame.

    The frame must be freshly orthonormalized; if its Gram matrix has drifted
    beyond gram_tol a StaleFrameError is raised.
    """
    dev = gram_deviation(frame)
    if dev > gram_tol:
        raise StaleFrameError(f"frame Gram deviation {dev:.3g} exceeds {gram_tol:g}; "
                              "re-orthonormalize before taking traces")
    if frame.role != base.role:
        raise StaleFrameError(f"frame role {frame.role} does not match base {base.role}")
    w = frame.metric.weights(frame.grid)
    lv = _linearized_batch(frame.grid, frame.role, frame.vectors, base.coeffs, cfg.nu, w)
    return float(sum(_weighted_inner(lv[j], frame.vectors[j], w) for j in range(frame.n)))


def trace_velocity_reduced(frame: TangentFrame, u: SpectralField, cfg: SimConfig) -> float:
    """The algebraically reduced velocity-form trace
    -nu sum ||grad theta_j||^2 - sum ((theta_j.grad) u, theta_j);
    the alpha weights cancel against (1+aA)^{-1} in the full trace."""
    total = 0.0
    for j in range(frame.n):
        theta = frame.field(j)
        total -= cfg.nu * sp.grad_norm_sq(theta)
        total -= sp.l2_inner(sp.bilinear_b(theta, u), theta)
    return total


def trace_vorticity_reduced(frame: TangentFrame, omega: SpectralField, cfg: SimConfig) -> float:
    """Scalar-form counterpart: -nu sum ||grad phi_j||^2 - sum (v_j.grad w, phi_j)
    with v_j the stream-velocity of phi_j (the u.grad phi term is skew)."""
    total = 0.0
    for j in range(frame.n):
        phi = frame.field(j)
        v_j = sp.velocity_from_vorticity(phi)
        total -= cfg.nu * sp.grad_norm_sq(phi)
        total -= sp.l2_inner(sp.advect_scalar(v_j, omega), phi)
    return total


def advection_trace_terms(frame: TangentFrame, u: SpectralField) -> tuple[float, float]:
    """(sum_j ((theta_j.grad) u, theta_j),  integral of rho |grad u|) with
    rho = sum |theta_j|^2; both by collocation quadrature on a doubled grid.
    The second times c_2 = sqrt(1/2) dominates the first for divergence-free u."""
    from .inequalities import pad_coeffs  # local import; avoids a cycle

    grid = frame.grid
    nq = 2 * grid.n
    th = sp.to_physical(pad_coeffs(frame.vectors, nq))
    rho = np.sum(th**2, axis=(0, 1))
    uq = pad_coeffs(u.coeffs, nq)
    k1 = np.fft.fftfreq(nq, d=1.0 / nq)
    kx, ky = np.meshgrid(k1, k1, indexing="ij")
    dudx = sp.to_physical(1j * kx * uq)
    dudy = sp.to_physical(1j * ky * uq)
    grad_abs = np.sqrt(dudx[0] ** 2 + dudy[0] ** 2 + dudx[1] ** 2 + dudy[1] ** 2)
    cell = (2 * math.pi / nq) ** 2
    lhs = float(np.sum(th[:, 0] * (th[:, 0] * dudx[0] + th[:, 1] * dudy[0])
                       + th[:, 1] * (th[:, 0] * dudx[1] + th[:, 1] * dudy[1]))) * cell
    rhs = float(np.sum(rho * grad_abs)) * cell
    return lhs, rhs


# ----------------------------------------------------------------------------
# frame evolution

@dataclass
class TraceSeries:
    """Trace samples along one co-evolved run.

    times are re-orthonormalization events; trace_avg is the Cesaro mean of
    the instantaneous trace over events past the burn-in (NaN before).
    exponents are per-vector Lyapunov estimates from the log normalization
    factors over the same window.
    """

    n: int
    times: np.ndarray
    trace_inst: np.ndarray
    trace_avg: np.ndarray
    exponents: np.ndarray
    q_hat: float
    burn_in: float
    window: tuple
    base_final: SpectralField

    def write_csv(self, path):
        from io import StringIO

        from .fieldio import atomic_write_text

        buf = StringIO()
        writer = csv.writer(buf)
        writer.writerow(("t", "trace_inst", "trace_avg"))
        for i in range(self.times.size):
            writer.writerow([f"{self.times[i]:.12g}", f"{self.trace_inst[i]:.12g}",
                             f"{self.trace_avg[i]:.12g}"])
        atomic_write_text(path, buf.getvalue())

    def summary(self, n_star: int | None = None) -> dict:
        return {
            "n": self.n,
            "q_hat": self.q_hat,
            "n_star": n_star,
            "window": [self.window[0], self.window[1]],
        }

    def write_summary(self, path, n_star: int | None = None):
        from .fieldio import write_json

        write_json(path, self.summary(n_star))


def evolve_tangent_frame(
    cfg: SimConfig,
    n: int,
    t_end: float,
    *,
    role: str = VELOCITY,
    reorth_every: int = 10,
    burn_in: float | None = None,
    seed: int = 0,
    warmup: float = 0.0,
    frame_decay: float = 3.0,
) -> TraceSeries:
    """Co-evolve base flow and an n-vector tangent frame, sampling traces.

    The frame advances through the same RK4 stages as the base state; every
    reorth_every steps it is re-orthonormalized (alpha Gram-Schmidt), the
    log factors are accumulated, and the instantaneous trace is sampled.  If
    orthonormalization fails right after a previous pass, the frame is
    genuinely degenerate and the failure propagates with diagnostics.

    warmup advances the base flow alone before the frame is attached (to
    start near the attractor).  Deterministic given (cfg, seed).
    """
    grid = cfg.grid
    if n < 1:
        raise InvalidParameterError(f"frame size must be >= 1, got {n}")
    if t_end < cfg.dt:
        raise InvalidParameterError(f"t_end={t_end:g} is shorter than one step dt={cfg.dt:g}")
    if role == VELOCITY:
        base0 = cfg.initial.build(grid)
        g = cfg.forcing.build(grid).coeffs
    else:
        base0 = sp.vorticity_of(cfg.initial.build(grid))
        g = sp.vorticity_of(cfg.forcing.build(grid)).coeffs

    weights = cfg.metric.weights(grid)
    nu = cfg.nu
    dt = cfg.dt
    gamma = cfg.gamma
    if burn_in is None:
        burn_in = min(5.0 / gamma, 0.5 * t_end)
    if t_end - burn_in < 10.0 / gamma:
        warnings.warn(
            f"trace window {t_end - burn_in:.3g} < 10/gamma = {10 / gamma:.3g}",
            InsufficientDurationWarning, stacklevel=2)

    cb = base0.coeffs.copy()
    if warmup > 0:
        for _ in range(int(round(warmup / dt))):
            k1 = _base_rhs(grid, role, cb, g, nu, weights)
            k2 = _base_rhs(grid, role, cb + 0.5 * dt * k1, g, nu, weights)
            k3 = _base_rhs(grid, role, cb + 0.5 * dt * k2, g, nu, weights)
            k4 = _base_rhs(grid, role, cb + dt * k3, g, nu, weights)
            cb = cb + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(cb)):
            raise IntegrationDivergedError(step=-1, t=warmup,
                                           message="base flow diverged during warmup")

    frame = TangentFrame.random(grid, n, cfg.metric, seed=seed, role=role, decay=frame_decay)
    th = frame.vectors

    nsteps = int(round(t_end / dt))
    times, traces = [], []
    log_factors = []
    event_prev_t = []

    def lin(base_c, thetas):
        return _linearized_batch(grid, role, thetas, base_c, nu, weights)

    prev_event_t = 0.0
    for step in range(1, nsteps + 1):
        k1b = _base_rhs(grid, role, cb, g, nu, weights)
        k1t = lin(cb, th)
        b2 = cb + 0.5 * dt * k1b
        k2b = _base_rhs(grid, role, b2, g, nu, weights)
        k2t = lin(b2, th + 0.5 * dt * k1t)
        b3 = cb + 0.5 * dt * k2b
        k3b = _base_rhs(grid, role, b3, g, nu, weights)
        k3t = lin(b3, th + 0.5 * dt * k2t)
        b4 = cb + dt * k3b
        k4b = _base_rhs(grid, role, b4, g, nu, weights)
        k4t = lin(b4, th + dt * k3t)
        cb = cb + (dt / 6.0) * (k1b + 2 * k2b + 2 * k3b + k4b)
        th = th + (dt / 6.0) * (k1t + 2 * k2t + 2 * k3t + k4t)

        if step % reorth_every == 0 or step == nsteps:
            t = step * dt
            if not (np.all(np.isfinite(cb)) and np.all(np.isfinite(th))):
                raise IntegrationDivergedError(step=step, t=t)
            frame = TangentFrame(grid, role, cfg.metric, th)
            frame, factors = alpha_gram_schmidt(frame)
            th = frame.vectors
            lv = lin(cb, th)
            tr = float(sum(_weighted_inner(lv[j], th[j], weights) for j in range(n)))
            times.append(t)
            traces.append(tr)
            log_factors.append(np.log(factors))
            event_prev_t.append(prev_event_t)
            prev_event_t = t

    times = np.asarray(times)
    traces = np.asarray(traces)
    logs = np.asarray(log_factors)           # (events, n)
    prev_ts = np.asarray(event_prev_t)

    # Cesaro mean of traces over events past burn-in
    trace_avg = np.full_like(traces, np.nan)
    sel = times >= burn_in
    if np.any(sel):
        vals = traces[sel]
        trace_avg[sel] = np.cumsum(vals) / np.arange(1, vals.size + 1)
        q_hat = float(trace_avg[-1])
        window = (float(times[sel][0]), float(times[-1]))
    else:
        q_hat = float(np.mean(traces))
        window = (float(times[0]), float(times[-1]))

    # exponents: growth intervals fully inside the window
    exp_sel = prev_ts >= burn_in
    if np.any(exp_sel):
        duration = times[exp_sel][-1] - prev_ts[exp_sel][0]
        exponents = logs[exp_sel].sum(axis=0) / duration
    else:
        duration = times[-1] - prev_ts[0]
        exponents = logs.sum(axis=0) / duration

    base_final = SpectralField(grid, role, cb)
    return TraceSeries(n=n, times=times, trace_inst=traces, trace_avg=trace_avg,
                       exponents=exponents, q_hat=q_hat, burn_in=burn_in,
                       window=window, base_final=base_final)


def q_n_estimate(cfg: SimConfig, n: int, t_end: float, **kwargs) -> TraceSeries:
    """Time-averaged trace estimate q_hat(n) along one co-evolved run."""
    return evolve_tangent_frame(cfg, n, t_end, **kwargs)


@dataclass
class NStarScan:
    q_hats: dict                 # n -> q_hat
    n_star: int | None
    eventually_decreasing: bool
    series: dict                 # n -> TraceSeries

    def summary(self) -> dict:
        return {
            "q_hats": {str(k): v for k, v in sorted(self.q_hats.items())},
            "n_star": self.n_star,
            "eventually_decreasing": self.eventually_decreasing,
        }


def scan_n_star(cfg: SimConfig, t_end: float, n_max: int = 64, **kwargs) -> NStarScan:
    """Find the smallest n with q_hat(n) < 0.

    q_hat is evaluated at n = 1, 2, 4, 8, ... until it turns negative (each
    evaluation is a full co-evolution run, so the doubling keeps the count
    low), then the first sign change is located by integer bisection.
    """
    q_hats: dict[int, float] = {}
    series: dict[int, TraceSeries] = {}

    def q(n):
        if n not in q_hats:
            ts = q_n_estimate(cfg, n, t_end, **kwargs)
            q_hats[n] = ts.q_hat
            series[n] = ts
        return q_hats[n]

    n_star = None
    lo = None
    n = 1
    while n <= n_max:
        if q(n) < 0:
            n_star = n
            break
        lo = n
        n *= 2
    if n_star is not None and lo is not None:
        hi = n_star
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if q(mid) < 0:
                hi = mid
            else:
                lo = mid
        n_star = hi

    ns = sorted(q_hats)
    tail = [q_hats[m] for m in ns[max(0, len(ns) - 3):]]
    decreasing = all(tail[i + 1] < tail[i] for i in range(len(tail) - 1)) if len(tail) > 1 else True
    return NStarScan(q_hats=q_hats, n_star=n_star, eventually_decreasing=decreasing,
                     series=series)
