"""Lattice flows on recurrence-coefficient space and their time integration.

The two-parameter flow ("extended relativistic Toda lattice") evolves the
recurrence coefficients of L-orthogonal polynomials:

    beta_dot_n  = p beta_n (alpha_n - alpha_{n+1})
                  + q beta_n (alpha_{n+1}/(beta_{n+1} beta_n)
                              - alpha_n/(beta_n beta_{n-1})),
    alpha_dot_n = p alpha_n (alpha_{n-1} + beta_{n-1} - alpha_{n+1} - beta_n)
                  + q alpha_n (1/beta_{n-1} - 1/beta_n),

for n >= 1 with beta_0 = 1, alpha_0 = -1, alpha_1 = 0.  The combinations
gamma_n = alpha_{n+1} + beta_n obey

    gamma_dot_n = p (alpha_n gamma_n - alpha_{n+1} gamma_{n+1})
                  + q (alpha_{n+1}/beta_n - alpha_n/beta_{n-1}),

which is exactly alpha_dot_{n+1} + beta_dot_n.  Specializations: (p, q) =
(0, 1) and (1, 0) are the two classical relativistic Toda forms, and on the
symmetric manifold beta_n = sqrt(q) (p = 1) the alpha equation closes to the
Langmuir/Volterra lattice alpha_dot_n = alpha_n (alpha_{n-1} - alpha_{n+1}).

Finite truncation closes the system with alpha_{N+1} = 0.  For comparison
against semi-infinite measure-derived coefficients, ``integrate_buffered``
integrates extra sites with finite closure at the far end and reports only a
prefix, validating the buffer by doubling (and escalating it when the
validation fails, which happens when coefficients grow with site index).

The right-hand sides divide by beta_n and beta_{n-1}; a beta crossing zero is
a genuine blow-up of the flow and is detected (SingularDenominator), never
regularized.  Integration uses a classical 4th-order step with step-doubling
error control (error-per-unit-step acceptance, so global error scales
linearly with the tolerance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (BufferTooSmall, NotSymmetricState, PositivityLost,
                     SingularDenominator, StepUnderflow)

#: |beta_n| below this is treated as a blow-up of the flow
EPS_SING = 1e-12

_NAN = complex(float("nan"), float("nan"))


# ---------------------------------------------------------------------------
# State containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeState:
    """Phase point: beta_1..beta_N and alpha_1..alpha_{N+1} at time t.

    ``closure == "finite"`` means alpha_{N+1} = 0 exactly (self-contained
    truncation; every right-hand side is defined at every site).  A
    ``"buffered"`` state is a reported prefix of a longer integration and may
    carry the true nonzero alpha_{N+1}; top-site derivatives that would need
    beta_{N+1} are then NaN.
    """

    p: complex
    q: complex
    t: float
    beta: tuple
    alpha: tuple
    closure: str = "finite"

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(self.beta))
        object.__setattr__(self, "alpha", tuple(self.alpha))
        object.__setattr__(self, "p", complex(self.p))
        object.__setattr__(self, "q", complex(self.q))
        if self.closure not in ("finite", "buffered"):
            raise ValueError(f"unknown closure {self.closure!r}")
        if len(self.alpha) != len(self.beta) + 1:
            raise ValueError("need alpha_1..alpha_{N+1} alongside beta_1..beta_N")
        if self.alpha[0] != 0:
            raise ValueError("alpha_1 must be 0")
        if self.closure == "finite" and self.alpha[-1] != 0:
            raise ValueError("finite closure requires alpha_{N+1} = 0")
        for i, b in enumerate(self.beta):
            if abs(b) < EPS_SING:
                raise SingularDenominator(i + 1, b, t=self.t)

    @property
    def N(self) -> int:
        return len(self.beta)

    def beta_at(self, n: int):
        return 1 if n == 0 else self.beta[n - 1]

    def alpha_at(self, n: int):
        return -1 if n == 0 else self.alpha[n - 1]

    def gamma_at(self, n: int):
        """gamma_n = alpha_{n+1} + beta_n for 1 <= n <= N."""
        return self.alpha[n] + self.beta[n - 1]

    def prefix(self, n: int) -> "LatticeState":
        """First n sites with the true alpha_{n+1}; closure becomes buffered."""
        if n >= self.N:
            return self
        return LatticeState(self.p, self.q, self.t, self.beta[:n],
                            self.alpha[:n + 1], closure="buffered")


def state_from_coeffs(p, q, t, beta, alpha_free, closure="finite", alpha_top=0):
    """Assemble a state from beta_1..beta_N and the free alpha_2..alpha_N."""
    alpha = (0,) + tuple(alpha_free) + (alpha_top,)
    return LatticeState(p=p, q=q, t=t, beta=tuple(beta), alpha=alpha, closure=closure)


@dataclass(frozen=True)
class Trajectory:
    """Snapshots at requested output times plus step statistics."""

    times: tuple
    states: tuple
    step_stats: dict

    def __post_init__(self):
        ts = self.times
        if any(ts[i + 1] <= ts[i] for i in range(len(ts) - 1)):
            raise ValueError("output times must be strictly increasing")

    @property
    def final(self) -> LatticeState:
        return self.states[-1]


# ---------------------------------------------------------------------------
# Right-hand sides (generic over the scalar type)
# ---------------------------------------------------------------------------

def _check_betas(beta, t=None):
    for i, b in enumerate(beta):
        if abs(b) < EPS_SING:
            raise SingularDenominator(i + 1, b, t=t)


def _rhs_ertl_core(p, q, beta, alpha, t=None):
    """dbeta (length N) and dalpha (length N+1) for given boundary data.

    ``beta`` lists beta_1..beta_N, ``alpha`` lists alpha_1..alpha_{N+1}.
    Entries that would require beta_{N+1} are 0 when alpha_{N+1} = 0 (the
    factor multiplies everything) and NaN otherwise.
    """
    N = len(beta)
    _check_betas(beta, t)
    b = lambda n: 1 if n == 0 else beta[n - 1]
    a = lambda n: -1 if n == 0 else alpha[n - 1]

    dbeta = []
    for n in range(1, N + 1):
        lead = p * b(n) * (a(n) - a(n + 1))
        drag_in = a(n) / (b(n) * b(n - 1))
        if n < N:
            drag_out = a(n + 1) / (b(n + 1) * b(n))
        elif alpha[N] == 0:
            drag_out = 0
        else:
            dbeta.append(_NAN)
            continue
        dbeta.append(lead + q * b(n) * (drag_out - drag_in))

    dalpha = []
    for n in range(1, N + 2):
        if n == N + 1:
            # alpha_dot_{N+1} needs beta_{N+1} unless alpha_{N+1} = 0
            dalpha.append(0 if alpha[N] == 0 else _NAN)
            continue
        lead = p * a(n) * (a(n - 1) + b(n - 1) - a(n + 1) - b(n))
        drag = q * a(n) * (1 / b(n - 1) - 1 / b(n))
        dalpha.append(lead + drag)
    return dbeta, dalpha


def rhs_ertl(state: LatticeState):
    """Two-parameter flow; returns (dbeta_1..N, dalpha_1..N+1)."""
    return _rhs_ertl_core(state.p, state.q, state.beta, state.alpha, state.t)


def rhs_rtl1(state: LatticeState):
    """Specialization p = 0, q = 1 (shares the generic kernel verbatim)."""
    return _rhs_ertl_core(0, 1, state.beta, state.alpha, state.t)


def rhs_rtl2(state: LatticeState):
    """Specialization p = 1, q = 0 (shares the generic kernel verbatim)."""
    return _rhs_ertl_core(1, 0, state.beta, state.alpha, state.t)


def rhs_gamma(state: LatticeState):
    """gamma_dot_1..gamma_dot_N; equals dalpha shifted by one plus dbeta."""
    N = state.N
    beta, alpha = state.beta, state.alpha
    _check_betas(beta, state.t)
    p, q = state.p, state.q
    b = lambda n: 1 if n == 0 else beta[n - 1]
    a = lambda n: -1 if n == 0 else alpha[n - 1]
    g = lambda n: alpha[n] + beta[n - 1]  # gamma_n, 1 <= n <= N

    out = []
    for n in range(1, N + 1):
        if n < N:
            head = a(n) * g(n) - a(n + 1) * g(n + 1)
        elif alpha[N] == 0:
            head = a(N) * g(N)
        else:
            out.append(_NAN)
            continue
        out.append(p * head + q * (a(n + 1) / b(n) - a(n) / b(n - 1)))
    return out


#: tolerance for the frozen-beta check of the symmetric reduction
SYMMETRY_TOL = 1e-8


def rhs_langmuir(state: LatticeState):
    """Volterra flow alpha_dot_n = alpha_n (alpha_{n-1} - alpha_{n+1}).

    Requires the symmetric manifold beta_n = sqrt(q) (q real positive, p
    absorbed to 1); also verifies that the generic beta equation vanishes
    there, since the manifold must be invariant.  Returns dalpha_1..N+1.
    """
    q = state.q
    if abs(q.imag) > 1e-12 or q.real <= 0:
        raise NotSymmetricState("symmetric reduction needs real positive q")
    sq = math.sqrt(q.real)
    dev = max(abs(b - sq) for b in state.beta)
    if dev > SYMMETRY_TOL:
        raise NotSymmetricState(f"max |beta_n - sqrt(q)| = {dev:.3e}")

    dbeta, _ = _rhs_ertl_core(1, q, state.beta, state.alpha, state.t)
    scale = 1.0 + max(abs(a) for a in state.alpha)
    bad = max((abs(d) for d in dbeta if d == d), default=0.0)
    if bad > 1e-12 * scale:
        raise NotSymmetricState(f"beta equation does not vanish: {bad:.3e}")

    alpha = state.alpha
    N = state.N
    a = lambda n: -1 if n == 0 else alpha[n - 1]
    out = []
    for n in range(1, N + 2):
        if n == N + 1:
            out.append(0 if alpha[N] == 0 else _NAN)
            continue
        up = a(n + 1) if n <= N else 0
        out.append(a(n) * (a(n - 1) - up))
    return out


_RHS_TABLE = {
    "ertl": rhs_ertl,
    "rtl1": rhs_rtl1,
    "rtl2": rhs_rtl2,
    "langmuir": None,  # handled specially: beta frozen
}


# ---------------------------------------------------------------------------
# Time integration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepControl:
    """Step-size policy for the classical 4th-order one-step method.

    Acceptance is error-per-unit-step: a step of size h is accepted when the
    step-doubling estimate is below h * (abs_tol + rel_tol * |y|), making the
    accumulated error proportional to the tolerance.  ``fixed=True`` disables
    control entirely (used for order measurements).
    """

    h_init: float = 1e-2
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    fixed: bool = False
    h_min: float = 1e-14
    max_steps: int = 2_000_000
    enforce_positive: bool = False

    def __post_init__(self):
        if self.h_init <= 0 or self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances and h_init must be > 0")


def _rk4(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + (0.5 * h) * k1)
    k3 = f(t + 0.5 * h, y + (0.5 * h) * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_core(f, t0, y0, t_out, ctrl: StepControl, validate=None):
    """Drive y' = f(t, y) through the strictly increasing times ``t_out``.

    Steps are shortened to land exactly on every requested output time (no
    interpolation).  Returns (snapshots, stats).  ``validate(t, y)`` may raise
    to abort (singularity / positivity loss); the offending step is bracketed.
    """
    y = np.array(y0, dtype=complex)
    t = float(t0)
    h = ctrl.h_init
    accepted = rejected = 0
    max_err = 0.0
    snaps = []

    for target in t_out:
        while target - t > 1e-15 * max(abs(target), 1.0):
            if accepted + rejected > ctrl.max_steps:
                raise StepUnderflow(f"step budget exhausted at t={t}")
            h_try = min(h, target - t)
            try:
                if ctrl.fixed:
                    y_new = _rk4(f, t, y, h_try)
                    err = 0.0
                else:
                    full = _rk4(f, t, y, h_try)
                    mid = _rk4(f, t, y, 0.5 * h_try)
                    y_new = _rk4(f, t + 0.5 * h_try, mid, 0.5 * h_try)
                    err = float(np.max(np.abs(y_new - full))) / 15.0
            except SingularDenominator as exc:
                raise SingularDenominator(exc.n, exc.value,
                                          t_bracket=(t, t + h_try)) from None

            if not ctrl.fixed:
                tol = h_try * (ctrl.abs_tol + ctrl.rel_tol * float(np.max(np.abs(y))))
                if not math.isfinite(err) or err > tol:
                    rejected += 1
                    shrink = 0.1 if not math.isfinite(err) else \
                        max(0.1, 0.9 * (tol / err) ** 0.25)
                    h = h_try * shrink
                    if h < ctrl.h_min:
                        raise StepUnderflow(f"h = {h:.3e} below floor at t = {t}")
                    continue
                max_err = max(max_err, err)
                grow = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * (tol / err) ** 0.25))
                h = max(h_try * grow, ctrl.h_min)
            accepted += 1
            t = t + h_try
            y = y_new
            if validate is not None:
                try:
                    validate(t, y)
                except SingularDenominator as exc:
                    raise SingularDenominator(exc.n, exc.value,
                                              t_bracket=(t - h_try, t)) from None
        t = target
        snaps.append(y.copy())
    stats = {"accepted": accepted, "rejected": rejected, "max_err_est": max_err}
    return snaps, stats


def _pack(state: LatticeState):
    return np.array(list(state.beta) + list(state.alpha[1:-1]), dtype=complex)


def _unpack(y, N):
    beta = [complex(v) for v in y[:N]]
    alpha = [0j] + [complex(v) for v in y[N:]] + [0j]
    return beta, alpha


def integrate(state: LatticeState, t_end: float, rhs_id: str = "ertl",
              ctrl: StepControl | None = None, t_out=None) -> Trajectory:
    """Integrate a finite-closure state to t_end, snapshotting at t_out.

    The evolving unknowns are beta_1..beta_N and alpha_2..alpha_N; alpha_1
    and alpha_{N+1} stay pinned at 0.  ``rhs_id`` selects the system among
    {"ertl", "rtl1", "rtl2", "langmuir"}; the Langmuir system freezes beta.
    """
    if state.closure != "finite":
        raise ValueError("integration needs a finite-closure state")
    if t_end <= state.t:
        raise ValueError("t_end must exceed the state time")
    if rhs_id not in _RHS_TABLE:
        raise ValueError(f"unknown system {rhs_id!r}")
    ctrl = ctrl or StepControl()
    N = state.N
    p, q = state.p, state.q
    if rhs_id == "rtl1":
        p, q = 0j, 1 + 0j
    elif rhs_id == "rtl2":
        p, q = 1 + 0j, 0j

    if rhs_id == "langmuir":
        def f(t, y):
            beta, alpha = _unpack(y, N)
            da = rhs_langmuir(LatticeState(p, q, t, beta, alpha, closure="finite"))
            return np.array([0j] * N + da[1:-1], dtype=complex)
    else:
        def f(t, y):
            beta, alpha = _unpack(y, N)
            db, da = _rhs_ertl_core(p, q, beta, alpha, t)
            return np.array(db + da[1:-1], dtype=complex)

    def validate(t, y):
        babs = np.abs(y[:N])
        if babs.size and babs.min() < EPS_SING:
            i = int(babs.argmin())
            raise SingularDenominator(i + 1, complex(y[i]), t=t)
        if ctrl.enforce_positive:
            if np.any(y.real <= 0.0) or np.any(np.abs(y.imag) > 1e-8 * (1 + np.abs(y.real))):
                raise PositivityLost(f"coefficient left the positive cone at t={t}")

    if t_out is None:
        t_out = [t_end]
    t_out = sorted(float(x) for x in t_out)
    if t_out[-1] > t_end + 1e-15 * max(1.0, abs(t_end)):
        raise ValueError("output times must lie in (t, t_end]")
    if abs(t_out[-1] - t_end) > 1e-15 * max(1.0, abs(t_end)):
        t_out.append(float(t_end))
    if any(x <= state.t for x in t_out):
        raise ValueError("output times must lie in (t, t_end]")

    snaps, stats = integrate_core(f, state.t, _pack(state), t_out, ctrl, validate)
    states = [state]
    for tt, y in zip(t_out, snaps):
        beta, alpha = _unpack(y, N)
        states.append(LatticeState(state.p, state.q, tt, beta, alpha, closure="finite"))
    return Trajectory(times=(state.t,) + tuple(t_out), states=tuple(states),
                      step_stats=stats)


# ---------------------------------------------------------------------------
# Buffered truncation of semi-infinite systems
# ---------------------------------------------------------------------------

#: reported sites must move less than this under buffer doubling
BUFFER_VALIDATION_TOL = 1e-9


def default_buffer(n_report: int, t_span: float) -> int:
    return n_report + max(10, math.ceil(10.0 * t_span))


def integrate_buffered(make_state, n_report: int, t_end: float,
                       rhs_id: str = "ertl", ctrl: StepControl | None = None,
                       t_out=None, n_buf: int | None = None,
                       validate_buffer: bool = True, max_escalations: int = 3) -> Trajectory:
    """Integrate a semi-infinite system by truncating past a buffer zone.

    ``make_state(M)`` must return a finite-closure state with M sites (the
    truncated initial data).  The first ``n_report`` sites of the buffered run
    are reported, with the true alpha_{n_report+1} taken from the buffer.
    When ``validate_buffer`` is set, the run is repeated with twice the buffer
    and must agree on the reported sites to BUFFER_VALIDATION_TOL; the buffer
    escalates (doubling) until it does, or BufferTooSmall is raised.  The
    perturbation from the artificial far-end closure travels inward at a
    speed set by the local coefficient size, so systems whose coefficients
    grow with the site index need more buffer than the default.
    """
    state0 = make_state(n_report)  # cheap sanity probe of the callback
    if n_buf is None:
        n_buf = default_buffer(n_report, t_end - state0.t)

    def run(m):
        st = make_state(m)
        if st.N != m or st.closure != "finite":
            raise ValueError("make_state(M) must return a finite-closure state with M sites")
        return integrate(st, t_end, rhs_id=rhs_id, ctrl=ctrl, t_out=t_out)

    for _ in range(max_escalations + 1):
        traj = run(n_buf)
        if not validate_buffer:
            break
        check = run(2 * n_buf)
        dev = 0.0
        for a, b in zip(traj.states, check.states):
            pa, pb = a.prefix(n_report), b.prefix(n_report)
            dev = max(dev, max(abs(x - y) for x, y in zip(pa.beta, pb.beta)))
            dev = max(dev, max(abs(x - y) for x, y in zip(pa.alpha, pb.alpha)))
        if dev < BUFFER_VALIDATION_TOL:
            break
        n_buf *= 2
    else:
        raise BufferTooSmall(
            f"buffer {n_buf} failed doubling validation (deviation {dev:.3e})")

    states = tuple(s.prefix(n_report) for s in traj.states)
    stats = dict(traj.step_stats, n_buf=n_buf)
    return Trajectory(times=traj.times, states=states, step_stats=stats)
