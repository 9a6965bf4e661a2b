"""Operator assembly and the implicit time steppers.

The implicit step couples the temperature update and the flux law

    T_j^n = T_j^{n-1} - (dt/(rho c dx)) (q_{j+1}^n - q_j^n),        j = 0..J,
    (I - c_B L) q^n = c_r q^{n-1} - c_Q A_T T^n,                    j = 1..J,

with L the second-difference stencil, A_T the first-difference map on
temperatures, and boundary fluxes pinned to zero.  Substituting the first
relation into the second eliminates T^n exactly (A_T A_q = L), leaving one
tridiagonal system

    [I - (c_B + c_T dt) L] q^n = c_r q^{n-1} - c_Q A_T T^{n-1}

per step; the temperature update is then explicit.  step_coupled solves
this reduced system, which is algebraically identical to the full coupled
solve (the interleaved banded assembly is retained as the brute-force
reference).

step_vectorial_as_printed instead applies the closed-form update

    T^n = C T^{n-1} - c_q A_q B^{-1} q^{n-1},
    q^n = c_r B^{-1} q^{n-1} - c_Q B^{-1} A_T T^{n-1},
    C   = I + c_T A_q B^{-1} A_T,

verbatim.  That variant advances both fields from level n-1 and carries a
dt/dx^2 (not dt^2/dx^2) correction factor, so it is not equivalent to the
coupled solve at finite dt; it is kept as a comparison mode and the gap is
measured, never hidden.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .diagnostics import EnergyTrace, TraceAccumulator
from .discretization import Grid, State, build_grid
from .errors import GridMismatch, InvalidLimit, SingularPivot
from .linalg import BandedMatrix, DenseMatrix, TridiagonalMatrix, dense_solve, thomas_solve
from .model import MaterialParams, SimulationConfig, StepperKind


@dataclass(frozen=True)
class AssembledOperators:
    """Mesh-and-material dependent operators, immutable after assembly.

    Scalar factors (s := tau_q + dt):

        c_B = mu2*dt/(s*dx^2)          flux-Laplacian weight in B
        c_T = k*dt/(rho*c*s*dx^2)      printed temperature-correction factor
        c_q = tau_q*dt/(rho*c*s*dx)    printed flux-history factor
        c_Q = k*dt/(s*dx)              temperature-gradient weight
        c_r = tau_q/s                  flux relaxation weight
        c_flux = dt/(rho*c*dx)         flux-divergence weight of the T update

    All factors use (tau_q + dt), so tau_q = 0 needs no special casing.
    """

    J: int
    dx: float
    dt: float
    L: TridiagonalMatrix   # J x J second-difference stencil (-2 diag, 1 off)
    B: TridiagonalMatrix   # I - c_B * L, strictly diagonally dominant
    c_B: float
    c_T: float
    c_q: float
    c_Q: float
    c_r: float
    c_flux: float
    reduced_band: np.ndarray  # solve_banded form of I - (c_B + c_T*dt) * L


def assemble(params: MaterialParams, grid: Grid) -> AssembledOperators:
    """Build the stencils and scalar factors for one (params, grid) pair."""
    J, dx, dt = grid.J, grid.dx, grid.dt
    s = params.tau_q + dt
    rc = params.rho_c
    c_B = params.mu2 * dt / (s * dx * dx)
    c_T = params.k * dt / (rc * s * dx * dx)
    c_q = params.tau_q * dt / (rc * s * dx)
    c_Q = params.k * dt / (s * dx)
    c_r = params.tau_q / s
    c_flux = dt / (rc * dx)
    off = np.ones(J - 1)
    L = TridiagonalMatrix(lower=off, diag=-2.0 * np.ones(J), upper=off)
    B = TridiagonalMatrix(lower=-c_B * off, diag=(1.0 + 2.0 * c_B) * np.ones(J),
                          upper=-c_B * off)
    w = c_B + c_T * dt
    band = np.zeros((3, J))
    band[0, 1:] = -w
    band[1, :] = 1.0 + 2.0 * w
    band[2, :-1] = -w
    return AssembledOperators(J=J, dx=dx, dt=dt, L=L, B=B, c_B=c_B, c_T=c_T,
                              c_q=c_q, c_Q=c_Q, c_r=c_r, c_flux=c_flux,
                              reduced_band=band)


def aq_matrix(J: int) -> DenseMatrix:
    """(J+1) x J flux-divergence map: unit diagonal, -1 subdiagonal, final row -1."""
    a = np.zeros((J + 1, J))
    a[np.arange(J), np.arange(J)] = 1.0
    a[np.arange(1, J + 1), np.arange(J)] = -1.0
    return DenseMatrix(a)


def at_matrix(J: int) -> DenseMatrix:
    """J x (J+1) temperature-difference map: -1 diagonal, +1 superdiagonal."""
    a = np.zeros((J, J + 1))
    a[np.arange(J), np.arange(J)] = -1.0
    a[np.arange(J), np.arange(1, J + 1)] = 1.0
    return DenseMatrix(a)


def _apply_aq(q_interior: np.ndarray) -> np.ndarray:
    # differences q_{j+1} - q_j for j = 0..J with zero boundary fluxes
    return np.diff(np.concatenate(([0.0], q_interior, [0.0])))


def _solve_reduced(ops: AssembledOperators, rhs: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.solve_banded((1, 1), ops.reduced_band, rhs,
                                         check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularPivot(str(exc)) from exc


def _advance_split(ops: AssembledOperators, m: float, e: np.ndarray,
                   qi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One coupled step on the mean/fluctuation representation.

    The uniform component m is an exact fixed point, so it is carried
    outside the solve; every computed quantity then scales with the
    fluctuation, which keeps conservation and dissipation checks meaningful
    near equilibrium where e is ~10 orders below m.
    """
    rhs = ops.c_r * qi - ops.c_Q * np.diff(e)
    qi_next = _solve_reduced(ops, rhs)
    e_next = e - ops.c_flux * _apply_aq(qi_next)
    return e_next, qi_next


def step_coupled(ops: AssembledOperators, params: MaterialParams, grid: Grid,
                 prev: State) -> State:
    """Advance one step by the exact coupled solve; the default stepper."""
    _check_state(grid, prev)
    m = float(np.mean(prev.T))
    e_next, qi_next = _advance_split(ops, m, prev.T - m, prev.q_interior)
    return State(T=m + e_next,
                 q=np.concatenate(([0.0], qi_next, [0.0])))


def step_fourier(ops: AssembledOperators, params: MaterialParams, grid: Grid,
                 prev: State) -> State:
    """Coupled step in the Fourier limit; requires tau_q = mu2 = 0.

    With both parameters zero the coupled system is implicit Euler for
    rho*c*T_t = -q_x, q = -k*T_x, and this stepper is the identical linear
    solve (same code path as step_coupled).
    """
    if not params.is_fourier:
        raise InvalidLimit(
            f"fourier stepper needs tau_q = mu2 = 0, got "
            f"tau_q={params.tau_q!r}, mu2={params.mu2!r}")
    return step_coupled(ops, params, grid, prev)


def step_vectorial_as_printed(ops: AssembledOperators, params: MaterialParams,
                              grid: Grid, prev: State) -> State:
    """Advance one step by the closed-form vectorial update, verbatim.

    Both updates read level n-1 only and every B^{-1} application is a
    tridiagonal solve.  Not equivalent to step_coupled at finite dt; use
    for gap measurement.  In the Fourier limit the explicit temperature
    correction is unstable at practical meshes, so long runs can overflow.
    """
    _check_state(grid, prev)
    T, qi = prev.T, prev.q_interior
    at_T = np.diff(T)
    binv_at_T = thomas_solve(ops.B, at_T)
    binv_q = thomas_solve(ops.B, qi)
    T_next = T + ops.c_T * _apply_aq(binv_at_T) - ops.c_q * _apply_aq(binv_q)
    qi_next = ops.c_r * binv_q - ops.c_Q * binv_at_T
    return State(T=T_next, q=np.concatenate(([0.0], qi_next, [0.0])))


def assemble_coupled_system(params: MaterialParams, grid: Grid,
                            prev: State) -> tuple[BandedMatrix, np.ndarray]:
    """Verbatim interleaved assembly of the implicit step equations.

    Unknowns are ordered (T_0, q_1, T_1, q_2, ..., T_J); rows are the
    untransformed step equations, giving bandwidth 2.  Used as the
    brute-force route that step_coupled is checked against.
    """
    _check_state(grid, prev)
    J, dx, dt = grid.J, grid.dx, grid.dt
    rc = params.rho_c
    n = 2 * J + 1
    a = np.zeros((n, n))
    b = np.zeros(n)

    def i_T(j: int) -> int:
        return 2 * j

    def i_q(j: int) -> int:
        return 2 * j - 1

    for j in range(J + 1):
        r = i_T(j)
        a[r, i_T(j)] = rc / dt
        if j + 1 <= J:
            a[r, i_q(j + 1)] += 1.0 / dx
        if j >= 1:
            a[r, i_q(j)] -= 1.0 / dx
        b[r] = rc / dt * prev.T[j]
    for j in range(1, J + 1):
        r = i_q(j)
        a[r, i_q(j)] = params.tau_q / dt + 1.0 + 2.0 * params.mu2 / dx**2
        if j + 1 <= J:
            a[r, i_q(j + 1)] = -params.mu2 / dx**2
        if j >= 2:
            a[r, i_q(j - 1)] = -params.mu2 / dx**2
        a[r, i_T(j)] += params.k / dx
        a[r, i_T(j - 1)] -= params.k / dx
        b[r] = params.tau_q / dt * prev.q[j]
    return BandedMatrix.from_dense(DenseMatrix(a), p=2), b


def step_coupled_reference(params: MaterialParams, grid: Grid,
                           prev: State) -> State:
    """Brute-force coupled step: dense solve of the interleaved system.

    O(J^3); intended for small J cross-checks of step_coupled.
    """
    system, b = assemble_coupled_system(params, grid, prev)
    x = dense_solve(system.to_dense(), b)
    q = np.zeros(grid.J + 2)
    q[1:-1] = x[1::2]
    return State(T=x[0::2], q=q)


@dataclass(frozen=True)
class Trajectory:
    """A completed run: strided state snapshots plus per-step diagnostics."""

    states: list[State]
    stored_steps: list[int]   # time indices of the stored states
    grid: Grid
    params: MaterialParams
    stepper_kind: StepperKind
    trace: EnergyTrace

    @property
    def final_state(self) -> State:
        return self.states[-1]


def _check_state(grid: Grid, state: State) -> None:
    if state.T.size != grid.J + 1:
        raise GridMismatch(
            f"state has {state.T.size} temperature nodes, grid expects {grid.J + 1}")


def run(params: MaterialParams, config: SimulationConfig, init: State,
        stride: int = 1) -> Trajectory:
    """Advance init over the full time mesh with the configured stepper.

    States are stored every `stride` steps (level 0 and the final level
    always included); energy diagnostics are recorded at every step
    regardless of stride.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    grid = build_grid(params, config)
    _check_state(grid, init)
    kind = config.stepper_kind
    if kind == StepperKind.FOURIER_LIMIT and not params.is_fourier:
        raise InvalidLimit("fourier_limit stepper needs tau_q = mu2 = 0")
    ops = assemble(params, grid)
    acc = TraceAccumulator(params, grid)
    states = [init]
    stored = [0]
    n_levels = grid.N + 2

    if kind == StepperKind.VECTORIAL_AS_PRINTED:
        state = init
        acc.start(0.0, state.T, state.q_interior)
        for n in range(1, n_levels):
            nxt = step_vectorial_as_printed(ops, params, grid, state)
            acc.record_step(0.0, state.T, state.q_interior, nxt.T, nxt.q_interior)
            state = nxt
            if n % stride == 0 or n == n_levels - 1:
                states.append(state)
                stored.append(n)
    else:
        m = float(np.mean(init.T))
        e = init.T - m
        qi = init.q_interior.copy()
        acc.start(m, e, qi)
        for n in range(1, n_levels):
            e_next, qi_next = _advance_split(ops, m, e, qi)
            acc.record_step(m, e, qi, e_next, qi_next)
            e, qi = e_next, qi_next
            if n % stride == 0 or n == n_levels - 1:
                states.append(State(T=m + e, q=np.concatenate(([0.0], qi, [0.0]))))
                stored.append(n)

    return Trajectory(states=states, stored_steps=stored, grid=grid,
                      params=params, stepper_kind=kind, trace=acc.build())
