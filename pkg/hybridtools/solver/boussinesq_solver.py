'''
@File    :  boussinesq_solver.py
@Desc    :  Transient Boussinesq natural-convection solver for the closed cavity:
            explicit upwind advection and central diffusion, Chorin pressure
            projection, and the mass-conservation residual used by the hybrid guard.
'''

import time
from dataclasses import dataclass, field

import numpy as np

from .._logging import get_logger
from ..exceptions import CFLViolationError, ConvergenceError
from ..fvm import (LaplacianOperator, PcgSettings, divergence, face_flux, face_gradient_flux,
                   gradient, laplacian_apply, pcg_solve, upwind_convect)
from ..mesh import BoundarySpec, FieldState, StructuredGrid, VELOCITY_NAMES, zero_flux

logger = get_logger(__name__)

CFL_LIMIT = 0.5
P_AMBIENT = 101325.0


@dataclass(frozen=True)
class GasConstants:
    """ Ideal-gas constants of air. """
    W: float = 0.02896   # kg/mol
    R: float = 8.314     # J/(mol K)


def ideal_gas_density(p_abs, T, constants: GasConstants = GasConstants()) -> np.ndarray:
    """ rho = p W / (R T) in kg/m^3. """
    return np.asarray(p_abs) * constants.W / (constants.R * np.asarray(T))


@dataclass
class PhysicsParams:
    """ Fluid properties and time step of a cavity case.

    Args:
        nu (float): Kinematic viscosity in m^2/s.
        alpha (float): Thermal diffusivity in m^2/s.
        beta (float): Thermal expansion coefficient in 1/K.
        g (float): Gravity magnitude in m/s^2, acting along -y.
        T_hot (float): Hot wall temperature in K.
        T_cold (float): Cold wall temperature in K.
        dt (float): Time step in s.
        length (float): Cavity height used for the Rayleigh number, m.
        T_ref (float, optional): Linearization temperature, defaults to the wall mean.
        p_ambient (float): Absolute background pressure in Pa.
    """
    nu: float
    alpha: float
    beta: float
    T_hot: float
    T_cold: float
    dt: float
    g: float = 9.81
    length: float = 1.0
    T_ref: float = None
    p_ambient: float = P_AMBIENT
    gas: GasConstants = field(default_factory=GasConstants)

    def __post_init__(self):
        if self.T_ref is None:
            self.T_ref = 0.5 * (self.T_hot + self.T_cold)
        assert self.nu > 0 and self.alpha > 0, 'viscosity and diffusivity must be positive'
        assert self.dt > 0, f'time step must be positive, got {self.dt}'
        assert self.rayleigh > 0, f'Rayleigh number must be positive, got {self.rayleigh}'

    @classmethod
    def from_rayleigh(cls, rayleigh, prandtl, nu, T_hot, T_cold, dt, length=1.0, g=9.81, **kwargs):
        """ Derive alpha from Pr and beta from Ra for the given walls and cavity size. """
        alpha = nu / prandtl
        beta = rayleigh * nu * alpha / (g * (T_hot - T_cold) * length ** 3)
        return cls(nu=nu, alpha=alpha, beta=beta, T_hot=T_hot, T_cold=T_cold, dt=dt,
                   g=g, length=length, **kwargs)

    @property
    def rayleigh(self) -> float:
        return self.g * self.beta * (self.T_hot - self.T_cold) * self.length ** 3 / (self.nu * self.alpha)

    @property
    def prandtl(self) -> float:
        return self.nu / self.alpha

    @property
    def rho_ref(self) -> float:
        return float(ideal_gas_density(self.p_ambient, self.T_ref, self.gas))

    def gravity(self, ndim) -> np.ndarray:
        g_vec = np.zeros(ndim)
        g_vec[1] = -self.g
        return g_vec


@dataclass(frozen=True)
class MassResidual:
    """ Mean squared cell divergence in 1/s^2. """
    value: float

    def __post_init__(self):
        assert self.value >= 0, f'mass residual must be nonnegative, got {self.value}'

    def __float__(self):
        return float(self.value)


def compute_mass_residual(state: FieldState, grid: StructuredGrid) -> MassResidual:
    """ Mean squared divergence of the face-interpolated cell velocity (unit density). """
    div = divergence(grid, face_flux(grid, state.u))
    return MassResidual(float(np.sum(div * div) / grid.n_cells))


def flux_residual(phi, grid: StructuredGrid) -> float:
    """ Mean squared divergence of a face flux field. """
    div = divergence(grid, phi)
    return float(np.sum(div * div) / grid.n_cells)


class BoussinesqSolver:
    """ Explicit projection solver of the buoyancy-driven cavity.

    One step advances the velocity with upwind convection, diffusion and the
    buoyancy force, projects it onto a divergence-free flux with a pure-Neumann
    pressure Poisson solve, and then advances the temperature with the projected
    flux.

    Args:
        grid (StructuredGrid): Case grid.
        boundary (BoundarySpec): Wall conditions of u components, T and p.
        params (PhysicsParams): Fluid properties and time step.
        pcg (PcgSettings, optional): Pressure solver settings.
    """

    def __init__(self, grid: StructuredGrid, boundary: BoundarySpec, params: PhysicsParams,
                 pcg: PcgSettings = None):
        self.grid = grid
        self.boundary = boundary
        self.params = params
        self.pcg = pcg or PcgSettings(tol=1e-8, max_iter=2000)
        self.pressure_op = LaplacianOperator(grid, boundary['p'])
        inv_h2 = sum(1.0 / h ** 2 for h in grid.spacing)
        diffusion_number = params.dt * max(params.nu, params.alpha) * inv_h2
        assert diffusion_number <= 0.5, \
            f'explicit diffusion unstable: dt*max(nu, alpha)*sum(1/h^2) = {diffusion_number:.3g} > 0.5'

    @property
    def velocity_names(self):
        return VELOCITY_NAMES[:self.grid.ndim]

    def initial_state(self, T0=None) -> FieldState:
        """ Quiescent cavity at uniform temperature (T_ref by default). """
        shape = self.grid.shape
        T = np.full(shape, self.params.T_ref if T0 is None else float(T0))
        p = np.zeros(shape)
        rho = self.density(p, T)
        return FieldState(u=np.zeros((self.grid.ndim,) + shape), T=T, p=p, rho=rho,
                          phi=zero_flux(self.grid), time=0.0, step=0, dt=self.params.dt)

    def absolute_pressure(self, p) -> np.ndarray:
        """ Absolute pressure in Pa from the kinematic pressure field. """
        return self.params.p_ambient + self.params.rho_ref * np.asarray(p)

    def density(self, p, T) -> np.ndarray:
        return ideal_gas_density(self.absolute_pressure(p), T, self.params.gas)

    def cfl(self, u) -> float:
        dt = self.params.dt
        return max(float(np.max(np.abs(u[d]))) * dt / self.grid.spacing[d] for d in range(self.grid.ndim))

    def cfd_step(self, state: FieldState) -> FieldState:
        """ Advance the state by one time step.

        Raises:
            CFLViolationError: max|u| dt / h exceeds 0.5.
            ConvergenceError: The pressure solve did not converge.
        """
        grid, prm = self.grid, self.params
        dt = prm.dt
        cfl = self.cfl(state.u)
        if cfl > CFL_LIMIT:
            raise CFLViolationError(cfl, CFL_LIMIT)

        g_vec = prm.gravity(grid.ndim)
        buoyancy = -prm.beta * (state.T - prm.T_ref)
        u_star = np.empty_like(state.u)
        for c, name in enumerate(self.velocity_names):
            faces = self.boundary[name]
            rhs = -upwind_convect(grid, state.phi, state.u[c], faces) \
                + laplacian_apply(grid, state.u[c], prm.nu, faces) \
                + g_vec[c] * buoyancy
            u_star[c] = state.u[c] + dt * rhs

        phi_star = face_flux(grid, u_star)
        pre_residual = flux_residual(phi_star, grid)
        solve = pcg_solve(self.pressure_op, divergence(grid, phi_star) / dt, self.pcg)
        if not solve.converged:
            raise ConvergenceError('pressure Poisson solve did not converge', solve.iterations, solve.residual)
        p = solve.x

        u = u_star - dt * gradient(grid, p, self.boundary['p'])
        phi = tuple(f - dt * g for f, g in zip(phi_star, face_gradient_flux(grid, p, self.boundary['p'])))

        faces_T = self.boundary['T']
        T = state.T + dt * (-upwind_convect(grid, phi, state.T, faces_T)
                            + laplacian_apply(grid, state.T, prm.alpha, faces_T))

        logger.debug(f'step {state.step + 1}: cfl {cfl:.3f}, pcg {solve.iterations} it, '
                     f'div^2 {pre_residual:.3e} -> {flux_residual(phi, grid):.3e}')
        return FieldState(u=u, T=T, p=p, rho=self.density(p, T), phi=phi,
                          time=state.time + dt, step=state.step + 1, dt=dt)

    def cfd_run_burst(self, state: FieldState, n_steps: int, ledger=None) -> list:
        """ Run `n_steps` consecutive steps and return every new state.

        Args:
            state (FieldState): Start state (not included in the output).
            n_steps (int): Number of steps, at least 1.
            ledger (HybridLedger, optional): Receives the wall time of each step.

        Returns:
            list[FieldState]: The `n_steps` new states in time order.
        """
        assert n_steps >= 1, f'a burst needs at least one step, got {n_steps}'
        snapshots = []
        for _ in range(n_steps):
            tic = time.perf_counter()
            state = self.cfd_step(state)
            if ledger is not None:
                ledger.record_cfd(time.perf_counter() - tic)
            snapshots.append(state)
        return snapshots
