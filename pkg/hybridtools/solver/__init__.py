from .boussinesq_solver import (BoussinesqSolver, GasConstants, MassResidual, PhysicsParams,
                                compute_mass_residual, flux_residual, ideal_gas_density)

__all__ = [
    'BoussinesqSolver', 'GasConstants', 'MassResidual', 'PhysicsParams',
    'compute_mass_residual', 'flux_residual', 'ideal_gas_density',
]
