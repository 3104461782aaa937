from .operators import (LaplacianOperator, divergence, face_flux, face_gradient_flux, face_values,
                        gradient, laplacian_apply, neumann_faces, upwind_convect)
from .linalg import IncompleteCholesky, PcgResult, PcgSettings, pcg_solve

__all__ = [
    'LaplacianOperator', 'divergence', 'face_flux', 'face_gradient_flux', 'face_values',
    'gradient', 'laplacian_apply', 'neumann_faces', 'upwind_convect',
    'IncompleteCholesky', 'PcgResult', 'PcgSettings', 'pcg_solve',
]
