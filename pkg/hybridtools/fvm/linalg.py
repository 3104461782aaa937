'''
@File    :  linalg.py
@Desc    :  Preconditioned conjugate gradient for the Laplacian systems of the solver
            and of the flux correction. Jacobi and zero-fill incomplete Cholesky
            preconditioners are available.
'''

from collections import namedtuple
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import LinearOperator, cg, splu

from .._logging import get_logger
from ..exceptions import ConvergenceError
from .operators import LaplacianOperator

logger = get_logger(__name__)

PcgResult = namedtuple('PcgResult', ['x', 'iterations', 'residual', 'converged', 'history'])

PRECONDITIONERS = ('jacobi', 'ic')


@dataclass
class PcgSettings:
    """ Stopping rule and preconditioner of `pcg_solve`.

    Args:
        tol (float): Relative residual target ||b - Ax|| / ||b||.
        max_iter (int): Iteration cap.
        preconditioner (str): 'jacobi' or 'ic'.
        record_history (bool): Keep every iterate (small systems and tests only).
    """
    tol: float = 1e-8
    max_iter: int = 1000
    preconditioner: str = 'ic'
    record_history: bool = False

    def __post_init__(self):
        assert self.tol > 0, f'tolerance must be positive, got {self.tol}'
        assert self.max_iter > 0, f'max_iter must be positive, got {self.max_iter}'
        assert self.preconditioner in PRECONDITIONERS, \
            f"unknown preconditioner '{self.preconditioner}', expected one of {PRECONDITIONERS}"


class IncompleteCholesky:
    """ Zero-fill incomplete Cholesky factor M = (D + L) D^-1 (D + L^T).

    Only the modified diagonal D is computed; the off-diagonal part is the
    strictly lower triangle of A itself.

    Args:
        matrix (scipy.sparse.spmatrix): Symmetric matrix with positive diagonal.
        shift (float): Added to the diagonal before factoring (singular operators).
    """

    def __init__(self, matrix, shift=0.0):
        A = sps.csr_matrix(matrix, dtype=float)
        n = A.shape[0]
        lower = sps.tril(A, k=-1, format='csr')
        diag = A.diagonal() + shift
        pivots = np.empty(n)
        indptr, indices, data = lower.indptr, lower.indices, lower.data
        for i in range(n):
            cols = indices[indptr[i]:indptr[i + 1]]
            vals = data[indptr[i]:indptr[i + 1]]
            pivots[i] = diag[i] - np.sum(vals * vals / pivots[cols])
            if pivots[i] <= 0:
                raise ConvergenceError(f'incomplete Cholesky breakdown at row {i}', 0, np.nan)
        self.pivots = pivots
        D = sps.diags(pivots, format='csc')
        options = dict(permc_spec='NATURAL', diag_pivot_thresh=0.0)
        self._lower = splu((D + lower).tocsc(), **options)
        self._upper = splu((D + lower.T).tocsc(), **options)

    def solve(self, r) -> np.ndarray:
        y = self._lower.solve(np.asarray(r, dtype=float))
        return self._upper.solve(self.pivots * y)

    def as_operator(self) -> LinearOperator:
        n = self.pivots.size
        return LinearOperator((n, n), matvec=self.solve, dtype=float)


def _build_preconditioner(kind, matrix, singular):
    if kind == 'jacobi':
        inv = 1.0 / matrix.diagonal()
        return LinearOperator(matrix.shape, matvec=lambda r: inv * r, dtype=float)
    shift = 1e-6 * float(matrix.diagonal().max()) if singular else 0.0
    return IncompleteCholesky(matrix, shift=shift).as_operator()


def _preconditioner(op, kind, matrix):
    """ Preconditioner of `op`, built on first use and kept on the operator. """
    cache = getattr(op, 'preconditioners', None)
    if cache is None:
        return _build_preconditioner(kind, matrix, op.singular)
    if kind not in cache:
        cache[kind] = _build_preconditioner(kind, matrix, op.singular)
    return cache[kind]


def pcg_solve(op: LaplacianOperator, b, settings: PcgSettings = None, x0=None) -> PcgResult:
    """ Solve `op x = b` by preconditioned conjugate gradient.

    The Laplacian is negative (semi-)definite, so the system is solved as
    (-A) x = -b. For the pure-Neumann operator the right-hand side and the
    solution are projected onto zero mean.

    Args:
        op (LaplacianOperator): System operator.
        b (np.ndarray): Right-hand side, flat or grid-shaped.
        settings (PcgSettings): Stopping rule; defaults to `PcgSettings()`.
        x0 (np.ndarray, optional): Initial guess.

    Returns:
        PcgResult: Solution in the shape of `b`, iterations taken, final relative
                   residual, convergence flag and (optionally) the iterates.

    Raises:
        ConvergenceError: The iteration produced NaN or Inf.
    """
    settings = settings or PcgSettings()
    b = np.asarray(b, dtype=float)
    out_shape = b.shape
    rhs = b.ravel().copy()
    if op.singular:
        rhs -= rhs.mean()

    norm_b = np.linalg.norm(rhs)
    if norm_b == 0.0:
        return PcgResult(np.zeros(out_shape), 0, 0.0, True, [])

    A = op.matrix
    sign = -1.0 if np.all(A.diagonal() < 0) else 1.0
    A = sign * A
    rhs = sign * rhs
    M = _preconditioner(op, settings.preconditioner, A)

    iterations = 0
    history = []

    def count(xk):
        nonlocal iterations
        iterations += 1
        if settings.record_history:
            history.append(xk.copy())

    guess = None if x0 is None else np.asarray(x0, dtype=float).ravel()
    x, info = cg(A, rhs, x0=guess, rtol=settings.tol, atol=0.0,
                 maxiter=settings.max_iter, M=M, callback=count)
    if not np.all(np.isfinite(x)):
        raise ConvergenceError('non-finite value in conjugate gradient iterate', iterations, np.nan)
    if op.singular:
        x = x - x.mean()

    residual = float(np.linalg.norm(rhs - A @ x) / norm_b)
    converged = info == 0
    if not converged:
        logger.warning(f'PCG stopped after {iterations} iterations, relative residual {residual:.3e}')
    return PcgResult(x.reshape(out_shape), iterations, residual, converged, history)
