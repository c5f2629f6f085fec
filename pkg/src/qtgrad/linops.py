"""Symmetric linear operators used by every solver."""

import numpy as np
import scipy.sparse as sp

from . import kernels


def _as_vector(x, n):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


def _as_block(X, n):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != n:
        raise ValueError(f"expected an array with {n} rows, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix has non-finite entries")
    return X


class LinearOperator:
    """Symmetric operator ``A`` of dimension ``n``.

    Subclasses implement ``_matvec`` for a vector and optionally
    ``_matmat`` for an ``n x r`` block.
    """

    n: int

    @property
    def shape(self):
        return (self.n, self.n)

    def matvec(self, x):
        return self._matvec(_as_vector(x, self.n))

    def matmat(self, X):
        return self._matmat(_as_block(X, self.n))

    def _matmat(self, X):
        return np.column_stack([self._matvec(X[:, j]) for j in range(X.shape[1])])

    def __matmul__(self, x):
        x = np.asarray(x)
        return self.matvec(x) if x.ndim == 1 else self.matmat(x)

    def to_dense(self):
        return self._matmat(np.eye(self.n))


class DenseOperator(LinearOperator):
    def __init__(self, M, check_symmetric=True):
        M = np.array(M, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"dense operator must be square, got {M.shape}")
        if check_symmetric and not np.allclose(M, M.T, rtol=1e-12, atol=1e-14 * max(1.0, np.abs(M).max())):
            raise ValueError("dense operator is not symmetric")
        self.M = M
        self.n = M.shape[0]

    def _matvec(self, x):
        return self.M @ x

    def _matmat(self, X):
        return self.M @ X

    def to_dense(self):
        return self.M.copy()


class DiagonalOperator(LinearOperator):
    def __init__(self, d):
        d = np.array(d, dtype=np.float64)
        if d.ndim != 1:
            raise ValueError("diagonal must be a vector")
        self.d = d
        self.n = d.shape[0]

    def _matvec(self, x):
        return self.d * x

    def _matmat(self, X):
        return self.d[:, None] * X

    def to_dense(self):
        return np.diag(self.d)


class SparseOperator(LinearOperator):
    def __init__(self, M):
        M = sp.csr_matrix(M, dtype=np.float64)
        if M.shape[0] != M.shape[1]:
            raise ValueError(f"sparse operator must be square, got {M.shape}")
        self.M = M
        self.n = M.shape[0]

    def _matvec(self, x):
        return self.M @ x

    def _matmat(self, X):
        return np.asarray(self.M @ X)

    def to_dense(self):
        return self.M.toarray()


class LaplacianOperator(LinearOperator):
    """Negative 3D Laplacian on an ``nx x ny x nz`` grid, matrix-free.

    Grid axes of size one are dropped, so ``(m, 1, 1)`` is the 1D
    tridiagonal ``[-1, 2, -1]`` stencil.
    """

    def __init__(self, nx, ny, nz):
        for m in (nx, ny, nz):
            if int(m) < 1:
                raise ValueError(f"grid sizes must be >= 1, got {(nx, ny, nz)}")
        self.dims = (int(nx), int(ny), int(nz))
        self.n = self.dims[0] * self.dims[1] * self.dims[2]

    def _matvec(self, x):
        return kernels.laplacian_matvec(x, *self.dims)

    def _matmat(self, X):
        return kernels.laplacian_matvec(X, *self.dims)

    def eigenvalues(self):
        """All eigenvalues in ascending order, from the closed form."""
        axes = [m for m in self.dims if m > 1] or [1]
        total = np.zeros(1)
        for m in axes:
            k = np.arange(1, m + 1)
            lam = 2.0 - 2.0 * np.cos(k * np.pi / (m + 1))
            total = (total[:, None] + lam[None, :]).ravel()
        return np.sort(total)

    def to_sparse(self):
        axes = [m for m in self.dims if m > 1] or [1]
        nx, ny, nz = self.dims

        def t1(m):
            return sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1])

        def eye(m):
            return sp.identity(m)

        # index = i + nx*(j + ny*k): x varies fastest
        M = sp.csr_matrix((self.n, self.n))
        if nx > 1 or axes == [1]:
            M = M + sp.kron(eye(nz), sp.kron(eye(ny), t1(nx)))
        if ny > 1:
            M = M + sp.kron(eye(nz), sp.kron(t1(ny), eye(nx)))
        if nz > 1:
            M = M + sp.kron(t1(nz), sp.kron(eye(ny), eye(nx)))
        return sp.csr_matrix(M)

    def to_dense(self):
        return self.to_sparse().toarray()


def matvec(A, x):
    """Return ``A @ x``."""
    return A.matvec(x)


def mat_matvec(A, X):
    """Return ``A @ X`` for an ``n x r`` block ``X``."""
    return A.matmat(X)


def laplacian3d(nx, ny, nz):
    return LaplacianOperator(nx, ny, nz)


def as_operator(A):
    """Wrap arrays and sparse matrices in the matching operator class."""
    if isinstance(A, LinearOperator):
        return A
    if sp.issparse(A):
        return SparseOperator(A)
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        return DiagonalOperator(A)
    return DenseOperator(A)


def load_coo(path, n=None):
    """Read a symmetric sparse matrix from a coordinate text file.

    Each non-comment line holds ``row col value`` with 1-based indices; only
    one triangle is stored and is mirrored on load. Lines starting with
    ``%`` or ``#`` are skipped.
    """
    rows, cols, vals = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line[0] in "%#":
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'row col value'")
            i, j, v = int(parts[0]) - 1, int(parts[1]) - 1, float(parts[2])
            if i < 0 or j < 0:
                raise ValueError(f"{path}:{lineno}: indices are 1-based")
            rows.append(i)
            cols.append(j)
            vals.append(v)
            if i != j:
                rows.append(j)
                cols.append(i)
                vals.append(v)
    size = n if n is not None else (max(max(rows), max(cols)) + 1 if rows else 0)
    M = sp.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()
    return SparseOperator(M)


def save_coo(A, path):
    """Write the lower triangle of a symmetric operator in coordinate form."""
    M = sp.coo_matrix(sp.tril(sp.csr_matrix(A.to_dense() if not isinstance(A, SparseOperator) else A.M)))
    with open(path, "w") as fh:
        fh.write(f"% symmetric {A.n}\n")
        for i, j, v in zip(M.row, M.col, M.data):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")
