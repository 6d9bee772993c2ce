"""Tensor-factor bookkeeping for operators on d^n dimensional product spaces.

Sites of a region are tensor factors in ascending vertex-id order; basis
index of a product state is sum_i digit_i * d**(n-1-i) (first site most
significant).  Everything here is dtype-preserving: real inputs stay real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


DEFAULT_NORM_SEED = 7


def remap_indices(indices: np.ndarray, order: list[int], n: int, d: int) -> np.ndarray:
    """Map basis indices whose factor order is `order` to plain 0..n-1 order."""
    out = np.zeros_like(indices)
    for j, site in enumerate(order):
        digit = (indices // d ** (n - 1 - j)) % d
        out += digit * d ** (n - 1 - site)
    return out


def embed_sparse(block: np.ndarray, positions: tuple[int, ...], n: int, d: int) -> sp.csr_matrix:
    """block acting on the given factor positions, identity elsewhere (CSR)."""
    m = len(positions)
    rest = [p for p in range(n) if p not in positions]
    order = list(positions) + rest
    K = sp.kron(sp.coo_matrix(block), sp.identity(d ** (n - m), format="coo"), format="coo")
    tgt_row = remap_indices(K.row.astype(np.int64), order, n, d)
    tgt_col = remap_indices(K.col.astype(np.int64), order, n, d)
    out = sp.csr_matrix((K.data, (tgt_row, tgt_col)), shape=K.shape)
    out.sum_duplicates()
    return out


@dataclass(eq=False)
class SiteBlockOperator:
    """A small matrix acting on selected tensor factors of a d^n space.

    Applications go through reshape/tensordot and never materialize the
    d^n x d^n matrix, so products of many of these stay cheap.
    """

    block: np.ndarray
    positions: tuple[int, ...]
    n: int
    d: int

    def __post_init__(self):
        self.positions = tuple(self.positions)
        m = len(self.positions)
        if self.block.shape != (self.d ** m, self.d ** m):
            raise ValueError("block dimension does not match positions")
        if list(self.positions) != sorted(set(self.positions)):
            raise ValueError("positions must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.d ** self.n

    def _apply(self, mat: np.ndarray, x: np.ndarray) -> np.ndarray:
        m = len(self.positions)
        xt = x.reshape((self.d,) * self.n)
        bt = mat.reshape((self.d,) * (2 * m))
        y = np.tensordot(bt, xt, axes=(tuple(range(m, 2 * m)), self.positions))
        y = np.moveaxis(y, tuple(range(m)), self.positions)
        return np.ascontiguousarray(y).reshape(-1)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self._apply(self.block, x)

    def apply_adjoint(self, x: np.ndarray) -> np.ndarray:
        return self._apply(self.block.conj().T, x)

    def to_sparse(self) -> sp.csr_matrix:
        return embed_sparse(self.block, self.positions, self.n, self.d)

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()


@dataclass(eq=False)
class FactoredProjectorBlock:
    """V V^dag acting on selected tensor factors, kept in factored form.

    For kernel projectors of large sub-regions the rank is tiny compared to
    the block dimension, so applying two skinny matmuls beats storing the
    d^m x d^m projector.  The basis may be dense or sparse (one-hot kernel
    bases of diagonal Hamiltonians stay sparse).
    """

    basis: object  # (d^m, r) ndarray or sparse, orthonormal columns
    positions: tuple[int, ...]
    n: int
    d: int

    def __post_init__(self):
        self.positions = tuple(self.positions)
        m = len(self.positions)
        if self.basis.shape[0] != self.d ** m:
            raise ValueError("basis rows do not match positions")

    @property
    def dim(self) -> int:
        return self.d ** self.n

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def _front(self, x: np.ndarray) -> np.ndarray:
        m = len(self.positions)
        xt = np.moveaxis(x.reshape((self.d,) * self.n), self.positions, range(m))
        return np.ascontiguousarray(xt).reshape(self.d ** m, -1)

    def _unfront(self, y: np.ndarray, dtype) -> np.ndarray:
        m = len(self.positions)
        yt = y.reshape((self.d,) * self.n)
        yt = np.moveaxis(yt, range(m), self.positions)
        return np.ascontiguousarray(yt).reshape(-1).astype(dtype, copy=False)

    def apply(self, x: np.ndarray) -> np.ndarray:
        V = self.basis
        xf = self._front(x)
        yf = V @ (V.conj().T @ xf)
        yf = np.asarray(yf)
        return self._unfront(yf, np.result_type(V.dtype, x.dtype))

    apply_adjoint = apply  # Hermitian

    def block_matrix(self) -> np.ndarray:
        V = self.basis.toarray() if sp.issparse(self.basis) else self.basis
        return V @ V.conj().T

    def to_sparse(self) -> sp.csr_matrix:
        return embed_sparse(self.block_matrix(), self.positions, self.n, self.d)

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()


class OperatorChain:
    """Ordered product factors[0] @ factors[1] @ ... applied to vectors.

    Factors may be SiteBlockOperator, ndarray, sparse matrices, or any
    object with apply/apply_adjoint.  An empty chain is the identity.
    """

    def __init__(self, factors, dim: int):
        self.factors = list(factors)
        self.dim = dim

    @property
    def shape(self):
        return (self.dim, self.dim)

    @staticmethod
    def _one(f, x, adjoint):
        if sp.issparse(f) or isinstance(f, np.ndarray):
            return (f.conj().T @ x) if adjoint else (f @ x)
        return f.apply_adjoint(x) if adjoint else f.apply(x)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        for f in reversed(self.factors):
            x = self._one(f, x, adjoint=False)
        return x

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        """Apply the conjugate transpose of the chain."""
        for f in self.factors:
            x = self._one(f, x, adjoint=True)
        return x

    def to_dense(self) -> np.ndarray:
        out = np.eye(self.dim)
        for f in self.factors:
            if isinstance(f, SiteBlockOperator):
                out = out @ f.to_dense()
            elif sp.issparse(f):
                out = out @ f.toarray()
            elif isinstance(f, np.ndarray):
                out = out @ f
            else:
                out = out @ f.to_dense()
        return out


class LinearCombination:
    """coeffs[0]*ops[0] + coeffs[1]*ops[1] + ... as a matvec-capable object."""

    def __init__(self, ops, coeffs, dim: int):
        self.ops = list(ops)
        self.coeffs = list(coeffs)
        self.dim = dim

    @property
    def shape(self):
        return (self.dim, self.dim)

    def matvec(self, x):
        out = None
        for c, op in zip(self.coeffs, self.ops):
            term = c * op.matvec(x)
            out = term if out is None else out + term
        return out

    def rmatvec(self, x):
        out = None
        for c, op in zip(self.coeffs, self.ops):
            term = np.conj(c) * op.rmatvec(x)
            out = term if out is None else out + term
        return out

    def to_dense(self):
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, op in zip(self.coeffs, self.ops):
            out = out + c * op.to_dense()
        return out


class ProjectorFromBasis:
    """Orthogonal projector V V^dag given an orthonormal (possibly sparse) basis V."""

    def __init__(self, basis, dim: int, complement: bool = False):
        self.basis = basis
        self.dim = dim
        self.complement = complement

    @property
    def shape(self):
        return (self.dim, self.dim)

    def matvec(self, x):
        V = self.basis
        px = V @ (V.conj().T @ x)
        return x - px if self.complement else px

    rmatvec = matvec  # Hermitian

    def apply(self, x):
        return self.matvec(x)

    apply_adjoint = apply

    def to_dense(self):
        V = self.basis
        V = V.toarray() if sp.issparse(V) else V
        P = V @ V.conj().T
        return np.eye(self.dim) - P if self.complement else P


def matfree_norm(op, seed: int = DEFAULT_NORM_SEED, tol: float = 1e-10) -> float:
    """Largest singular value of a matvec/rmatvec-capable operator.

    Lanczos on the Gram operator op^dag op; falls back to randomized power
    probes when ARPACK cannot converge (exactly-zero operators).
    """
    n = op.shape[1]
    if n <= 32:
        dense = op.to_dense() if hasattr(op, "to_dense") else op @ np.eye(n)
        return float(np.linalg.norm(dense, 2))
    rng = np.random.default_rng(seed)

    def gram(x):
        return op.rmatvec(op.matvec(x))

    v0 = rng.standard_normal(n)
    # exactly-zero (or numerically tiny) operators break Lanczos; probe first
    probe = gram(v0)
    pnorm = float(np.linalg.norm(probe))
    if pnorm <= 1e-26 * float(np.linalg.norm(v0)):
        return float(np.sqrt(pnorm / np.linalg.norm(v0)))
    G = spla.LinearOperator((n, n), matvec=gram, rmatvec=gram, dtype=probe.dtype)
    try:
        vals = spla.eigsh(
            G, k=1, which="LA", v0=v0, tol=tol,
            maxiter=max(2000, 20 * n), return_eigenvectors=False,
        )
        return float(np.sqrt(max(float(vals[-1]), 0.0)))
    except Exception:
        pass
    # power iteration fallback
    v = v0 / np.linalg.norm(v0)
    lam = 0.0
    for _ in range(200):
        w = gram(v)
        lam = float(np.real(np.vdot(v, w)))
        nw = float(np.linalg.norm(w))
        if nw <= 1e-300:
            return 0.0
        v = w / nw
    return float(np.sqrt(max(lam, 0.0)))
