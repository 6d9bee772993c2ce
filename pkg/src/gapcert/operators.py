"""Operators on tensor-product spaces: Hamiltonian assembly, spectra, ground
projectors, operator norms, and the projector-reduction gap sandwich.

Dense eigensolvers handle dimensions up to DENSE_CAP; above that sparse
Lanczos iterations are used with deterministic start vectors.  Hard caps
guard against accidentally materializing astronomically large spaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._tensor import FactoredProjectorBlock, SiteBlockOperator, matfree_norm
from .errors import DimensionCapError, EigensolverError, RegionError
from .interaction import Interaction, InteractionTerm, phi_bounds, reduce_to_projectors
from .lattice import Region, make_region

DENSE_CAP = 4096
SPARSE_CAP = 2 ** 24
KERNEL_REL_TOL = 1e-9
DEFAULT_NUM_EIGS = 6
SOLVER_SEED = 1234


@dataclass(eq=False)
class GlobalOperator:
    """Hermitian operator on the d^len(region) space of a region."""

    region: Region
    d: int
    matrix: object  # ndarray or scipy sparse

    def __post_init__(self):
        self.region = make_region(self.region)
        dim = self.d ** len(self.region)
        if self.matrix.shape != (dim, dim):
            raise RegionError(
                f"operator dimension {self.matrix.shape} != d^|region| = {dim}"
            )

    @property
    def dim(self) -> int:
        return self.d ** len(self.region)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)

    def hermiticity_defect(self) -> float:
        m = self.matrix
        if sp.issparse(m):
            return float(abs(m - m.conj().T).max())
        return float(np.abs(m - m.conj().T).max())


def _positions(support: Region, region: Region) -> tuple[int, ...]:
    try:
        return tuple(region.index(v) for v in support)
    except ValueError:
        raise RegionError(f"support {support} outside region") from None


def embed(term: InteractionTerm, region: Region, d: int) -> GlobalOperator:
    """Kronecker embedding of a term into a region: term on its factors, id elsewhere."""
    region = make_region(region)
    pos = _positions(term.support, region)
    op = SiteBlockOperator(np.asarray(term.matrix), pos, len(region), d)
    return GlobalOperator(region, d, op.to_sparse())


def check_dimension(d: int, region, cap: int = SPARSE_CAP) -> int:
    n_sites = len(region)
    dim = d ** n_sites
    if dim > cap:
        raise DimensionCapError(
            f"region too large: d^{n_sites} = {dim} exceeds cap {cap}"
        )
    return dim


def hamiltonian(
    phi: Interaction,
    region: Region,
    projector_form: bool = False,
    cap: int = SPARSE_CAP,
) -> GlobalOperator:
    """Sum of all terms supported inside the region (reduced to projectors on request)."""
    region = make_region(region)
    if not region:
        raise RegionError("empty region")
    dim = check_dimension(phi.d, region, cap)
    source = phi
    if projector_form:
        contained = phi.terms_within(region)
        if contained:
            source = reduce_to_projectors(
                Interaction(contained, R=phi.R, d=phi.d)
            )
    H = sp.csr_matrix((dim, dim))
    for term in source.terms_within(region):
        pos = _positions(term.support, region)
        H = H + SiteBlockOperator(np.asarray(term.matrix), pos, len(region), phi.d).to_sparse()
    if all(not np.iscomplexobj(t.matrix) for t in source.terms_within(region)):
        H = H.astype(np.float64)
    return GlobalOperator(region, phi.d, H.tocsr())


@dataclass
class SpectralData:
    """Bottom of the spectrum: sorted eigenvalues, kernel dimension, gap."""

    eigenvalues: np.ndarray
    kernel_dim: int
    gap: float | None
    norm: float
    kernel_tol: float
    solver: str

    @property
    def gapless_trivial(self) -> bool:
        return self.gap is None


def _operator_norm_bound(H) -> float:
    """Cheap upper bound on ||H|| for tolerance scaling (max row sum)."""
    m = H.matrix if isinstance(H, GlobalOperator) else H
    if sp.issparse(m):
        return float(abs(m).sum(axis=1).max()) if m.nnz else 0.0
    return float(np.abs(m).sum(axis=1).max()) if m.size else 0.0


def spectral_data(
    H: GlobalOperator,
    num_eigs: int = DEFAULT_NUM_EIGS,
    dense_cap: int = DENSE_CAP,
    seed: int = SOLVER_SEED,
) -> SpectralData:
    """Lowest part of the spectrum via a dense or sparse Hermitian solver.

    The kernel tolerance is KERNEL_REL_TOL * max(1, ||H||); the gap is the
    smallest eigenvalue above it.  A zero (or fully kernel) spectrum yields
    gap None ("gapless-trivial").
    """
    dim = H.dim
    if dim <= dense_cap:
        w = np.linalg.eigvalsh(H.to_dense())
        norm = float(abs(w).max()) if w.size else 0.0
        tol = KERNEL_REL_TOL * max(1.0, norm)
        kernel_dim = int((w <= tol).sum())
        above = w[w > tol]
        gap = float(above[0]) if above.size else None
        keep = min(len(w), max(num_eigs, kernel_dim + 1))
        return SpectralData(w[:keep], kernel_dim, gap, norm, tol, "dense")
    return _sparse_spectral_data(H, num_eigs, seed)


def _eigsh_smallest(mat, k: int, seed: int):
    """Lowest-k Hermitian eigenvalues (values only; multiplicity-agnostic)."""
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(mat.shape[0])
    ncv = min(mat.shape[0], max(4 * k + 1, 64))
    try:
        out = spla.eigsh(
            mat, k=k, which="SA", v0=v0, ncv=ncv,
            maxiter=max(5000, 100 * k), return_eigenvectors=False,
        )
    except spla.ArpackNoConvergence as exc:
        raise EigensolverError(f"eigensolver failed: {exc}") from exc
    return np.sort(out)


def _shifted_block_kernel(mat, dim: int, tol: float, seed: int, max_kernel: int):
    """Kernel basis of a sparse PSD matrix by shift-inverted block iteration.

    A random block survives every multiplicity (unlike single-vector
    Lanczos, which structurally sheds degenerate copies), and the
    (H + sigma)^-1 transform gives an enormous kernel/excited contrast, so
    a handful of solve-and-orthogonalize rounds converge to machine level.
    Returns (V, ritz_above): kernel basis and the Ritz values above tol
    seen in the final block (lower bounds for the excited spectrum).
    """
    sigma = max(100.0 * tol, 1e-10)
    try:
        lu = spla.splu((mat + sigma * sp.identity(dim, format="csr")).tocsc())
    except RuntimeError as exc:
        raise EigensolverError(f"eigensolver failed: factorization: {exc}") from exc
    rng = np.random.default_rng(seed)
    k = 16
    while True:
        k = min(k, dim)
        X = rng.standard_normal((dim, k))
        if np.iscomplexobj(mat.data):
            X = X + 1j * rng.standard_normal((dim, k))
        for _ in range(4):
            X = lu.solve(X)
            X, _ = np.linalg.qr(X)
        T = X.conj().T @ (mat @ X)
        w, u = np.linalg.eigh((T + T.conj().T) / 2.0)
        keep = w <= tol
        if (~keep).sum() >= 2 or k == dim:
            V = X @ u[:, keep]
            return V, np.sort(w[~keep])
        if k >= max_kernel:
            raise EigensolverError(f"kernel larger than {max_kernel}; raise max_kernel")
        k *= 2


def _sparse_spectral_data(H: GlobalOperator, num_eigs: int, seed: int) -> SpectralData:
    mat = H.matrix.tocsr() if sp.issparse(H.matrix) else sp.csr_matrix(H.matrix)
    dim = H.dim
    if mat.nnz == 0:
        return SpectralData(np.zeros(min(num_eigs, dim)), dim, None, 0.0, KERNEL_REL_TOL, "sparse")
    off_diag = mat - sp.diags(mat.diagonal())
    if off_diag.nnz == 0 or abs(off_diag).max() == 0:
        diag = np.real(mat.diagonal())
        norm = float(np.abs(diag).max())
        tol = KERNEL_REL_TOL * max(1.0, norm)
        kernel_dim = int((diag <= tol).sum())
        above = diag[diag > tol]
        gap = float(above.min()) if above.size else None
        lowest = np.sort(np.partition(diag, min(num_eigs, dim) - 1)[: min(num_eigs, dim)])
        return SpectralData(lowest, kernel_dim, gap, norm, tol, "diagonal")
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim)
    try:
        top = spla.eigsh(mat, k=1, which="LA", v0=v0, return_eigenvectors=False)
        norm = float(max(abs(top[0]), 0.0))
    except spla.ArpackNoConvergence as exc:
        raise EigensolverError(f"eigensolver failed on ||H||: {exc}") from exc
    tol = KERNEL_REL_TOL * max(1.0, norm)
    V, _ = _shifted_block_kernel(mat, dim, tol, seed, max_kernel=512)
    kernel_dim = V.shape[1]
    # gap: smallest eigenvalue after pushing the kernel out of the way
    shift = 2.0 * max(1.0, norm)

    def deflated(x):
        return mat @ x + shift * (V @ (V.conj().T @ x))

    op = spla.LinearOperator((dim, dim), matvec=deflated, dtype=V.dtype)
    w = np.sort(
        spla.eigsh(
            op, k=min(num_eigs, dim - 2), which="SA", v0=v0,
            ncv=min(dim, max(4 * num_eigs + 1, 40)), maxiter=5000,
            return_eigenvectors=False,
        )
    )
    above = w[w > tol]
    if above.size == 0:
        raise EigensolverError("eigensolver failed: no excited level resolved")
    eigs = np.concatenate([np.zeros(kernel_dim), above])
    return SpectralData(eigs, kernel_dim, float(above[0]), norm, tol, "sparse")


def _cache_key(H: GlobalOperator) -> str:
    import hashlib

    m = H.matrix.tocsr() if sp.issparse(H.matrix) else sp.csr_matrix(H.matrix)
    m.sum_duplicates()
    h = hashlib.sha256()
    h.update(repr((H.region, H.d, m.shape)).encode())
    h.update(np.round(m.data, 12).tobytes())
    h.update(m.indices.tobytes())
    h.update(m.indptr.tobytes())
    return h.hexdigest()


def kernel_basis(
    H: GlobalOperator,
    dense_cap: int = DENSE_CAP,
    seed: int = SOLVER_SEED,
    max_kernel: int = 256,
):
    """Orthonormal basis of the kernel (ground space) as a (dim, r) array.

    Uses, in order of preference: the diagonal shortcut for diagonal
    matrices, a dense eigendecomposition, or sparse Lanczos with an
    adaptively grown window.  Set GAPCERT_CACHE to a directory to reuse
    bases across runs (content-addressed by the matrix payload).
    """
    import os

    cache_dir = os.environ.get("GAPCERT_CACHE")
    cache_path = None
    if cache_dir:
        from pathlib import Path

        cache_path = Path(cache_dir) / f"kernel-{_cache_key(H)}.npy"
        if cache_path.exists():
            return np.load(cache_path)
    V = _kernel_basis_impl(H, dense_cap, seed, max_kernel)
    if cache_path is not None and not sp.issparse(V):
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        np.save(cache_path, V)
    return V


def _kernel_basis_impl(
    H: GlobalOperator,
    dense_cap: int = DENSE_CAP,
    seed: int = SOLVER_SEED,
    max_kernel: int = 256,
):
    mat = H.matrix
    dim = H.dim
    tol = KERNEL_REL_TOL * max(1.0, _operator_norm_bound(H))
    if sp.issparse(mat):
        off = mat - sp.diags(mat.diagonal())
        if off.nnz == 0 or abs(off).max() == 0:
            idx = np.flatnonzero(np.abs(mat.diagonal()) <= tol)
            if idx.size == 0:
                raise EigensolverError("not frustration-free: empty kernel")
            V = sp.csc_matrix(
                (np.ones(idx.size), (idx, np.arange(idx.size))), shape=(dim, idx.size)
            )
            return V
    if dim <= dense_cap:
        w, v = np.linalg.eigh(H.to_dense())
        tol = KERNEL_REL_TOL * max(1.0, float(abs(w).max()) if w.size else 0.0)
        keep = w <= tol
        if not keep.any():
            raise EigensolverError("not frustration-free: empty kernel")
        return v[:, keep]
    matc = mat.tocsr()
    V, _ = _shifted_block_kernel(matc, dim, tol, seed, max_kernel)
    if V.shape[1] == 0:
        raise EigensolverError("not frustration-free: empty kernel")
    resid = float(np.linalg.norm(matc @ V))
    if resid > 100 * tol * math.sqrt(V.shape[1]):
        raise EigensolverError(f"eigensolver failed: kernel residual {resid:.3e}")
    return V


def ground_projector(H: GlobalOperator, dense_cap: int = DENSE_CAP) -> GlobalOperator:
    """Orthogonal projector onto the kernel of a frustration-free operator.

    Materializes the dense projector, so it is gated at dense_cap; use
    kernel_basis directly for factored large-dimension work.
    """
    if H.dim > dense_cap:
        raise DimensionCapError(
            f"region too large for an explicit projector (dim {H.dim} > {dense_cap})"
        )
    V = kernel_basis(H, dense_cap=dense_cap)
    if sp.issparse(V):
        V = V.toarray()
    return GlobalOperator(H.region, H.d, V @ V.conj().T)


def check_frustration_free(H: GlobalOperator, dense_cap: int = DENSE_CAP) -> bool:
    """True iff the smallest eigenvalue sits at zero (within tolerance)."""
    if H.dim <= dense_cap:
        w = np.linalg.eigvalsh(H.to_dense())
        tol = KERNEL_REL_TOL * max(1.0, float(abs(w).max()) if w.size else 0.0)
        return bool(w.min() <= tol)
    mat = H.matrix.tocsr()
    if mat.nnz == 0:
        return True
    lo = _eigsh_smallest(mat, 2, SOLVER_SEED)[0]
    tol = KERNEL_REL_TOL * max(1.0, _operator_norm_bound(H))
    return bool(lo <= tol)


def operator_norm(M, hermitian: bool = False, seed: int = 7) -> float:
    """Largest singular value of a GlobalOperator, array, sparse matrix, or
    matvec-capable object."""
    if isinstance(M, GlobalOperator):
        M = M.matrix
    if sp.issparse(M):
        if M.shape[0] <= DENSE_CAP:
            M = M.toarray()
        else:
            return matfree_norm(spla.aslinearoperator(M), seed=seed)
    if isinstance(M, np.ndarray):
        if hermitian:
            w = np.linalg.eigvalsh(M)
            return float(abs(w).max()) if w.size else 0.0
        return float(np.linalg.norm(M, 2))
    return matfree_norm(M, seed=seed)


@dataclass
class SandwichReport:
    """Both inequalities of the projector-reduction gap sandwich."""

    gap_raw: float | None
    gap_projected: float | None
    phi_max: float
    phi_min: float
    lower_ok: bool
    upper_ok: bool
    slack_lower: float
    slack_upper: float

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def sandwich_check(
    phi: Interaction, region: Region, tol: float = 1e-9, dense_cap: int = DENSE_CAP
) -> SandwichReport:
    """Verify phi_min * gap(projected H) <= gap(H) <= phi_max * gap(projected H)."""
    pmax, pmin = phi_bounds(Interaction(phi.terms_within(region), R=phi.R, d=phi.d))
    raw = spectral_data(hamiltonian(phi, region), dense_cap=dense_cap)
    projected = spectral_data(
        hamiltonian(phi, region, projector_form=True), dense_cap=dense_cap
    )
    if raw.gap is None or projected.gap is None:
        return SandwichReport(raw.gap, projected.gap, pmax, pmin, True, True, 0.0, 0.0)
    slack_lower = raw.gap - pmin * projected.gap
    slack_upper = pmax * projected.gap - raw.gap
    return SandwichReport(
        raw.gap,
        projected.gap,
        pmax,
        pmin,
        bool(slack_lower >= -tol),
        bool(slack_upper >= -tol),
        float(slack_lower),
        float(slack_upper),
    )


def embedded_block(
    block: np.ndarray, support: Region, region: Region, d: int
) -> SiteBlockOperator:
    """Matrix-free embedding used by the detectability machinery."""
    return SiteBlockOperator(block, _positions(support, region), len(region), d)


def dump_operator(H: GlobalOperator) -> str:
    """Debug dump: dimension line, then one '(row, col, re, im)' per nonzero."""
    mat = H.matrix.tocoo() if sp.issparse(H.matrix) else sp.coo_matrix(H.matrix)
    lines = [f"dim {H.dim}"]
    order = np.lexsort((mat.col, mat.row))
    for idx in order:
        z = complex(mat.data[idx])
        lines.append(
            f"{mat.row[idx]} {mat.col[idx]} {z.real:.17g} {z.imag:.17g}"
        )
    return "\n".join(lines) + "\n"


def embedded_kernel_projector(
    phi: Interaction,
    sub_region: Region,
    region: Region,
    d: int,
    dense_cap: int = DENSE_CAP,
) -> FactoredProjectorBlock:
    """Ground projector of the sub-region Hamiltonian, acting on the full region.

    Kept in factored (kernel-basis) form; the identity is implicit on the
    sites outside the sub-region.  A sub-region with no contained terms has
    the identity as its ground projector (empty-positions block).
    """
    sub_region = make_region(sub_region)
    region = make_region(region)
    if not phi.terms_within(sub_region):
        return FactoredProjectorBlock(np.ones((1, 1)), (), len(region), d)
    Hs = hamiltonian(phi, sub_region, projector_form=True)
    V = kernel_basis(Hs, dense_cap=dense_cap)
    return FactoredProjectorBlock(V, _positions(sub_region, region), len(region), d)
