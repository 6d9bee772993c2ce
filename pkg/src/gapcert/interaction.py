"""Finite-range interactions: projector reduction, norm bounds, layer coloring,
and the commutation degree used by detectability-lemma estimates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._tensor import embed_sparse
from .errors import InteractionError
from .lattice import EmbeddedGraph, Region, graph_distance, make_region

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-10
# eigenvalues below KERNEL_REL * ||matrix|| count as kernel when projecting
KERNEL_REL = 1e-9
COMMUTATOR_TOL = 1e-10


@dataclass(eq=False)
class InteractionTerm:
    """One PSD term with its support region; matrix dim is d^len(support)."""

    support: Region
    matrix: np.ndarray

    def __post_init__(self):
        self.support = make_region(self.support)
        self.matrix = np.asarray(self.matrix)

    def local_dim(self, d: int) -> int:
        return d ** len(self.support)


@dataclass(eq=False)
class Interaction:
    """A finite list of terms with range R and local dimension d."""

    terms: list[InteractionTerm]
    R: float
    d: int
    phi_max: float = field(init=False, default=0.0)
    phi_min: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.d < 2:
            raise InteractionError("local dimension must be >= 2")
        for term in self.terms:
            if term.matrix.shape != (term.local_dim(self.d),) * 2:
                raise InteractionError(
                    f"term on {term.support}: matrix shape {term.matrix.shape} "
                    f"does not match d^{len(term.support)}"
                )
        if any(np.linalg.norm(t.matrix) > 0 for t in self.terms):
            self.phi_max, self.phi_min = phi_bounds(self)

    def nonzero_terms(self) -> list[InteractionTerm]:
        return [t for t in self.terms if np.linalg.norm(t.matrix) > 0]

    def terms_within(self, region: Region) -> list[InteractionTerm]:
        rset = set(region)
        return [t for t in self.terms if set(t.support) <= rset]


def _check_hermitian(m: np.ndarray, what: str) -> None:
    if np.linalg.norm(m - m.conj().T) > HERMITICITY_TOL * max(1.0, np.linalg.norm(m)):
        raise InteractionError(f"{what}: matrix is not Hermitian")


def phi_bounds(phi: Interaction) -> tuple[float, float]:
    """Largest operator norm and smallest nonzero eigenvalue over the terms."""
    top = 0.0
    bottom = np.inf
    any_nonzero = False
    for term in phi.terms:
        _check_hermitian(term.matrix, f"term on {term.support}")
        w = np.linalg.eigvalsh(term.matrix)
        norm = float(abs(w).max()) if w.size else 0.0
        if norm == 0.0:
            continue
        any_nonzero = True
        top = max(top, norm)
        nonzero = w[w > KERNEL_REL * norm]
        if nonzero.size == 0:
            continue
        bottom = min(bottom, float(nonzero.min()))
    if not any_nonzero:
        raise InteractionError("empty interaction: all terms are zero")
    return top, bottom


def validate(phi: Interaction, graph: EmbeddedGraph | None = None) -> None:
    """Raise InteractionError on any violated term invariant.

    Checks Hermiticity, positive semi-definiteness, and (when a graph is
    supplied) that each support has hop diameter at most R.
    """
    for term in phi.nonzero_terms():
        _check_hermitian(term.matrix, f"term on {term.support}")
        w = np.linalg.eigvalsh(term.matrix)
        norm = float(abs(w).max())
        if w.min() < -PSD_TOL * max(1.0, norm):
            raise InteractionError(
                f"term on {term.support}: negative eigenvalue {w.min():.3e}"
            )
        if graph is not None:
            diam = max(
                graph_distance(graph, i, j) for i in term.support for j in term.support
            )
            if diam > phi.R + 1e-9:
                raise InteractionError(
                    f"term on {term.support}: diameter {diam} exceeds range {phi.R}"
                )
    if not phi.nonzero_terms():
        raise InteractionError("empty interaction: all terms are zero")


def reduce_to_projectors(phi: Interaction) -> Interaction:
    """Replace every term by the orthogonal projector onto its range.

    Eigenvalues at or below KERNEL_REL * ||term|| are treated as kernel;
    zero terms are dropped.  The result has phi_max == phi_min == 1.
    """
    new_terms = []
    for term in phi.terms:
        _check_hermitian(term.matrix, f"term on {term.support}")
        w, v = np.linalg.eigh(term.matrix)
        norm = float(abs(w).max()) if w.size else 0.0
        if norm == 0.0:
            continue
        if w.min() < -PSD_TOL * max(1.0, norm):
            raise InteractionError(
                f"term on {term.support}: negative eigenvalue {w.min():.3e}"
            )
        keep = w > KERNEL_REL * norm
        if not keep.any():
            continue
        V = v[:, keep]
        proj = V @ V.conj().T
        if np.iscomplexobj(term.matrix) is False:
            proj = proj.real
        new_terms.append(InteractionTerm(term.support, proj))
    if not new_terms:
        raise InteractionError("empty interaction: all terms are zero")
    return Interaction(new_terms, R=phi.R, d=phi.d)


@dataclass
class LayerColoring:
    """Partition of term indices into layers with pairwise disjoint supports."""

    L: int
    assignment: dict[int, int]  # term index -> layer in 1..L
    max_terms_per_vertex: int
    shannon_bound: int  # floor(3 * max_terms_per_vertex / 2)

    def layers(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.L)]
        for idx, layer in self.assignment.items():
            out[layer - 1].append(idx)
        return [sorted(layer) for layer in out]


def layer_coloring(phi: Interaction) -> LayerColoring:
    """Greedy disjoint-support coloring, deterministic order (min id, size)."""
    order = sorted(
        range(len(phi.terms)),
        key=lambda i: (min(phi.terms[i].support, default=-1), len(phi.terms[i].support)),
    )
    order = [i for i in order if np.linalg.norm(phi.terms[i].matrix) > 0]
    assignment: dict[int, int] = {}
    layer_supports: list[set[int]] = []
    for idx in order:
        sup = set(phi.terms[idx].support)
        placed = False
        for layer_idx, occupied in enumerate(layer_supports):
            if not (sup & occupied):
                occupied |= sup
                assignment[idx] = layer_idx + 1
                placed = True
                break
        if not placed:
            layer_supports.append(set(sup))
            assignment[idx] = len(layer_supports)
    counts: dict[int, int] = {}
    for idx in assignment:
        for v in phi.terms[idx].support:
            counts[v] = counts.get(v, 0) + 1
    delta = max(counts.values(), default=0)
    return LayerColoring(
        L=max(len(layer_supports), 1),
        assignment=assignment,
        max_terms_per_vertex=delta,
        shannon_bound=(3 * delta) // 2,
    )


def support_overlap_degree(phi: Interaction) -> int:
    """Conservative upper bound on the commutation degree: count support overlaps."""
    terms = phi.nonzero_terms()
    best = 0
    for i, t in enumerate(terms):
        si = set(t.support)
        best = max(
            best, sum(1 for j, u in enumerate(terms) if j != i and si & set(u.support))
        )
    return best


def commutation_degree(phi: Interaction, support_only: bool = False) -> int:
    """Max number of other terms a term fails to commute with.

    Pairs with disjoint supports commute exactly; overlapping pairs are
    embedded into their joint support and the commutator norm compared to
    COMMUTATOR_TOL.  `support_only` switches to the cheap overlap count.
    """
    if support_only:
        return support_overlap_degree(phi)
    terms = phi.nonzero_terms()
    noncommuting = [0] * len(terms)
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            si, sj = set(terms[i].support), set(terms[j].support)
            if not (si & sj):
                continue
            joint = make_region(si | sj)
            n = len(joint)
            pos_i = tuple(joint.index(v) for v in terms[i].support)
            pos_j = tuple(joint.index(v) for v in terms[j].support)
            a = embed_sparse(terms[i].matrix, pos_i, n, phi.d)
            b = embed_sparse(terms[j].matrix, pos_j, n, phi.d)
            comm = (a @ b - b @ a).toarray()
            if np.linalg.norm(comm, 2) > COMMUTATOR_TOL:
                noncommuting[i] += 1
                noncommuting[j] += 1
    return max(noncommuting, default=0)
