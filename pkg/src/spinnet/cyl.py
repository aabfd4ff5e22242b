"""Cylindrical functions: graph-local wave functions of holonomies.

A cylindrical function depends on a connection only through the holonomies
along the edges of a fixed embedded graph.  Everything here lives in the
linear span of *normalized matrix-element monomials*: the monomial with
labels (j_e, m_e, n_e) per edge evaluates to

    prod_e  sqrt(2 j_e + 1) * D^{j_e}_{m_e n_e}(h_e),

with j_e = 0 meaning no dependence on that edge.  In this normalization
distinct monomials are orthonormal for the product Haar measure, so inner
products reduce to coefficient dots once both functions live on a common
graph.  Promotion to a refined graph re-expands each matrix element along the
chain of fine edges and is exactly norm-preserving.

Holonomies are h = P exp(-int A) and compose later-on-the-left: a path
running e1 then e2 has holonomy h(e2) @ h(e1).  Gauge transformations act by
h_e -> g(target) h_e g(source)^{-1}, so on cylindrical functions they act
only through the gauge values at the vertices.
"""

from __future__ import annotations

import inspect
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.sparse

from .graphs import (
    GEO_TOL,
    EmbeddedGraph,
    RefinementMap,
    common_refinement,
    half_edges_at,
    is_spurious,
)
from .su2 import (
    GroupElement,
    HalfInt,
    LieVector,
    TAU,
    clebsch_gordan,
    haar_quaternions,
    intertwiner_basis,
    magnetic_range,
    quaternions_to_matrices,
    spin_flip_matrix,
    su2_exp,
    wigner,
    wigner_entry,
)
from .su2 import _mag_index

__all__ = [
    "BasisMonomial",
    "Connection",
    "CylFun",
    "GaugeTransformation",
    "SpinNetworkState",
    "monomial",
    "holonomy",
    "gauge_transform_holonomy",
    "edge_holonomies",
    "evaluate",
    "wilson_loop",
    "transform_at_vertices",
    "promote",
    "inner_product",
    "gram",
    "mc_inner_product",
    "spin_network_basis",
    "states_for_spins",
    "graphs_equal",
]

TRIVIAL = (0, 0, 0)

Label = tuple[int, int, int]  # (2j, 2m, 2n) per edge
Labels = tuple[Label, ...]


# ---------------------------------------------------------------------------
# connections and holonomies


class Connection:
    """su(2)-valued connection one-form A.

    ``apply(x, u)`` evaluates the form at the point x on the direction u and
    returns the three tau components; it is linear in u.  Accepted
    constructors arguments:

    * a constant (3, 3) array C with C[i, a] the tau_i component on the
      spatial basis vector e_a (so apply(x, u) = C @ u);
    * a callable x -> C(x) returning such component arrays;
    * a callable (x, u) -> LieVector (or length-3 sequence).

    ``smoothness`` is an informational tag; the holonomy integrator assumes
    the default "smooth" (continuous suffices for convergence in practice).
    """

    __slots__ = ("_form", "_components", "_const", "smoothness")

    def __init__(self, form, smoothness: str = "smooth"):
        self.smoothness = smoothness
        self._form = None
        self._components = None
        self._const = None
        if callable(form):
            try:
                n_params = len(inspect.signature(form).parameters)
            except (TypeError, ValueError):
                n_params = 2
            if n_params >= 2:
                self._form = form
            else:
                self._components = form
        else:
            mat = np.array(form, dtype=float)
            if mat.shape != (3, 3):
                raise ValueError("constant connection must be a (3, 3) coefficient array")
            mat.flags.writeable = False
            self._const = mat

    @property
    def is_constant(self) -> bool:
        return self._const is not None

    def apply(self, x, u) -> np.ndarray:
        """Components of A(x)(u) in the tau basis."""
        if self._const is not None:
            return self._const @ np.asarray(u, dtype=float)
        if self._components is not None:
            mat = np.asarray(self._components(np.asarray(x, dtype=float)), dtype=float)
            if mat.shape != (3, 3):
                raise ValueError("connection component field must return a (3, 3) array")
            return mat @ np.asarray(u, dtype=float)
        out = self._form(np.asarray(x, dtype=float), np.asarray(u, dtype=float))
        if isinstance(out, LieVector):
            return out.components
        out = np.asarray(out, dtype=float)
        if out.shape != (3,):
            raise ValueError("connection form must return three tau components")
        return out


def _holonomy_steps(connection: Connection, poly: np.ndarray, n: int) -> np.ndarray:
    mat = np.eye(2, dtype=complex)
    for i in range(len(poly) - 1):
        a, b = poly[i], poly[i + 1]
        for k in range(n):
            lo = a + (b - a) * (k / n)
            hi = a + (b - a) * ((k + 1) / n)
            v = connection.apply(0.5 * (lo + hi), hi - lo)
            mat = su2_exp(-v) @ mat
    return mat


def holonomy(
    connection: Connection, polyline, tol: float = 1e-10, max_doublings: int = 20
) -> GroupElement:
    """Path-ordered exponential P exp(-int A) along a polyline.

    Midpoint steps per segment, doubling the step count until two successive
    refinements agree entrywise within ``tol``.  A constant connection is
    integrated exactly by the very first pass.
    """
    poly = np.asarray(polyline, dtype=float)
    prev = _holonomy_steps(connection, poly, 1)
    if connection.is_constant and len(poly) == 2:
        return GroupElement(prev)
    n = 2
    while True:
        cur = _holonomy_steps(connection, poly, n)
        if np.max(np.abs(cur - prev)) < tol:
            return GroupElement(cur)
        if n >= 2**max_doublings:
            raise RuntimeError("holonomy integrator did not converge")
        prev = cur
        n *= 2


def gauge_transform_holonomy(
    h: GroupElement, g_p: GroupElement, g_q: GroupElement
) -> GroupElement:
    """Transformed holonomy g(q) h g(p)^{-1} for a path from p to q."""
    return GroupElement(g_q.matrix @ h.matrix @ g_p.inverse().matrix)


class GaugeTransformation:
    """Pointwise SU(2) gauge field x -> g(x).

    ``transform_connection`` produces A' = g A g^{-1} - (dg) g^{-1} with the
    derivative taken by a central finite difference, which is what makes the
    holonomy covariance h[A'] = g(q) h[A] g(p)^{-1} checkable numerically.
    """

    __slots__ = ("_field", "fd_step")

    def __init__(self, field: Callable[[np.ndarray], GroupElement], fd_step: float = 1e-6):
        self._field = field
        self.fd_step = fd_step

    def __call__(self, x) -> GroupElement:
        g = self._field(np.asarray(x, dtype=float))
        return g if isinstance(g, GroupElement) else GroupElement(np.asarray(g, dtype=complex))

    def vertex_elements(self, graph: EmbeddedGraph) -> tuple[GroupElement, ...]:
        return tuple(self(p) for p in graph.vertices)

    def transform_connection(self, connection: Connection) -> Connection:
        eps = self.fd_step

        def form(x, u):
            g = self(x).matrix
            ginv = np.conjugate(g.T)
            amat = LieVector(connection.apply(x, u)).matrix()
            norm_u = np.linalg.norm(u)
            if norm_u == 0.0:
                return np.zeros(3)
            uhat = u / norm_u
            dg = (self(x + eps * uhat).matrix - self(x - eps * uhat).matrix) / (2 * eps)
            m = g @ amat @ ginv - (dg * norm_u) @ ginv
            m = 0.5 * (m - np.conjugate(m.T))
            m -= 0.5 * np.trace(m) * np.eye(2)
            # component extraction via tr(tau_i tau_j) = -delta_ij / 2
            return np.array([-2.0 * np.trace(m @ t).real for t in TAU])

        return Connection(form, smoothness=connection.smoothness)


def edge_holonomies(connection: Connection, graph: EmbeddedGraph) -> tuple[GroupElement, ...]:
    return tuple(holonomy(connection, e.polyline) for e in graph.edges)


# ---------------------------------------------------------------------------
# cylindrical functions


def _check_label(lab) -> Label:
    tj, tm, tn = (int(x) for x in lab)
    if tj < 0 or (tj - tm) % 2 or (tj - tn) % 2 or abs(tm) > tj or abs(tn) > tj:
        raise ValueError(f"bad edge label {lab}: need |m|, |n| <= j with matching parity")
    if tj == 0:
        return TRIVIAL
    return (tj, tm, tn)


@dataclass
class CylFun:
    """Linear combination of normalized matrix-element monomials on a graph.

    ``coefficients`` maps a per-edge label tuple ((2j, 2m, 2n), ...) to a
    complex amplitude.  The label (0, 0, 0) marks no dependence on that edge.
    """

    graph: EmbeddedGraph
    coefficients: dict[Labels, complex]

    def __post_init__(self):
        ne = self.graph.n_edges
        clean: dict[Labels, complex] = {}
        for labels, coeff in self.coefficients.items():
            if len(labels) != ne:
                raise ValueError("label tuple length must equal the edge count")
            key = tuple(_check_label(l) for l in labels)
            clean[key] = clean.get(key, 0j) + complex(coeff)
        self.coefficients = clean

    @property
    def n_terms(self) -> int:
        return len(self.coefficients)

    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.coefficients.values()))

    def prune(self, eps: float = 1e-15) -> "CylFun":
        return CylFun(
            self.graph, {l: c for l, c in self.coefficients.items() if abs(c) > eps}
        )

    def __add__(self, other: "CylFun") -> "CylFun":
        if not graphs_equal(self.graph, other.graph):
            raise ValueError("can only add functions on the same graph")
        out = dict(self.coefficients)
        for l, c in other.coefficients.items():
            out[l] = out.get(l, 0j) + c
        return CylFun(self.graph, out)

    def __sub__(self, other: "CylFun") -> "CylFun":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "CylFun":
        return CylFun(self.graph, {l: scalar * c for l, c in self.coefficients.items()})


def monomial(graph: EmbeddedGraph, labels) -> CylFun:
    """Single basis monomial; labels are per-edge (j, m, n) half-integers."""
    key = tuple(
        (HalfInt.of(j).twice, HalfInt.of(m).twice, HalfInt.of(n).twice) for j, m, n in labels
    )
    return CylFun(graph, {key: 1.0 + 0j})


@dataclass(frozen=True)
class BasisMonomial:
    """One orthonormal basis monomial: per-edge (j, m, n) labels on a graph."""

    graph: EmbeddedGraph
    labels: tuple[tuple[HalfInt, HalfInt, HalfInt], ...]

    @property
    def normalization(self) -> float:
        """The prefactor prod_e sqrt(2 j_e + 1) making the monomial a unit
        vector under the Haar inner product."""
        out = 1.0
        for j, _, _ in self.labels:
            out *= math.sqrt(j.twice + 1)
        return out

    def as_cylfun(self) -> CylFun:
        return monomial(self.graph, self.labels)


def graphs_equal(a: EmbeddedGraph, b: EmbeddedGraph) -> bool:
    """Exact structural equality (same vertices, edges, and polylines)."""
    if a is b:
        return True
    if a.n_vertices != b.n_vertices or a.n_edges != b.n_edges:
        return False
    if not np.array_equal(a.vertices, b.vertices):
        return False
    return all(
        ea.start == eb.start
        and ea.end == eb.end
        and np.array_equal(ea.polyline, eb.polyline)
        for ea, eb in zip(a.edges, b.edges)
    )


# ---------------------------------------------------------------------------
# evaluation


def _as_matrices(assignment) -> list[np.ndarray]:
    mats = []
    for g in assignment:
        mats.append(g.matrix if isinstance(g, GroupElement) else np.asarray(g, dtype=complex))
    return mats


def evaluate(fun: CylFun, assignment) -> complex:
    """Value of the function on an edge assignment of group elements, or on a
    ``Connection`` (whose edge holonomies are computed first)."""
    if isinstance(assignment, Connection):
        assignment = edge_holonomies(assignment, fun.graph)
    mats = _as_matrices(assignment)
    if len(mats) != fun.graph.n_edges:
        raise ValueError("assignment length must equal the edge count")
    wig: dict[tuple[int, int], np.ndarray] = {}
    total = 0j
    for labels, coeff in fun.coefficients.items():
        term = complex(coeff)
        for e, (tj, tm, tn) in enumerate(labels):
            if tj == 0:
                continue
            key = (e, tj)
            W = wig.get(key)
            if W is None:
                W = wigner(HalfInt(tj), GroupElement(mats[e])).entries
                wig[key] = W
            j = HalfInt(tj)
            term *= math.sqrt(tj + 1) * W[
                _mag_index(j, HalfInt(tm)), _mag_index(j, HalfInt(tn))
            ]
        total += term
    return total


def _evaluate_batch(fun: CylFun, mats: Sequence[np.ndarray], n: int) -> np.ndarray:
    """Vectorized evaluation on n stacked edge assignments (mats[e]: (n,2,2))."""
    vals = np.zeros(n, dtype=complex)
    cache: dict[tuple[int, int, int, int], np.ndarray] = {}
    for labels, coeff in fun.coefficients.items():
        term = np.full(n, complex(coeff))
        for e, (tj, tm, tn) in enumerate(labels):
            if tj == 0:
                continue
            key = (e, tj, tm, tn)
            ent = cache.get(key)
            if ent is None:
                ent = math.sqrt(tj + 1) * wigner_entry(
                    HalfInt(tj), HalfInt(tm), HalfInt(tn), np.asarray(mats[e])
                )
                cache[key] = ent
            term = term * ent
        vals += term
    return vals


def transform_at_vertices(
    graph: EmbeddedGraph, assignment, gauge
) -> tuple[GroupElement, ...]:
    """Gauge transformation on an edge assignment: h_e -> g_t(e) h_e g_s(e)^{-1}.

    ``gauge`` is either one group element per vertex or a pointwise
    ``GaugeTransformation`` (only its values at the vertices matter).
    """
    mats = _as_matrices(assignment)
    if isinstance(gauge, GaugeTransformation):
        gauge = gauge.vertex_elements(graph)
    vmats = _as_matrices(gauge)
    if len(vmats) != graph.n_vertices:
        raise ValueError("need one group element per vertex")
    out = []
    for e, h in zip(graph.edges, mats):
        gt = vmats[e.end]
        gs = vmats[e.start]
        out.append(GroupElement(gt @ h @ np.conjugate(gs.T)))
    return tuple(out)


def wilson_loop(j, polyline, connection: Connection) -> complex:
    """Trace of the loop holonomy in the spin-j representation.

    The polyline must close (first point equals last point).
    """
    poly = np.asarray(polyline, dtype=float)
    if np.linalg.norm(poly[0] - poly[-1]) > GEO_TOL:
        raise ValueError("Wilson loops require a closed polyline")
    return wigner(HalfInt.of(j), holonomy(connection, poly)).trace()


# ---------------------------------------------------------------------------
# promotion and inner products


def promote(fun: CylFun, refinement: RefinementMap) -> CylFun:
    """Re-express a function on the refined graph.

    Each matrix element along a coarse edge is expanded over its fine chain,
    D(h_L ... h_1)_{mn} = sum D(h_L)_{m a} ... D(h_1)_{b n}, with reversed
    chain entries rewritten through D(h^{-1})_{rc} = (-1)^{c-r} D(h)_{-c,-r}.
    The coefficient rescaling (2j+1)^{(1-L)/2} keeps the normalized-monomial
    coefficients, and hence all inner products, exactly intact.
    """
    n_fine = refinement.fine.n_edges
    out: dict[Labels, complex] = {}
    for labels, coeff in fun.coefficients.items():
        partial: list[tuple[complex, dict[int, Label]]] = [(complex(coeff), {})]
        for ce, (tj, tm, tn) in enumerate(labels):
            if tj == 0:
                continue
            chain = refinement.chains[ce]
            L = len(chain)
            scale = (tj + 1) ** (0.5 * (1 - L))
            mags = range(-tj, tj + 1, 2)
            expanded: list[tuple[complex, dict[int, Label]]] = []
            for mid in itertools.product(mags, repeat=L - 1):
                seq = (tn,) + tuple(mid) + (tm,)
                sign = 1.0
                assign: dict[int, Label] = {}
                for k, (fid, s) in enumerate(chain):
                    lo, hi = seq[k], seq[k + 1]  # this factor is D_{hi, lo}
                    if s == 1:
                        assign[fid] = (tj, hi, lo)
                    else:
                        sign *= (-1.0) ** ((lo - hi) // 2)
                        assign[fid] = (tj, -lo, -hi)
                expanded.append((scale * sign, assign))
            merged = []
            for c0, d0 in partial:
                for c1, d1 in expanded:
                    if d0.keys() & d1.keys():
                        raise ValueError("refinement chains overlap on a fine edge")
                    merged.append((c0 * c1, {**d0, **d1}))
            partial = merged
        for c, d in partial:
            key = tuple(d.get(f, TRIVIAL) for f in range(n_fine))
            out[key] = out.get(key, 0j) + c
    return CylFun(refinement.fine, out).prune()


def _dot(c1: dict[Labels, complex], c2: dict[Labels, complex]) -> complex:
    if len(c2) < len(c1):
        return complex(np.conjugate(_dot(c2, c1)))
    total = 0j
    for lab, a in c1.items():
        b = c2.get(lab)
        if b is not None:
            total += np.conjugate(a) * b
    return total


def inner_product(f1: CylFun, f2: CylFun) -> complex:
    """Haar inner product <f1, f2>, antilinear in the first argument.

    Functions on different graphs are promoted to the common refinement
    first; orthonormality of the monomial basis does the rest.
    """
    if graphs_equal(f1.graph, f2.graph):
        return _dot(f1.coefficients, f2.coefficients)
    _, m1, m2 = common_refinement(f1.graph, f2.graph)
    return _dot(promote(f1, m1).coefficients, promote(f2, m2).coefficients)


def gram(funs: Sequence[CylFun], sparse: bool = False):
    """Gram matrix of a family of functions on one shared graph.

    Returns a dense array by default; with ``sparse=True`` a CSR matrix, which
    is the right choice for large nearly-orthogonal families.
    """
    funs = list(funs)
    for f in funs[1:]:
        if not graphs_equal(f.graph, funs[0].graph):
            raise ValueError("gram requires all functions on the same graph")
    index: dict[Labels, int] = {}
    rows, cols, vals = [], [], []
    for i, f in enumerate(funs):
        for lab, c in f.coefficients.items():
            k = index.setdefault(lab, len(index))
            rows.append(i)
            cols.append(k)
            vals.append(c)
    C = scipy.sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(funs), max(len(index), 1)), dtype=complex
    )
    G = C.conjugate() @ C.T
    return G if sparse else np.asarray(G.todense())


def mc_inner_product(
    f1: CylFun,
    f2: CylFun,
    samples: int,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    chunk: int = 250_000,
) -> tuple[complex, float]:
    """Monte Carlo check of the Haar inner product.

    Draws i.i.d. Haar tuples, averages conj(f1) * f2, and returns the
    estimate with the standard error of the mean.
    """
    if not graphs_equal(f1.graph, f2.graph):
        _, m1, m2 = common_refinement(f1.graph, f2.graph)
        f1 = promote(f1, m1)
        f2 = promote(f2, m2)
    if rng is None:
        rng = np.random.default_rng(seed)
    n_edges = f1.graph.n_edges
    total = 0j
    total_sq = 0.0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        mats = [quaternions_to_matrices(haar_quaternions(rng, n)) for _ in range(n_edges)]
        v1 = _evaluate_batch(f1, mats, n)
        v2 = _evaluate_batch(f2, mats, n)
        z = np.conjugate(v1) * v2
        total += complex(z.sum())
        total_sq += float(np.sum(np.abs(z) ** 2))
        done += n
    mean = total / samples
    var = max(total_sq / samples - abs(mean) ** 2, 0.0)
    return mean, math.sqrt(var / samples)


# ---------------------------------------------------------------------------
# spin-network states


@dataclass(frozen=True)
class SpinNetworkState:
    """One member of a spin-network basis: edge spins plus a vertex label
    (coupling-tree intermediates, free magnetic labels, or a recoupled (J, M)
    pair at a straight-through vertex)."""

    fun: CylFun
    spins: tuple[HalfInt, ...]
    vertex_labels: tuple
    gauge_invariant: bool


def _dressed_intertwiner_tensors(spins_at, toward_axes):
    """Orthonormal gauge-invariant vertex tensors: intertwiners with the
    spin-flip dressing applied on every incoming-edge slot."""
    basis = intertwiner_basis(spins_at)
    dims = tuple(j.twice + 1 for j in spins_at)
    out = []
    for col in range(basis.dimension):
        T = basis.vectors[:, col].reshape(dims).astype(complex)
        for ax in toward_axes:
            E = spin_flip_matrix(spins_at[ax])
            T = np.moveaxis(np.tensordot(E, T, axes=(1, ax)), 0, ax)
        out.append((basis.trees[col], T))
    return out


def _recoupled_tensors(j: HalfInt, toward_axes):
    """Non-invariant recoupled tensors at a straight-through vertex: total
    spin J >= 1 combinations of the two slots, dressed like the invariant
    case so that J = 0 would be exactly the coarse-graph contraction."""
    dims = (j.twice + 1, j.twice + 1)
    out = []
    for block in clebsch_gordan(j, j):
        if block.j.twice == 0:
            continue
        for col, M in enumerate(magnetic_range(block.j)):
            T = block.matrix[:, col].reshape(dims).astype(complex)
            for ax in toward_axes:
                E = spin_flip_matrix(j)
                T = np.moveaxis(np.tensordot(E, T, axes=(1, ax)), 0, ax)
            out.append((("recoupled", block.j, M), T))
    return out


def spin_network_basis(
    graph: EmbeddedGraph, max_spin, gauge_invariant: bool = True
) -> list[SpinNetworkState]:
    """All spin-network states with every edge spin in (0, max_spin].

    Enumerates spin assignments edge by edge and delegates to
    ``states_for_spins``; states are grouped by assignment in lexicographic
    order of the twice-spin tuples.
    """
    tmax = HalfInt.of(max_spin).twice
    if tmax < 1:
        raise ValueError("max_spin must be at least 1/2")
    out: list[SpinNetworkState] = []
    for twice in itertools.product(range(1, tmax + 1), repeat=graph.n_edges):
        out.extend(states_for_spins(graph, [HalfInt(t) for t in twice], gauge_invariant))
    return out


def states_for_spins(
    graph: EmbeddedGraph, spins, gauge_invariant: bool = True
) -> list[SpinNetworkState]:
    """Orthonormal spin-network states for fixed positive edge spins.

    Gauge-invariant mode attaches an intertwiner to every vertex and returns
    nothing when the graph has a straight-through (spurious) vertex, since
    such states already live on the coarser graph.  In the extended mode the
    magnetic indices at ordinary vertices are free, while the index pair at a
    spurious vertex is recoupled to total spin J with J = 0 excluded, again
    to avoid double-counting coarser graphs.
    """
    spins = tuple(HalfInt.of(j) for j in spins)
    if len(spins) != graph.n_edges:
        raise ValueError("need one spin per edge")
    if any(j.twice <= 0 for j in spins):
        raise ValueError("spins must be positive; remove zero-spin edges from the graph")

    vertex_slots = []
    for v in range(graph.n_vertices):
        slots = half_edges_at(graph, v)
        if slots:
            vertex_slots.append((v, slots))

    families = []  # per vertex: list of (label, tensor) or ('free', dims)
    for v, slots in vertex_slots:
        spins_at = tuple(spins[e] for e, _ in slots)
        toward_axes = [i for i, (_, end) in enumerate(slots) if end == "end"]
        spurious = is_spurious(graph, v)
        if gauge_invariant:
            if spurious:
                return []
            tensors = _dressed_intertwiner_tensors(spins_at, toward_axes)
            if not tensors:
                return []
            families.append(tensors)
        elif spurious and spins_at[0] == spins_at[1]:
            families.append(_recoupled_tensors(spins_at[0], toward_axes))
        else:
            dims = tuple(j.twice + 1 for j in spins_at)
            tensors = []
            for idx in itertools.product(*(range(d) for d in dims)):
                T = np.zeros(dims, dtype=complex)
                T[idx] = 1.0
                label = tuple(magnetic_range(spins_at[i])[k] for i, k in enumerate(idx))
                tensors.append((label, T))
            families.append(tensors)

    states = []
    for combo in itertools.product(*families):
        partial: list[tuple[complex, dict]] = [(1.0 + 0j, {})]
        for ((v, slots), (_, tensor)) in zip(vertex_slots, combo):
            entries = []
            for idx, val in np.ndenumerate(tensor):
                if abs(val) < 1e-14:
                    continue
                assign = {}
                for slot_i, (e, end) in enumerate(slots):
                    mag = magnetic_range(spins[e])[idx[slot_i]]
                    assign[(e, "n" if end == "start" else "m")] = mag.twice
                entries.append((complex(val), assign))
            partial = [
                (c0 * c1, {**d0, **d1}) for c0, d0 in partial for c1, d1 in entries
            ]
        coeffs: dict[Labels, complex] = {}
        for c, d in partial:
            key = tuple(
                (spins[e].twice, d[(e, "m")], d[(e, "n")]) for e in range(graph.n_edges)
            )
            coeffs[key] = coeffs.get(key, 0j) + c
        states.append(
            SpinNetworkState(
                CylFun(graph, coeffs).prune(),
                spins,
                tuple(lab for lab, _ in combo),
                gauge_invariant,
            )
        )
    return states
