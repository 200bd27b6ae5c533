"""Analytical and central-difference eigenvalue sensitivities and the differentiability audit.

Every audited quantity is a function ``Q(lam)`` of the retained eigenvalues.
Its analytical gradient with respect to the design groups is ``J @ S`` where
``J = dQ/dlam`` and ``S[k, g] = phi_k^T (dK/dx_g - lam_k dM/dx_g) phi_k``.
The central-difference route never touches ``J`` or ``S``: it re-assembles and
re-solves at ``x_g +/- h`` and pairs eigenvalues by sorted index.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .clusters import Cluster, ClusterSet, completeness
from .eigen import DEFAULT_ZERO_TOL, Spectrum, nonzero_spectrum, solve
from .model import AssembledSystem, TrussModel, scatter, topology, unit_element_matrices

DEFAULT_STEP = 1e-6
DEFAULT_RTOL = 1e-4
DEFAULT_ATOL = 1e-8
# multiples of the round-off floor eps * lam_max / h of a central difference
DEFAULT_NOISE_FACTOR = 10.0


# ----------------------------------------------------------------------
# matrix derivatives

@dataclass(frozen=True)
class MatrixDerivatives:
    """Per-element ``dK/dx_e`` and ``dM/dx_e`` (6x6, global frame) plus group bookkeeping."""

    top: object
    ke: np.ndarray
    me: np.ndarray
    group_ids: tuple[int, ...]
    group_labels: tuple[str, ...]
    areas: np.ndarray
    dof_map: dict = field(default_factory=dict)

    @classmethod
    def from_model(cls, model: TrussModel) -> "MatrixDerivatives":
        top = topology(model)
        ke, me = unit_element_matrices(model, top)
        part = model.partition
        return cls(top, ke, me, tuple(part.ids), tuple(g.label for g in part),
                   part.areas, model.dof_map())

    @property
    def n_groups(self) -> int:
        return len(self.group_ids)

    @property
    def n_elements(self) -> int:
        return len(self.ke)

    def group_position(self, gid: int) -> int:
        try:
            return self.group_ids.index(gid)
        except ValueError:
            raise KeyError(f"unknown design group {gid}") from None

    def group_matrices(self, gid: int) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``dK/dx_g`` and ``dM/dx_g`` (sum over member elements)."""
        w = (self.top.group_index == self.group_position(gid)).astype(float)
        return scatter(self.top, self.ke, w), scatter(self.top, self.me, w)

    def assemble(self, areas: np.ndarray | None = None) -> AssembledSystem:
        """``K`` and ``M`` for the given per-group areas (defaults to the model's)."""
        a = self.areas if areas is None else np.asarray(areas, dtype=float)
        if a.shape != (self.n_groups,):
            raise ValueError("need one area per design group")
        if np.any(a <= 0):
            raise ValueError("design areas must stay positive")
        w = a[self.top.group_index]
        K = scatter(self.top, self.ke, w)
        M = scatter(self.top, self.me, w)
        return AssembledSystem(0.5 * (K + K.T), 0.5 * (M + M.T), self.dof_map)

    def element_quadratic(self, Phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``phi^T dK/dx_e phi`` and ``phi^T dM/dx_e phi``, shape (elements, modes)."""
        Phi = np.atleast_2d(np.asarray(Phi, dtype=float).T).T
        pad = np.vstack([Phi, np.zeros((1, Phi.shape[1]))])
        U = pad[self.top.dofs]                          # (E, 6, m)
        kq = np.einsum("eij,eim,ejm->em", self.ke, U, U)
        mq = np.einsum("eij,eim,ejm->em", self.me, U, U)
        return kq, mq

    def to_groups(self, per_element: np.ndarray) -> np.ndarray:
        """Sum rows of a per-element array into per-group rows."""
        out = np.zeros((self.n_groups,) + per_element.shape[1:])
        np.add.at(out, self.top.group_index, per_element)
        return out


# ----------------------------------------------------------------------
# eigenvalue and cluster-mean sensitivities

def element_sensitivities(spec: Spectrum, der: MatrixDerivatives) -> np.ndarray:
    """``dlam_k/dx_e`` for every retained mode and element, shape (modes, elements)."""
    kq, mq = der.element_quadratic(spec.eigenvectors)
    return (kq - mq * spec.eigenvalues).T


def eig_sensitivities(spec: Spectrum, der: MatrixDerivatives) -> np.ndarray:
    """``dlam_k/dx_g`` for every retained mode and design group, shape (modes, groups).

    For a repeated eigenvalue the result depends on the basis the solver
    returned; it is reported as-is.
    """
    return der.to_groups(element_sensitivities(spec, der).T).T


def _check_index(spec: Spectrum, q: int):
    if not 0 <= q < len(spec):
        raise IndexError(f"eigenvalue index {q} outside 0..{len(spec) - 1}")


def eig_sensitivity(spec: Spectrum, der: MatrixDerivatives, q: int, group: int) -> float:
    """``dlam_q/dx_group`` (``q`` 0-based into ``spec``, ``group`` a group id)."""
    _check_index(spec, q)
    g = der.group_position(group)
    dK, dM = der.group_matrices(der.group_ids[g])
    phi = spec.eigenvectors[:, q]
    return float(phi @ dK @ phi - spec.eigenvalues[q] * (phi @ dM @ phi))


def cluster_mean_sensitivity(spec: Spectrum, der: MatrixDerivatives, c: Cluster,
                             group: int) -> float:
    """Average of the member quasi-derivatives; a trace, so basis independent."""
    if c.stop > len(spec):
        raise ValueError("cluster extends past the spectrum")
    sub = Spectrum(spec.eigenvalues[c.start:c.stop], spec.eigenvectors[:, c.start:c.stop], 0)
    g = der.group_position(group)
    return float(np.mean(eig_sensitivities(sub, der)[:, g]))


def cluster_mean_gradients(spec: Spectrum, der: MatrixDerivatives,
                           clusters: ClusterSet) -> np.ndarray:
    """``dmean_q/dx_g`` for every cluster, shape (clusters, groups)."""
    S = eig_sensitivities(spec, der)
    return np.array([S[c.start:c.stop].mean(axis=0) for c in clusters])


# ----------------------------------------------------------------------
# aggregates

def pnorm(values, p: float) -> float:
    """``(sum v^p)^(1/p)``, evaluated relative to the largest value."""
    v = np.asarray(values, dtype=float)
    if p < 1:
        raise ValueError("p must be >= 1")
    if np.any(v <= 0):
        raise ValueError("p-norm aggregation needs positive eigenvalues")
    vmax = v.max()
    return float(vmax * np.sum((v / vmax) ** p) ** (1.0 / p))


def pnorm_weights(values, p: float) -> np.ndarray:
    """``d pnorm / d v_k = (v_k / pnorm)^(p-1)``."""
    v = np.asarray(values, dtype=float)
    return (v / pnorm(v, p)) ** (p - 1.0)


def ks(values, q: float) -> float:
    """Kreisselmeier-Steinhauser ``(1/q) ln sum exp(q v)`` with max-subtraction."""
    v = np.asarray(values, dtype=float)
    if not q > 0:
        raise ValueError("q must be positive")
    vmax = v.max()
    return float(vmax + np.log(np.sum(np.exp(q * (v - vmax)))) / q)


def ks_weights(values, q: float) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    w = np.exp(q * (v - v.max()))
    return w / w.sum()


def _truncate(spec: Spectrum, n: int) -> np.ndarray:
    if not 1 <= n <= len(spec):
        raise ValueError(f"truncation count {n} outside 1..{len(spec)}")
    return spec.eigenvalues[:n]


def pnorm_gradient(spec: Spectrum, der: MatrixDerivatives, n: int, p: float,
                   group: int | None = None):
    """Gradient of the p-norm of the first ``n`` eigenvalues (all groups, or one)."""
    w = pnorm_weights(_truncate(spec, n), p)
    grad = w @ eig_sensitivities(spec, der)[:n]
    return grad if group is None else float(grad[der.group_position(group)])


def ks_gradient(spec: Spectrum, der: MatrixDerivatives, n: int, q: float,
                group: int | None = None):
    w = ks_weights(_truncate(spec, n), q)
    grad = w @ eig_sensitivities(spec, der)[:n]
    return grad if group is None else float(grad[der.group_position(group)])


def _complete_prefix(clusters: ClusterSet, n: int) -> list[Cluster]:
    if not completeness(clusters, n).complete:
        raise ValueError(f"truncation at {n} cuts an eigen-cluster")
    return [c for c in clusters if c.stop <= n]


def pnorm_gradient_from_clusters(spec: Spectrum, der: MatrixDerivatives,
                                 clusters: ClusterSet, n: int, p: float) -> np.ndarray:
    """Same gradient written as ``(sum_q N_q mean_q^p)^(1/p)`` over complete clusters."""
    cs = _complete_prefix(clusters, n)
    means = np.array([c.mean for c in cs])
    mult = np.array([c.multiplicity for c in cs], dtype=float)
    dmeans = cluster_mean_gradients(spec, der, clusters)[: len(cs)]
    vmax = means.max()
    total = vmax * np.sum(mult * (means / vmax) ** p) ** (1.0 / p)
    return (mult * (means / total) ** (p - 1.0)) @ dmeans


def ks_gradient_from_clusters(spec: Spectrum, der: MatrixDerivatives,
                              clusters: ClusterSet, n: int, q: float) -> np.ndarray:
    cs = _complete_prefix(clusters, n)
    means = np.array([c.mean for c in cs])
    mult = np.array([c.multiplicity for c in cs], dtype=float)
    dmeans = cluster_mean_gradients(spec, der, clusters)[: len(cs)]
    w = mult * np.exp(q * (means - means.max()))
    return (w / w.sum()) @ dmeans


def demo_polynomials(l1: float, l2: float, l3: float):
    """Permutation-symmetric ``g`` and its asymmetric variant ``h`` with gradients.

    ``g = l1^2 l2 l3 + l2^2 l3 l1 + l3^2 l1 l2``;
    ``h`` drops ``l2`` from the last term.  Returns ``(g, h, dg, dh)``.
    """
    g = l1 * l1 * l2 * l3 + l2 * l2 * l3 * l1 + l3 * l3 * l1 * l2
    h = l1 * l1 * l2 * l3 + l2 * l2 * l3 * l1 + l3 * l3 * l1
    dg = np.array([
        2 * l1 * l2 * l3 + l2 * l2 * l3 + l3 * l3 * l2,
        l1 * l1 * l3 + 2 * l2 * l3 * l1 + l3 * l3 * l1,
        l1 * l1 * l2 + l2 * l2 * l1 + 2 * l3 * l1 * l2,
    ])
    dh = np.array([
        2 * l1 * l2 * l3 + l2 * l2 * l3 + l3 * l3,
        l1 * l1 * l3 + 2 * l2 * l3 * l1,
        l1 * l1 * l2 + l2 * l2 * l1 + 2 * l3 * l1,
    ])
    return g, h, dg, dh


# ----------------------------------------------------------------------
# quantities

class Quantity:
    """A vector-valued function of the retained eigenvalues.

    Subclasses define ``labels``, ``values(lam)`` and ``jacobian(lam)``
    (shape ``(len(labels), len(lam))``).
    """

    labels: tuple[str, ...] = ()
    name: str = "quantity"

    def values(self, lam: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, lam: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, spec: Spectrum, der: MatrixDerivatives) -> np.ndarray:
        """Analytical sensitivities, shape (len(labels), groups)."""
        return self.jacobian(spec.eigenvalues) @ eig_sensitivities(spec, der)


class Eigenvalues(Quantity):
    name = "eigen"

    def __init__(self, indices: Sequence[int]):
        self.indices = tuple(int(k) for k in indices)
        self.labels = tuple(f"lambda_{k + 1}" for k in self.indices)

    def values(self, lam):
        return np.asarray(lam)[list(self.indices)]

    def jacobian(self, lam):
        J = np.zeros((len(self.indices), len(lam)))
        J[np.arange(len(self.indices)), list(self.indices)] = 1.0
        return J


class ClusterMeans(Quantity):
    """Means of clusters fixed by index range on the reference spectrum."""

    name = "cluster-means"

    def __init__(self, clusters: ClusterSet, which: Sequence[int] | None = None):
        which = range(len(clusters)) if which is None else which
        self.clusters = [clusters[q] for q in which]
        self.labels = tuple(f"mean_{q + 1}" for q in which)

    def values(self, lam):
        lam = np.asarray(lam)
        return np.array([lam[c.start:c.stop].mean() for c in self.clusters])

    def jacobian(self, lam):
        J = np.zeros((len(self.clusters), len(lam)))
        for r, c in enumerate(self.clusters):
            J[r, c.start:c.stop] = 1.0 / c.multiplicity
        return J


class PNorm(Quantity):
    name = "pnorm"

    def __init__(self, n: int, p: float = 10.0):
        self.n, self.p = int(n), float(p)
        self.labels = (f"pnorm(n={self.n},p={self.p:g})",)

    def values(self, lam):
        return np.array([pnorm(np.asarray(lam)[: self.n], self.p)])

    def jacobian(self, lam):
        J = np.zeros((1, len(lam)))
        J[0, : self.n] = pnorm_weights(np.asarray(lam)[: self.n], self.p)
        return J


class KS(Quantity):
    name = "ks"

    def __init__(self, n: int, q: float = 10.0):
        self.n, self.q = int(n), float(q)
        self.labels = (f"ks(n={self.n},q={self.q:g})",)

    def values(self, lam):
        return np.array([ks(np.asarray(lam)[: self.n], self.q)])

    def jacobian(self, lam):
        J = np.zeros((1, len(lam)))
        J[0, : self.n] = ks_weights(np.asarray(lam)[: self.n], self.q)
        return J


class ClusterFunction(Quantity):
    """Smooth ``f(mean_{k1}, ..., mean_{km})`` with user-supplied gradient.

    Refuses clusters that a truncation count ``n`` would cut: a function of
    part of a cluster is not a symmetric function of the cluster.
    """

    name = "cluster-function"

    def __init__(self, clusters: ClusterSet, which: Sequence[int],
                 f: Callable[[np.ndarray], float],
                 grad: Callable[[np.ndarray], np.ndarray],
                 label: str = "f", n: int | None = None):
        self.clusters = [clusters[q] for q in which]
        if n is not None:
            for q, c in zip(which, self.clusters):
                if c.start < n < c.stop:
                    raise ValueError(f"truncation at {n} cuts cluster {q + 1}")
        self.f, self.grad = f, grad
        self.labels = (label,)

    def _means(self, lam):
        lam = np.asarray(lam)
        return np.array([lam[c.start:c.stop].mean() for c in self.clusters])

    def values(self, lam):
        return np.array([float(self.f(self._means(lam)))])

    def jacobian(self, lam):
        df = np.asarray(self.grad(self._means(lam)), dtype=float)
        J = np.zeros((1, len(lam)))
        for d, c in zip(df, self.clusters):
            J[0, c.start:c.stop] += d / c.multiplicity
        return J


def sine_product_function(clusters: ClusterSet, which=(0, 3, 4), amplitude: float = 100.0,
                          n: int | None = None) -> ClusterFunction:
    """``a^2 b + amplitude * sin(b + c)`` of three cluster means."""

    def f(m):
        return m[0] ** 2 * m[1] + amplitude * np.sin(m[1] + m[2])

    def grad(m):
        c = amplitude * np.cos(m[1] + m[2])
        return np.array([2 * m[0] * m[1], m[0] ** 2 + c, c])

    names = ",".join(f"mean_{q + 1}" for q in which)
    return ClusterFunction(clusters, which, f, grad, label=f"f({names})", n=n)


class DemoPolynomial(Quantity):
    """``g`` (symmetric) or ``h`` (asymmetric) of three eigenvalues."""

    name = "polynomial"

    def __init__(self, kind: str, indices: Sequence[int] = (0, 1, 2)):
        if kind not in ("g", "h"):
            raise ValueError("kind must be 'g' or 'h'")
        if len(indices) != 3:
            raise ValueError("need three eigenvalue indices")
        self.kind, self.indices = kind, tuple(int(k) for k in indices)
        self.labels = (f"{kind}(" + ",".join(f"lambda_{k + 1}" for k in self.indices) + ")",)

    def values(self, lam):
        g, h, _, _ = demo_polynomials(*np.asarray(lam)[list(self.indices)])
        return np.array([g if self.kind == "g" else h])

    def jacobian(self, lam):
        _, _, dg, dh = demo_polynomials(*np.asarray(lam)[list(self.indices)])
        J = np.zeros((1, len(lam)))
        J[0, list(self.indices)] = dg if self.kind == "g" else dh
        return J


# ----------------------------------------------------------------------
# central differences

def central_difference(fn: Callable[[float], float], x: float, h: float = DEFAULT_STEP) -> float:
    if not h > 0:
        raise ValueError("step must be positive")
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def _perturbed_values(der: MatrixDerivatives, quantities, g: int, h: float,
                      dropped: int, zero_tol: float):
    out = []
    for sign in (1.0, -1.0):
        a = der.areas.copy()
        a[g] += sign * h
        spec = nonzero_spectrum(solve(der.assemble(a), zero_tol), zero_tol, dropped=dropped)
        out.append(np.concatenate([q.values(spec.eigenvalues) for q in quantities]))
    return (out[0] - out[1]) / (2.0 * h)


def cdm_sensitivity(model: TrussModel, quantity: Quantity, group: int, h: float = DEFAULT_STEP,
                    zero_tol: float = DEFAULT_ZERO_TOL, dropped: int | None = None) -> np.ndarray:
    """Central difference of ``quantity`` w.r.t. one group area.

    Eigenvalues at the perturbed points are paired with the reference by sorted
    index after dropping the same number of zero modes as the reference.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    der = MatrixDerivatives.from_model(model)
    g = der.group_position(group)
    if der.areas[g] - h <= 0:
        raise ValueError("step would make an area non-positive")
    if dropped is None:
        dropped = solve(der.assemble(), zero_tol).zero_count
    return _perturbed_values(der, [quantity], g, h, dropped, zero_tol)


# ----------------------------------------------------------------------
# audit

@dataclass(frozen=True)
class SensitivityRow:
    quantity: str
    variable: str
    analytical: float
    cdm: float
    atol: float
    rtol: float

    @property
    def matches(self) -> bool:
        a, c = self.analytical, self.cdm
        return abs(a - c) <= self.atol + self.rtol * max(abs(a), abs(c))


@dataclass(frozen=True)
class AuditVerdict:
    quantity: str
    rows: tuple[SensitivityRow, ...]

    @property
    def offending(self) -> tuple[SensitivityRow, ...]:
        return tuple(r for r in self.rows if not r.matches)

    @property
    def differentiable(self) -> bool:
        return not self.offending


@dataclass(frozen=True)
class SensitivityReport:
    variables: tuple[str, ...]
    rows: tuple[SensitivityRow, ...]
    step: float

    @property
    def verdicts(self) -> tuple[AuditVerdict, ...]:
        order, by = [], {}
        for r in self.rows:
            if r.quantity not in by:
                order.append(r.quantity)
                by[r.quantity] = []
            by[r.quantity].append(r)
        return tuple(AuditVerdict(q, tuple(by[q])) for q in order)

    def verdict(self, quantity: str) -> AuditVerdict:
        for v in self.verdicts:
            if v.quantity == quantity:
                return v
        raise KeyError(quantity)

    @property
    def quantities(self) -> tuple[str, ...]:
        return tuple(v.quantity for v in self.verdicts)

    def analytical(self) -> np.ndarray:
        """(quantities, variables) array of analytical values."""
        return np.array([[r.analytical for r in v.rows] for v in self.verdicts])

    def cdm(self) -> np.ndarray:
        return np.array([[r.cdm for r in v.rows] for v in self.verdicts])

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "variables": list(self.variables),
            "verdicts": [
                {"quantity": v.quantity, "differentiable": v.differentiable,
                 "offending": [r.variable for r in v.offending]}
                for v in self.verdicts
            ],
            "rows": [
                {"quantity": r.quantity, "variable": r.variable, "analytical": r.analytical,
                 "cdm": r.cdm, "atol": r.atol, "rtol": r.rtol, "matches": r.matches}
                for r in self.rows
            ],
        }


def audit(model: TrussModel, quantities: Sequence[Quantity], groups: Sequence[int] | None = None,
          h: float = DEFAULT_STEP, rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
          noise_factor: float = DEFAULT_NOISE_FACTOR, zero_tol: float = DEFAULT_ZERO_TOL,
          workers: int = 1) -> SensitivityReport:
    """Compare analytical and central-difference sensitivities.

    The absolute tolerance of each row is ``atol`` plus a round-off floor
    ``noise_factor * eps * lam_max * ||dQ/dlam||_1 / h``: eigenvalues of a dense
    solve carry absolute errors of order ``eps * lam_max``, which a difference
    quotient with step ``h`` amplifies by ``1/h``.
    """
    der = MatrixDerivatives.from_model(model)
    full = solve(der.assemble(), zero_tol)
    ref = nonzero_spectrum(full, zero_tol)
    gids = list(der.group_ids if groups is None else groups)
    gpos = [der.group_position(g) for g in gids]
    for g in gpos:
        if der.areas[g] - h <= 0:
            raise ValueError(f"step {h} would make group {der.group_ids[g]} non-positive")

    S = eig_sensitivities(ref, der)
    lam = ref.eigenvalues
    analytical, floors, labels = [], [], []
    scale = float(np.max(np.abs(lam)))
    for q in quantities:
        J = q.jacobian(lam)
        analytical.append(J @ S[:, gpos] if len(gpos) else np.zeros((len(q.labels), 0)))
        floors.append(noise_factor * np.finfo(float).eps * scale * np.abs(J).sum(axis=1) / h)
        labels.extend(q.labels)
    analytical = np.vstack(analytical)
    floors = np.concatenate(floors)

    def work(g):
        return _perturbed_values(der, quantities, g, h, ref.dropped, zero_tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(work, gpos))
        # map() preserves submission order, so the report is order-independent
    else:
        cols = [work(g) for g in gpos]
    cdm = np.column_stack(cols) if cols else np.zeros((len(labels), 0))

    variables = tuple(der.group_labels[g] for g in gpos)
    rows = tuple(
        SensitivityRow(labels[i], variables[j], float(analytical[i, j]), float(cdm[i, j]),
                       float(atol + floors[i]), rtol)
        for i in range(len(labels))
        for j in range(len(gpos))
    )
    return SensitivityReport(variables, rows, h)
