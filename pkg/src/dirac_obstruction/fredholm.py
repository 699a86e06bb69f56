"""Finite-matrix mechanics for families of Hermitian operators.

This module carries the proof machinery of the obstruction check at matrix
level: the bounded transform x -> x / sqrt(1 + x^2), the piecewise-linear
shift deformations that move a spectral level to zero, window eigenvalue
counts, the shifted-invertibility cover, and spectral flow along discretized
paths.  Everything is a pure function of its inputs; matrix functions are
applied through eigendecompositions so that they act exactly on spectra.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._parallel import parallel_map
from .errors import (
    BoundaryAmbiguityError,
    EndpointDegeneracyError,
    RefinementRequiredError,
    ValidationError,
)

# Hermitian deviation max|A - A*| tolerated before rejecting; accepted inputs
# are symmetrized to (A + A*)/2.
H_TOL = 1e-10
# Smallest-singular-value threshold for "invertible" in cover building.
INV_TOL = 1e-8
# Width of the boundary guard around +-epsilon in window counts.
B_TOL = 1e-8
# Singular values within a decade of INV_TOL are flagged as indeterminate and
# conservatively treated as not invertible.
AMBIGUITY_DECADE = 10.0


def require_hermitian(matrix, h_tol: float = H_TOL, what: str = "matrix") -> np.ndarray:
    """Validate Hermitian-ness within h_tol and return the symmetrized copy."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{what} must be square, got shape {m.shape}")
    dev = float(np.abs(m - m.conj().T).max()) if m.size else 0.0
    if dev > h_tol:
        raise ValidationError(
            f"{what} is not Hermitian: max|A - A*| = {dev:.3e} exceeds h_tol = {h_tol:.3e}"
        )
    return (m + m.conj().T) / 2.0


def bounded_transform(matrix, *, h_tol: float = H_TOL) -> np.ndarray:
    """Compress a Hermitian matrix through x -> x / sqrt(1 + x^2).

    The output has the same eigenvectors, eigenvalues strictly inside
    (-1, 1), and exactly the same kernel.
    """
    m = require_hermitian(matrix, h_tol)
    w, v = np.linalg.eigh(m)
    f = w / np.sqrt(1.0 + w * w)
    out = (v * f) @ v.conj().T
    return (out + out.conj().T) / 2.0


def shift_levels(k: int, epsilon: float) -> list[float]:
    """The k+1 equispaced shift levels j * epsilon / (k + 1), j = 0..k."""
    if k < 0:
        raise ValidationError(f"shift count must be >= 0, got {k}")
    if epsilon <= 0:
        raise ValidationError(f"window radius must be positive, got {epsilon}")
    return [j * epsilon / (k + 1) for j in range(k + 1)]


def _shift_map(x: np.ndarray, a: float) -> np.ndarray:
    """Piecewise-linear map: identity outside [-1, 1], zero exactly at a.

    Below a it is (x - a)/(1 + a), above (x - a)/(1 - a); both branches glue
    continuously to the identity at -1 and +1.
    """
    inside = np.abs(x) < 1.0
    lower = (x - a) / (1.0 + a)
    upper = (x - a) / (1.0 - a)
    return np.where(inside, np.where(x <= a, lower, upper), x)


def shift_deform(matrix, j: int, k: int, epsilon: float, *, h_tol: float = H_TOL) -> np.ndarray:
    """Apply the j-th shift deformation to a Hermitian contraction.

    The kernel of the result is the eigenspace of the input at the level
    j * epsilon / (k + 1).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0 <= j <= k:
        raise ValidationError(f"shift index must satisfy 0 <= j <= k, got j={j}, k={k}")
    m = require_hermitian(matrix, h_tol)
    w, v = np.linalg.eigh(m)
    if w.size and float(np.abs(w).max()) > 1.0 + h_tol:
        raise ValidationError(
            f"operator norm {float(np.abs(w).max()):.6g} exceeds 1; "
            "apply bounded_transform first"
        )
    a = j * epsilon / (k + 1)
    g = _shift_map(w, a)
    out = (v * g) @ v.conj().T
    return (out + out.conj().T) / 2.0


def count_in_window(eigenvalues, epsilon: float, *, b_tol: float = B_TOL, label: str = "") -> int:
    """Count values strictly inside (-epsilon, epsilon).

    Raises BoundaryAmbiguityError when a value sits within b_tol of either
    edge: the open-interval count could flip under perturbation, so the
    caller must move epsilon instead of trusting a side.
    """
    if epsilon <= 0:
        raise ValidationError(f"window radius must be positive, got {epsilon}")
    w = np.asarray(eigenvalues, dtype=float)
    if w.size:
        edge_dist = np.abs(np.abs(w) - epsilon)
        nearest = int(np.argmin(edge_dist))
        if edge_dist[nearest] <= b_tol:
            where = f" at {label}" if label else ""
            raise BoundaryAmbiguityError(
                f"eigenvalue {w[nearest]:.17g}{where} lies within {b_tol:.1e} of the "
                f"window edge +-{epsilon:.17g}; perturb epsilon"
            )
    return int(np.count_nonzero(np.abs(w) < epsilon))


def spectral_count(matrix, epsilon: float, *, h_tol: float = H_TOL, b_tol: float = B_TOL) -> int:
    """Number of eigenvalues, with multiplicity, strictly inside (-eps, eps)."""
    m = require_hermitian(matrix, h_tol)
    return count_in_window(np.linalg.eigvalsh(m), epsilon, b_tol=b_tol)


@dataclass
class FamilyPoint:
    """One parameter sample: an id, optional coordinates, and its operator."""

    id: str
    op: np.ndarray
    coords: np.ndarray | None = None


class SampledFamily:
    """A finite sampled family of Hermitian matrices with optional adjacency."""

    def __init__(
        self,
        dim: int,
        points: Sequence[FamilyPoint],
        edges: Sequence[tuple[str, str]] | None = None,
        *,
        h_tol: float = H_TOL,
    ):
        if dim < 1:
            raise ValidationError(f"matrix dimension must be positive, got {dim}")
        self.dim = dim
        self.points: list[FamilyPoint] = []
        self._by_id: dict[str, FamilyPoint] = {}
        for p in points:
            if not p.id:
                raise ValidationError("point ids must be non-empty strings")
            if p.id in self._by_id:
                raise ValidationError(f"duplicate point id {p.id!r}")
            op = require_hermitian(p.op, h_tol, what=f"operator at {p.id!r}")
            if op.shape != (dim, dim):
                raise ValidationError(
                    f"operator at {p.id!r} has shape {op.shape}, expected {(dim, dim)}"
                )
            coords = None if p.coords is None else np.asarray(p.coords, dtype=float)
            clean = FamilyPoint(p.id, op, coords)
            self.points.append(clean)
            self._by_id[p.id] = clean
        self.edges: list[tuple[str, str]] | None = None
        if edges is not None:
            self.edges = []
            for a, b in edges:
                if a not in self._by_id or b not in self._by_id:
                    raise ValidationError(f"edge ({a!r}, {b!r}) references unknown point id")
                if a == b:
                    raise ValidationError(f"self-edge at {a!r}")
                self.edges.append((a, b))

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.points]

    def point(self, point_id: str) -> FamilyPoint:
        try:
            return self._by_id[point_id]
        except KeyError:
            raise ValidationError(f"unknown point id {point_id!r}") from None

    @staticmethod
    def _matrix_from_json(rows, dim: int, where: str) -> np.ndarray:
        try:
            m = np.array([[complex(re, im) for re, im in row] for row in rows])
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"matrix at {where} must be rows of [re, im] pairs: {exc}")
        if m.shape != (dim, dim):
            raise ValidationError(f"matrix at {where} has shape {m.shape}, expected {(dim, dim)}")
        return m

    @classmethod
    def from_json(cls, obj: dict, *, h_tol: float = H_TOL) -> "SampledFamily":
        if not isinstance(obj, dict) or "dim" not in obj or "points" not in obj:
            raise ValidationError("family JSON must be an object with 'dim' and 'points'")
        dim = obj["dim"]
        if not isinstance(dim, int):
            raise ValidationError(f"family 'dim' must be an integer, got {dim!r}")
        points = []
        for entry in obj["points"]:
            if "id" not in entry or "matrix" not in entry:
                raise ValidationError("each family point needs 'id' and 'matrix'")
            op = cls._matrix_from_json(entry["matrix"], dim, repr(entry["id"]))
            coords = entry.get("coords")
            points.append(FamilyPoint(str(entry["id"]), op, coords))
        edges = None
        if obj.get("edges") is not None:
            edges = [(str(a), str(b)) for a, b in obj["edges"]]
        return cls(dim, points, edges, h_tol=h_tol)

    @classmethod
    def load(cls, path, *, h_tol: float = H_TOL) -> "SampledFamily":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"malformed family JSON in {path}: {exc}")
        return cls.from_json(obj, h_tol=h_tol)

    def to_json(self) -> dict:
        out: dict = {"dim": self.dim, "points": []}
        for p in self.points:
            entry: dict = {
                "id": p.id,
                "matrix": [[[z.real, z.imag] for z in row] for row in p.op],
            }
            if p.coords is not None:
                entry["coords"] = [float(c) for c in p.coords]
            out["points"].append(entry)
        if self.edges is not None:
            out["edges"] = [[a, b] for a, b in self.edges]
        return out


@dataclass(frozen=True)
class PathSpec:
    """An ordered walk through family points; closed paths add the wrap step."""

    ids: tuple[str, ...]
    closed: bool = False

    def __post_init__(self) -> None:
        ids = tuple(str(i) for i in self.ids)
        object.__setattr__(self, "ids", ids)
        if not ids:
            raise ValidationError("path must visit at least one point")
        for a, b in zip(ids, ids[1:]):
            if a == b:
                raise ValidationError(f"consecutive path ids must differ, got {a!r} twice")
        if self.closed and len(ids) > 1 and ids[0] == ids[-1]:
            raise ValidationError(
                "closed paths must not repeat the first id; the wrap step is implicit"
            )

    def steps(self) -> list[tuple[str, str]]:
        pairs = list(zip(self.ids, self.ids[1:]))
        # a one-point closed path is the constant loop: no steps at all
        if self.closed and len(self.ids) > 1:
            pairs.append((self.ids[-1], self.ids[0]))
        return pairs


@dataclass
class CoverReport:
    """Which points each shifted operator covers, and whether the union is all."""

    k: int
    epsilon: float
    sets: list[list[str]]
    covered: bool
    uncovered_ids: list[str]
    indeterminate: list[dict]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "epsilon": self.epsilon,
            "sets": {f"U_{j}": list(ids) for j, ids in enumerate(self.sets)},
            "covered": self.covered,
            "uncovered_ids": list(self.uncovered_ids),
            "indeterminate": list(self.indeterminate),
        }


def build_cover(
    fam: SampledFamily,
    k: int,
    epsilon: float,
    *,
    inv_tol: float = INV_TOL,
    jobs: int = 1,
) -> CoverReport:
    """Cover the family by invertibility of the k+1 shifted operators.

    Point b joins U_j when A_b - a_j I is safely invertible, measured by its
    smallest singular value; for Hermitian A_b that value is the distance
    from a_j to the spectrum, so one eigendecomposition per point suffices.
    Singular values within a decade of inv_tol are flagged indeterminate and
    conservatively kept out of U_j.  When every point has at most k window
    eigenvalues, pigeonhole over the k+1 levels guarantees a full cover.
    """
    levels = shift_levels(k, epsilon)
    lo = inv_tol / AMBIGUITY_DECADE
    hi = inv_tol * AMBIGUITY_DECADE

    spectra = parallel_map(lambda p: np.linalg.eigvalsh(p.op), fam.points, jobs)

    sets: list[list[str]] = [[] for _ in levels]
    uncovered: list[str] = []
    indeterminate: list[dict] = []
    for point, w in zip(fam.points, spectra):
        hit = False
        for j, a in enumerate(levels):
            sigma_min = float(np.abs(w - a).min()) if w.size else math.inf
            if sigma_min > hi:
                sets[j].append(point.id)
                hit = True
            elif sigma_min >= lo:
                indeterminate.append({"id": point.id, "shift_index": j, "sigma_min": sigma_min})
        if not hit:
            uncovered.append(point.id)
    return CoverReport(
        k=k,
        epsilon=epsilon,
        sets=sets,
        covered=not uncovered,
        uncovered_ids=uncovered,
        indeterminate=indeterminate,
    )


def _step_norm_exceeds(delta: np.ndarray, eta: float) -> bool:
    # Frobenius dominates the operator norm, so a small Frobenius value is a
    # sufficient pass; only borderline steps pay for the exact 2-norm.
    if np.linalg.norm(delta) < eta:
        return False
    return np.linalg.norm(delta, ord=2) >= eta


def spectral_flow(fam: SampledFamily, path: PathSpec, eta: float, *, jobs: int = 1) -> int:
    """Net number of eigenvalues crossing zero upward along the path.

    Accumulates the negative-eigenvalue count drop over each listed step; for
    an open path this telescopes to n_minus(start) - n_minus(end).  Requires
    every step to move the operator by less than eta in norm (no crossing can
    hide inside a step) and, for open paths, endpoints with no spectrum in
    [-eta, eta].
    """
    if eta <= 0:
        raise ValidationError(f"crossing guard eta must be positive, got {eta}")
    points = [fam.point(i) for i in path.ids]
    steps = path.steps()
    for a, b in steps:
        delta = fam.point(b).op - fam.point(a).op
        if _step_norm_exceeds(delta, eta):
            norm = float(np.linalg.norm(delta, ord=2))
            raise RefinementRequiredError(
                f"step {a!r} -> {b!r} moves the operator by {norm:.6g} >= eta = {eta:.6g}; "
                "refine the path"
            )

    unique_ids = list(dict.fromkeys(path.ids))
    spectra = dict(
        zip(unique_ids, parallel_map(lambda i: np.linalg.eigvalsh(fam.point(i).op), unique_ids, jobs))
    )

    if not path.closed:
        for which, point in (("first", points[0]), ("last", points[-1])):
            w = spectra[point.id]
            gap = float(np.abs(w).min()) if w.size else math.inf
            if gap <= eta:
                raise EndpointDegeneracyError(
                    f"{which} path point {point.id!r} has an eigenvalue within eta = {eta:.6g} "
                    "of zero; the endpoint count is ill-defined"
                )

    def n_neg(point_id: str) -> int:
        return int(np.count_nonzero(spectra[point_id] < 0.0))

    return sum(n_neg(a) - n_neg(b) for a, b in steps)
