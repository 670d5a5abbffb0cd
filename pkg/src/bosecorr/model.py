"""Hamiltonian assembly, initial states, and assumption checks.

The Hamiltonian is the hopping form plus a potential that is a sum of
single-site polynomials in the number operators; that covers the
Bose-Hubbard case U n(n-1) - mu n and keeps the potential diagonal in
the occupation basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, OccupationError, ParameterError
from .fock import FockBasis, apply_operator, basis_state
from .hopping import HoppingMatrix
from .lattice import Site, TorusLattice, ball_indices
from .report import CheckReport

DEFAULT_DIM_MAX = 4_000_000


@dataclass(frozen=True)
class PotentialSpec:
    """Single-site number-operator potential.

    kind "bose_hubbard": U n(n-1) - mu n per site.
    kind "polynomial": sum_k c_k n^k per site, coefficients (c_0, c_1, ...).
    """

    kind: str
    U: float = 0.0
    mu: float = 0.0
    coefficients: tuple[float, ...] = field(default_factory=tuple)

    @classmethod
    def bose_hubbard(cls, U: float, mu: float) -> "PotentialSpec":
        return cls(kind="bose_hubbard", U=float(U), mu=float(mu))

    @classmethod
    def polynomial(cls, coefficients) -> "PotentialSpec":
        return cls(kind="polynomial", coefficients=tuple(float(c) for c in coefficients))

    def diagonal(self, basis: FockBasis) -> np.ndarray:
        occ = basis.occs.astype(np.float64)
        if self.kind == "bose_hubbard":
            per_site = self.U * occ * (occ - 1.0) - self.mu * occ
            return per_site.sum(axis=1)
        if self.kind == "polynomial":
            out = np.zeros(basis.dim)
            for k, c in enumerate(self.coefficients):
                if c != 0.0:
                    out += c * (occ**k).sum(axis=1)
            return out
        raise ParameterError(f"unknown potential kind {self.kind!r}")


@dataclass(frozen=True)
class ModelSpec:
    lat: TorusLattice
    hopping: HoppingMatrix
    potential: PotentialSpec
    n_max: int

    def __post_init__(self):
        if self.hopping.lat != self.lat:
            raise ParameterError("hopping kernel lives on a different lattice")


def assemble_hamiltonian(
    spec: ModelSpec, basis: FockBasis, dim_max: int = DEFAULT_DIM_MAX
) -> sp.csr_matrix:
    """H = sum_{x,y} J[x,y] b_x^dag b_y + V as a real symmetric CSR matrix."""
    if basis.lat != spec.lat or basis.n_max != spec.n_max:
        raise ParameterError("basis does not match the model spec")
    if basis.dim > dim_max:
        raise CapacityError(f"basis dimension {basis.dim} exceeds the budget {dim_max}")

    from .fock import transfer_elements

    sites = spec.lat.sites()
    rows, cols, data = [], [], []
    for ix, x in enumerate(sites):
        for iy, y in enumerate(sites):
            if ix == iy:
                continue
            J = spec.hopping.coupling(x, y)
            if J == 0.0:
                continue
            src, dst, amp = transfer_elements(x, y, basis)
            rows.append(dst.astype(np.int64))
            cols.append(src.astype(np.int64))
            data.append(J * amp)
    diag = spec.potential.diagonal(basis)
    idx = np.arange(basis.dim, dtype=np.int64)
    rows.append(idx)
    cols.append(idx)
    data.append(diag)
    H = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.dim, basis.dim),
    )
    H.data[np.abs(H.data) < 1e-15] = 0.0
    H.eliminate_zeros()
    return H


def mott_state(nu: int, basis: FockBasis) -> np.ndarray:
    """Product state with exactly nu bosons on every site."""
    if not 0 <= nu <= basis.n_max:
        raise OccupationError(f"nu={nu} outside [0, n_max={basis.n_max}]")
    if basis.n_total is not None and basis.n_total != nu * basis.n_sites:
        raise ParameterError(
            f"Mott nu={nu} has N={nu * basis.n_sites}, basis sector has N={basis.n_total}"
        )
    return basis_state((nu,) * basis.n_sites, basis)


def check_controlled_density(
    psi: np.ndarray, lam: float, radii, basis: FockBasis
) -> CheckReport:
    """Verify the initial-state moment bound <N_{B_r}^p> <= (lam r^d)^p for p = 1, 2.

    Radii below 1 are excluded: with B_0 = {origin} the bound at r = 0
    would demand a vanishing on-site density, which no occupied state
    satisfies; reports carry a note instead.
    """
    if lam <= 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    lat = basis.lat
    w = np.abs(psi) ** 2
    rows = []
    margins = []
    lam_needed = 0.0
    notes = []
    for r in radii:
        if r < 1:
            notes.append(f"radius {r} < 1 skipped (bound degenerates below r = 1)")
            continue
        nb = basis.occs[:, ball_indices(lat.origin, r, lat)].sum(axis=1, dtype=np.int64)
        nb = nb.astype(np.float64)
        for p in (1, 2):
            val = float(w @ nb**p)
            bound = (lam * r**lat.d) ** p
            margins.append(bound - val)
            lam_needed = max(lam_needed, val ** (1.0 / p) / r**lat.d)
            rows.append({"t": 0.0, "lhs": val, "rhs": bound, "margin": bound - val,
                         "label": f"r={r},p={p}"})
    margin = min(margins) if margins else float("inf")
    return CheckReport(
        name="controlled_density",
        passed=margin >= -1e-9,
        hard=True,
        margin=margin,
        fitted={"lambda_min": lam_needed},
        params={"lambda": lam, "radii": list(radii)},
        rows=rows,
        notes=notes,
    )


def check_translation_invariance(obj, basis: FockBasis) -> float:
    """Residual of translation invariance over the axis generators.

    Operators: max-entry norm of T H T^dag - H.  States: norm distance to
    the nearest global-phase multiple of the translated state.
    """
    lat = basis.lat
    worst = 0.0
    for j in range(lat.d):
        z = tuple(1 if i == j else 0 for i in range(lat.d))
        perm = basis.translation_permutation(z)
        if sp.issparse(obj):
            P = sp.csr_matrix(
                (np.ones(basis.dim), (perm, np.arange(basis.dim))),
                shape=(basis.dim, basis.dim),
            )
            diff = (P @ obj @ P.T - obj).tocoo()
            res = float(np.abs(diff.data).max()) if diff.nnz else 0.0
        else:
            translated = np.empty_like(obj)
            translated[perm] = obj
            overlap = abs(np.vdot(obj, translated))
            res = float(np.sqrt(max(0.0, 2.0 - 2.0 * overlap)))
        worst = max(worst, res)
    return worst


def energy_expectation(H: sp.spmatrix, psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, apply_operator(H, psi))))
