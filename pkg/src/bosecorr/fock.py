"""Truncated bosonic Fock space over the lattice.

Basis states are occupation patterns with at most ``n_max`` bosons per
site, enumerated by the little-endian mixed-radix key
``sum_i occ[i] * (n_max+1)**i`` (site order fixed by the lattice
enumeration).  A basis may optionally be restricted to a fixed total
particle number; every operator built here except the bare ladder
operators conserves the total number, so evolutions started from a
number eigenstate can run entirely inside the much smaller sector.

Operators are scipy CSR matrices with real entries; states are complex
numpy vectors.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, OccupationError, ParameterError
from .lattice import Site, TorusLattice, translate

Occupation = tuple[int, ...]

# Above this many mixed-radix keys the full-space scan used for sector
# enumeration and O(1) index lookup would not fit in memory.
_MAX_KEY_SPACE = 2**25

_PRUNE_THRESHOLD = 1e-15


def basis_dim(lat: TorusLattice, n_max: int) -> int:
    """Dimension of the unrestricted basis, (n_max+1)^(L^d)."""
    if n_max < 1:
        raise ParameterError(f"n_max must be >= 1, got {n_max}")
    return (n_max + 1) ** lat.n_sites


class FockBasis:
    """Occupation-number basis, optionally restricted to a total-number sector.

    Attributes
    ----------
    occs : (dim, n_sites) uint8 array of occupation patterns
    keys : (dim,) int64 array of mixed-radix keys, strictly increasing
    """

    def __init__(self, lat: TorusLattice, n_max: int, n_total: int | None = None):
        if n_max < 1:
            raise ParameterError(f"n_max must be >= 1, got {n_max}")
        if n_total is not None and not 0 <= n_total <= n_max * lat.n_sites:
            raise ParameterError(f"n_total={n_total} not reachable with n_max={n_max}")
        self.lat = lat
        self.n_max = int(n_max)
        self.n_total = n_total
        self.n_sites = lat.n_sites
        radix = n_max + 1
        key_space = radix**self.n_sites
        if key_space > _MAX_KEY_SPACE:
            raise CapacityError(
                f"key space (n_max+1)^n_sites = {key_space} exceeds {_MAX_KEY_SPACE}"
            )
        self.strides = radix ** np.arange(self.n_sites, dtype=np.int64)

        keys = np.arange(key_space, dtype=np.int64)
        occs = np.empty((key_space, self.n_sites), dtype=np.uint8)
        rem = keys.copy()
        for i in range(self.n_sites):
            occs[:, i] = rem % radix
            rem //= radix
        if n_total is None:
            self.occs = occs
            self.keys = keys
            self._lookup = None
        else:
            mask = occs.sum(axis=1, dtype=np.int64) == n_total
            self.occs = occs[mask]
            self.keys = keys[mask]
            lookup = np.full(key_space, -1, dtype=np.int64)
            lookup[self.keys] = np.arange(len(self.keys), dtype=np.int64)
            self._lookup = lookup
        self.dim = len(self.keys)

    def __repr__(self):
        sector = "full" if self.n_total is None else f"N={self.n_total}"
        return f"FockBasis(L={self.lat.L}^{self.lat.d}, n_max={self.n_max}, {sector}, dim={self.dim})"

    # -- index <-> occupation bijection ------------------------------------

    def index_of(self, occ: Occupation) -> int:
        occ = tuple(int(n) for n in occ)
        if len(occ) != self.n_sites:
            raise OccupationError(f"occupation has {len(occ)} entries, expected {self.n_sites}")
        for n in occ:
            if not 0 <= n <= self.n_max:
                raise OccupationError(f"occupation {n} outside [0, {self.n_max}]")
        key = int(np.dot(occ, self.strides))
        idx = self._index_of_key(key)
        if idx < 0:
            raise OccupationError(f"occupation {occ} not in the N={self.n_total} sector")
        return idx

    def occ_of(self, index: int) -> Occupation:
        if not 0 <= index < self.dim:
            raise OccupationError(f"basis index {index} out of range")
        return tuple(int(n) for n in self.occs[index])

    def _index_of_key(self, key):
        if self._lookup is None:
            return key
        return self._lookup[key]

    # -- per-site helpers ---------------------------------------------------

    def occupations_at(self, x: Site) -> np.ndarray:
        """Occupation of site x in every basis state, as float64."""
        return self.occs[:, self.lat.index(x)].astype(np.float64)

    @property
    def saturated(self) -> np.ndarray:
        """Boolean mask of states with some site at the cutoff."""
        if not hasattr(self, "_saturated"):
            self._saturated = (self.occs == self.n_max).any(axis=1)
        return self._saturated

    def translation_permutation(self, z: Site) -> np.ndarray:
        """Index permutation realizing the lattice translation by z.

        ``perm[i]`` is the index of the state obtained from state ``i`` by
        moving the boson content of every site ``y`` to ``y + z``.
        """
        lat = self.lat
        src_col = np.empty(self.n_sites, dtype=np.int64)
        for iy, y in enumerate(lat.sites()):
            src_col[iy] = lat.index(translate(y, tuple((-c) % lat.L for c in z), lat))
        moved = self.occs[:, src_col]
        keys = moved.astype(np.int64) @ self.strides
        perm = self._index_of_key(keys) if self._lookup is not None else keys
        return np.asarray(perm, dtype=np.int64)


# -- operators --------------------------------------------------------------


def _prune(mat: sp.csr_matrix) -> sp.csr_matrix:
    mat.data[np.abs(mat.data) < _PRUNE_THRESHOLD] = 0.0
    mat.eliminate_zeros()
    return mat


def diagonal_operator(diag: np.ndarray, basis: FockBasis) -> sp.csr_matrix:
    if len(diag) != basis.dim:
        raise ParameterError("diagonal length does not match basis dimension")
    return _prune(sp.diags(np.asarray(diag, dtype=np.float64)).tocsr())


def number_op(x: Site, basis: FockBasis) -> sp.csr_matrix:
    """n_x = b_x^dag b_x, diagonal in the occupation basis."""
    return diagonal_operator(basis.occupations_at(x), basis)


def number_restricted(X: Iterable[Site], basis: FockBasis) -> sp.csr_matrix:
    """N_X = sum of n_x over the region X."""
    diag = np.zeros(basis.dim)
    for x in X:
        diag += basis.occupations_at(x)
    return diagonal_operator(diag, basis)


def annihilation_op(x: Site, basis: FockBasis) -> sp.csr_matrix:
    """b_x with the hard cutoff: maps |n> to sqrt(n)|n-1>, kills |0>.

    Only defined on the unrestricted basis; within a fixed-number sector
    the ladder operators leave the basis.
    """
    if basis.n_total is not None:
        raise ParameterError("ladder operators require the unrestricted basis")
    xi = basis.lat.index(x)
    occ = basis.occs[:, xi].astype(np.int64)
    src = np.nonzero(occ >= 1)[0]
    dst = src - basis.strides[xi]
    amp = np.sqrt(occ[src].astype(np.float64))
    mat = sp.csr_matrix((amp, (dst, src)), shape=(basis.dim, basis.dim))
    return _prune(mat)


def creation_op(x: Site, basis: FockBasis) -> sp.csr_matrix:
    """b_x^dag, the adjoint of b_x; annihilates states with n_x = n_max."""
    return annihilation_op(x, basis).T.tocsr()


def transfer_elements(x: Site, y: Site, basis: FockBasis):
    """Matrix elements of b_x^dag b_y as (src, dst, amp) index arrays.

    Equal to the product of the truncated ladder operators: zero whenever
    n_y = 0 or n_x = n_max, and for x == y exactly the number operator.
    Conserves total particle number, so it is available in sector bases.
    """
    xi = basis.lat.index(x)
    yi = basis.lat.index(y)
    if xi == yi:
        idx = np.arange(basis.dim, dtype=np.int64)
        return idx, idx, basis.occs[:, xi].astype(np.float64)
    occ_x = basis.occs[:, xi]
    occ_y = basis.occs[:, yi]
    src = np.nonzero((occ_y >= 1) & (occ_x <= basis.n_max - 1))[0]
    keys_dst = basis.keys[src] + basis.strides[xi] - basis.strides[yi]
    dst = basis._index_of_key(keys_dst)
    amp = np.sqrt(
        occ_y[src].astype(np.float64) * (occ_x[src].astype(np.float64) + 1.0)
    )
    return src, np.asarray(dst, dtype=np.int64), amp


def transfer_op(x: Site, y: Site, basis: FockBasis) -> sp.csr_matrix:
    """b_x^dag b_y as a sparse matrix."""
    src, dst, amp = transfer_elements(x, y, basis)
    return _prune(sp.csr_matrix((amp, (dst, src)), shape=(basis.dim, basis.dim)))


def apply_operator(op: sp.spmatrix, psi: np.ndarray) -> np.ndarray:
    """op @ psi, splitting complex vectors over real operators.

    scipy upcasts the whole data array per call when dtypes are mixed;
    applying a real operator to the real and imaginary parts separately
    avoids that copy and is the hot path of Krylov propagation.
    """
    if op.shape[1] != psi.shape[0]:
        raise ParameterError("operator/state dimension mismatch")
    if np.iscomplexobj(psi) and not np.iscomplexobj(op.data):
        return op @ psi.real + 1j * (op @ psi.imag)
    return op @ psi


def expectation(op: sp.spmatrix, psi: np.ndarray) -> complex:
    """<psi, op psi>; real up to rounding for Hermitian operators."""
    return complex(np.vdot(psi, apply_operator(op, psi)))


def basis_state(occ: Occupation, basis: FockBasis) -> np.ndarray:
    """Unit vector on the given occupation pattern."""
    psi = np.zeros(basis.dim, dtype=np.complex128)
    psi[basis.index_of(occ)] = 1.0
    return psi
