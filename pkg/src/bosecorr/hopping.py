"""Translation-invariant hopping kernels and their distance moments.

A kernel assigns a real amplitude to every displacement on the torus, so
``J[x, y] = kernel(y - x)`` is automatically translation invariant and,
since displacements come in +/- pairs with equal minimal-image length,
symmetric.  The kernel is stored as one value per displacement (L^d
numbers) rather than per pair (L^2d).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RegimeError
from .lattice import Site, TorusLattice, negate, torus_distance


@dataclass(frozen=True)
class HoppingMatrix:
    """Translation-invariant hopping amplitudes with a power-law decay certificate.

    ``kernel[k]`` is the amplitude for the displacement whose linear index
    is ``k``; the zero displacement carries amplitude 0 (any on-diagonal
    term is a number-operator potential and belongs in the potential).
    """

    lat: TorusLattice
    kernel: np.ndarray
    C_J: float
    alpha: float

    def coupling(self, x: Site, y: Site) -> float:
        """J[x, y], i.e. the kernel at displacement y - x."""
        disp = tuple((cy - cx) % self.lat.L for cx, cy in zip(x, y))
        return float(self.kernel[self.lat.index(disp)])

    def pair_matrix(self) -> np.ndarray:
        """Dense (n_sites, n_sites) coupling matrix; small lattices only."""
        n = self.lat.n_sites
        sites = self.lat.sites()
        out = np.empty((n, n))
        for i, x in enumerate(sites):
            for j, y in enumerate(sites):
                out[i, j] = self.coupling(x, y)
        return out


def build_power_law(lat: TorusLattice, C_J: float, alpha: float) -> HoppingMatrix:
    """Kernel saturating the decay bound: J = C_J (1 + |x-y|)^(-alpha) off the diagonal."""
    if C_J <= 0:
        raise ParameterError(f"C_J must be positive, got {C_J}")
    if alpha <= 3 * lat.d + 1:
        warnings.warn(
            f"alpha={alpha} is at or below 3d+1={3 * lat.d + 1}; the ballistic bound "
            "regime is not guaranteed there",
            stacklevel=2,
        )
    kernel = np.zeros(lat.n_sites)
    for k, z in enumerate(lat.sites()):
        if k == 0:
            continue
        kernel[k] = C_J * (1.0 + torus_distance(z, lat.origin, lat)) ** (-alpha)
    return HoppingMatrix(lat=lat, kernel=kernel, C_J=C_J, alpha=alpha)


def zero_hopping(lat: TorusLattice, alpha: float = 5.0) -> HoppingMatrix:
    """The J == 0 kernel (frozen dynamics); satisfies every decay bound."""
    return HoppingMatrix(lat=lat, kernel=np.zeros(lat.n_sites), C_J=0.0, alpha=alpha)


def moment(J: HoppingMatrix, k: int) -> float:
    """k-th distance moment sup_x sum_y |J[x,y]| |x-y|^k.

    By translation invariance the supremum is attained at every site, so
    the sum is taken around the origin.
    """
    if k < 1:
        raise ParameterError(f"moment order must be >= 1, got {k}")
    dist = J.lat.distances_from_origin
    return float(np.sum(np.abs(J.kernel) * dist**k))


def kappa(J: HoppingMatrix) -> float:
    """First distance moment of the hopping matrix."""
    return moment(J, 1)


def beta_of(alpha: float, d: int) -> int:
    """floor(alpha - d - 1); requires alpha > d + 1."""
    if alpha <= d + 1:
        raise RegimeError(f"alpha={alpha} must exceed d+1={d + 1}")
    return math.floor(alpha - d - 1)


def decay_certificate(J: HoppingMatrix) -> float:
    """max over displacements of |J| (1 + |z|)^alpha; at most C_J for valid kernels."""
    dist = J.lat.distances_from_origin
    vals = np.abs(J.kernel) * (1.0 + dist) ** J.alpha
    vals[0] = 0.0
    return float(vals.max())
