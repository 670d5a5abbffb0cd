"""Discrete torus geometry.

Sites live on the torus ``{0, ..., L-1}^d`` with periodic boundary
conditions and the minimal-image Euclidean metric: the distance between
two sites is the smallest Euclidean norm of any periodic image of their
difference.  Because the metric factorizes over axes, the minimum can be
taken per coordinate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidSiteError, ParameterError

Site = tuple[int, ...]


@dataclass(frozen=True)
class TorusLattice:
    """Discrete torus of side length ``L`` in ``d`` dimensions."""

    d: int
    L: int

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError(f"dimension must be >= 1, got d={self.d}")
        if self.L < 2:
            raise ParameterError(f"side length must be >= 2, got L={self.L}")

    @property
    def n_sites(self) -> int:
        return self.L**self.d

    @property
    def origin(self) -> Site:
        return (0,) * self.d

    def sites(self) -> list[Site]:
        """All sites in lexicographic coordinate order."""
        return list(itertools.product(range(self.L), repeat=self.d))

    def index(self, site: Site) -> int:
        """Linear index consistent with the lexicographic enumeration."""
        self.validate(site)
        idx = 0
        for c in site:
            idx = idx * self.L + c
        return idx

    def site(self, index: int) -> Site:
        if not 0 <= index < self.n_sites:
            raise InvalidSiteError(f"site index {index} out of range")
        coords = []
        for _ in range(self.d):
            coords.append(index % self.L)
            index //= self.L
        return tuple(reversed(coords))

    def validate(self, site: Site) -> None:
        if len(site) != self.d:
            raise InvalidSiteError(f"site {site} has wrong dimension (expected {self.d})")
        for c in site:
            if not 0 <= c < self.L:
                raise InvalidSiteError(f"coordinate {c} of site {site} outside [0, {self.L})")

    @cached_property
    def distances_from_origin(self) -> np.ndarray:
        """Minimal-image distance of every site from the origin, by linear index."""
        out = np.empty(self.n_sites)
        for i, s in enumerate(self.sites()):
            out[i] = torus_distance(s, self.origin, self)
        return out


def torus_distance(a: Site, b: Site, lat: TorusLattice) -> float:
    """Minimal-image Euclidean distance between two sites."""
    lat.validate(a)
    lat.validate(b)
    acc = 0
    for ca, cb in zip(a, b):
        m = (ca - cb) % lat.L
        m = min(m, lat.L - m)
        acc += m * m
    return math.sqrt(acc)


def ball(center: Site, radius: float, lat: TorusLattice) -> list[Site]:
    """All sites within ``radius`` of ``center``, in lexicographic order."""
    if radius < 0:
        raise ParameterError(f"radius must be >= 0, got {radius}")
    lat.validate(center)
    return [s for s in lat.sites() if torus_distance(s, center, lat) <= radius]


def ball_indices(center: Site, radius: float, lat: TorusLattice) -> np.ndarray:
    """Linear indices of ``ball(center, radius, lat)``."""
    return np.array([lat.index(s) for s in ball(center, radius, lat)], dtype=np.int64)


def translate(x: Site, z: Site, lat: TorusLattice) -> Site:
    """Coordinate-wise sum modulo L."""
    lat.validate(x)
    lat.validate(z)
    return tuple((cx + cz) % lat.L for cx, cz in zip(x, z))


def negate(z: Site, lat: TorusLattice) -> Site:
    """Additive inverse on the torus."""
    lat.validate(z)
    return tuple((-c) % lat.L for c in z)
