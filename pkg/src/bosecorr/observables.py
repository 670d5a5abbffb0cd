"""Cutoff-weighted correlation observables and their Heisenberg derivatives.

The central object is the diagonal observable sum_x w(x) n_0 n_x with a
scaled-cutoff weight profile w.  Diagonality in the occupation basis is
the key performance fact: expectations are O(dim) dot products, and the
commutator with the Hamiltonian reduces to one sparse matrix-vector
product through

    <i[H, A]> = -2 Im <H psi, a psi>        (a the diagonal of A).

The time derivative of the running expectation combines that commutator
with the explicit time dependence of the moving cutoff,
d/dt <A_ts> = <-(v_tilde/s) A'_ts + i[H, A_ts]>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutoff import ScaledCutoff, make_standard_cutoff, scaled_weights
from .errors import ParameterError
from .fock import FockBasis, apply_operator, transfer_elements
from .hopping import HoppingMatrix
from .lattice import Site, TorusLattice, ball_indices


@dataclass
class CorrelationObservable:
    """sum_x weights[x] n_0 n_x, cached as its occupation-basis diagonal."""

    variant: str
    t: float
    weights: np.ndarray
    diag: np.ndarray


def correlation_observable(
    sc: ScaledCutoff, variant: str, t: float, basis: FockBasis
) -> CorrelationObservable:
    """Build the weighted correlation observable for one grid time.

    Variants: "chi" uses the step itself, "chi_prime" its derivative, and
    "tilde_prime" the derivative of the dominating class member returned
    by cutoff combination (the canonical cutoff at the same epsilon; the
    report layer records this choice).
    """
    if variant == "chi":
        w = scaled_weights(sc, t, "chi")
    elif variant == "chi_prime":
        w = scaled_weights(sc, t, "chi_prime")
    elif variant == "tilde_prime":
        tilde = ScaledCutoff(
            base=make_standard_cutoff(sc.base.epsilon), params=sc.params, lat=sc.lat
        )
        w = scaled_weights(tilde, t, "chi_prime")
    else:
        raise ParameterError(f"unknown observable variant {variant!r}")
    origin = basis.lat.index(basis.lat.origin)
    occ = basis.occs.astype(np.float64)
    diag = occ[:, origin] * (occ @ w)
    return CorrelationObservable(variant=variant, t=t, weights=w, diag=diag)


def observable_expectation(obs: CorrelationObservable, psi: np.ndarray) -> float:
    w2 = np.abs(psi) ** 2
    return float(w2 @ obs.diag)


@dataclass
class CorrelationProfile:
    """<n_c n_x> for every site x, around the center c."""

    lat: TorusLattice
    center: Site
    values: np.ndarray
    t: float | None = None


def correlation_profile(
    psi: np.ndarray, basis: FockBasis, center: Site | None = None, t: float | None = None
) -> CorrelationProfile:
    lat = basis.lat
    center = lat.origin if center is None else center
    w2 = np.abs(psi) ** 2
    occ_c = basis.occupations_at(center)
    occ = basis.occs.astype(np.float64)
    values = (w2 * occ_c) @ occ
    return CorrelationProfile(lat=lat, center=center, values=values, t=t)


def corr_with_ball(profile: CorrelationProfile, r: float) -> float:
    """<n_c N_{B_r(c)}>, the profile summed over the ball of radius r."""
    idx = ball_indices(profile.center, r, profile.lat)
    return float(profile.values[idx].sum())


def commutator_with_diagonal(H, diag: np.ndarray, psi: np.ndarray) -> float:
    """<i[H, A]> for a real diagonal A, via one matrix-vector product."""
    hpsi = apply_operator(H, psi)
    z = np.vdot(hpsi, diag * psi)
    return float(-2.0 * z.imag)


def heisenberg_derivative(H, sc: ScaledCutoff, t: float, psi: np.ndarray, basis: FockBasis) -> float:
    """d/dt <A_ts>_t evaluated exactly at the grid time.

    Exactly real by construction: the explicit part is a diagonal
    expectation and the commutator comes out as -2 Im of an inner
    product, so no imaginary residue needs discarding.
    """
    p = sc.params
    chi = correlation_observable(sc, "chi", t, basis)
    chi_prime = correlation_observable(sc, "chi_prime", t, basis)
    explicit = -(p.v_tilde / p.s) * observable_expectation(chi_prime, psi)
    return explicit + commutator_with_diagonal(H, chi.diag, psi)


def commutator_terms(
    hop: HoppingMatrix, sc: ScaledCutoff, t: float, psi: np.ndarray, basis: FockBasis
) -> tuple[complex, complex]:
    """The two sums whose combination reproduces <[iH, A_ts]> as -i(I + II).

    Term I:  sum_z chi(z) sum_x J[x,z] <(b_x^dag b_z - b_z^dag b_x) n_0>.
    Term II: sum_z chi(z) sum_{x != 0} J[x,0] <n_z (b_x^dag b_0 - b_0^dag b_x)>.

    Requires a symmetric kernel (asserted), since the relabeling behind
    the decomposition uses J[x,y] = J[y,x].
    """
    lat = basis.lat
    n = lat.n_sites
    J = hop.pair_matrix()
    if not np.allclose(J, J.T, atol=1e-12):
        raise ParameterError("commutator decomposition requires a symmetric kernel")
    chi = scaled_weights(sc, t, "chi")
    origin = lat.index(lat.origin)
    occ = basis.occs

    psi_n0 = basis.occupations_at(lat.origin) * psi
    # E[x, z] = <b_x^dag b_z n_0>
    E = np.zeros((n, n), dtype=np.complex128)
    sites = lat.sites()
    for ix in range(n):
        for iz in range(n):
            if ix == iz or J[ix, iz] == 0.0:
                continue
            src, dst, amp = transfer_elements(sites[ix], sites[iz], basis)
            E[ix, iz] = np.vdot(psi[dst], amp * psi_n0[src])
    term_one = 0.0j
    for ix in range(n):
        for iz in range(n):
            if ix == iz:
                continue
            term_one += J[ix, iz] * chi[iz] * (E[ix, iz] - E[iz, ix])

    term_two = 0.0j
    for ix in range(n):
        if ix == origin or J[ix, origin] == 0.0:
            continue
        src, dst, amp = transfer_elements(sites[ix], sites[origin], basis)
        u = np.conj(psi[dst]) * amp * psi[src]
        gained = u @ occ[dst].astype(np.float64)  # <n_z b_x^dag b_0> per z
        src2, dst2, amp2 = transfer_elements(sites[origin], sites[ix], basis)
        u2 = np.conj(psi[dst2]) * amp2 * psi[src2]
        lost = u2 @ occ[dst2].astype(np.float64)  # <n_z b_0^dag b_x> per z
        term_two += J[ix, origin] * (chi @ (gained - lost))
    return complex(term_one), complex(term_two)
