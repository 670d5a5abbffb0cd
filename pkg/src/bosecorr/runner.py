"""Orchestration: build a model from a config, evolve it, run the checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig, resolve_velocity
from .cutoff import ScaledCutoff, make_standard_cutoff, velocity_params
from .errors import RegimeError
from .fock import FockBasis
from .hopping import beta_of, build_power_law, zero_hopping
from .lattice import TorusLattice
from .model import (
    ModelSpec,
    assemble_hamiltonian,
    check_controlled_density,
    check_translation_invariance,
    mott_state,
)
from .observables import correlation_profile
from .propagator import evolve
from .report import CheckReport, hard_checks_pass
from .verifier import (
    ScalingEntry,
    TheoremCheckConfig,
    check_commutator_decomposition,
    check_differential_inequality_structure,
    check_geometric_property,
    check_particle_transport,
    check_symmetrized_expansion_first_order,
    check_theorem_bound,
    wraparound_ok,
)

INVARIANCE_TOL = 1e-8


@dataclass
class RunResult:
    config: RunConfig
    lat: TorusLattice
    basis: FockBasis
    H: object
    psi0: np.ndarray
    kappa: float
    v: float
    beta: int
    trace: object
    reports: list
    scaling_entry: ScalingEntry
    scaled_cutoffs: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return hard_checks_pass(self.reports)


def _invariance_report(H, psi0, trace, basis) -> CheckReport:
    """Translation invariance of H and the state, and covariance of profiles."""
    res_h = check_translation_invariance(H, basis)
    res_psi = check_translation_invariance(psi0, basis)
    lat = basis.lat
    res_cov = 0.0
    probe = [0, len(trace.times) // 2, len(trace.times) - 1]
    centers = [lat.site(1)] if lat.n_sites > 1 else []
    for k in probe:
        base = correlation_profile(trace.states[k], basis).values
        for c in centers:
            shifted = correlation_profile(trace.states[k], basis, center=c).values
            # profile around c, read off at c + x, must match profile around 0 at x
            perm = np.array([lat.index(tuple((a + b) % lat.L for a, b in zip(x, c)))
                             for x in lat.sites()])
            res_cov = max(res_cov, float(np.abs(shifted[perm] - base).max()))
    worst = max(res_h, res_psi, res_cov)
    return CheckReport(
        name="translation_invariance",
        passed=worst <= INVARIANCE_TOL,
        hard=True,
        margin=INVARIANCE_TOL - worst,
        diagnostics={"hamiltonian": res_h, "initial_state": res_psi,
                     "profile_covariance": res_cov},
    )


def run(cfg: RunConfig) -> RunResult:
    lat = TorusLattice(cfg.d, cfg.L)
    if cfg.hopping_kind == "zero":
        hop = zero_hopping(lat, alpha=cfg.alpha)
    else:
        hop = build_power_law(lat, cfg.C_J, cfg.alpha)
    v, kap = resolve_velocity(cfg)
    beta = beta_of(cfg.alpha, cfg.d)
    model = ModelSpec(lat=lat, hopping=hop, potential=cfg.potential, n_max=cfg.n_max)
    n_total = cfg.nu * lat.n_sites if cfg.use_sector else None
    basis = FockBasis(lat, cfg.n_max, n_total=n_total)
    H = assemble_hamiltonian(model, basis, dim_max=cfg.dim_max)
    psi0 = mott_state(cfg.nu, basis)

    horizons = [(R - r) / v for R, r in cfg.pairs]
    t_max = cfg.t_max if cfg.t_max is not None else max(horizons)
    times = np.linspace(0.0, t_max, cfg.n_steps + 1)
    trace = evolve(H, psi0, times, cfg.propagator, basis=basis)

    tcfg = TheoremCheckConfig(
        model=model, nu=cfg.nu, lam=cfg.lam, v=v, pairs=cfg.pairs,
        times=times, propagator=cfg.propagator,
        use_sector=cfg.use_sector, dim_max=cfg.dim_max,
    )

    reports: list[CheckReport] = []
    scs = []
    for R, r in cfg.pairs:
        try:
            vp = velocity_params(v, kap, R, r)
        except RegimeError:
            scs.append(None)
            continue
        scs.append(ScaledCutoff(base=make_standard_cutoff(vp.epsilon), params=vp, lat=lat))

    if "invariance" in cfg.checks:
        reports.append(_invariance_report(H, psi0, trace, basis))
    if "controlled_density" in cfg.checks:
        reports.append(check_controlled_density(psi0, cfg.lam, cfg.cd_radii, basis))
    for sc in scs:
        if sc is None:
            continue
        if "geometric" in cfg.checks:
            reports.append(check_geometric_property(trace, H, sc, cfg.lam, basis))
        if "commutator" in cfg.checks:
            reports.append(check_commutator_decomposition(trace, H, hop, sc, basis))
        if "differential" in cfg.checks:
            reports.append(
                check_differential_inequality_structure(trace, H, sc, basis, hop, beta)
            )
    if "theorem" in cfg.checks:
        reports.append(check_theorem_bound(tcfg, trace=trace, basis=basis, H=H))
    if "transport" in cfg.checks and cfg.transport_r1 is not None:
        reports.append(
            check_particle_transport(
                tcfg, cfg.transport_r1, cfg.transport_r2, p=2,
                trace=trace, basis=basis, H=H,
            )
        )
    if "symmetrized" in cfg.checks and scs and scs[0] is not None:
        pairs = list(itertools.combinations(lat.sites(), 2))
        reports.append(check_symmetrized_expansion_first_order(scs[0], pairs))

    origin = lat.index(lat.origin)
    occ0sq = basis.occs[:, origin].astype(np.float64) ** 2
    sup_n0sq = max(float(np.abs(s) ** 2 @ occ0sq) for s in trace.states)
    R0, r0 = cfg.pairs[0]
    entry = ScalingEntry(
        t_max=float(times[-1]), R=R0, r=r0, lam=cfg.lam, d=cfg.d,
        sup_n0sq=sup_n0sq, wrap_ok=wraparound_ok(v, float(times[-1]), cfg.L),
    )
    return RunResult(
        config=cfg, lat=lat, basis=basis, H=H, psi0=psi0,
        kappa=kap, v=v, beta=beta, trace=trace, reports=reports,
        scaling_entry=entry, scaled_cutoffs=scs,
    )
