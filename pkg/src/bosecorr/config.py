"""Run configuration: schema, validation, canonical serialization.

One JSON file describes a full experiment.  Schema violations raise
ConfigError (CLI exit 2); violations of the bound-regime preconditions
raise RegimeError (exit 3) and are checked at load time so a bad config
fails before any Fock space is built.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError, RegimeError
from .hopping import build_power_law, kappa, zero_hopping
from .lattice import TorusLattice
from .model import PotentialSpec
from .propagator import PropagatorConfig

SCHEMA_VERSION = 1

ALL_CHECKS = (
    "invariance",
    "controlled_density",
    "geometric",
    "commutator",
    "differential",
    "theorem",
    "transport",
    "symmetrized",
)


@dataclass
class RunConfig:
    d: int
    L: int
    n_max: int
    hopping_kind: str
    alpha: float
    C_J: float
    potential: PotentialSpec
    nu: int
    lam: float
    v: float | None
    v_over_kappa: float | None
    pairs: list
    t_max: float | None
    n_steps: int
    propagator: PropagatorConfig
    use_sector: bool = True
    cd_radii: list = field(default_factory=lambda: [1.0, 2.0])
    checks: list = field(default_factory=lambda: list(ALL_CHECKS))
    transport_r1: float | None = None
    transport_r2: float | None = None
    dim_max: int = 4_000_000
    output_dir: str = "out"
    schema_version: int = SCHEMA_VERSION


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _get(data: dict, key: str, typ, default=None, required=False):
    if key not in data or data[key] is None:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    val = data[key]
    if typ is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, typ):
        raise ConfigError(f"key {key!r} must be {typ.__name__}, got {type(val).__name__}")
    return val


def from_dict(data: dict) -> RunConfig:
    _require(isinstance(data, dict), "config root must be an object")
    version = _get(data, "schema_version", int, required=True)
    _require(version == SCHEMA_VERSION, f"unsupported schema_version {version}")

    lat = _get(data, "lattice", dict, required=True)
    d = _get(lat, "d", int, required=True)
    L = _get(lat, "L", int, required=True)
    _require(d >= 1 and L >= 2, "lattice requires d >= 1 and L >= 2")
    n_max = _get(data, "n_max", int, required=True)
    _require(n_max >= 1, "n_max must be >= 1")

    hop = _get(data, "hopping", dict, required=True)
    hop_kind = _get(hop, "kind", str, required=True)
    _require(hop_kind in ("power_law", "zero"), f"unknown hopping kind {hop_kind!r}")
    alpha = _get(hop, "alpha", float, required=True)
    C_J = _get(hop, "C_J", float, default=0.0, required=(hop_kind == "power_law"))

    pot = _get(data, "potential", dict, required=True)
    pot_kind = _get(pot, "kind", str, required=True)
    if pot_kind == "bose_hubbard":
        potential = PotentialSpec.bose_hubbard(
            _get(pot, "U", float, required=True), _get(pot, "mu", float, required=True)
        )
    elif pot_kind == "polynomial":
        coeffs = _get(pot, "coefficients", list, required=True)
        _require(all(isinstance(c, (int, float)) for c in coeffs),
                 "polynomial coefficients must be numbers")
        potential = PotentialSpec.polynomial(coeffs)
    else:
        raise ConfigError(f"unknown potential kind {pot_kind!r}")

    init = _get(data, "initial_state", dict, required=True)
    _require(_get(init, "kind", str, required=True) == "mott",
             "only Mott initial states are supported")
    nu = _get(init, "nu", int, required=True)
    _require(0 <= nu <= n_max, f"nu={nu} must lie in [0, n_max={n_max}]")
    lam = _get(init, "lambda", float, required=True)
    _require(lam > 0, "lambda must be positive")

    vel = _get(data, "velocity", dict, required=True)
    v = _get(vel, "v", float)
    v_over_kappa = _get(vel, "v_over_kappa", float)
    _require((v is None) != (v_over_kappa is None),
             "velocity requires exactly one of 'v' or 'v_over_kappa'")

    pairs_raw = _get(data, "pairs", list, required=True)
    _require(len(pairs_raw) >= 1, "at least one (R, r) pair is required")
    pairs = []
    for entry in pairs_raw:
        _require(isinstance(entry, dict) and "R" in entry and "r" in entry,
                 "each pair must be an object with keys R and r")
        pairs.append((float(entry["R"]), float(entry["r"])))

    time = _get(data, "time", dict, required=True)
    t_max = _get(time, "t_max", float)
    n_steps = _get(time, "n_steps", int, required=True)
    _require(n_steps >= 1, "n_steps must be >= 1")

    prop = _get(data, "propagator", dict, default={})
    propagator = PropagatorConfig(
        method=_get(prop, "method", str, default="krylov"),
        dt=_get(prop, "dt", float),
        krylov_dim=_get(prop, "krylov_dim", int, default=30),
        tol=_get(prop, "tol", float, default=1e-10),
        leakage_threshold=_get(prop, "leakage_threshold", float, default=1e-6),
    )

    checks = _get(data, "checks", list, default=list(ALL_CHECKS))
    for c in checks:
        _require(c in ALL_CHECKS, f"unknown check {c!r}; valid: {ALL_CHECKS}")

    transport = _get(data, "transport", dict, default=None)
    transport_r1 = transport_r2 = None
    if transport is not None:
        transport_r1 = _get(transport, "r1", float, required=True)
        transport_r2 = _get(transport, "r2", float, required=True)

    cfg = RunConfig(
        d=d, L=L, n_max=n_max,
        hopping_kind=hop_kind, alpha=alpha, C_J=C_J,
        potential=potential, nu=nu, lam=lam,
        v=v, v_over_kappa=v_over_kappa,
        pairs=pairs, t_max=t_max, n_steps=n_steps,
        propagator=propagator,
        use_sector=_get(data, "use_sector", bool, default=True),
        cd_radii=[float(r) for r in _get(data, "cd_radii", list, default=[1.0, 2.0])],
        checks=list(checks),
        transport_r1=transport_r1, transport_r2=transport_r2,
        dim_max=_get(data, "dim_max", int, default=4_000_000),
        output_dir=_get(data, "output_dir", str, default="out"),
        schema_version=version,
    )
    validate_regime(cfg)
    return cfg


def resolve_velocity(cfg: RunConfig) -> tuple[float, float]:
    """(v, kappa) with v resolved against the kernel's first moment."""
    lattice = TorusLattice(cfg.d, cfg.L)
    if cfg.hopping_kind == "zero":
        hop = zero_hopping(lattice, alpha=cfg.alpha)
    else:
        hop = build_power_law(lattice, cfg.C_J, cfg.alpha)
    kap = kappa(hop)
    if cfg.v is not None:
        return cfg.v, kap
    return cfg.v_over_kappa * kap, kap


def validate_regime(cfg: RunConfig) -> None:
    """Re-check every bound-regime precondition with actionable messages."""
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v, kap = resolve_velocity(cfg)
    if v <= 2 * kap:
        raise RegimeError(f"v > 2*kappa required: v={v:.6g}, 2*kappa={2 * kap:.6g}")
    if cfg.alpha <= cfg.d + 1:
        raise RegimeError(f"alpha > d+1 required for the decay index: alpha={cfg.alpha}")
    for R, r in cfg.pairs:
        if r < 0:
            raise RegimeError(f"pair (R={R}, r={r}): r >= 0 required")
        if R - r <= max(v, 1.0):
            raise RegimeError(
                f"pair (R={R}, r={r}): R - r > max(v, 1) = {max(v, 1.0):.6g} required"
            )
    if cfg.transport_r1 is not None:
        if cfg.transport_r2 - cfg.transport_r1 <= max(cfg.transport_r1, 1.0):
            raise RegimeError(
                "transport window requires r2 - r1 > max(r1, 1): "
                f"r1={cfg.transport_r1}, r2={cfg.transport_r2}"
            )


def to_dict(cfg: RunConfig) -> dict:
    """Canonical dictionary form; loading its JSON reproduces the config."""
    pot: dict = {"kind": cfg.potential.kind}
    if cfg.potential.kind == "bose_hubbard":
        pot["U"] = cfg.potential.U
        pot["mu"] = cfg.potential.mu
    else:
        pot["coefficients"] = list(cfg.potential.coefficients)
    out = {
        "schema_version": cfg.schema_version,
        "lattice": {"d": cfg.d, "L": cfg.L},
        "n_max": cfg.n_max,
        "hopping": {"kind": cfg.hopping_kind, "alpha": cfg.alpha, "C_J": cfg.C_J},
        "potential": pot,
        "initial_state": {"kind": "mott", "nu": cfg.nu, "lambda": cfg.lam},
        "velocity": ({"v": cfg.v} if cfg.v is not None
                     else {"v_over_kappa": cfg.v_over_kappa}),
        "pairs": [{"R": R, "r": r} for R, r in cfg.pairs],
        "time": {"t_max": cfg.t_max, "n_steps": cfg.n_steps},
        "propagator": {
            "method": cfg.propagator.method,
            "dt": cfg.propagator.dt,
            "krylov_dim": cfg.propagator.krylov_dim,
            "tol": cfg.propagator.tol,
            "leakage_threshold": cfg.propagator.leakage_threshold,
        },
        "use_sector": cfg.use_sector,
        "cd_radii": cfg.cd_radii,
        "checks": cfg.checks,
        "dim_max": cfg.dim_max,
        "output_dir": cfg.output_dir,
    }
    if cfg.transport_r1 is not None:
        out["transport"] = {"r1": cfg.transport_r1, "r2": cfg.transport_r2}
    return out


def canonical_json(cfg: RunConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2, sort_keys=True) + "\n"


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return from_dict(data)
