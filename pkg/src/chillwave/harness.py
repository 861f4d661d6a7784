"""Experiment harness: seeded initial data, simulation runs, minimum-
stabilizer sweeps, and temporal convergence studies.

Everything here is deterministic given the config (seed included). Sweep
and convergence cells are independent jobs; the env var CHILLWAVE_THREADS
caps how many run concurrently (default 1, i.e. serial). Results are keyed
by cell coordinates, so assembly order never affects the output files.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import (
    EnergyTrace,
    TraceRow,
    energy_eps,
    error_norms,
    modified_energy,
    stability_verdict,
)
from .errors import NonFinite, SolveFailed
from .field2d import Field, NodalGrid, from_nodal, mean_value, norm_l2, modal_decomposition
from .potential import PotentialSpec
from .spectral1d import Basis1D, assemble_basis, mass_solve
from .timestepping import (
    SchemeParams,
    State,
    _advance,
    build_step_operator,
    evolve_first_order,
    step,
)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First `count` outputs of the SplitMix64 stream for `seed`.

    State advances by the 64-bit golden-ratio constant per draw and each
    state is finalized by the xorshift-multiply mix; matches the published
    reference outputs (seed 0 starts 0xE220A8397B1DCDAF, ...).
    """
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _uniform_pm1(seed: int, count: int) -> np.ndarray:
    return 2.0 * (splitmix64(seed, count).astype(np.float64) * 2.0**-64) - 1.0


def random_nodal_field(basis: Basis1D, seed: int) -> Field:
    """Uniform [-1, 1] noise at the 2M x 2M Gauss nodes (row-major by
    x-index then y-index), projected onto V_M x V_M."""
    P = 2 * basis.M
    vals = _uniform_pm1(seed, P * P).reshape(P, P)
    return from_nodal(NodalGrid(basis, vals, "2M"))


def generate_phi0(M: int, seed: int) -> Field:
    """Seeded random initial datum; deterministic across runs."""
    if M < 4:
        raise ValueError("M must be >= 4")
    return random_nodal_field(assemble_basis(M), seed)


def prepare_phi1(phi0: Field, eps: float) -> Field:
    """Relax random noise into a developed-interface state: 64 substeps of
    the first-order scheme with step eps^3 (final time 64 eps^3), unit
    mobility, stabilizer S = 1/eps."""
    out, _ = evolve_first_order(
        phi0, PotentialSpec(), eps=eps, gamma=1.0, s=eps**3, n_steps=64, S=1.0 / eps
    )
    return out


@dataclass
class RunConfig:
    """Single-simulation configuration; JSON keys match field names."""

    M: int
    eps: float
    gamma: float
    tau: float
    T: float
    scheme: str
    A: float = 0.0
    B: float = 0.0
    seed: int = 42
    initial: str = "random"  # "random" (raw noise) or "prepared" (phi1 state)
    m: int = 10  # bootstrap substep count
    snapshot_every: int = 0  # steps between snapshots; 0 disables
    out_dir: str | None = None

    def __post_init__(self):
        if self.M < 4:
            raise ValueError("M must be >= 4")
        if self.scheme not in ("SL_BDF2", "SL_CN"):
            raise ValueError("run scheme must be SL_BDF2 or SL_CN")
        for name in ("eps", "gamma", "tau"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0")
        if self.T < self.tau:
            raise ValueError("T must be >= tau")
        if self.initial not in ("random", "prepared"):
            raise ValueError("initial must be 'random' or 'prepared'")
        if self.m < 1 or self.snapshot_every < 0:
            raise ValueError("m must be >= 1 and snapshot_every >= 0")

    def n_steps(self) -> int:
        r = self.T / self.tau
        return int(round(r)) if abs(r - round(r)) < 1e-9 * max(1.0, r) else math.ceil(r)


_RUN_FIELDS = (
    "M", "eps", "gamma", "tau", "T", "scheme", "A", "B",
    "seed", "initial", "m", "snapshot_every", "out_dir",
)


def run_config_from_dict(d: dict) -> RunConfig:
    unknown = set(d) - set(_RUN_FIELDS)
    if unknown:
        raise ValueError(f"unknown RunConfig keys: {sorted(unknown)}")
    return RunConfig(**d)


def run_config_to_dict(cfg: RunConfig) -> dict:
    return {name: getattr(cfg, name) for name in _RUN_FIELDS}


def initial_field(cfg: RunConfig, basis: Basis1D | None = None) -> Field:
    base = basis if basis is not None else assemble_basis(cfg.M)
    phi0 = random_nodal_field(base, cfg.seed)
    if cfg.initial == "prepared":
        phi0 = prepare_phi1(phi0, cfg.eps)
    return phi0


def run_simulation(
    cfg: RunConfig,
    phi_init: Field | None = None,
    basis: Basis1D | None = None,
) -> tuple[EnergyTrace, Field, list[tuple[int, float, Field]]]:
    """Bootstrap the first step, then march ceil(T/tau) - 1 scheme steps.

    Returns the per-step energy trace, the final field, and the snapshot
    list [(n, t, field), ...] per cfg.snapshot_every. Blow-up or a failed
    solve terminates the run early and is recorded on the trace (verdict
    data), not raised.
    """
    spec = PotentialSpec()
    if phi_init is None:
        phi_init = initial_field(cfg, basis)
    phi0 = phi_init
    params = SchemeParams(
        scheme=cfg.scheme, tau=cfg.tau, gamma=cfg.gamma, eps=cfg.eps, A=cfg.A, B=cfg.B
    )
    op = build_step_operator(params, phi0.basis)
    trace = EnergyTrace()
    snapshots: list[tuple[int, float, Field]] = []
    N = cfg.n_steps()

    try:
        phi1, boot_res = evolve_first_order(
            phi0, spec, eps=cfg.eps, gamma=cfg.gamma,
            s=cfg.tau / cfg.m, n_steps=cfg.m, S=1.0 / cfg.eps,
        )
    except (NonFinite, SolveFailed):
        trace.blew_up = True
        trace.blowup_step = 1
        return trace, phi0, snapshots

    state = State(phi_curr=phi1, phi_prev=phi0, t=cfg.tau, n=1, residual=boot_res)
    trace.max_residual = boot_res
    e_mod = modified_energy(state, params, spec)
    # row 1: the bootstrap transition; no earlier modified energy exists,
    # so its increment is 0 by convention
    trace.append(
        TraceRow(
            n=1,
            t=state.t,
            E_eps=energy_eps(phi1, spec, cfg.eps),
            E_mod=e_mod,
            dE_mod=0.0,
            mean=mean_value(phi1),
            dt_norm=_diff_norm(state),
        )
    )
    _maybe_snapshot(snapshots, cfg, state, N)

    for n in range(2, N + 1):
        try:
            state = step(state, op, spec)
        except (NonFinite, SolveFailed):
            trace.blew_up = True
            trace.blowup_step = n
            break
        trace.max_residual = max(trace.max_residual, state.residual)
        e_new = modified_energy(state, params, spec)
        trace.append(
            TraceRow(
                n=state.n,
                t=state.t,
                E_eps=energy_eps(state.phi_curr, spec, cfg.eps),
                E_mod=e_new,
                dE_mod=e_new - e_mod,
                mean=mean_value(state.phi_curr),
                dt_norm=_diff_norm(state),
            )
        )
        e_mod = e_new
        _maybe_snapshot(snapshots, cfg, state, N)

    return trace, state.phi_curr, snapshots


def _diff_norm(state: State) -> float:
    d = Field(state.phi_curr.basis, state.phi_curr.coeffs - state.phi_prev.coeffs)
    return norm_l2(d)


def _maybe_snapshot(snapshots, cfg: RunConfig, state: State, N: int) -> None:
    if cfg.snapshot_every <= 0:
        return
    if state.n % cfg.snapshot_every == 0 or state.n == N:
        if not snapshots or snapshots[-1][0] != state.n:
            snapshots.append((state.n, state.t, state.phi_curr.copy()))


# ---------------------------------------------------------------------------
# stability sweeps


def default_ladder(target: str, gamma: float, eps: float) -> list[float]:
    """Candidate ladders: {0} + {2^i * 4 gamma/eps^2, i = -7..1} for A,
    {0} + {2^i * 2/eps, i = -3..4} for B."""
    if target == "A":
        base = 4.0 * gamma / (eps * eps)
        return [0.0] + [2.0**i * base for i in range(-7, 2)]
    if target == "B":
        base = 2.0 / eps
        return [0.0] + [2.0**i * base for i in range(-3, 5)]
    raise ValueError("target must be 'A' or 'B'")


@dataclass
class SweepConfig:
    """Minimum-stabilizer sweep over a (gamma, tau) grid.

    target names the stabilizer being minimized; the other one is held at
    fixed_value. ladder overrides the default candidate ladder (must be
    strictly increasing after the leading 0). full_scan evaluates every
    candidate instead of stopping at the first stable one, to surface
    monotonicity anomalies.
    """

    base: RunConfig
    target: str
    gamma_list: list[float]
    tau_list: list[float]
    fixed_value: float = 0.0
    ladder: list[float] | None = None
    steps: int = 1024
    threshold: float = 1e-10
    full_scan: bool = False

    def __post_init__(self):
        if self.target not in ("A", "B"):
            raise ValueError("target must be 'A' or 'B'")
        if not self.gamma_list or not self.tau_list:
            raise ValueError("gamma_list and tau_list must be non-empty")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.ladder is not None:
            lad = list(self.ladder)
            if sorted(set(lad)) != lad:
                raise ValueError("ladder must be strictly increasing")


def sweep_config_from_dict(d: dict) -> SweepConfig:
    d = dict(d)
    base = run_config_from_dict(d.pop("base"))
    known = ("target", "gamma_list", "tau_list", "fixed_value",
             "ladder", "steps", "threshold", "full_scan")
    unknown = set(d) - set(known)
    if unknown:
        raise ValueError(f"unknown SweepConfig keys: {sorted(unknown)}")
    return SweepConfig(base=base, **d)


@dataclass
class SweepResult:
    config: SweepConfig
    # (gamma, tau) -> smallest stable candidate, or None if the ladder was
    # exhausted without a stable verdict
    cells: dict[tuple[float, float], float | None] = field(default_factory=dict)
    ladders: dict[tuple[float, float], list[float]] = field(default_factory=dict)
    anomalies: list[str] = field(default_factory=list)

    def cell_text(self, gamma: float, tau: float) -> str:
        value = self.cells[(gamma, tau)]
        if value is None:
            return ">" + _num(self.ladders[(gamma, tau)][-1])
        return _num(value)

    def write_csv(self, path) -> None:
        """Wide layout mirroring the reference tables: one row per tau,
        one column per gamma."""
        cfg = self.config
        with open(path, "w") as fh:
            fh.write("tau," + ",".join(f"gamma={_num(g)}" for g in cfg.gamma_list) + "\n")
            for tau in cfg.tau_list:
                cells = ",".join(self.cell_text(g, tau) for g in cfg.gamma_list)
                fh.write(f"{_num(tau)},{cells}\n")


def _num(x: float) -> str:
    # integers print bare (0, 2, 640); everything else shortest round-trip
    return str(int(x)) if float(x).is_integer() and abs(x) < 1e15 else repr(float(x))


def max_workers() -> int:
    raw = os.environ.get("CHILLWAVE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _candidate_config(sc: SweepConfig, gamma: float, tau: float, candidate: float) -> RunConfig:
    a, b = (candidate, sc.fixed_value) if sc.target == "A" else (sc.fixed_value, candidate)
    return replace(
        sc.base, gamma=gamma, tau=tau, T=sc.steps * tau, A=a, B=b,
        snapshot_every=0, out_dir=None,
    )


def _sweep_cell(sc: SweepConfig, basis: Basis1D, gamma: float, tau: float):
    ladder = list(sc.ladder) if sc.ladder is not None else default_ladder(sc.target, gamma, sc.base.eps)
    verdicts: list[bool] = []
    minimum: float | None = None
    for candidate in ladder:
        cfg = _candidate_config(sc, gamma, tau, candidate)
        trace, _, _ = run_simulation(cfg, basis=basis)
        stable = (
            not trace.blew_up
            and len(trace) >= sc.steps
            and stability_verdict(trace, sc.threshold, sc.steps) == "stable"
        )
        verdicts.append(stable)
        if stable and minimum is None:
            minimum = candidate
            if not sc.full_scan:
                break
    anomalies = []
    if sc.full_scan and minimum is not None:
        tail = verdicts[verdicts.index(True):]
        if not all(tail):
            anomalies.append(
                f"non-monotone ladder at gamma={gamma} tau={tau}: verdicts {verdicts}"
            )
    return (gamma, tau), minimum, ladder, anomalies


def sweep_min_stabilizer(sc: SweepConfig) -> SweepResult:
    """For each (gamma, tau) cell, the smallest ladder candidate whose
    1024-step run is judged stable; None marks ladder exhaustion."""
    basis = assemble_basis(sc.base.M)
    # warm the shared basis caches before threading so workers only read
    modal_decomposition(basis)
    mass_solve(basis, np.zeros((basis.M, 1)))
    result = SweepResult(config=sc)
    cells = [(g, t) for g in sc.gamma_list for t in sc.tau_list]
    workers = min(max_workers(), len(cells))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(lambda c: _sweep_cell(sc, basis, *c), cells))
    else:
        outs = [_sweep_cell(sc, basis, g, t) for g, t in cells]
    for key, minimum, ladder, anomalies in outs:
        result.cells[key] = minimum
        result.ladders[key] = ladder
        result.anomalies.extend(anomalies)
    return result


# ---------------------------------------------------------------------------
# convergence study


@dataclass
class ConvergenceRow:
    tau: float
    h_minus1: float
    h_minus1_order: float  # NaN when no 2*tau predecessor exists
    l2: float
    l2_order: float
    h1: float
    h1_order: float


def _march(phi_init: Field, cfg: RunConfig, tau: float, spec: PotentialSpec) -> Field:
    """Lean fixed-step march to T used by the convergence study: bootstrap
    plus scheme steps on raw coefficient arrays, no energy tracing."""
    params = SchemeParams(
        scheme=cfg.scheme, tau=tau, gamma=cfg.gamma, eps=cfg.eps, A=cfg.A, B=cfg.B
    )
    basis = phi_init.basis
    op = build_step_operator(params, basis)
    phi1, _ = evolve_first_order(
        phi_init, spec, eps=cfg.eps, gamma=cfg.gamma,
        s=tau / cfg.m, n_steps=cfg.m, S=1.0 / cfg.eps,
    )
    curr, prev = phi1.coeffs, phi_init.coeffs
    n_total = int(round(cfg.T / tau))
    for _ in range(n_total - 1):
        curr, prev = _advance(op, spec, curr, prev)[0], curr
    return Field(basis, curr)


def convergence_study(
    cfg: RunConfig, tau_list: list[float], tau_ref: float
) -> list[ConvergenceRow]:
    """Errors at T against a fine-step reference run, plus observed orders
    log2(err(2 tau) / err(tau)) between consecutive halvings.

    Every run starts from the same initial datum (per cfg.initial) and
    performs its own per-tau bootstrap.
    """
    for tau in list(tau_list) + [tau_ref]:
        r = cfg.T / tau
        if abs(r - round(r)) > 1e-9 * max(1.0, r):
            raise ValueError(f"T = {cfg.T} is not an integer multiple of tau = {tau}")
    spec = PotentialSpec()
    basis = assemble_basis(cfg.M)
    modal_decomposition(basis)
    phi_init = initial_field(cfg, basis)

    taus = [tau_ref] + list(tau_list)
    workers = min(max_workers(), len(taus))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            finals = list(pool.map(lambda t: _march(phi_init, cfg, t, spec), taus))
    else:
        finals = [_march(phi_init, cfg, t, spec) for t in taus]
    ref = finals[0]

    rows: list[ConvergenceRow] = []
    prev_errs: tuple[float, float, float] | None = None
    prev_tau: float | None = None
    for tau, final in zip(tau_list, finals[1:]):
        errs = error_norms(final, ref)
        orders = [math.nan] * 3
        if prev_errs is not None and abs(prev_tau / tau - 2.0) < 1e-9:
            orders = [
                math.log2(pe / e) if e > 0.0 and pe > 0.0 else math.nan
                for pe, e in zip(prev_errs, errs)
            ]
        rows.append(
            ConvergenceRow(
                tau=tau,
                h_minus1=errs[0], h_minus1_order=orders[0],
                l2=errs[1], l2_order=orders[1],
                h1=errs[2], h1_order=orders[2],
            )
        )
        prev_errs, prev_tau = errs, tau
    return rows


CONVERGENCE_HEADER = "tau,h_minus1_err,h_minus1_order,l2_err,l2_order,h1_err,h1_order"


def write_convergence_csv(rows: list[ConvergenceRow], path) -> None:
    def fmt(x: float) -> str:
        return "" if math.isnan(x) else repr(x)

    with open(path, "w") as fh:
        fh.write(CONVERGENCE_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r.tau!r},{r.h_minus1!r},{fmt(r.h_minus1_order)},"
                f"{r.l2!r},{fmt(r.l2_order)},{r.h1!r},{fmt(r.h1_order)}\n"
            )
