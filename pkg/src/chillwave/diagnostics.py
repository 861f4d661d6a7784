"""Energies, dissipation monitoring, and error norms.

The free energy is E_eps(u) = (eps/2) |grad u|^2 + (1/eps) int F(u), with
the bulk term integrated on the 2M x 2M dealiasing grid (the same
quadrature the schemes use for the nonlinear force, so the discrete
dissipation statements transfer exactly). The modified energies add the
nonnegative history corrections under which the two schemes are provably
non-increasing:

    SL_CN     E_C^n = E_eps(phi^n) + (L/(4 eps) + B/2) ||dt phi^n||^2
    SL_BDF2   E_B^n = E_eps(phi^n) + 1/(4 tau gamma) ||dt phi^n||_-1^2
                      + (L/(2 eps) + B/2) ||dt phi^n||^2

where dt phi^n = phi^n - phi^{n-1} and L is the potential's Lipschitz
bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeanNotZero
from .field2d import (
    Field,
    h1_seminorm_sq,
    hminus1_norm,
    inner_l2,
    mean_value,
    to_nodal,
)
from .potential import PotentialSpec, lipschitz_bound, potential_value
from .timestepping import SchemeParams, State

TRACE_HEADER = "n,t,E_eps,E_mod,dE_mod,mean,dt_norm"


@dataclass
class TraceRow:
    n: int
    t: float
    E_eps: float
    E_mod: float
    dE_mod: float
    mean: float
    dt_norm: float


@dataclass
class EnergyTrace:
    """Per-step record of a simulation.

    Rows are appended once per time step (the bootstrap step is row n = 1;
    there is no row for the initial datum, and row 1 carries dE_mod = 0 by
    convention since no earlier modified energy exists). blew_up marks a
    run terminated early by NonFinite; max_residual tracks the worst block
    residual seen.
    """

    rows: list[TraceRow] = field(default_factory=list)
    blew_up: bool = False
    blowup_step: int | None = None
    max_residual: float = 0.0

    def append(self, row: TraceRow) -> None:
        if self.rows:
            last = self.rows[-1]
            if row.n != last.n + 1:
                raise ValueError("trace rows must be contiguous in n")
            if row.t <= last.t:
                raise ValueError("trace times must be strictly increasing")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(TRACE_HEADER + "\n")
            for r in self.rows:
                fh.write(
                    f"{r.n},{r.t!r},{r.E_eps!r},{r.E_mod!r},"
                    f"{r.dE_mod!r},{r.mean!r},{r.dt_norm!r}\n"
                )

    @classmethod
    def read_csv(cls, path) -> "EnergyTrace":
        trace = cls()
        with open(path) as fh:
            header = fh.readline().strip()
            if header != TRACE_HEADER:
                raise ValueError(f"unexpected trace header: {header}")
            for line in fh:
                parts = line.strip().split(",")
                trace.append(
                    TraceRow(
                        n=int(parts[0]),
                        t=float(parts[1]),
                        E_eps=float(parts[2]),
                        E_mod=float(parts[3]),
                        dE_mod=float(parts[4]),
                        mean=float(parts[5]),
                        dt_norm=float(parts[6]),
                    )
                )
        return trace


def bulk_energy(u: Field, spec: PotentialSpec) -> float:
    """int F(u) over the domain, 2M x 2M Gauss quadrature."""
    g = to_nodal(u, "2M")
    w = u.basis.weights_2M
    return float(np.einsum("i,ij,j->", w, potential_value(spec, g.values), w))


def energy_eps(u: Field, spec: PotentialSpec, eps: float) -> float:
    return 0.5 * eps * h1_seminorm_sq(u) + bulk_energy(u, spec) / eps


def modified_energy(state: State, params: SchemeParams, spec: PotentialSpec) -> float:
    """E_C or E_B of the state, per the scheme in params."""
    if params.scheme not in ("SL_CN", "SL_BDF2"):
        raise ValueError("modified energy is defined for SL_CN and SL_BDF2 only")
    L = lipschitz_bound(spec)
    diff = Field(state.phi_curr.basis, state.phi_curr.coeffs - state.phi_prev.coeffs)
    dt_sq = max(inner_l2(diff, diff), 0.0)
    e = energy_eps(state.phi_curr, spec, params.eps)
    if params.scheme == "SL_CN":
        return e + (L / (4.0 * params.eps) + 0.5 * params.B) * dt_sq
    hm1_sq = hminus1_norm(diff) ** 2
    return (
        e
        + hm1_sq / (4.0 * params.tau * params.gamma)
        + (L / (2.0 * params.eps) + 0.5 * params.B) * dt_sq
    )


def stability_verdict(trace: EnergyTrace, threshold: float = 1e-10, min_steps: int = 1024) -> str:
    """"stable" iff no blow-up occurred and every per-step increment
    dE_mod is <= threshold; a trace must either hold min_steps rows or
    have been terminated by blow-up."""
    if trace.blew_up:
        return "unstable"
    if len(trace) < min_steps:
        raise ValueError(f"trace has {len(trace)} rows; needs >= {min_steps} or a blow-up")
    if any(r.dE_mod > threshold for r in trace.rows):
        return "unstable"
    return "stable"


def error_norms(u: Field, v: Field) -> tuple[float, float, float]:
    """(H^-1, L^2, H^1) norms of u - v.

    The two fields must share their mean to 1e-9 (the H^-1 norm needs a
    zero-mean difference); the residual mean, pure roundoff at that point,
    is removed from the difference before the Neumann solve.
    """
    if u.basis is not v.basis:
        raise ValueError("fields must share one Basis1D instance")
    if abs(mean_value(u) - mean_value(v)) > 1e-9:
        raise MeanNotZero(
            f"mean(u) - mean(v) = {mean_value(u) - mean_value(v):.3e} exceeds 1e-9"
        )
    d = Field(u.basis, u.coeffs - v.coeffs)
    d.coeffs[0, 0] = 0.0
    l2_sq = max(inner_l2(d, d), 0.0)
    h1_full = np.sqrt(l2_sq + max(h1_seminorm_sq(d), 0.0))
    return hminus1_norm(d), float(np.sqrt(l2_sq)), float(h1_full)
