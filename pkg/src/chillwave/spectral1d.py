"""One-dimensional Legendre machinery.

Legendre polynomials L_k, Gauss-Legendre quadrature, and the Galerkin basis

    phi_0 = L_0,  phi_1 = L_1,  phi_k = L_k - L_{k+2}  (2 <= k <= M-1),

with its mass and stiffness matrices. With h_k = ||L_k||^2 = 2/(2k+1) the
mass matrix is pentadiagonal-even:

    mass[0,0] = 2,  mass[1,1] = 2/3,
    mass[k,k] = h_k + h_{k+2},  mass[k,k+2] = mass[k+2,k] = -h_{k+2}  (k >= 2),

and because phi_k' = -(2k+3) L_{k+1} for k >= 2 the stiffness matrix is
diagonal: diag(0, 2, 4k+6 for k >= 2). The constant mode phi_0 spans the
stiffness kernel, which is what the Neumann problem requires.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import QuadratureError

_NODE_SETS = ("M", "2M")


def legendre_table(max_degree: int, x: np.ndarray) -> np.ndarray:
    """Rows L_0(x) .. L_max(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((max_degree + 1, x.size))
    out[0] = 1.0
    if max_degree >= 1:
        out[1] = x
    for k in range(1, max_degree):
        out[k + 1] = ((2 * k + 1) * x * out[k] - k * out[k - 1]) / (k + 1)
    return out


def legendre_values(max_degree: int, x: float) -> np.ndarray:
    """L_0(x) .. L_max(x) at a single point of [-1, 1]."""
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    if abs(x) > 1.0 + 1e-12:
        raise ValueError(f"x = {x} outside [-1, 1]")
    return legendre_table(max_degree, np.array([x]))[:, 0]


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes (ascending) and weights on [-1, 1].

    Newton iteration on L_n from Chebyshev initial guesses, tolerance
    1e-15. The rule integrates polynomials of degree <= 2n-1 exactly.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(n)
    x = -np.cos(np.pi * (4 * i + 3) / (4 * n + 2))
    for it in range(100):
        tab = legendre_table(n, x)
        ln = tab[n]
        # L_n'(x) = n (L_{n-1}(x) - x L_n(x)) / (1 - x^2); interior nodes only
        dln = n * (tab[n - 1] - x * ln) / (1.0 - x * x)
        dx = ln / dln
        x = x - dx
        if np.max(np.abs(dx)) <= 1e-15:
            break
    else:
        raise QuadratureError(f"Gauss-Legendre Newton iteration stalled for n = {n}")
    x = 0.5 * (x - x[::-1])  # enforce the exact +-symmetry of the root set
    tab = legendre_table(n, x)
    dln = n * (tab[n - 1] - x * tab[n]) / (1.0 - x * x)
    w = 2.0 / ((1.0 - x * x) * dln * dln)
    return x, w


def basis_table(M: int, x: np.ndarray) -> np.ndarray:
    """M x len(x) table of phi_k at the points x."""
    L = legendre_table(M + 1, x)
    phi = np.empty((M, x.size))
    phi[0] = L[0]
    phi[1] = L[1]
    for k in range(2, M):
        phi[k] = L[k] - L[k + 2]
    return phi


@dataclass
class Basis1D:
    """Assembled Galerkin basis of dimension M.

    Immutable after assembly; safe to share across threads. eval_M and
    eval_2M are M x P tables of phi_k at the M- and 2M-point Gauss nodes.
    The private cache holds lazily built factorizations (mass Cholesky,
    generalized eigendecomposition) reused by field operations and step
    operators.
    """

    M: int
    nodes_M: np.ndarray
    weights_M: np.ndarray
    nodes_2M: np.ndarray
    weights_2M: np.ndarray
    mass: np.ndarray
    stiffness: np.ndarray
    eval_M: np.ndarray
    eval_2M: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def nodes(self, node_set: str) -> np.ndarray:
        _check_node_set(node_set)
        return self.nodes_M if node_set == "M" else self.nodes_2M

    def weights(self, node_set: str) -> np.ndarray:
        _check_node_set(node_set)
        return self.weights_M if node_set == "M" else self.weights_2M

    def eval_table(self, node_set: str) -> np.ndarray:
        _check_node_set(node_set)
        return self.eval_M if node_set == "M" else self.eval_2M


def _check_node_set(node_set: str) -> None:
    if node_set not in _NODE_SETS:
        raise ValueError(f"node_set must be one of {_NODE_SETS}")


def assemble_basis(M: int) -> Basis1D:
    """Build Basis1D from the analytic Legendre orthogonality relations."""
    if M < 4:
        raise ValueError("M must be >= 4")
    h = lambda k: 2.0 / (2 * k + 1)
    mass = np.zeros((M, M))
    mass[0, 0] = 2.0
    mass[1, 1] = 2.0 / 3.0
    for k in range(2, M):
        mass[k, k] = h(k) + h(k + 2)
        if k + 2 < M:
            mass[k, k + 2] = mass[k + 2, k] = -h(k + 2)
    stiffness = np.zeros((M, M))
    stiffness[1, 1] = 2.0
    for k in range(2, M):
        stiffness[k, k] = 4.0 * k + 6.0
    xm, wm = gauss_legendre(M)
    x2, w2 = gauss_legendre(2 * M)
    return Basis1D(
        M=M,
        nodes_M=xm,
        weights_M=wm,
        nodes_2M=x2,
        weights_2M=w2,
        mass=mass,
        stiffness=stiffness,
        eval_M=basis_table(M, xm),
        eval_2M=basis_table(M, x2),
    )


def _mass_cho(basis: Basis1D):
    from scipy.linalg import cho_factor

    if "mass_cho" not in basis._cache:
        basis._cache["mass_cho"] = cho_factor(basis.mass)
    return basis._cache["mass_cho"]


def mass_solve(basis: Basis1D, rhs: np.ndarray) -> np.ndarray:
    """Solve mass @ c = rhs (rhs may be a matrix of columns)."""
    from scipy.linalg import cho_solve

    return cho_solve(_mass_cho(basis), rhs)


def _gram_cho(basis: Basis1D):
    # Gram of the M-point rule. Not the mass matrix: basis products reach
    # degree 2M+2 > 2M-1, so the rule is inexact in the top corner.
    from scipy.linalg import cho_factor

    if "gram_cho_M" not in basis._cache:
        tw = basis.eval_M * basis.weights_M
        basis._cache["gram_cho_M"] = cho_factor(tw @ basis.eval_M.T)
    return basis._cache["gram_cho_M"]


def gram_solve(basis: Basis1D, rhs: np.ndarray, node_set: str) -> np.ndarray:
    """Solve G @ c = rhs with G the quadrature Gram of the chosen rule.

    On the 2M set G equals the mass matrix exactly; on the M set it is the
    matrix that makes forward/backward transforms mutual inverses.
    """
    from scipy.linalg import cho_solve

    if node_set == "2M":
        return mass_solve(basis, rhs)
    return cho_solve(_gram_cho(basis), rhs)


def forward_transform_1d(basis: Basis1D, nodal: np.ndarray) -> np.ndarray:
    """Quadrature-weighted least-squares fit of nodal values in the basis.

    The node set (M or 2M points) is inferred from the length of `nodal`.
    Solves G @ c = b with b_k = sum_i w_i nodal_i phi_k(x_i) and G the
    Gram of the same rule, so backward then forward is the identity on
    coefficient space for either set.
    """
    nodal = np.asarray(nodal, dtype=float)
    if nodal.shape == (basis.M,):
        tab, w, node_set = basis.eval_M, basis.weights_M, "M"
    elif nodal.shape == (2 * basis.M,):
        tab, w, node_set = basis.eval_2M, basis.weights_2M, "2M"
    else:
        raise ValueError(f"expected {basis.M} or {2 * basis.M} values, got {nodal.shape}")
    b = tab @ (w * nodal)
    return gram_solve(basis, b, node_set)


def backward_transform_1d(basis: Basis1D, coeffs: np.ndarray, node_set: str) -> np.ndarray:
    """Evaluate sum_k c_k phi_k at the chosen Gauss node set."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.M,):
        raise ValueError(f"expected {basis.M} coefficients, got {coeffs.shape}")
    return basis.eval_table(node_set).T @ coeffs
