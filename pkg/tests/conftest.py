"""Shared fixtures and independent oracles.

Oracles deliberately avoid the package's own Legendre machinery: basis
values come from numpy.polynomial.legendre and quadrature nodes from
numpy's leggauss, so matrix/transform tests cross-check two independent
implementations.
"""
import numpy as np
import pytest
from numpy.polynomial import legendre as npleg

from chillwave import Field, PotentialSpec, assemble_basis


@pytest.fixture(scope="session")
def basis8():
    return assemble_basis(8)


@pytest.fixture(scope="session")
def basis16():
    return assemble_basis(16)


@pytest.fixture(scope="session")
def spec():
    return PotentialSpec()


def oracle_basis_values(M, x, deriv=0):
    """Table of phi_k (or a derivative) at arbitrary points, k = 0..M-1.

    phi_0 = L_0, phi_1 = L_1, phi_k = L_k - L_{k+2}.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((M, x.size))
    for k in range(M):
        c = np.zeros(k + 3)
        c[k] = 1.0
        if k >= 2:
            c[k + 2] = -1.0
        poly = npleg.Legendre(c)
        if deriv:
            poly = poly.deriv(deriv)
        out[k] = poly(x)
    return out


def oracle_quadrature(n):
    return npleg.leggauss(n)


def oracle_eval_2d(coeffs, x, y, dx=0, dy=0):
    """Evaluate a coefficient array (or a partial derivative) on the
    tensor grid x cross y; result[i, j] = u(x_i, y_j)."""
    M = coeffs.shape[0]
    tx = oracle_basis_values(M, x, deriv=dx)
    ty = oracle_basis_values(M, y, deriv=dy)
    return tx.T @ coeffs @ ty


def rand_field(basis, rng, amp=1.0):
    return Field(basis, amp * rng.standard_normal((basis.M, basis.M)))


def rand_zero_mean(basis, rng, amp=1.0):
    u = rand_field(basis, rng, amp)
    u.coeffs[0, 0] = 0.0
    return u
