"""Sparse superoperator algebra for the density-matrix integrator.

Row-major vectorization: vec(rho)[i*d+j] = rho[i,j], so
vec(A rho B) = (A kron B^T) vec(rho).
"""

from __future__ import annotations

import numpy as np
from scipy import sparse


def _csr(op):
    return sparse.csr_array(op, dtype=complex)


def hamiltonian_superop(h):
    """-i [H, .] as a sparse matrix acting on vec(rho)."""
    h = _csr(h)
    d = h.shape[0]
    eye = sparse.identity(d, dtype=complex, format="csr")
    out = -1j * (sparse.kron(h, eye) - sparse.kron(eye, h.T))
    out = sparse.csr_array(out)
    out.eliminate_zeros()
    return out

def diag_hamiltonian_superop(diag):
    """-i [diag(w), .]; stays diagonal in the vec basis."""
    diag = np.asarray(diag, dtype=float)
    gaps = np.subtract.outer(diag, diag).ravel()
    return sparse.diags_array(-1j * gaps, format="csr")


def lindblad_superop(op, rate=1.0):
    """rate * (L . L^dag - {L^dag L, .}/2) on vec(rho)."""
    op = _csr(op)
    d = op.shape[0]
    eye = sparse.identity(d, dtype=complex, format="csr")
    gram = _csr(op.conj().T @ op)
    out = (sparse.kron(op, op.conj())
           - 0.5 * sparse.kron(gram, eye)
           - 0.5 * sparse.kron(eye, gram.T))
    out = sparse.csr_array(rate * out)
    out.eliminate_zeros()
    return out


def unitary_superop(u):
    """U . U^dag on vec(rho)."""
    u = _csr(u)
    out = sparse.csr_array(sparse.kron(u, u.conj()))
    out.eliminate_zeros()
    return out


def trace_indices(dim):
    """vec indices of the diagonal of a dim x dim matrix."""
    return np.arange(dim) * (dim + 1)
