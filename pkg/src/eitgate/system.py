"""Multi-atom composite systems: operator embedding and quantum states.

A :class:`CompositeSystem` combines one level scheme per trapped atom
with a geometry and a pairwise Rydberg interaction.  It produces the
sparse operators the integrators consume: static diagonals, drive
coupling matrices, collapse operators, and instant-gate unitaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import sparse

from .levels import Geometry, InteractionSpec, LevelScheme, interaction_strength
from .pulses import PhaseGate, SubspaceRotation


def _identity(dim):
    return sparse.identity(dim, dtype=complex, format="csr")


@dataclass(frozen=True)
class JumpOperator:
    """One collapse channel lifted to the full Hilbert space.

    ``rate`` is the peak rate (rad/s equivalent, 1/s); ``envelope_id``
    of ``None`` means always on, otherwise the rate follows the named
    beam intensity e(t)**2 on segments illuminating ``site``.
    ``matrix`` carries no rate factor.
    """

    site: int
    from_label: str
    to_label: str
    rate: float
    envelope_id: str | None
    matrix: sparse.csr_array


class CompositeSystem:
    """Atoms pinned at geometry sites, coupled through their Rydberg levels.

    ``interaction_pairs`` restricts which site pairs interact (defaults
    to every pair); the pair strength follows the power law of
    ``interaction`` evaluated at the geometry distance.
    """

    def __init__(self, schemes, geometry=None, interaction=None,
                 interaction_pairs=None):
        self.schemes = tuple(schemes)
        if not self.schemes:
            raise ValueError("need at least one atom")
        if geometry is None:
            geometry = Geometry(tuple((float(i) * 4.0, 0.0)
                                      for i in range(len(self.schemes))))
        if geometry.n_sites != len(self.schemes):
            raise ValueError("geometry site count does not match scheme count")
        self.geometry = geometry
        self.interaction = interaction
        if interaction_pairs is None and interaction is not None:
            interaction_pairs = tuple(
                (i, j)
                for i in range(len(self.schemes))
                for j in range(i + 1, len(self.schemes))
            )
        self.interaction_pairs = tuple(interaction_pairs or ())
        self.dims = tuple(s.dim for s in self.schemes)
        self.dim = int(np.prod(self.dims))
        self._embed_cache = {}

    @property
    def n_sites(self):
        return len(self.schemes)

    def scheme(self, site):
        return self.schemes[site]

    def embed(self, site, local_op):
        """Lift a local operator at ``site`` to the product space."""
        op = sparse.csr_array(local_op, dtype=complex)
        before = int(np.prod(self.dims[:site], dtype=int))
        after = int(np.prod(self.dims[site + 1:], dtype=int))
        out = op
        if before > 1:
            out = sparse.kron(_identity(before), out, format="csr")
        if after > 1:
            out = sparse.kron(out, _identity(after), format="csr")
        return sparse.csr_array(out)

    def _level_indicator(self, site, label):
        """Diagonal of the full-space projector onto ``label`` at ``site``."""
        local = np.zeros(self.dims[site])
        local[self.schemes[site].index(label)] = 1.0
        before = int(np.prod(self.dims[:site], dtype=int))
        after = int(np.prod(self.dims[site + 1:], dtype=int))
        return np.kron(np.ones(before), np.kron(local, np.ones(after)))

    def static_diagonal(self):
        """Rotating-frame diagonal including pair interactions (rad/s)."""
        diag = np.zeros(self.dim)
        for site, scheme in enumerate(self.schemes):
            local = scheme.diagonal()
            before = int(np.prod(self.dims[:site], dtype=int))
            after = int(np.prod(self.dims[site + 1:], dtype=int))
            diag += np.kron(np.ones(before), np.kron(local, np.ones(after)))
        for (i, j) in self.interaction_pairs:
            strength = interaction_strength(
                self.interaction, self.geometry.distance(i, j))
            ri = self._level_indicator(i, self.schemes[i].rydberg_label())
            rj = self._level_indicator(j, self.schemes[j].rydberg_label())
            diag += strength * ri * rj
        return diag

    def site_diagonal(self, site, shifts):
        """Full-space diagonal from per-label shifts on one atom (rad/s)."""
        diag = np.zeros(self.dim)
        for label, value in shifts.items():
            diag += value * self._level_indicator(site, label)
        return diag

    def coupling_hamiltonian(self, site, name, scale=1.0, phase_offset=0.0):
        """Peak-amplitude drive term (Omega/2)(e^{i phi}|u><l| + h.c.)."""
        scheme = self.schemes[site]
        coupling = scheme.coupling(name)
        lower = scheme.index(coupling.lower)
        upper = scheme.index(coupling.upper)
        dim = scheme.dim
        amp = 0.5 * coupling.peak_rabi * scale * np.exp(
            1j * (coupling.phase + phase_offset))
        local = sparse.csr_array(
            ([amp, np.conj(amp)], ([upper, lower], [lower, upper])),
            shape=(dim, dim), dtype=complex)
        return self.embed(site, local)

    def jump_operators(self):
        """Every collapse channel of every atom, lifted and unit-rate."""
        jumps = []
        for site, scheme in enumerate(self.schemes):
            dim = scheme.dim
            for ch in scheme.decays:
                i = scheme.index(ch.from_level)
                j = scheme.index(ch.to_level)
                local = sparse.csr_array(
                    ([1.0 + 0.0j], ([j], [i])), shape=(dim, dim))
                jumps.append(JumpOperator(
                    site=site, from_label=ch.from_level, to_label=ch.to_level,
                    rate=ch.rate, envelope_id=ch.envelope_id,
                    matrix=self.embed(site, local)))
        return tuple(jumps)

    def instant_unitary(self, gate):
        """Full-space unitary for a zero-duration sequence item."""
        if isinstance(gate, SubspaceRotation):
            scheme = self.schemes[gate.site]
            dim = scheme.dim
            lo = scheme.index(gate.lower)
            up = scheme.index(gate.upper)
            block = gate.matrix()
            local = sparse.identity(dim, dtype=complex, format="lil")
            local[lo, lo] = block[0, 0]
            local[lo, up] = block[0, 1]
            local[up, lo] = block[1, 0]
            local[up, up] = block[1, 1]
            return self.embed(gate.site, local.tocsr())
        if isinstance(gate, PhaseGate):
            scheme = self.schemes[gate.site]
            phases = np.zeros(scheme.dim)
            for label, phi in gate.phases.items():
                phases[scheme.index(label)] = phi
            local = sparse.diags_array(np.exp(1j * phases), format="csr")
            return self.embed(gate.site, local)
        raise TypeError(f"not an instant gate: {type(gate).__name__}")

    # -- basis bookkeeping -------------------------------------------------

    def basis_index(self, labels):
        if len(labels) != self.n_sites:
            raise ValueError("need one label per site")
        idx = 0
        for site, label in enumerate(labels):
            idx = idx * self.dims[site] + self.schemes[site].index(label)
        return idx

    def basis_labels(self, index):
        labels = []
        for site in range(self.n_sites - 1, -1, -1):
            index, k = divmod(index, self.dims[site])
            labels.append(self.schemes[site].labels()[k])
        return tuple(reversed(labels))

    def basis_state(self, labels):
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.basis_index(labels)] = 1.0
        return QuantumState(self, vec)

    def product_state(self, amplitudes):
        """Product state from per-site {label: amplitude} maps."""
        vec = np.ones(1, dtype=complex)
        for site, amps in enumerate(amplitudes):
            local = np.zeros(self.dims[site], dtype=complex)
            for label, a in amps.items():
                local[self.schemes[site].index(label)] = a
            norm = np.linalg.norm(local)
            if norm == 0.0:
                raise ValueError(f"empty amplitude map for site {site}")
            vec = np.kron(vec, local / norm)
        return QuantumState(self, vec)

    def label_indices(self, site, labels):
        """Full-space basis indices whose ``site`` label is in ``labels``."""
        mask = np.zeros(self.dim, dtype=bool)
        for label in labels:
            mask |= self._level_indicator(site, label).astype(bool)
        return np.nonzero(mask)[0]


@dataclass
class QuantumState:
    """State vector or density matrix over a composite system."""

    system: CompositeSystem
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        dim = self.system.dim
        if self.data.shape not in ((dim,), (dim, dim)):
            raise ValueError("state shape does not match system dimension")

    @property
    def is_density(self):
        return self.data.ndim == 2

    def density(self):
        if self.is_density:
            return self.data
        return np.outer(self.data, np.conj(self.data))

    def as_density(self):
        if self.is_density:
            return self
        return QuantumState(self.system, self.density())

    def trace(self):
        if self.is_density:
            return float(np.real(np.trace(self.data)))
        return float(np.real(np.vdot(self.data, self.data)))

    def populations(self):
        if self.is_density:
            return np.real(np.diag(self.data)).copy()
        return np.abs(self.data) ** 2

    def population(self, site, labels):
        """Total population with ``site`` in any of ``labels``."""
        if isinstance(labels, str):
            labels = (labels,)
        idx = self.system.label_indices(site, labels)
        return float(np.sum(self.populations()[idx]))

    def expectation(self, op):
        if self.is_density:
            if sparse.issparse(op):
                return complex(op.multiply(self.data.T).sum())
            return complex(np.sum(op * self.data.T))
        return complex(np.vdot(self.data, op @ self.data))

    def overlap(self, other_vec):
        """Fidelity against a pure state vector."""
        other_vec = np.asarray(other_vec, dtype=complex)
        if self.is_density:
            return float(np.real(np.vdot(other_vec, self.data @ other_vec)))
        return float(np.abs(np.vdot(other_vec, self.data)) ** 2)
