"""Planar point-vortex configurations and their logarithmic pair energy.

Positions live in the complex plane (``x + iy``); circulations are nonzero
reals.  The energy uses the ordered-pair convention: the sum runs over all
ordered pairs ``j != k``, so every unordered pair is counted twice.  Under
that convention the energy gradient with respect to the j-th position is
``-2 * conj(f_j)`` where ``f_j`` is the force returned by :func:`force`.

Everything here is an immutable value or a pure function; concurrent use
needs no synchronisation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

__all__ = [
    "CIRCULATION_FLOOR",
    "SEPARATION_FLOOR_SCALE",
    "ConfigurationError",
    "Vortex",
    "VortexConfiguration",
    "Similarity",
    "energy",
    "force",
    "forces",
    "gradient",
    "residual",
    "is_equilibrium",
    "transform",
]

# Circulations with |d| below this are rejected as effectively zero.
CIRCULATION_FLOOR = 1e-12

# Vortices closer than this fraction of (1 + diameter) are rejected: the
# energy and forces blow up and quadrature excision disks cannot separate
# the points.
SEPARATION_FLOOR_SCALE = 1e-9


class ConfigurationError(ValueError):
    """A vortex configuration violates one of its invariants."""


def _abs2(w: complex) -> float:
    return w.real * w.real + w.imag * w.imag


@dataclass(frozen=True)
class Vortex:
    """A point vortex: a plane position carrying a nonzero real circulation."""

    position: complex
    circulation: float


@dataclass(frozen=True)
class VortexConfiguration:
    """Ordered collection of pairwise-distinct point vortices.

    Invariants (checked on construction):

    * at least one vortex, all coordinates finite;
    * every ``|circulation| >= CIRCULATION_FLOOR``;
    * the minimum pairwise distance exceeds
      ``SEPARATION_FLOOR_SCALE * (1 + diameter)``.
    """

    vortices: tuple[Vortex, ...]

    def __post_init__(self) -> None:
        if not self.vortices:
            raise ConfigurationError("a configuration needs at least one vortex")
        for j, v in enumerate(self.vortices):
            if not isinstance(v, Vortex):
                raise ConfigurationError(f"entry {j} is not a Vortex")
            if not cmath.isfinite(v.position):
                raise ConfigurationError(f"vortex {j} has a non-finite position")
            if not math.isfinite(v.circulation):
                raise ConfigurationError(f"vortex {j} has a non-finite circulation")
            if abs(v.circulation) < CIRCULATION_FLOOR:
                raise ConfigurationError(
                    f"vortex {j} has circulation {v.circulation!r}; "
                    f"|d| must be at least {CIRCULATION_FLOOR}"
                )
        floor = SEPARATION_FLOOR_SCALE * (1.0 + self.diameter)
        n = len(self.vortices)
        for j in range(n):
            for k in range(j + 1, n):
                sep = abs(self.vortices[j].position - self.vortices[k].position)
                if sep < floor:
                    raise ConfigurationError(
                        f"vortices {j} and {k} are separated by {sep:.3e}, "
                        f"below the floor {floor:.3e}"
                    )

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[tuple[complex, float]]
    ) -> "VortexConfiguration":
        """Build from ``(position, circulation)`` pairs; positions may be any complex-like."""
        return cls(tuple(Vortex(complex(p), float(d)) for p, d in pairs))

    @classmethod
    def from_coordinates(
        cls, rows: Iterable[tuple[float, float, float]]
    ) -> "VortexConfiguration":
        """Build from ``(x, y, d)`` triples."""
        return cls(tuple(Vortex(complex(x, y), float(d)) for x, y, d in rows))

    def __len__(self) -> int:
        return len(self.vortices)

    @cached_property
    def positions(self) -> tuple[complex, ...]:
        return tuple(v.position for v in self.vortices)

    @cached_property
    def circulations(self) -> tuple[float, ...]:
        return tuple(v.circulation for v in self.vortices)

    @cached_property
    def diameter(self) -> float:
        """Largest pairwise distance (0 for a single vortex)."""
        pos = [v.position for v in self.vortices]
        best = 0.0
        for j in range(len(pos)):
            for k in range(j + 1, len(pos)):
                best = max(best, abs(pos[j] - pos[k]))
        return best

    @cached_property
    def min_separation(self) -> float:
        """Smallest pairwise distance (``inf`` for a single vortex)."""
        pos = [v.position for v in self.vortices]
        best = math.inf
        for j in range(len(pos)):
            for k in range(j + 1, len(pos)):
                best = min(best, abs(pos[j] - pos[k]))
        return best


@dataclass(frozen=True)
class Similarity:
    """Orientation-preserving similarity ``z -> scale * exp(i*rotation) * z + translation``."""

    scale: float = 1.0
    rotation: float = 0.0
    translation: complex = 0j

    def __post_init__(self) -> None:
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError("scale must be positive and finite")
        if not math.isfinite(self.rotation):
            raise ValueError("rotation must be finite")
        if not cmath.isfinite(self.translation):
            raise ValueError("translation must be finite")

    def apply(self, z: complex) -> complex:
        return self.scale * cmath.exp(1j * self.rotation) * z + self.translation


def energy(config: VortexConfiguration) -> float:
    """Logarithmic pair energy ``sum_{j != k} d_j d_k log(1/|a_j - a_k|)``.

    Ordered-pair convention: each unordered pair contributes twice.  Terms
    are accumulated with exact (compensated) summation, so the result does
    not depend on vortex ordering beyond rounding of the individual terms.
    """
    pos = config.positions
    circ = config.circulations
    n = len(pos)
    terms = []
    for j in range(n):
        for k in range(j + 1, n):
            # 2 * d_j d_k * log(1/|diff|) == -d_j d_k * log(|diff|^2)
            terms.append(-circ[j] * circ[k] * math.log(_abs2(pos[j] - pos[k])))
    return math.fsum(terms)


def force(config: VortexConfiguration, j: int) -> complex:
    """The complex force ``f_j = sum_{k != j} d_j d_k / (a_j - a_k)``."""
    n = len(config)
    if not 0 <= j < n:
        raise IndexError(f"vortex index {j} out of range for {n} vortices")
    pos = config.positions
    circ = config.circulations
    re_terms = []
    im_terms = []
    for k in range(n):
        if k == j:
            continue
        term = circ[j] * circ[k] / (pos[j] - pos[k])
        re_terms.append(term.real)
        im_terms.append(term.imag)
    return complex(math.fsum(re_terms), math.fsum(im_terms))


def forces(config: VortexConfiguration) -> list[complex]:
    """All forces ``f_1 .. f_N``."""
    return [force(config, j) for j in range(len(config))]


def gradient(config: VortexConfiguration) -> list[complex]:
    """Gradient of :func:`energy` with respect to each position.

    Returned as complex numbers ``dW/dx_j + i dW/dy_j``; under the
    ordered-pair convention this equals ``-2 * conj(f_j)``.
    """
    return [-2.0 * f.conjugate() for f in forces(config)]


def residual(config: VortexConfiguration) -> float:
    """Scalar distance from equilibrium: ``max_j |f_j|``."""
    return max(abs(f) for f in forces(config))


def is_equilibrium(config: VortexConfiguration, tol: float) -> bool:
    """True iff ``residual(config) <= tol``.  Requires ``tol > 0``."""
    if not (math.isfinite(tol) and tol > 0.0):
        raise ValueError("tol must be positive and finite")
    return residual(config) <= tol


def transform(config: VortexConfiguration, similarity: Similarity) -> VortexConfiguration:
    """Apply a similarity to every position; circulations are unchanged."""
    return VortexConfiguration(
        tuple(
            Vortex(similarity.apply(v.position), v.circulation)
            for v in config.vortices
        )
    )
