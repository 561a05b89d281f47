"""Landau spectrum, eigenspinors, and ladder-operator matrix elements.

Natural units throughout: energies in mc^2, wavenumbers in 1/lambda_c,
frequencies in 1/t_c.  The field enters through FieldConfig.omega = sqrt(2)/L.

Eigenstates are labeled (n, k_x, k_z, epsilon, s): oscillator level, the two
conserved wavenumbers, the energy branch and the spin index.  The four spinor
weights sit on oscillator levels (n-1, n, n-1, n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .units import FieldConfig


class BranchEdgeError(ValueError):
    """Spinor norm singular at the branch-edge state (eps=-1, n=0, k_z=0)."""


@dataclass(frozen=True)
class LandauIndex:
    n: int
    k_x: float = 0.0
    k_z: float = 0.0
    epsilon: int = +1
    s: int = -1

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("oscillator level n must be non-negative")
        if self.epsilon not in (-1, +1):
            raise ValueError("epsilon must be -1 or +1")
        if self.s not in (-1, +1):
            raise ValueError("s must be -1 or +1")


@dataclass(frozen=True)
class SpinorWeights:
    """Four amplitudes on oscillator levels (n-1, n, n-1, n), unit norm.

    The overall phase is fixed so the dominant upper component carries the
    sign of (epsilon*E + 1).
    """

    components: tuple[complex, complex, complex, complex]
    levels: tuple[int, int, int, int]
    norm_constant: float
    chi: float
    eta: float

    def as_array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=complex)


def landau_energy(n: int, k_z: float, field: FieldConfig) -> float:
    """E_{n,k_z} = sqrt(1 + (omega*sqrt(n))^2 + k_z^2), in mc^2 units."""
    if n < 0:
        raise ValueError("level n must be non-negative")
    return math.sqrt(1.0 + field.omega**2 * n + k_z * k_z)


def landau_energies(n_max: int, k_z, field: FieldConfig) -> np.ndarray:
    """E_{n,k_z} for n = 0..n_max; k_z may be an array (levels on axis 0)."""
    n = np.arange(n_max + 1, dtype=float)
    kz = np.asarray(k_z, dtype=float)
    return np.sqrt(1.0 + field.omega**2 * n[(...,) + (None,) * kz.ndim] + kz * kz)


def mode_frequencies(n: int, k_z: float, field: FieldConfig) -> tuple[float, float]:
    """Intraband (cyclotron-like) and interband frequencies of the n,n+1 pair.

    Returns (omega_c_n, omega_z_n) = ((E_{n+1}-E_n)/hbar, (E_{n+1}+E_n)/hbar).
    """
    e_lo = landau_energy(n, k_z, field)
    e_hi = landau_energy(n + 1, k_z, field)
    # difference via the exact identity E_{n+1}^2 - E_n^2 = (hbar*omega)^2,
    # which stays accurate when the energies are nearly equal
    omega_c = field.omega**2 / (e_hi + e_lo)
    return omega_c, e_hi + e_lo


def jl_spinor(idx: LandauIndex, field: FieldConfig) -> SpinorWeights:
    """Johnson-Lippman eigenspinor weights for the state (n, k_z, eps, s)."""
    n, k_z, eps, s = idx.n, idx.k_z, idx.epsilon, idx.s
    if s == +1 and n < 1:
        raise ValueError("s=+1 requires n >= 1 (rows reference level n-1)")
    energy = landau_energy(n, k_z, field)
    denom = 2.0 * energy * energy + 2.0 * eps * energy
    if denom <= 0.0 or math.isclose(denom, 0.0, abs_tol=1e-30):
        raise BranchEdgeError("spinor norm singular at branch-edge state")
    norm = 1.0 / math.sqrt(denom)
    chi = (eps * energy + 1.0) * norm
    eta = chi * norm
    omega_n = field.omega * math.sqrt(n)
    if s == +1:
        comps = (chi, 0.0, k_z * norm, -omega_n * norm)
    else:
        # literal weights times -1, fixing the dominant component positive
        comps = (0.0, chi, -omega_n * norm, -k_z * norm)
    return SpinorWeights(
        components=tuple(complex(c) for c in comps),
        levels=(n - 1, n, n - 1, n),
        norm_constant=norm,
        chi=chi,
        eta=eta,
    )


@dataclass(frozen=True)
class LadderElement:
    """Time-dependent matrix element of the four-component ladder operators.

    lowering/raising are the elements of the level-lowering and level-raising
    operators between the two states; at most one is nonzero by the selection
    rule n' = n +- 1.  Each is also returned split into its two frequency
    parts (positive/negative interband character).  `allowed` distinguishes a
    selection-rule zero from a numerically zero amplitude.
    """

    lowering: complex
    raising: complex
    lowering_parts: tuple[complex, complex]
    raising_parts: tuple[complex, complex]
    allowed: bool


def _contracted_amplitude(bra: SpinorWeights, ket: SpinorWeights, lowering: bool) -> complex:
    """<bra| diag(a,a,a,a) |ket> (or a^dagger) contracted over spinor rows."""
    total = 0.0 + 0.0j
    for wb, lb, wk, lk in zip(bra.components, bra.levels, ket.components, ket.levels):
        if lb < 0 or lk < 0:
            continue
        if lowering and lb == lk - 1:
            total += wb.conjugate() * wk * math.sqrt(lk)
        elif not lowering and lb == lk + 1:
            total += wb.conjugate() * wk * math.sqrt(lb)
    return total


def ladder_matrix_element(
    t: float, bra: LandauIndex, ket: LandauIndex, field: FieldConfig
) -> LadderElement:
    """Explicit-form element (lowering part, raising part) at time t.

    Selection rules: equal k_x and k_z, ket level = bra level +- 1; no rule
    on the branch or spin labels.  Phases are drawn from {+-E_bra +- E_ket}.
    """
    if bra.k_x != ket.k_x or bra.k_z != ket.k_z:
        return LadderElement(0.0, 0.0, (0.0, 0.0), (0.0, 0.0), allowed=False)
    dn = ket.n - bra.n
    if dn not in (+1, -1):
        return LadderElement(0.0, 0.0, (0.0, 0.0), (0.0, 0.0), allowed=False)

    bra_w = jl_spinor(bra, field)
    ket_w = jl_spinor(ket, field)
    e_bra = landau_energy(bra.n, bra.k_z, field)
    e_ket = landau_energy(ket.n, ket.k_z, field)

    if dn == +1:
        # lowering element: split phases exp(i(eps_bra E_bra -+ E_ket) t)
        amp = _contracted_amplitude(bra_w, ket_w, lowering=True)
        part1 = 0.5 * (1 + ket.epsilon) * amp * np.exp(
            1j * (bra.epsilon * e_bra - e_ket) * t
        )
        part2 = 0.5 * (1 - ket.epsilon) * amp * np.exp(
            1j * (bra.epsilon * e_bra + e_ket) * t
        )
        return LadderElement(
            lowering=complex(part1 + part2),
            raising=0.0,
            lowering_parts=(complex(part1), complex(part2)),
            raising_parts=(0.0, 0.0),
            allowed=True,
        )
    # raising element: split phases exp(i(+-E_bra - eps_ket E_ket) t)
    amp = _contracted_amplitude(bra_w, ket_w, lowering=False)
    part1 = 0.5 * (1 + bra.epsilon) * amp * np.exp(
        1j * (e_bra - ket.epsilon * e_ket) * t
    )
    part2 = 0.5 * (1 - bra.epsilon) * amp * np.exp(
        1j * (-e_bra - ket.epsilon * e_ket) * t
    )
    return LadderElement(
        lowering=0.0,
        raising=complex(part1 + part2),
        lowering_parts=(0.0, 0.0),
        raising_parts=(complex(part1), complex(part2)),
        allowed=True,
    )


def heisenberg_ladder_element(
    t: float, bra: LandauIndex, ket: LandauIndex, field: FieldConfig
) -> LadderElement:
    """Same element evolved as exp(iHt) A exp(-iHt): a single phase factor."""
    base = ladder_matrix_element(0.0, bra, ket, field)
    if not base.allowed:
        return base
    phase = np.exp(
        1j
        * (
            bra.epsilon * landau_energy(bra.n, bra.k_z, field)
            - ket.epsilon * landau_energy(ket.n, ket.k_z, field)
        )
        * t
    )
    return LadderElement(
        lowering=complex(base.lowering * phase),
        raising=complex(base.raising * phase),
        lowering_parts=(
            complex(base.lowering_parts[0] * phase),
            complex(base.lowering_parts[1] * phase),
        ),
        raising_parts=(
            complex(base.raising_parts[0] * phase),
            complex(base.raising_parts[1] * phase),
        ),
        allowed=True,
    )
