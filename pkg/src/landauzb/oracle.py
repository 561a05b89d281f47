"""Brute-force evolution in the truncated spinor (x) oscillator basis.

Certifies the analytic series: the Hamiltonian is assembled as a dense
matrix over four spinor rows times oscillator levels 0..N, diagonalized
once per wavenumber node, and expectation values of the position/velocity
operators are propagated by eigenphases.  Nothing here touches the closed
forms of the overlap matrix or the oscillation series; the only shared
ingredient is the level amplitude F_n.

Basis index: sigma * (N+1) + m for spinor row sigma in 0..3, level m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hermite, packet as packet_mod
from .landau import LandauIndex, jl_spinor, landau_energy
from .units import FieldConfig

GUARD_BAND = 20
LEAK_TOL = 1e-10


class TruncationLeakError(ValueError):
    """Packet mass too close to the truncation edge for a trustworthy run."""


@dataclass(frozen=True)
class DenseHamiltonian:
    """Dense Hermitian Hamiltonian at fixed k_z, with its field parameters."""

    n_levels: int          # oscillator levels 0..n_levels
    k_z: float
    matrix: np.ndarray     # shape (4(N+1), 4(N+1)), real symmetric
    field: FieldConfig

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def lowering_matrix(n_levels: int) -> np.ndarray:
    """<m|a|m'> = sqrt(m') delta_{m,m'-1} on levels 0..n_levels."""
    size = n_levels + 1
    mat = np.zeros((size, size))
    idx = np.arange(1, size)
    mat[idx - 1, idx] = np.sqrt(idx)
    return mat


def build(n_levels: int, field: FieldConfig, k_z: float = 0.0) -> DenseHamiltonian:
    """Assemble the Hamiltonian: diagonal +-mc^2 blocks, ladder off-blocks.

    The off-diagonal 2x2 spin block is  k_z*sigma_z - omega*[[0,a],[a^+,0]].
    """
    size = n_levels + 1
    a = lowering_matrix(n_levels)
    eye = np.eye(size)
    omega = field.omega

    h = np.zeros((4 * size, 4 * size))
    blocks = {
        (0, 0): eye,
        (1, 1): eye,
        (2, 2): -eye,
        (3, 3): -eye,
        (0, 2): k_z * eye,
        (1, 3): -k_z * eye,
        (0, 3): -omega * a,
        (1, 2): -omega * a.T,
    }
    for (i, j), blk in blocks.items():
        h[i * size : (i + 1) * size, j * size : (j + 1) * size] = blk
        if i != j:
            h[j * size : (j + 1) * size, i * size : (i + 1) * size] = blk.T
    return DenseHamiltonian(n_levels=n_levels, k_z=k_z, matrix=h, field=field)


@dataclass(frozen=True)
class PositionOperators:
    """Position and velocity observables on the truncated basis."""

    y_op: np.ndarray       # (L/sqrt2)(a+a^+) on each spinor row
    x_op: np.ndarray       # (L/(i sqrt2))(a-a^+), anti-symmetric * i
    vx_op: np.ndarray      # c*alpha_x
    vy_op: np.ndarray      # c*alpha_y


def position_operators(n_levels: int, field: FieldConfig) -> PositionOperators:
    size = n_levels + 1
    a = lowering_matrix(n_levels)
    L = field.magnetic_length
    y1 = (L / math.sqrt(2.0)) * (a + a.T)
    x1 = (L / (1j * math.sqrt(2.0))) * (a - a.T)
    eye4 = np.eye(4)
    y_op = np.kron(eye4, y1)
    x_op = np.kron(eye4, x1)
    # alpha matrices in the standard representation, c = 1
    alpha_x = np.zeros((4, 4))
    alpha_x[[0, 1, 2, 3], [3, 2, 1, 0]] = 1.0
    alpha_y = np.zeros((4, 4), dtype=complex)
    alpha_y[[0, 1], [3, 2]] = [-1j, 1j]
    alpha_y[[2, 3], [1, 0]] = [-1j, 1j]
    vx_op = np.kron(alpha_x, np.eye(size))
    vy_op = np.kron(alpha_y, np.eye(size))
    return PositionOperators(y_op=y_op, x_op=x_op, vx_op=vx_op, vy_op=vy_op)


def spinor_check(idx: LandauIndex, ham: DenseHamiltonian) -> float:
    """Residual |(H - eps*E) psi| for the embedded analytic eigenspinor."""
    size = ham.n_levels + 1
    w = jl_spinor(idx, ham.field)
    vec = np.zeros(4 * size, dtype=complex)
    for sigma, (comp, level) in enumerate(zip(w.components, w.levels)):
        if level >= 0 and comp != 0.0:
            if level > ham.n_levels:
                raise ValueError("spinor level exceeds the truncated basis")
            vec[sigma * size + level] = comp
    energy = idx.epsilon * landau_energy(idx.n, idx.k_z, ham.field)
    return float(np.linalg.norm(ham.matrix @ vec - energy * vec))


@dataclass(frozen=True)
class EvolvedExpectations:
    """Oracle expectation series, guiding-centre-relative like the series."""

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    y_operator_initial: float  # raw <Y>(0), equals -k0x L^2 for exact rules
    guiding_shift: float       # integral dk_x k_x L^2 |c|^2, approx +k0x L^2
    norm_drift: float          # max deviation of an evolved vector norm
    energy_drift: float        # max deviation of <H> along the same vector


def _density_from_nodes(
    pkt: packet_mod.GaussianPacket,
    field: FieldConfig,
    n_levels: int,
) -> tuple[np.ndarray, float]:
    """Quadrature density rho = integral dk_x |c(k_x)><c(k_x)| and the
    guiding-centre shift integral dk_x k_x L^2 |c|^2, built from the oracle's
    own k_x rule."""
    size = n_levels + 1
    d_sq = field.magnetic_length**4 / (field.magnetic_length**2 + pkt.d_y**2)
    alpha = math.sqrt(pkt.d_x**2 + d_sq)
    centre = pkt.d_x**2 * pkt.k0x / alpha**2
    order = 256 if n_levels < 256 else hermite.MAX_GH_ORDER
    rule = hermite.gauss_hermite(order)
    k_nodes = centre + rule.nodes / alpha
    psi_prev = hermite.psi_table(order - 1, rule.nodes)[order - 1]
    wtilde = np.exp(-math.log(order) - 2.0 * np.log(np.abs(psi_prev)) - math.log(alpha))

    f_vals = packet_mod.f_table(pkt, field, n_levels, k_nodes)  # (N+1, K)
    weighted = f_vals * np.sqrt(wtilde)[None, :]
    rho_osc = weighted @ weighted.T                              # (N+1, N+1)

    rho = np.zeros((4 * size, 4 * size), dtype=complex)
    amps = (pkt.a1, pkt.a2)
    for i, ai in enumerate(amps):
        for j, aj in enumerate(amps):
            if ai == 0 or aj == 0:
                continue
            rho[i * size : (i + 1) * size, j * size : (j + 1) * size] = (
                ai * np.conj(aj)
            ) * rho_osc
    shift = field.magnetic_length**2 * float(
        np.dot(wtilde, k_nodes * np.sum(f_vals**2, axis=0))
    )
    return rho, shift


def _check_leakage(rho: np.ndarray, n_levels: int, guard: int) -> None:
    size = n_levels + 1
    diag = np.real(np.diagonal(rho)).reshape(4, size)
    tail = float(diag[:, max(0, size - guard) :].sum())
    if tail > LEAK_TOL:
        raise TruncationLeakError(
            f"packet mass {tail:.3e} within {guard} levels of the truncation "
            f"edge (> {LEAK_TOL:g}); raise the level count"
        )


def evolve_expectations(
    pkt: packet_mod.GaussianPacket,
    field: FieldConfig,
    times: np.ndarray,
    n_levels: int,
    guard: int = GUARD_BAND,
    kz_order: int | None = None,
) -> EvolvedExpectations:
    """Dense-evolution expectations of position and velocity.

    2+1 packets run a single diagonalization at k_z = 0; 3+1 packets add an
    outer Gauss-Hermite quadrature over the axial momentum density, with the
    order picked from the interband phase swing unless given.  Output
    positions are relative to the t=0 centre (trajectory starts at the
    origin), matching the analytic-series convention.
    """
    times = np.asarray(times, dtype=float)
    if pkt.dimensionality == "2+1":
        kz_nodes = np.array([0.0])
        kz_weights = np.array([1.0])
    else:
        kz_nodes, kz_weights = _pick_axial_rule(pkt, field, times, kz_order)

    rho, shift = _density_from_nodes(pkt, field, n_levels)
    _check_leakage(rho, n_levels, guard)
    size = n_levels + 1
    a_op = np.kron(np.eye(4), lowering_matrix(n_levels))
    # alpha_x + i alpha_y: one complex observable carries both velocities
    raise_spin = np.zeros((4, 4))
    raise_spin[0, 3] = raise_spin[2, 1] = 2.0
    v_op = np.kron(raise_spin, np.eye(size))
    L = field.magnetic_length

    alpha = np.zeros(times.size, dtype=complex)   # <A(t)>; <A^+(t)> = conj
    vel = np.zeros(times.size, dtype=complex)     # <v_x> + i <v_y>
    alpha0 = 0.0 + 0.0j
    norm_drift = 0.0
    energy_drift = 0.0
    probe_times = times[:: max(1, times.size // 8)]
    probe_col = int(np.argmax(np.linalg.norm(rho, axis=0)))
    for k_z, wk in zip(kz_nodes, kz_weights):
        ham = build(n_levels, field, k_z=k_z)
        evals, vecs = np.linalg.eigh(ham.matrix)
        p_rho = vecs.T.conj() @ rho @ vecs
        phases = np.exp(-1j * np.outer(evals, times))        # (d, T)
        for op, out in ((a_op, alpha), (v_op, vel)):
            q = vecs.T @ (op @ vecs)                         # vecs real
            w = p_rho.T * q                                  # W_ij = rho_ji q_ij
            g = w @ phases
            out += wk * np.sum(np.conj(phases) * g, axis=0)
            if op is a_op:
                alpha0 += wk * w.sum()

        probe = rho[:, probe_col].copy()
        pn = np.linalg.norm(probe)
        if pn > 0:
            probe /= pn
            d = vecs.T.conj() @ probe
            energy0 = np.real(np.vdot(probe, ham.matrix @ probe))
            for t in probe_times:
                vec_t = vecs @ (d * np.exp(-1j * evals * t))
                norm_drift = max(norm_drift, abs(np.linalg.norm(vec_t) - 1.0))
                energy = np.real(np.vdot(vec_t, ham.matrix @ vec_t))
                energy_drift = max(energy_drift, abs(energy - energy0))

    scale = L * math.sqrt(2.0)
    y_raw = scale * np.real(alpha)
    x_raw = scale * np.imag(alpha)
    return EvolvedExpectations(
        times=times,
        x=x_raw - scale * float(np.imag(alpha0)),
        y=y_raw - scale * float(np.real(alpha0)),
        vx=np.real(vel),
        vy=np.imag(vel),
        y_operator_initial=scale * float(np.real(alpha0)),
        guiding_shift=shift,
        norm_drift=norm_drift,
        energy_drift=energy_drift,
    )


def _pick_axial_rule(
    pkt: packet_mod.GaussianPacket,
    field: FieldConfig,
    times: np.ndarray,
    kz_order: int | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite for modest interband phase swings, trapezoid beyond."""
    if kz_order is not None:
        return packet_mod.axial_nodes(pkt, kz_order)
    edge = abs(pkt.k0z) + 8.5 / pkt.d_z
    t_max = float(np.max(np.abs(times)))
    # the lowest pair has the steepest k_z dependence
    swing = max(
        abs(
            landau_energy(n + 1, edge, field)
            + landau_energy(n, edge, field)
            - landau_energy(n + 1, pkt.k0z, field)
            - landau_energy(n, pkt.k0z, field)
        )
        for n in (0, 1, 2)
    )
    span = swing * t_max
    order = 1 << max(7, int(math.ceil(math.log2(span / 2.0 + 64.0))))
    if order <= hermite.MAX_GH_ORDER:
        return packet_mod.axial_nodes(pkt, order)
    points = 1 << max(11, int(math.ceil(math.log2(2.0 * span / math.pi + 64.0))))
    if points > (1 << 16):
        raise ValueError(
            f"time window needs {points} axial nodes (> {1 << 16}); "
            "shorten the window or fix kz_order explicitly"
        )
    return packet_mod.axial_grid(pkt, points)
