"""Analytic time evolution of packet positions, velocities and spectra.

Every trajectory is a finite sum of oscillation terms, one intraband
(cyclotron-like, frequency E_hi - E_lo) and one interband (trembling-motion,
frequency E_hi + E_lo) per consecutive level pair, weighted by the packet's
level-overlap amplitudes.  The 3+1 model integrates each term over the axial
momentum density, which damps the motion; the 2+1 model keeps the discrete
sum and stays persistent.

Natural units: lengths in Compton wavelengths, times in Compton times,
velocities in c.  Positions are reported relative to the t = 0 centre, so
every trajectory starts at the origin; the raw position-operator offset
-k0x L^2 is kept as metadata.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import hermite
from .packet import (
    CoefficientSet,
    DimensionalityError,
    GaussianPacket,
    axial_grid as packet_axial_grid,
    axial_nodes as packet_axial_nodes,
)
from .units import FieldConfig

PREF = 1.0 / (2.0 * math.sqrt(2.0))
MAX_GRID_NODES = 1 << 16
TIME_CHUNK = 512


class QuadratureConvergenceError(RuntimeError):
    """Axial-momentum quadrature failed its doubling test."""

    def __init__(self, achieved: float, target: float):
        super().__init__(
            f"axial quadrature changed by {achieved:.3e} relative on doubling "
            f"(target {target:.3e}); refine manually or shorten the window"
        )
        self.achieved = achieved
        self.target = target


@dataclass(frozen=True)
class Trajectory:
    """Sampled packet motion; lengths in Compton wavelengths, v in c."""

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    model: str                    # '2+1' or '3+1'
    parts: str                    # 'all', 'intraband' or 'interband'
    y_operator_initial: float     # raw <Y>(0) = -k0x L^2
    subtracted_constant: float    # series(0) + k0x L^2; ~0 when sum rules hold
    length_unit: str = "lambda_c"


@dataclass(frozen=True)
class SpectralLine:
    """One oscillation term: y ~ amplitude_y cos(w t), x ~ amplitude_x sin(w t)."""

    n: int
    kind: str                     # 'intraband' or 'interband'
    frequency: float
    amplitude_x: float
    amplitude_y: float


@dataclass(frozen=True)
class MixingSeries:
    """Spin-component cross terms, nonzero only for 3+1 packets with k0z != 0.

    j_plus/j_minus are sum_n U_nn J_n^{+/-}(t); the lowering cross term is
    (a2* a1 / 2)(j_plus + j_minus) and its raising partner is the conjugate.
    The opposite-order cross terms vanish identically.
    """

    times: np.ndarray
    j_plus: np.ndarray
    j_minus: np.ndarray
    lowering_cross: np.ndarray
    raising_cross: np.ndarray


@dataclass(frozen=True)
class SubPacketSeries:
    """The four sub-packet averages whose sum rebuilds the ladder averages.

    lowering_1/2 split the lowering-operator average by interband character
    of the evolution factor; raising_1/2 do the same for the raising
    operator.  branch_weights[:, i] holds the four per-pair energy factors
    (T_pp, T_pm, T_mp, T_mm) used in the series.
    """

    times: np.ndarray
    lowering_1: np.ndarray
    lowering_2: np.ndarray
    raising_1: np.ndarray
    raising_2: np.ndarray
    branch_weights: np.ndarray


def t_factor(s1: int, s2: int, s3: int, s4: int, e_lo: float, e_hi: float) -> float:
    """Branch weight s1 + s2/e_lo + s3/e_hi + s4*e_lo/e_hi (rest energy = 1)."""
    return s1 + s2 / e_lo + s3 / e_hi + s4 * e_lo / e_hi


def _energies(field: FieldConfig, n_top: int, k_z: np.ndarray) -> np.ndarray:
    """E_{n,k_z} table, shape (n_top+1, K)."""
    n = np.arange(n_top + 1, dtype=float)[:, None]
    return np.sqrt(1.0 + field.omega**2 * n + k_z[None, :] ** 2)


def _pair_weights(coeffs: CoefficientSet) -> np.ndarray:
    """S_n = sqrt(n+1) (U_{n,n+1} + U_{n+1,n}) for n = 0..n_max-1."""
    upper = np.diagonal(coeffs.u, offset=1)
    lower = np.diagonal(coeffs.u, offset=-1)
    n = np.arange(upper.size, dtype=float)
    return np.sqrt(n + 1.0) * (upper + lower)


_axial_nodes = packet_axial_nodes
_axial_grid = packet_axial_grid


def _phase_span(packet: GaussianPacket, field: FieldConfig, n_top: int, t_max: float) -> float:
    """Largest interband phase swing across the axial density support."""
    edge = np.array([abs(packet.k0z) + 8.5 / packet.d_z])
    centre = np.array([packet.k0z])
    e_edge = _energies(field, n_top, edge)
    e_mid = _energies(field, n_top, centre)
    swing = (e_edge[1:] + e_edge[:-1]) - (e_mid[1:] + e_mid[:-1])
    return float(np.max(np.abs(swing)) * abs(t_max))


def _component_blocks(
    packet: GaussianPacket,
    coeffs: CoefficientSet,
    field: FieldConfig,
    energies: np.ndarray,
):
    """Per spinor component: (weight, S, e_lo, e_hi, ratio_base) blocks.

    The second component pairs levels (n, n+1); the first component runs the
    same derivation one level up, pairing (n+1, n+2) with the same overlap
    weights, and flips which energy of the pair divides the cosine ratio.
    """
    s_pairs = _pair_weights(coeffs)
    blocks = []
    w2 = abs(packet.a2) ** 2
    if w2 > 0.0:
        blocks.append((w2, s_pairs, energies[:-2], energies[1:-1], "hi"))
    w1 = abs(packet.a1) ** 2
    if w1 > 0.0:
        blocks.append((w1, s_pairs, energies[1:-1], energies[2:], "lo"))
    return blocks


def _mixing_weight(packet: GaussianPacket) -> complex:
    return np.conj(packet.a2) * packet.a1


def _evaluate(
    packet: GaussianPacket,
    coeffs: CoefficientSet,
    field: FieldConfig,
    times: np.ndarray,
    kz_nodes: np.ndarray,
    kz_weights: np.ndarray,
    parts: str = "all",
    channels: tuple[str, ...] = ("x", "y", "vx", "vy"),
) -> dict[str, np.ndarray]:
    """Sum the oscillation series over level pairs and axial nodes."""
    L = field.magnetic_length
    omega_sq = field.omega**2
    n_top = coeffs.n_max + 1
    energies = _energies(field, n_top, kz_nodes)        # (n_top+1, K)
    blocks = _component_blocks(packet, coeffs, field, energies)
    intra = parts in ("all", "intraband")
    inter = parts in ("all", "interband")

    kernels = (("y", np.cos), ("x", np.sin), ("vy", np.sin), ("vx", np.cos))
    out = {ch: np.zeros(times.size) for ch in channels}
    for weight, s_pairs, e_lo, e_hi, base in blocks:
        # k_z-resolved amplitudes, shape (pairs, K)
        il, ih = 1.0 / e_lo, 1.0 / e_hi
        q = e_lo / e_hi if base == "hi" else e_hi / e_lo
        div = e_hi if base == "hi" else e_lo
        # (1-q)*(e_hi+e_lo) changes sign with the ratio orientation
        zsign = 1.0 if base == "hi" else -1.0
        amp = {
            ("y", "c"): 1.0 + q,
            ("y", "z"): 1.0 - q,
            ("x", "c"): -(il + ih),
            ("x", "z"): +(il - ih),
            ("vy", "c"): -omega_sq / div,
            ("vy", "z"): -zsign * omega_sq / div,
            ("vx", "c"): -omega_sq * il * ih,
            ("vx", "z"): +omega_sq * il * ih,
        }
        scaled = weight * PREF * L * s_pairs[:, None] * kz_weights[None, :]
        tags = []
        if intra:
            tags.append(("c", e_hi - e_lo))
        if inter:
            tags.append(("z", e_hi + e_lo))
        n_pairs, n_nodes = e_lo.shape
        for t0 in range(0, times.size, TIME_CHUNK):
            t = times[t0 : t0 + TIME_CHUNK]
            sl = slice(t0, t0 + t.size)
            for tag, freqs in tags:
                if n_nodes == 1:
                    # discrete axial momentum: vectorize across pairs
                    phase = np.outer(freqs[:, 0], t)
                    for ch, fn in kernels:
                        if ch in channels:
                            out[ch][sl] += (scaled * amp[(ch, tag)])[:, 0] @ fn(phase)
                else:
                    # keep the (nodes x chunk) grid per pair to bound memory
                    want_cos = any(ch in channels and fn is np.cos for ch, fn in kernels)
                    want_sin = any(ch in channels and fn is np.sin for ch, fn in kernels)
                    for p in range(n_pairs):
                        phase = np.outer(freqs[p], t)
                        cos_g = np.cos(phase) if want_cos else None
                        sin_g = np.sin(phase) if want_sin else None
                        row = scaled[p]
                        for ch, fn in kernels:
                            if ch in channels:
                                grid = cos_g if fn is np.cos else sin_g
                                out[ch][sl] += (row * amp[(ch, tag)][p]) @ grid

    mix_w = _mixing_weight(packet)
    if (
        packet.dimensionality == "3+1"
        and mix_w != 0.0
        and (abs(packet.k0z) > 0.0 or kz_nodes.size > 1)
    ):
        mix = _mixing_kernels(packet, coeffs, field, times, kz_nodes, kz_weights, parts, channels)
        for ch in channels:
            out[ch] += mix[ch]
    return out


def _mixing_kernels(
    packet, coeffs, field, times, kz_nodes, kz_weights, parts, channels
) -> dict[str, np.ndarray]:
    """Cross-component contributions from the mixing integrals."""
    L = field.magnetic_length
    energies = _energies(field, coeffs.n_max + 1, kz_nodes)
    e_lo, e_hi = energies[:-1], energies[1:]
    u_diag = np.diagonal(coeffs.u)[: e_lo.shape[0]]
    amp = (
        u_diag[:, None]
        * kz_nodes[None, :]
        * field.omega
        / (e_lo * e_hi)
        * kz_weights[None, :]
    )
    mix_w = _mixing_weight(packet)
    coef_y = (L / math.sqrt(2.0)) * mix_w.real
    coef_x = (L / math.sqrt(2.0)) * mix_w.imag
    intra = parts in ("all", "intraband")
    inter = parts in ("all", "interband")

    out = {ch: np.zeros(times.size) for ch in channels}
    delta, sigma = e_hi - e_lo, e_hi + e_lo
    n_pairs = e_lo.shape[0]
    for t0 in range(0, times.size, TIME_CHUNK):
        t = times[t0 : t0 + TIME_CHUNK]
        base = np.zeros(t.size)
        dbase = np.zeros(t.size)
        for p in range(n_pairs):
            if intra:
                ph = np.outer(delta[p], t)
                base += amp[p] @ np.cos(ph)
                dbase -= (amp[p] * delta[p]) @ np.sin(ph)
            if inter:
                ph = np.outer(sigma[p], t)
                base -= amp[p] @ np.cos(ph)
                dbase += (amp[p] * sigma[p]) @ np.sin(ph)
        sl = slice(t0, t0 + t.size)
        if "y" in channels:
            out["y"][sl] += coef_y * base
        if "x" in channels:
            out["x"][sl] += coef_x * base
        if "vy" in channels:
            out["vy"][sl] += coef_y * dbase
        if "vx" in channels:
            out["vx"][sl] += coef_x * dbase
    return out


def _resolve_axial_rule(
    packet: GaussianPacket,
    coeffs: CoefficientSet,
    field: FieldConfig,
    times: np.ndarray,
    rtol: float,
    parts: str = "all",
) -> tuple[np.ndarray, np.ndarray]:
    """Pick and validate the axial quadrature by an order-doubling probe."""
    t_max = float(np.max(np.abs(times)))
    span = _phase_span(packet, field, coeffs.n_max + 1, t_max)
    ladder: list[tuple[str, int]] = []
    order = max(64, 1 << int(math.ceil(math.log2(span / 2.0 + 48.0))))
    while order <= hermite.MAX_GH_ORDER:
        ladder.append(("gauss", order))
        order *= 2
    points = max(4096, 1 << int(math.ceil(math.log2(2.0 * span / math.pi + 64.0))))
    while points <= MAX_GRID_NODES:
        ladder.append(("grid", points))
        points *= 2
    if len(ladder) < 2:
        raise QuadratureConvergenceError(math.inf, rtol)

    def make(step):
        kind, size = step
        if kind == "gauss":
            return _axial_nodes(packet, size)
        return _axial_grid(packet, size)

    probe = times[np.unique(np.linspace(0, times.size - 1, 9).astype(int))]

    def probe_eval(rule):
        return _evaluate(
            packet, coeffs, field, probe, *rule, parts=parts, channels=("y", "x")
        )

    current = make(ladder[0])
    cur_val = probe_eval(current)
    achieved = math.inf
    for step in ladder[1:]:
        finer = make(step)
        fin_val = probe_eval(finer)
        scale = max(
            float(np.max(np.abs(fin_val["y"] - fin_val["y"][0]))),
            float(np.max(np.abs(fin_val["x"]))),
            1e-300,
        )
        achieved = max(
            float(np.max(np.abs(cur_val["y"] - fin_val["y"]))),
            float(np.max(np.abs(cur_val["x"] - fin_val["x"]))),
        ) / scale
        if achieved <= rtol:
            return current
        current, cur_val = finer, fin_val
    raise QuadratureConvergenceError(achieved, rtol)


def _finish_trajectory(
    packet: GaussianPacket,
    field: FieldConfig,
    times: np.ndarray,
    series: dict[str, np.ndarray],
    model: str,
    parts: str,
) -> Trajectory:
    y0_op = -packet.k0x * field.magnetic_length**2
    if parts == "all":
        if times[0] != 0.0:
            raise ValueError("time grids must start at t = 0")
        # x(0) vanishes identically (pure sine series); anchor y to the origin
        subtracted = series["y"][0] - y0_op
        x = series["x"] - series["x"][0]
        y = series["y"] - series["y"][0]
    else:
        subtracted = 0.0
        x = series["x"]
        y = series["y"]
    return Trajectory(
        times=times,
        x=x,
        y=y,
        vx=series["vx"],
        vy=series["vy"],
        model=model,
        parts=parts,
        y_operator_initial=y0_op,
        subtracted_constant=float(subtracted),
    )


def trajectory_2p1(
    packet: GaussianPacket,
    coeffs: CoefficientSet,
    field: FieldConfig,
    times: np.ndarray,
    parts: str = "all",
) -> Trajectory:
    """Packet trajectory for the 2+1 model (axial density collapsed to k_z=0)."""
    if packet.dimensionality != "2+1":
        raise DimensionalityError("trajectory_2p1 needs a 2+1 packet")
    times = np.asarray(times, dtype=float)
    series = _evaluate(
        packet, coeffs, field, times, np.array([0.0]), np.array([1.0]), parts=parts
    )
    return _finish_trajectory(packet, field, times, series, "2+1", parts)


def trajectory_3p1(
    packet: GaussianPacket,
    coeffs: CoefficientSet,
    field: FieldConfig,
    times: np.ndarray,
    parts: str = "all",
    kz_rtol: float = 1e-9,
) -> Trajectory:
    """Packet trajectory for the 3+1 model (axial-momentum quadrature)."""
    if packet.dimensionality != "3+1":
        raise DimensionalityError("trajectory_3p1 needs a 3+1 packet")
    times = np.asarray(times, dtype=float)
    nodes, weights = _resolve_axial_rule(packet, coeffs, field, times, kz_rtol, parts)
    series = _evaluate(packet, coeffs, field, times, nodes, weights, parts=parts)
    return _finish_trajectory(packet, field, times, series, "3+1", parts)


def velocities(
    packet: GaussianPacket,
    coeffs: CoefficientSet,
    field: FieldConfig,
    times: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Average velocity series (vx, vy) in units of c."""
    times = np.asarray(times, dtype=float)
    if packet.dimensionality == "2+1":
        nodes, weights = np.array([0.0]), np.array([1.0])
    else:
        nodes, weights = _resolve_axial_rule(packet, coeffs, field, times, 1e-9)
    series = _evaluate(
        packet, coeffs, field, times, nodes, weights, channels=("vx", "vy")
    )
    return series["vx"], series["vy"]


def mixing_terms(
    packet: GaussianPacket,
    coeffs: CoefficientSet,
    field: FieldConfig,
    times: np.ndarray,
    kz_order: int = 128,
) -> MixingSeries:
    """Spin-mixing integral series; identically zero for 2+1 and for k0z = 0.

    The integrand is odd in the axial wavenumber, so a symmetric density
    kills it; only 3+1 packets with axial momentum produce cross terms.
    """
    times = np.asarray(times, dtype=float)
    if packet.dimensionality == "2+1":
        zero = np.zeros(times.size)
        return MixingSeries(times, zero, zero.copy(), zero * 0j, zero * 0j)
    nodes, weights = _axial_nodes(packet, kz_order)
    energies = _energies(field, coeffs.n_max + 1, nodes)
    e_lo, e_hi = energies[:-1], energies[1:]
    u_diag = np.diagonal(coeffs.u)[: e_lo.shape[0]]
    amp = (
        u_diag[:, None] * nodes[None, :] * field.omega / (e_lo * e_hi)
    ) * weights[None, :]
    j_plus = np.einsum(
        "pk,pkt->t", amp, np.cos((e_hi - e_lo)[..., None] * times[None, None, :])
    )
    j_minus = -np.einsum(
        "pk,pkt->t", amp, np.cos((e_hi + e_lo)[..., None] * times[None, None, :])
    )
    cross = 0.5 * _mixing_weight(packet) * (j_plus + j_minus)
    return MixingSeries(
        times=times,
        j_plus=j_plus,
        j_minus=j_minus,
        lowering_cross=cross,
        raising_cross=np.conj(cross),
    )


def subpackets(
    packet: GaussianPacket,
    coeffs: CoefficientSet,
    field: FieldConfig,
    times: np.ndarray,
) -> SubPacketSeries:
    """Four sub-packet averages for a 2+1 packet in the second component.

    In the non-relativistic limit the *_1 series carry the whole cyclotron
    rotation (with opposite winding between lowering and raising) while the
    *_2 series vanish.
    """
    if packet.dimensionality != "2+1":
        raise DimensionalityError("subpackets are defined for the 2+1 model")
    if abs(packet.a2) != 1.0:
        raise ValueError("subpackets need a pure second-component packet")
    times = np.asarray(times, dtype=float)
    energies = _energies(field, coeffs.n_max + 1, np.array([0.0]))[:, 0]
    e_lo, e_hi = energies[:-2], energies[1:-1]
    upper = np.diagonal(coeffs.u, offset=1)
    lower = np.diagonal(coeffs.u, offset=-1)
    n = np.arange(upper.size, dtype=float)
    u_low = np.sqrt(n + 1.0) * upper      # weights of the lowering average
    u_rai = np.sqrt(n + 1.0) * lower      # weights of the raising average

    il, ih, r = 1.0 / e_lo, 1.0 / e_hi, e_lo / e_hi
    t_pp = 1.0 + il + ih + r
    t_pm = 1.0 + il - ih - r
    t_mp = 1.0 - il + ih - r      # equals -T(-,+)
    t_mm = 1.0 - il - ih + r
    branch = np.stack([t_pp, t_pm, t_mp, t_mm], axis=1)

    delta = np.outer(e_hi - e_lo, times)
    sigma = np.outer(e_hi + e_lo, times)
    e_mc = np.exp(-1j * delta)
    e_mz = np.exp(-1j * sigma)
    lowering_1 = 0.25 * ((u_low * t_pp) @ e_mc + (u_low * t_mp) @ e_mz)
    lowering_2 = 0.25 * ((u_low * t_mm) @ np.conj(e_mc) + (u_low * t_pm) @ np.conj(e_mz))
    raising_1 = 0.25 * ((u_rai * t_pp) @ np.conj(e_mc) + (u_rai * t_mp) @ np.conj(e_mz))
    raising_2 = 0.25 * ((u_rai * t_mm) @ e_mc + (u_rai * t_pm) @ e_mz)
    return SubPacketSeries(
        times=times,
        lowering_1=lowering_1,
        lowering_2=lowering_2,
        raising_1=raising_1,
        raising_2=raising_2,
        branch_weights=branch,
    )


def spectral_decomposition(
    packet: GaussianPacket,
    coeffs: CoefficientSet,
    field: FieldConfig,
    drop_below: float | None = None,
) -> list[SpectralLine]:
    """Discrete line spectrum of a 2+1 trajectory.

    Convention: y(t) = sum_lines A_y cos(w t) + const, x(t) = sum A_x sin(w t),
    with the constant fixed by the start-at-origin anchor.  First-component
    contributions land one pair up, at the same frequencies with different
    amplitudes, and are merged into the matching lines.
    """
    if packet.dimensionality != "2+1":
        raise DimensionalityError("spectral decomposition is a 2+1 operation")
    L = field.magnetic_length
    if drop_below is None:
        drop_below = 1e-12 * L
    energies = _energies(field, coeffs.n_max + 1, np.array([0.0]))[:, 0]
    s_pairs = _pair_weights(coeffs)
    lines: dict[tuple[str, int], list[float]] = {}

    def add(idx, kind, freq, ax, ay):
        key = (kind, idx)
        if key in lines:
            lines[key][1] += ax
            lines[key][2] += ay
        else:
            lines[key] = [freq, ax, ay]

    for weight, e_lo, e_hi, shift, base in (
        (abs(packet.a2) ** 2, energies[:-2], energies[1:-1], 0, "hi"),
        (abs(packet.a1) ** 2, energies[1:-1], energies[2:], 1, "lo"),
    ):
        if weight == 0.0:
            continue
        q = e_lo / e_hi if base == "hi" else e_hi / e_lo
        il, ih = 1.0 / e_lo, 1.0 / e_hi
        for i, s in enumerate(s_pairs):
            coeff = weight * PREF * L * s
            add(i + shift, "intraband", e_hi[i] - e_lo[i], -coeff * (il[i] + ih[i]), coeff * (1 + q[i]))
            add(i + shift, "interband", e_hi[i] + e_lo[i], +coeff * (il[i] - ih[i]), coeff * (1 - q[i]))

    result = []
    for (kind, idx), (freq, ax, ay) in sorted(lines.items(), key=lambda kv: kv[0][1]):
        if abs(ax) < drop_below and abs(ay) < drop_below:
            continue
        result.append(
            SpectralLine(n=idx, kind=kind, frequency=freq, amplitude_x=ax, amplitude_y=ay)
        )
    return result


def analytic_signal(
    packet: GaussianPacket,
    coeffs: CoefficientSet,
    field: FieldConfig,
    times: np.ndarray,
    parts: str = "all",
    kz_rtol: float = 1e-9,
) -> np.ndarray:
    """Complex analytic signal A(t) of the transverse-position series.

    Every oscillation term amp*cos(w t) of the y-series is summed as
    amp*exp(-i w t); all frequencies are positive, so Re A reproduces the
    raw (unanchored) y-series and |A| is its canonical envelope.  The
    envelope varies on beat timescales only, so collapse/revival and decay
    analyses can sample far more sparsely than the carrier would require.
    """
    times = np.asarray(times, dtype=float)
    if packet.dimensionality == "2+1":
        nodes, weights = np.array([0.0]), np.array([1.0])
    else:
        nodes, weights = _resolve_axial_rule(
            packet, coeffs, field, times, kz_rtol, parts
        )
    L = field.magnetic_length
    energies = _energies(field, coeffs.n_max + 1, nodes)
    intra = parts in ("all", "intraband")
    inter = parts in ("all", "interband")
    out = np.zeros(times.size, dtype=complex)
    for weight, s_pairs, e_lo, e_hi, base in _component_blocks(
        packet, coeffs, field, energies
    ):
        q = e_lo / e_hi if base == "hi" else e_hi / e_lo
        scaled = weight * PREF * L * s_pairs[:, None] * weights[None, :]
        tags = []
        if intra:
            tags.append((e_hi - e_lo, 1.0 + q))
        if inter:
            tags.append((e_hi + e_lo, 1.0 - q))
        for t0 in range(0, times.size, TIME_CHUNK):
            t = times[t0 : t0 + TIME_CHUNK]
            sl = slice(t0, t0 + t.size)
            for freqs, amp in tags:
                for p in range(e_lo.shape[0]):
                    grid = np.exp(np.outer(freqs[p], -1j * t))
                    out[sl] += (scaled[p] * amp[p]) @ grid
    mix_w = _mixing_weight(packet)
    if packet.dimensionality == "3+1" and mix_w != 0.0:
        e_lo, e_hi = energies[:-1], energies[1:]
        u_diag = np.diagonal(coeffs.u)[: e_lo.shape[0]]
        amp = (
            u_diag[:, None] * nodes[None, :] * field.omega / (e_lo * e_hi)
        ) * weights[None, :]
        coef = (L / math.sqrt(2.0)) * mix_w.real
        for t0 in range(0, times.size, TIME_CHUNK):
            t = times[t0 : t0 + TIME_CHUNK]
            sl = slice(t0, t0 + t.size)
            for p in range(e_lo.shape[0]):
                if intra:
                    out[sl] += coef * (amp[p] @ np.exp(np.outer(e_hi[p] - e_lo[p], -1j * t)))
                if inter:
                    out[sl] -= coef * (amp[p] @ np.exp(np.outer(e_hi[p] + e_lo[p], -1j * t)))
    return out


@dataclass(frozen=True)
class LowFieldSummary:
    """Weak-field closed forms: circle parameters and trembling amplitude."""

    cyclotron_radius: float       # k0x L^2
    omega_cyclotron: float        # 1/L^2
    zb_amplitude: float           # k0x/2 Compton wavelengths
    zb_carrier: float             # 2 rest energies / hbar
    axial_width: float | None     # d_z for the envelope model, None for 2+1
    kappa: float

    def envelope(self, t) -> np.ndarray:
        """Trembling-motion envelope; decays as t^{-1/2} for 3+1 packets."""
        t = np.asarray(t, dtype=float)
        if self.axial_width is None:
            return np.full(t.shape, self.zb_amplitude)
        d2 = self.axial_width**2
        return self.zb_amplitude * d2**0.5 / (self.axial_width**4 + t * t) ** 0.25


def lowfield_summary(packet: GaussianPacket, field: FieldConfig) -> LowFieldSummary:
    """Closed-form weak-field description; warns outside its validity range."""
    kappa = field.kappa
    if kappa >= 1e-2:
        warnings.warn(
            f"weak-field summary requested at kappa={kappa:.3g} (valid below 1e-2)",
            stacklevel=2,
        )
    return LowFieldSummary(
        cyclotron_radius=packet.k0x * field.magnetic_length**2,
        omega_cyclotron=field.omega_cyclotron,
        zb_amplitude=0.5 * packet.k0x,
        zb_carrier=2.0,
        axial_width=packet.d_z if packet.dimensionality == "3+1" else None,
        kappa=kappa,
    )


def default_time_grid(
    field: FieldConfig,
    coeffs: CoefficientSet,
    t_end: float,
    per_period: int = 2000,
    max_samples: int = 200_000,
) -> np.ndarray:
    """Grid resolving the fastest interband period, capped in total size."""
    energies = _energies(field, coeffs.n_max + 1, np.array([0.0]))[:, 0]
    fastest = float(energies[-1] + energies[-2])
    dt = 2.0 * math.pi / fastest / per_period
    samples = min(max_samples, max(64, int(t_end / dt) + 1))
    return np.linspace(0.0, t_end, samples)
