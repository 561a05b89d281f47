"""Gaussian packets and their expansion over Landau oscillator levels.

The transverse profile is expanded as F_n(k_x) = <n, k_x | f>, the overlap of
the packet with the oscillator level n at conserved wavenumber k_x, and the
level-overlap matrix U_{m,n} = integral F_m*(k_x) F_n(k_x) dk_x collects the
amplitudes that weight every oscillation term of the dynamics.

Lengths in Compton wavelengths, wavenumbers in their inverse.  The closed
forms multiply factors that individually overflow near n ~ 400 (the packet /
level mismatch is a huge exponential times a tiny one), so amplitudes are
assembled in log magnitude + sign and only the fused result is exponentiated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import hermite
from .units import FieldConfig

EQUAL_WIDTH_WINDOW = 1e-6   # |d_y - L|/L below which the closed form is singular
DEFAULT_N_MAX = 400
DEFAULT_TAIL_TOL = 1e-10
AUTO_TAIL = 1e-12


class PacketError(ValueError):
    """Invalid packet definition."""


class ClosedFormUnavailable(ValueError):
    """Closed-form amplitude rejected near d_y = L; use the quadrature path."""


class TruncationError(ValueError):
    """Level truncation leaves too much packet mass uncaptured."""


class DimensionalityError(ValueError):
    """Operation undefined for this packet dimensionality."""


@dataclass(frozen=True)
class GaussianPacket:
    """Ellipsoidal Gaussian packet with two upper spinor amplitudes.

    d_x, d_y, d_z -- 1/e half-widths (d_z ignored for the 2+1 model)
    k0x, k0z      -- centre wavenumbers (k0y = 0 by construction)
    a1, a2        -- first/second spinor component amplitudes, |a1|^2+|a2|^2=1
    dimensionality-- '2+1' or '3+1'

    The velocity bound |k0| < 1/lambda_c keeps the nominal packet speed below
    c; analog-simulation runs routinely exceed it, so it can be relaxed to a
    warning with relax_momentum_bound=True.
    """

    d_x: float
    d_y: float
    d_z: float | None = None
    k0x: float = 0.0
    k0z: float = 0.0
    a1: complex = 0.0
    a2: complex = 1.0
    dimensionality: str = "2+1"
    relax_momentum_bound: bool = False

    def __post_init__(self):
        if self.dimensionality not in ("2+1", "3+1"):
            raise PacketError("dimensionality must be '2+1' or '3+1'")
        if not (self.d_x > 0 and self.d_y > 0):
            raise PacketError("transverse widths d_x, d_y must be positive")
        if self.dimensionality == "3+1":
            if self.d_z is None or not self.d_z > 0:
                raise PacketError("3+1 packets need a positive axial width d_z")
        if self.dimensionality == "2+1" and self.k0z != 0.0:
            raise PacketError("2+1 packets have no axial momentum")
        norm = abs(self.a1) ** 2 + abs(self.a2) ** 2
        if not math.isclose(norm, 1.0, rel_tol=0.0, abs_tol=1e-12):
            raise PacketError(
                f"spinor amplitudes must satisfy |a1|^2+|a2|^2 = 1, got {norm!r}"
            )
        speed = math.hypot(self.k0x, self.k0z)
        if speed >= 1.0:
            if self.relax_momentum_bound:
                warnings.warn(
                    f"packet momentum {speed:.4g}/lambda_c exceeds the nominal "
                    "velocity bound; dynamics remain well defined",
                    stacklevel=2,
                )
            else:
                raise PacketError(
                    "packet momentum sqrt(k0x^2+k0z^2) must stay below "
                    f"1/lambda_c (got {speed:.6g}); pass relax_momentum_bound=True "
                    "for analog-simulation regimes"
                )

    @property
    def is_two_component(self) -> bool:
        return abs(self.a1) > 0 and abs(self.a2) > 0


def g_xy(packet: GaussianPacket, k_x, y):
    """Partial Fourier transform of the transverse profile, Gaussian in both."""
    k = np.asarray(k_x, dtype=float)
    yy = np.asarray(y, dtype=float)
    pref = math.sqrt(packet.d_x / (math.pi * packet.d_y))
    out = pref * np.exp(
        -0.5 * packet.d_x**2 * (k - packet.k0x) ** 2 - yy**2 / (2.0 * packet.d_y**2)
    )
    if np.isscalar(k_x) and np.isscalar(y):
        return float(out)
    return out


def g_z(packet: GaussianPacket, k_z):
    """Axial momentum profile; normalized so integral |g_z|^2 dk_z = 1."""
    if packet.dimensionality != "3+1":
        raise DimensionalityError(
            "2+1 packets carry no axial profile: the model replaces |g_z|^2 "
            "by a delta at k_z = 0"
        )
    k = np.asarray(k_z, dtype=float)
    out = (packet.d_z**2 / math.pi) ** 0.25 * np.exp(
        -0.5 * packet.d_z**2 * (k - packet.k0z) ** 2
    )
    if np.isscalar(k_z):
        return float(out)
    return out


def _width_regime(packet: GaussianPacket, length: float) -> str:
    gap = abs(packet.d_y - length) / length
    if packet.d_y == length:
        return "equal"
    if gap < EQUAL_WIDTH_WINDOW:
        return "window"
    return "narrow" if packet.d_y < length else "wide"


def _f_closed_log(
    packet: GaussianPacket, field: FieldConfig, n_max: int, k_x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """log|F_n(k_x)| and sign, shape (n_max+1, K); closed-form evaluation."""
    L = field.magnetic_length
    dx, dy, k0x = packet.d_x, packet.d_y, packet.k0x
    k = np.asarray(k_x, dtype=float)
    regime = _width_regime(packet, L)

    if regime == "window":
        raise ClosedFormUnavailable(
            "closed-form amplitude singular for |d_y - L|/L < "
            f"{EQUAL_WIDTH_WINDOW:g}; use the quadrature path or d_y = L exactly"
        )

    gauss = -0.5 * dx**2 * (k - k0x) ** 2

    if regime == "equal":
        # overlap of an oscillator-matched slice: (-k L)^n Gaussian
        log_c = np.array([hermite.log_norm_constant(n) for n in range(n_max + 1)])
        with np.errstate(divide="ignore"):
            log_kl = np.log(np.abs(k * L))
        n = np.arange(n_max + 1, dtype=float)[:, None]
        logmag = (
            0.5 * math.log(dx)
            + gauss[None, :]
            - 0.25 * (k * L) ** 2
            + n * log_kl[None, :]
            - log_c[:, None]
        )
        sign = np.where((-k)[None, :] >= 0.0, 1.0, -1.0) ** n
        sign = np.where(np.arange(n_max + 1)[:, None] == 0, 1.0, sign)
        zero = (k == 0.0)[None, :] & (np.arange(n_max + 1)[:, None] > 0)
        logmag = np.where(zero, -np.inf, logmag)
        return logmag, sign

    # factored differences avoid cancellation as d_y -> L
    diff = (L - dy) * (L + dy)          # L^2 - d_y^2, sign carries the regime
    plus = L * L + dy * dy
    d_sq = L**4 / plus                  # D^2
    gauss = gauss - 0.5 * d_sq * k * k
    log_pref = 0.5 * math.log(2.0 * L * dx * dy / plus)
    log_half_ratio = 0.5 * math.log(abs(diff) / plus)   # log |r|^(1/2)
    n = np.arange(n_max + 1, dtype=float)[:, None]

    if regime == "narrow":
        c_arg = L**3 / math.sqrt(diff * plus)      # c parameter, real here
        mant, expo = hermite.normalized_hermite_table(n_max, -k * c_arg)
    else:
        c_tilde = L**3 / math.sqrt(-diff * plus)   # |c|, c imaginary here
        mant, expo = hermite.modified_hermite_table(n_max, k * c_tilde)

    with np.errstate(divide="ignore"):
        log_h = np.where(mant == 0.0, -np.inf, np.log(np.abs(mant))) + expo * math.log(2.0)
    logmag = log_pref + n * log_half_ratio + gauss[None, :] + log_h
    sign = np.sign(mant)
    sign = np.where(sign == 0.0, 1.0, sign)
    if regime == "wide":
        # A_n ~ (i)^n and H_n(i y) = i^n G_n combine to (-1)^n, all real
        sign = sign * np.where(np.arange(n_max + 1)[:, None] % 2 == 0, 1.0, -1.0)
    return logmag, sign


def f_n(
    packet: GaussianPacket,
    field: FieldConfig,
    n: int,
    k_x,
    method: str = "closed",
    quad_rtol: float = 1e-9,
):
    """Level amplitude F_n(k_x) = <n, k_x | f>.

    method 'closed' evaluates the analytic form (rejected in a narrow window
    around d_y = L where its auxiliary parameter diverges); 'quadrature'
    integrates the defining overlap and is always available.
    """
    k = np.atleast_1d(np.asarray(k_x, dtype=float))
    if method == "closed":
        logmag, sign = _f_closed_log(packet, field, n, k)
        vals = sign[n] * np.exp(logmag[n])
    elif method == "quadrature":
        vals = _f_quadrature(packet, field, n, k, rtol=quad_rtol)[n]
    else:
        raise ValueError("method must be 'closed' or 'quadrature'")
    if np.isscalar(k_x):
        return float(vals[0])
    return vals


def f_table(
    packet: GaussianPacket,
    field: FieldConfig,
    n_max: int,
    k_x: np.ndarray,
    method: str = "closed",
) -> np.ndarray:
    """F_n(k_x) for all n <= n_max; shape (n_max+1, K)."""
    k = np.asarray(k_x, dtype=float)
    if method == "closed":
        logmag, sign = _f_closed_log(packet, field, n_max, k)
        return sign * np.exp(logmag)
    if method == "quadrature":
        return _f_quadrature(packet, field, n_max, k)
    raise ValueError("method must be 'closed' or 'quadrature'")


def _f_quadrature(
    packet: GaussianPacket,
    field: FieldConfig,
    n_max: int,
    k_x: np.ndarray,
    start_order: int = 64,
    rtol: float = 1e-9,
) -> np.ndarray:
    """Overlap integral over the slice coordinate, order-doubling GH rule."""
    L = field.magnetic_length
    b = L * L / (2.0 * packet.d_y**2)
    pref = math.sqrt(L * packet.d_x / (math.pi * packet.d_y)) * np.exp(
        -0.5 * packet.d_x**2 * (k_x - packet.k0x) ** 2
    )

    def evaluate(order: int) -> np.ndarray:
        rule = hermite.gauss_hermite(order)
        # integrand centre sits at xi = -k_x L for every node
        xi = (-k_x * L)[:, None] + rule.nodes[None, :] / math.sqrt(b)
        table = hermite.psi_table(n_max, xi.ravel()).reshape(
            n_max + 1, k_x.size, order
        )
        return (table @ rule.weights) / math.sqrt(b) * pref[None, :]

    order = start_order
    prev = evaluate(order)
    while order < hermite.MAX_GH_ORDER:
        order = min(2 * order, hermite.MAX_GH_ORDER)
        cur = evaluate(order)
        scale = max(float(np.max(np.abs(cur))), 1e-300)
        if float(np.max(np.abs(cur - prev))) <= rtol * scale:
            return cur
        prev = cur
    warnings.warn(
        "level-amplitude quadrature hit the maximum order before the "
        "doubling test converged; returning the highest-order estimate",
        stacklevel=2,
    )
    return cur


@dataclass(frozen=True)
class CoefficientSet:
    """Level-overlap matrix with its quadrature nodes and truncation record."""

    n_max: int
    u: np.ndarray                 # (n_max+1, n_max+1), real symmetric
    f_nodes: np.ndarray           # F_n at the k_x quadrature nodes
    nodes: np.ndarray             # k_x quadrature nodes
    node_weights: np.ndarray      # transformed weights for dk_x integration
    tail_mass: float
    kx_order: int

    def diagonal_sum(self) -> float:
        return math.fsum(np.diagonal(self.u).tolist())

    def momentum_sum(self) -> float:
        """sum_n sqrt(n+1) U_{n+1,n}; equals -k0x L / sqrt(2)."""
        sub = np.diagonal(self.u, offset=-1)
        terms = [math.sqrt(n + 1.0) * sub[n] for n in range(sub.size)]
        return math.fsum(terms)


def coefficient_matrix(
    packet: GaussianPacket,
    field: FieldConfig,
    n_max: int | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
    kx_order: int | None = None,
) -> CoefficientSet:
    """Overlap matrix U over the quadrature of F_m F_n products.

    The k_x rule is exact for the closed-form amplitudes (Gaussian times
    polynomials), so the only truncation is the level cutoff; with n_max
    omitted the cutoff is placed where the running diagonal tail drops
    below 1e-12 (starting from the 400-level default).
    """
    auto = n_max is None
    n_build = DEFAULT_N_MAX if auto else n_max
    if n_build > hermite.N_CAP:
        raise hermite.CapacityError(
            f"n_max={n_build} exceeds the supported level cap {hermite.N_CAP}"
        )

    L = field.magnetic_length
    work_packet = packet
    if _width_regime(packet, L) == "window":
        warnings.warn(
            "d_y within the singular window around L; computing coefficients "
            "at d_y = L exactly",
            stacklevel=2,
        )
        work_packet = GaussianPacket(
            d_x=packet.d_x,
            d_y=L,
            d_z=packet.d_z,
            k0x=packet.k0x,
            k0z=packet.k0z,
            a1=packet.a1,
            a2=packet.a2,
            dimensionality=packet.dimensionality,
            relax_momentum_bound=True,
        )

    if kx_order is None:
        kx_order = 256 if n_build < 256 else hermite.MAX_GH_ORDER
    if kx_order < n_build + 1:
        raise ValueError(
            f"kx_order={kx_order} is below exactness ({n_build + 1}) for "
            f"n_max={n_build}"
        )

    d_sq = L**4 / (L * L + work_packet.d_y**2)
    alpha = math.sqrt(work_packet.d_x**2 + d_sq)
    centre = work_packet.d_x**2 * work_packet.k0x / alpha**2

    rule = hermite.gauss_hermite(kx_order)
    k_nodes = centre + rule.nodes / alpha
    # fused weights w_i e^{u_i^2}/alpha, stable via the node identity
    psi_prev = hermite.psi_table(kx_order - 1, rule.nodes)[kx_order - 1]
    log_wtilde = -math.log(kx_order) - 2.0 * np.log(np.abs(psi_prev)) - math.log(alpha)

    logmag, sign = _f_closed_log(work_packet, field, n_build, k_nodes)
    z = sign * np.exp(logmag + 0.5 * log_wtilde[None, :])
    u_full = z @ z.T

    if auto:
        diag = np.diagonal(u_full)
        running = np.cumsum(diag)
        captured = np.nonzero(running >= 1.0 - AUTO_TAIL)[0]
        cut = int(captured[0]) if captured.size else n_build
        cut = max(cut, 1)
    else:
        cut = n_build
    u = np.ascontiguousarray(u_full[: cut + 1, : cut + 1])
    tail = 1.0 - math.fsum(np.diagonal(u).tolist())
    if tail > tail_tol:
        raise TruncationError(
            f"level truncation at n_max={cut} leaves tail mass {tail:.3e} "
            f"(> {tail_tol:g}); increase n_max"
        )

    return CoefficientSet(
        n_max=cut,
        u=u,
        f_nodes=sign[: cut + 1] * np.exp(logmag[: cut + 1]),
        nodes=k_nodes,
        node_weights=np.exp(log_wtilde),
        tail_mass=tail,
        kx_order=kx_order,
    )


def axial_nodes(packet: GaussianPacket, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes/weights for integrals against |g_z|^2 dk_z."""
    if packet.dimensionality != "3+1":
        raise DimensionalityError("axial nodes require a 3+1 packet")
    rule = hermite.gauss_hermite(order)
    return packet.k0z + rule.nodes / packet.d_z, rule.weights / math.sqrt(math.pi)


def axial_grid(packet: GaussianPacket, points: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform trapezoid rule against |g_z|^2, for highly oscillatory windows."""
    if packet.dimensionality != "3+1":
        raise DimensionalityError("axial nodes require a 3+1 packet")
    span = 8.5 / packet.d_z
    k = np.linspace(packet.k0z - span, packet.k0z + span, points)
    density = math.sqrt(packet.d_z**2 / math.pi) * np.exp(
        -packet.d_z**2 * (k - packet.k0z) ** 2
    )
    w = np.full(points, k[1] - k[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return k, density * w


@dataclass(frozen=True)
class SumRuleReport:
    norm_sum: float
    norm_residual: float
    momentum_sum: float
    momentum_expected: float
    momentum_residual: float
    tail_mass: float


def sum_rules(
    coeffs: CoefficientSet, packet: GaussianPacket, field: FieldConfig
) -> SumRuleReport:
    """Check sum_n U_nn = 1 and sum_n sqrt(n+1) U_{n+1,n} = -k0x L / sqrt(2)."""
    norm = coeffs.diagonal_sum()
    mom = coeffs.momentum_sum()
    expected = -packet.k0x * field.magnetic_length / math.sqrt(2.0)
    return SumRuleReport(
        norm_sum=norm,
        norm_residual=abs(norm - 1.0),
        momentum_sum=mom,
        momentum_expected=expected,
        momentum_residual=abs(mom - expected),
        tail_mass=coeffs.tail_mass,
    )


def u_closed_equal_width(
    packet: GaussianPacket, field: FieldConfig, m: int, n: int
) -> float:
    """Closed-form U_{m,n} for d_y = L (cross-check path)."""
    L = field.magnetic_length
    if abs(packet.d_y - L) / L > EQUAL_WIDTH_WINDOW:
        raise ClosedFormUnavailable("equal-width closed form needs d_y = L")
    dx, k0x = packet.d_x, packet.k0x
    p_sq = dx * dx + 0.5 * L * L
    p = math.sqrt(p_sq)
    w = dx * dx * k0x / p
    # H_{m+n}(-i w) (-i)^{m+n} = (-1)^{m+n} G_{m+n}(w)
    mant, expo = hermite.modified_hermite_table(m + n if m + n else 1, np.array([w]))
    log_g_over_c = (
        math.log(abs(mant[m + n, 0])) + expo[m + n, 0] * math.log(2.0)
        if mant[m + n, 0] != 0.0
        else -math.inf
    )
    # rescale by C_{m+n}/(C_m C_n) in logs
    log_c = (
        hermite.log_norm_constant(m + n)
        - hermite.log_norm_constant(m)
        - hermite.log_norm_constant(n)
    )
    logmag = (
        math.log(2.0 * math.sqrt(math.pi) * dx / L)
        + (m + n + 1) * math.log(L / (2.0 * p))
        - dx * dx * k0x * k0x * L * L / (2.0 * p_sq)
        + log_g_over_c
        + log_c
    )
    sign = (-1.0) ** (m + n) * math.copysign(1.0, mant[m + n, 0]) if mant[m + n, 0] else 1.0
    return sign * math.exp(logmag)


def u_closed_general(
    packet: GaussianPacket, field: FieldConfig, m: int, n: int
) -> float:
    """General closed-form U_{m,n} via the finite binomial sum.

    The scaled Hermite kernel s^{D/2} H_D(x/sqrt(s)) is expanded as a
    polynomial in s and x, which removes every square-root branch; the
    auxiliary parameters then enter only through their squares, real in all
    width regimes.  Alternating and unstable as m+n grows; a small-index
    cross-check of the quadrature path, not a production assembly route.
    """
    L = field.magnetic_length
    regime = _width_regime(packet, L)
    if regime in ("equal", "window"):
        raise ClosedFormUnavailable("general closed form needs d_y away from L")
    dx, dy, k0x = packet.d_x, packet.d_y, packet.k0x
    diff = (L - dy) * (L + dy)          # L^2 - d_y^2
    plus = L * L + dy * dy
    d_sq = L**4 / plus                  # D^2
    q_sq = 1.0 / (dx * dx + d_sq)       # Q^2
    w_par = dx * math.sqrt(d_sq * q_sq) * k0x
    y_par = dx * dx * k0x * math.sqrt(q_sq)
    inv_c_sq = diff * plus / L**6       # 1/c^2, signed
    s = 1.0 - q_sq / inv_c_sq           # 1 - (cQ)^2, real in all regimes
    qy_sq = q_sq * y_par * y_par        # (QY)^2

    qy = math.sqrt(qy_sq) * math.copysign(1.0, y_par) if y_par else 0.0
    terms: list[float] = []
    for l in range(min(m, n) + 1):
        # 2^l l! C(m,l) C(n,l) in logs
        log_l = (
            l * math.log(2.0)
            - math.lgamma(l + 1)
            + math.lgamma(m + 1)
            - math.lgamma(m - l + 1)
            + math.lgamma(n + 1)
            - math.lgamma(n - l + 1)
        )
        deg = m + n - 2 * l
        for j in range(deg // 2 + 1):
            p = deg - 2 * j             # power of the (-2QY) factor
            if p and qy == 0.0:
                continue
            log_j = (
                math.lgamma(deg + 1)
                - math.lgamma(j + 1)
                - math.lgamma(p + 1)
                + p * (math.log(2.0) + (math.log(abs(qy)) if p else 0.0))
                + (l + j) * math.log(abs(inv_c_sq))
                + (j * math.log(abs(s)) if j else 0.0)
            )
            sign = (
                (-1.0) ** j
                * (-math.copysign(1.0, qy)) ** p
                * math.copysign(1.0, inv_c_sq) ** (l + j)
                * (math.copysign(1.0, s) ** j)
            )
            terms.append(sign * math.exp(log_l + log_j))
    total = math.fsum(terms)

    log_amp = (
        math.log(2.0 * math.pi) + 2.0 * math.log(dy) - math.log(plus)
        + (m + n) * (3.0 * math.log(L) - math.log(plus))
    )
    log_pref = (
        math.log(L * dx)
        + 0.5 * math.log(q_sq)
        + 0.5 * math.log(math.pi)
        - w_par * w_par
        - math.log(math.pi * dy)
        - hermite.log_norm_constant(m)
        - hermite.log_norm_constant(n)
    )
    return math.exp(log_pref + log_amp) * total
