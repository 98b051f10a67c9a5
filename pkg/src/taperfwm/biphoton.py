"""Joint spectral amplitude of photon pairs from pulsed four-wave mixing.

Two pump photons at ``omega_p`` convert into a signal/idler pair subject to
energy conservation ``omega_s + omega_i = 2 omega_p``.  The pair amplitude on
a (signal, idler) frequency grid factors into a pump envelope (the spectral
autoconvolution of the pulse) and a phase-matching sum over taper segments,
each weighted by the four-mode transverse overlap of that segment.  This
module assembles those pieces from the mode solver in :mod:`.dispersion` and
provides the derived analyses: marginal spectra, Schmidt decomposition, and
the zero-mismatch (phase-matched) signal/idler pair of a given cross-section.

Conventions: angular frequencies in rad/s, lengths in meters.  Matrices are
indexed ``[signal, idler]``.  Tapers that are multimode at their wide ends
are still traced with the requested (default fundamental) modes only.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.constants import c as C_VAC
from scipy.integrate import trapezoid
from scipy.interpolate import PchipInterpolator  # noqa: F401  (re-exported type hints)
from scipy.optimize import brentq

from . import __version__
from .dispersion import (
    HE11,
    CrossSection,
    ModeLabel,
    NeffTable,
    NoGuidedModeError,
    _lp_order,
    batch_field_matrix,
    neff_table,
    solve_mode,
)
from .profile import SegmentedProfile

__all__ = [
    "PumpSpec",
    "SpectralGrid",
    "JsaGrid",
    "ModeQuartet",
    "ALL_HE11",
    "ModeBank",
    "GridCoverageWarning",
    "overlap_integral",
    "delta_k",
    "phase_matching",
    "pump_function",
    "jsa",
    "schmidt_analysis",
    "marginals",
    "phase_matched_pair",
    "write_matrix_csv",
    "write_marginals_csv",
    "write_jsa_json",
]

_LN2 = float(np.log(2.0))


class GridCoverageWarning(UserWarning):
    """The spectral grid clips a non-negligible part of the pump energy band."""


@dataclass(frozen=True)
class PumpSpec:
    """Pulsed Gaussian pump: spectral amplitude exp(-(w - w0)^2 / (2 sigma^2)).

    ``sigma`` is the standard deviation of the *amplitude* spectrum in rad/s;
    the intensity spectrum then has FWHM ``2 sigma sqrt(ln 2)`` in angular
    frequency.  ``pulse_duration`` is the intensity FWHM in time and is only
    tied to ``sigma`` when the pulse is flagged transform-limited
    (``tau = 2 sqrt(ln 2) / sigma``); otherwise the pulse is chirped and the
    two are independent.  Spectral phase is not modeled.
    """

    wavelength: float  # central vacuum wavelength, m
    sigma: float  # amplitude-spectrum std dev, rad/s
    pulse_duration: float  # intensity FWHM, s
    rep_rate: float  # Hz
    avg_power: float  # W
    transform_limited: bool = False

    def __post_init__(self):
        for name in ("wavelength", "sigma", "pulse_duration", "rep_rate", "avg_power"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.transform_limited:
            tau = 2.0 * np.sqrt(_LN2) / self.sigma
            if abs(self.pulse_duration - tau) > 1e-6 * tau:
                raise ValueError(
                    f"transform-limited pulse requires duration {tau:.6e} s for "
                    f"sigma={self.sigma:.6e} rad/s, got {self.pulse_duration:.6e} s"
                )

    @classmethod
    def from_spectral_fwhm(
        cls,
        wavelength: float,
        fwhm_wavelength: float,
        pulse_duration: float,
        rep_rate: float,
        avg_power: float,
        transform_limited: bool = False,
    ) -> "PumpSpec":
        """Build from the intensity-spectrum FWHM expressed in wavelength.

        A wavelength FWHM ``dl`` at center ``l0`` maps to an angular-frequency
        FWHM ``2 pi c dl / l0^2``, hence ``sigma = pi c dl / (l0^2 sqrt(ln2))``.
        """
        if not fwhm_wavelength > 0:
            raise ValueError("fwhm_wavelength must be positive")
        sigma = np.pi * C_VAC * fwhm_wavelength / (wavelength**2 * np.sqrt(_LN2))
        return cls(wavelength, float(sigma), pulse_duration, rep_rate, avg_power, transform_limited)

    @property
    def omega0(self) -> float:
        """Central angular frequency 2 pi c / wavelength."""
        return 2.0 * np.pi * C_VAC / self.wavelength

    @property
    def pulse_energy(self) -> float:
        return self.avg_power / self.rep_rate


@dataclass(frozen=True)
class SpectralGrid:
    """Rectangular (signal x idler) angular-frequency grid, uniform or not.

    Axes must be strictly increasing with at least two samples each.
    """

    signal_omega: np.ndarray
    idler_omega: np.ndarray

    def __post_init__(self):
        for name in ("signal_omega", "idler_omega"):
            axis = np.asarray(getattr(self, name), dtype=float)
            if axis.ndim != 1 or axis.size < 2:
                raise ValueError(f"{name} must be a 1-D axis with at least two samples")
            if not np.all(np.isfinite(axis)) or axis[0] <= 0:
                raise ValueError(f"{name} must be finite and positive")
            if np.any(np.diff(axis) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, axis)

    @classmethod
    def from_wavelength_windows(
        cls,
        signal: tuple[float, float],
        idler: tuple[float, float],
        n_signal: int = 256,
        n_idler: Optional[int] = None,
    ) -> "SpectralGrid":
        """Uniform-in-omega axes over vacuum-wavelength windows (meters).

        Window endpoints map through ``omega = 2 pi c / lambda`` exactly; the
        grid is uniform in angular frequency, not in wavelength.
        """
        if n_idler is None:
            n_idler = n_signal
        axes = []
        for (lo, hi), n in ((signal, n_signal), (idler, n_idler)):
            if not 0 < lo < hi:
                raise ValueError("wavelength window must satisfy 0 < min < max")
            if n < 2:
                raise ValueError("grid axes need at least two samples")
            axes.append(np.linspace(2.0 * np.pi * C_VAC / hi, 2.0 * np.pi * C_VAC / lo, n))
        return cls(axes[0], axes[1])

    @property
    def n_signal(self) -> int:
        return self.signal_omega.size

    @property
    def n_idler(self) -> int:
        return self.idler_omega.size

    @property
    def signal_wavelength(self) -> np.ndarray:
        """Vacuum wavelengths of the signal axis (descending, meters)."""
        return 2.0 * np.pi * C_VAC / self.signal_omega

    @property
    def idler_wavelength(self) -> np.ndarray:
        return 2.0 * np.pi * C_VAC / self.idler_omega


@dataclass(frozen=True)
class ModeQuartet:
    """Mode assignment for the four interacting waves (both pump photons share one label)."""

    pump: ModeLabel = HE11
    signal: ModeLabel = HE11
    idler: ModeLabel = HE11


ALL_HE11 = ModeQuartet()


@dataclass(frozen=True)
class JsaGrid:
    """Joint spectral amplitude F on a SpectralGrid, plus provenance metadata.

    ``amplitude[i, j]`` is F at (signal_omega[i], idler_omega[j]) in the raw
    (unnormalized) scale of the pump-envelope x phase-matching product; the
    exporters normalize the peak to 1 and record ``raw_peak_amplitude`` from
    the metadata so the scale stays recoverable.
    """

    grid: SpectralGrid
    amplitude: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=complex)
        if amp.shape != (self.grid.n_signal, self.grid.n_idler):
            raise ValueError(
                f"amplitude shape {amp.shape} does not match grid "
                f"({self.grid.n_signal}, {self.grid.n_idler})"
            )
        if not np.all(np.isfinite(amp)):
            raise ValueError("amplitude must be finite everywhere")
        object.__setattr__(self, "amplitude", amp)

    @property
    def intensity(self) -> np.ndarray:
        """Joint spectral intensity |F|^2 (raw scale)."""
        return np.abs(self.amplitude) ** 2


class ModeBank:
    """Lazy cache of effective-index tables over one frequency interval.

    One table is built per (cross-section, mode label) pair on first use and
    reused for every query; all tables share the same angular-frequency
    span, so a bank built for a grid serves every segment of a taper.
    """

    def __init__(self, omega_lo: float, omega_hi: float, *, nodes: int = 48, refine: int = 16):
        if not 0 < omega_lo < omega_hi:
            raise ValueError("need 0 < omega_lo < omega_hi")
        if nodes < 2:
            raise ValueError("need at least two table nodes")
        self._grid = np.linspace(omega_lo, omega_hi, nodes)
        self._refine = refine
        self._tables: dict[tuple[CrossSection, ModeLabel], NeffTable] = {}

    @property
    def omega_range(self) -> tuple[float, float]:
        return float(self._grid[0]), float(self._grid[-1])

    def table(self, cross_section: CrossSection, label: ModeLabel = HE11) -> NeffTable:
        key = (cross_section, label)
        if key not in self._tables:
            self._tables[key] = neff_table(
                cross_section, self._grid, label, refine=self._refine
            )
        return self._tables[key]

    def k(self, cross_section: CrossSection, omega, label: ModeLabel = HE11):
        return self.table(cross_section, label).k(omega)


def delta_k(
    cross_section: CrossSection,
    omega_p: float,
    omega_s,
    omega_i,
    tables: Optional[ModeBank] = None,
    *,
    modes: ModeQuartet = ALL_HE11,
):
    """Wave-vector mismatch k(w_p) + k(w_s + w_i - w_p) - k(w_s) - k(w_i) [rad/m].

    The second pump photon is taken at the returned frequency
    ``w_s + w_i - w_p`` in the pump's mode.  Symmetric under swapping
    ``omega_s`` and ``omega_i``; exactly zero at full degeneracy with equal
    mode labels.  ``omega_s``/``omega_i`` broadcast; without ``tables`` each
    distinct frequency is solved directly (slow but exact), with ``tables``
    the bank's interpolants are used.

    Raises NoGuidedModeError if any involved frequency is below cutoff.
    """
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    omega_r = omega_s + omega_i - omega_p
    if np.any(omega_r <= 0):
        raise ValueError("returned pump frequency omega_s + omega_i - omega_p must be positive")

    if tables is not None:
        k = lambda om, lab: tables.table(cross_section, lab).k(om)  # noqa: E731
    else:
        cache: dict[tuple[float, ModeLabel], float] = {}

        def k(om, lab):
            om_arr = np.asarray(om, dtype=float)
            out = np.empty(om_arr.shape)
            for idx in np.ndindex(om_arr.shape):
                key = (float(om_arr[idx]), lab)
                if key not in cache:
                    cache[key] = solve_mode(cross_section, key[0], lab).beta
                out[idx] = cache[key]
            return out if om_arr.shape else float(out)

    mismatch = (
        k(omega_p, modes.pump)
        + k(omega_r, modes.pump)
        - k(omega_s, modes.signal)
        - k(omega_i, modes.idler)
    )
    return float(mismatch) if np.ndim(mismatch) == 0 else mismatch


# --------------------------------------------------------------------------
# four-mode overlap
# --------------------------------------------------------------------------

_QUAD_ORDER = 96
_QUAD_TAIL = 45.0  # outer integration reaches exp(-_QUAD_TAIL) of the joint decay


def _quad_nodes(a: float, w_total: float):
    """Gauss-Legendre nodes and d^2rho weights (2 pi r dr) for a field product.

    The integrand is analytic on [0, a] and decays like
    ``exp(-w_total (r - a) / a)`` outside, so two fixed-order panels (one per
    region, the outer one mapped onto that decay scale) converge far below
    the 1e-6 tolerances used in tests.
    """
    x, wt = leggauss(_QUAD_ORDER)
    r_in = 0.5 * a * (x + 1.0)
    wt_in = 0.5 * a * wt
    s = 0.5 * _QUAD_TAIL * (x + 1.0)
    r_out = a * (1.0 + s / w_total)
    wt_out = 0.5 * _QUAD_TAIL * wt * a / w_total
    r = np.concatenate([r_in, r_out])
    weights = np.concatenate([wt_in, wt_out]) * 2.0 * np.pi * r
    return r, weights


def overlap_integral(mode_p, mode_p2, mode_s, mode_i) -> float:
    """Four-mode transverse overlap eta = int u_p u_p' u_s* u_i* d^2rho [m^-2].

    All four modes must live on the same cross-section.  The quasi-LP
    profiles used here are real, so conjugation is a no-op; for co-polarized
    fundamental-mode quartets the result is positive.  Any object with
    ``cross_section``, ``field_at(r)`` and (optionally) a decay parameter
    ``w`` works, which the tests use to pass analytic profiles.
    """
    quartet = (mode_p, mode_p2, mode_s, mode_i)
    cs = mode_p.cross_section
    for m in quartet[1:]:
        if m.cross_section != cs:
            raise ValueError("mismatched cross-sections: all four modes must share one segment")
    w_total = sum(float(getattr(m, "w", 2.0)) for m in quartet)
    r, weights = _quad_nodes(cs.diameter / 2.0, w_total)
    prod = np.ones_like(r)
    for m in quartet:
        prod = prod * np.asarray(m.field_at(r), dtype=float)
    return float(np.sum(weights * prod))


def _w_param(cross_section: CrossSection, omega, n_eff):
    """Cladding decay parameter w = a k0 sqrt(n_eff^2 - n2^2)."""
    lam = 2.0 * np.pi * C_VAC / np.asarray(omega, dtype=float)
    n2 = np.asarray(cross_section.cladding_index(lam), dtype=float)
    return (cross_section.diameter / 2.0) * np.asarray(omega) / C_VAC * np.sqrt(
        np.asarray(n_eff) ** 2 - n2**2
    )


def _eta_factory(cross_section, omega_p, modes, bank):
    """Return eta(ws_array, wi_array) -> matrix for one cross-section.

    Both pump factors are evaluated at the central pump frequency; the
    returned-frequency detuning stays within the pump bandwidth wherever the
    pair amplitude is non-negligible, so its effect on the overlap is far
    below the quadrature tolerance.
    """
    tab_p = bank.table(cross_section, modes.pump)
    tab_s = bank.table(cross_section, modes.signal)
    tab_i = bank.table(cross_section, modes.idler)
    n_p = float(tab_p(omega_p))
    lo, hi = bank.omega_range
    mid = 0.5 * (lo + hi)
    w_total = float(
        2.0 * _w_param(cross_section, omega_p, n_p)
        + _w_param(cross_section, mid, tab_s(mid))
        + _w_param(cross_section, mid, tab_i(mid))
    )
    r, weights = _quad_nodes(cross_section.diameter / 2.0, w_total)
    u_p = batch_field_matrix(
        cross_section, np.array([omega_p]), np.array([n_p]), _lp_order(modes.pump), r
    )[0]
    pump_weight = weights * u_p**2

    def eta(ws, wi):
        u_s = batch_field_matrix(cross_section, ws, tab_s(ws), _lp_order(modes.signal), r)
        u_i = batch_field_matrix(cross_section, wi, tab_i(wi), _lp_order(modes.idler), r)
        return u_s @ (pump_weight[None, :] * u_i).T

    return eta


# --------------------------------------------------------------------------
# phase matching and the assembled JSA
# --------------------------------------------------------------------------


def _auto_bank(grid: SpectralGrid, omega_p: float) -> ModeBank:
    ws, wi = grid.signal_omega, grid.idler_omega
    candidates = [
        ws[0],
        ws[-1],
        wi[0],
        wi[-1],
        omega_p,
        ws[0] + wi[0] - omega_p,
        ws[-1] + wi[-1] - omega_p,
    ]
    return ModeBank(min(candidates), max(candidates))


def _phase_matching_info(segmented, grid, omega_p, modes, eta_mode, bank):
    if eta_mode not in ("per_point", "center"):
        raise ValueError(f"eta_mode must be 'per_point' or 'center', got {eta_mode!r}")
    ws, wi = grid.signal_omega, grid.idler_omega
    omega_r = ws[:, None] + wi[None, :] - omega_p
    if np.any(omega_r <= 0):
        raise ValueError("grid reaches non-positive returned pump frequencies")
    if bank is None:
        bank = _auto_bank(grid, omega_p)

    length = segmented.segment_length
    total = np.zeros((ws.size, wi.size), dtype=complex)
    suffix = np.ones_like(total)  # exp(i * sum of later segments' dk * l)
    cache: dict[CrossSection, tuple[np.ndarray, np.ndarray]] = {}
    eta_bound = 0.0

    # Sum the segment terms from the output end backwards so the running
    # suffix phase needs one complex multiply per segment.
    for q in reversed(range(segmented.n_segments)):
        cs = segmented.segments[q]
        if cs not in cache:
            try:
                tab_p = bank.table(cs, modes.pump)
                k_p = float(tab_p.k(omega_p))
                k_r = tab_p.k(omega_r)
                k_s = bank.table(cs, modes.signal).k(ws)
                k_i = bank.table(cs, modes.idler).k(wi)
                eta_fn = _eta_factory(cs, omega_p, modes, bank)
                if eta_mode == "per_point":
                    eta = eta_fn(ws, wi)
                else:
                    ends_s = np.array([0.5 * (ws[0] + ws[-1]), ws[0], ws[-1]])
                    ends_i = np.array([0.5 * (wi[0] + wi[-1]), wi[0], wi[-1]])
                    probe = eta_fn(ends_s, ends_i)
                    eta = probe[0, 0]
                    eta_bound = max(
                        eta_bound, float(np.max(np.abs(probe[1:, 1:] / probe[0, 0] - 1.0)))
                    )
            except NoGuidedModeError as err:
                raise NoGuidedModeError(
                    f"segment {q} (diameter {cs.diameter*1e9:.1f} nm): {err}"
                ) from err
            dk = k_p + k_r - k_s[:, None] - k_i[None, :]
            half = 0.5 * dk * length
            base = length * np.sinc(half / np.pi) * np.exp(1j * half) * eta
            cache[cs] = (base, np.exp(2j * half))
        base, step = cache[cs]
        total += base * suffix
        suffix = suffix * step

    info = {
        "eta_mode": eta_mode,
        "eta_center_relative_error_bound": eta_bound if eta_mode == "center" else None,
        "bank": bank,
    }
    return total, info


def phase_matching(
    segmented: SegmentedProfile,
    grid: SpectralGrid,
    omega_p: float,
    modes: ModeQuartet = ALL_HE11,
    *,
    eta_mode: str = "per_point",
    tables: Optional[ModeBank] = None,
) -> np.ndarray:
    """Segmented phase-matching sum over the taper, as a complex matrix.

    Each segment of length l contributes
    ``l sinc(dk l / 2) exp(i dk l / 2) eta`` times the accumulated phase
    ``exp(i sum_later dk l)`` of the segments between it and the output, with
    ``sinc(x) = sin(x)/x``.  ``eta_mode='per_point'`` (default) evaluates the
    four-mode overlap at every grid point; ``'center'`` uses the grid-center
    value per segment (cheaper; corner-sampled error bound available through
    :func:`jsa` metadata).

    Raises NoGuidedModeError naming the offending segment and frequencies if
    any grid frequency is below cutoff somewhere along the taper.
    """
    total, _ = _phase_matching_info(segmented, grid, omega_p, modes, eta_mode, tables)
    return total


def pump_function(pump: PumpSpec, grid: SpectralGrid, *, method: str = "analytic") -> np.ndarray:
    """Pump spectral autoconvolution on the grid (complex matrix).

    For a unit-amplitude Gaussian pump spectrum the convolution
    ``int E(w) E(ws + wi - w) dw`` has the closed form
    ``sigma sqrt(pi) exp(-(ws + wi - 2 w0)^2 / (4 sigma^2))`` used by
    ``method='analytic'``; ``method='quadrature'`` integrates the product
    numerically (to cross-check the closed form) and agrees to better than
    1e-6 relative.  Warns :class:`GridCoverageWarning` when the energy band
    is clipped: the band runs along the anti-diagonal, so the corner sums
    ``ws_min + wi_min`` and ``ws_max + wi_max`` must lie in its far tails.
    """
    ws, wi = grid.signal_omega, grid.idler_omega
    w0, sigma = pump.omega0, pump.sigma
    peak = sigma * np.sqrt(np.pi)
    for corner in (ws[0] + wi[0], ws[-1] + wi[-1]):
        if np.exp(-((corner - 2.0 * w0) ** 2) / (4.0 * sigma**2)) >= 1e-6:
            warnings.warn(
                "grid clips the pump energy band: boundary value exceeds 1e-6 of peak",
                GridCoverageWarning,
                stacklevel=2,
            )
            break

    total = ws[:, None] + wi[None, :]
    if method == "analytic":
        vals = peak * np.exp(-((total - 2.0 * w0) ** 2) / (4.0 * sigma**2))
    elif method == "quadrature":
        # The integrand is a Gaussian of width sigma/sqrt(2) centered at
        # omega = (ws + wi)/2, so the window must track that center or the
        # far-detuned cells lose all relative accuracy.
        t = np.linspace(-15.0, 15.0, 4097)
        flat = total.ravel()
        vals = np.empty(flat.size)
        for start in range(0, flat.size, 2048):
            block = flat[start : start + 2048, None]
            om = 0.5 * block + t[None, :] * sigma
            integrand = np.exp(
                -((om - w0) ** 2 + (block - om - w0) ** 2) / (2.0 * sigma**2)
            )
            vals[start : start + 2048] = trapezoid(integrand, dx=float(t[1] - t[0]) * sigma, axis=1)
        vals = vals.reshape(total.shape)
    else:
        raise ValueError(f"method must be 'analytic' or 'quadrature', got {method!r}")
    return vals.astype(complex)


def jsa(
    segmented: SegmentedProfile,
    pump: PumpSpec,
    grid: SpectralGrid,
    modes: ModeQuartet = ALL_HE11,
    *,
    eta_mode: str = "per_point",
    tables: Optional[ModeBank] = None,
) -> JsaGrid:
    """Assemble the joint spectral amplitude (pump envelope x phase matching).

    Returns a :class:`JsaGrid` holding the raw-scale amplitude and a
    metadata block (pump parameters, profile hash, segmentation, mode
    labels, overlap-evaluation mode, raw peak, software version) consumed by
    the exporters.
    """
    envelope = pump_function(pump, grid)
    matched, info = _phase_matching_info(segmented, grid, pump.omega0, modes, eta_mode, tables)
    amplitude = envelope * matched
    raw_peak = float(np.max(np.abs(amplitude)))
    metadata = {
        "pump": {
            "wavelength_m": pump.wavelength,
            "sigma_rad_s": pump.sigma,
            "pulse_duration_s": pump.pulse_duration,
            "rep_rate_hz": pump.rep_rate,
            "avg_power_w": pump.avg_power,
            "transform_limited": pump.transform_limited,
        },
        "profile": {
            "label": segmented.label,
            "content_hash": segmented.content_hash(),
            "n_segments": segmented.n_segments,
            "segment_length_m": segmented.segment_length,
        },
        "modes": {
            "pump": str(modes.pump),
            "signal": str(modes.signal),
            "idler": str(modes.idler),
        },
        "eta_mode": info["eta_mode"],
        "eta_center_relative_error_bound": info["eta_center_relative_error_bound"],
        "raw_peak_amplitude": raw_peak,
        "grid": {
            "n_signal": grid.n_signal,
            "n_idler": grid.n_idler,
            "signal_omega_min": float(grid.signal_omega[0]),
            "signal_omega_max": float(grid.signal_omega[-1]),
            "idler_omega_min": float(grid.idler_omega[0]),
            "idler_omega_max": float(grid.idler_omega[-1]),
        },
        "tolerances": {"neff_table_midpoint_abs": 5e-9},
        "version": __version__,
    }
    return JsaGrid(grid, amplitude, metadata)


# --------------------------------------------------------------------------
# derived analyses
# --------------------------------------------------------------------------


def _amplitude_of(jsa_like) -> np.ndarray:
    amp = jsa_like.amplitude if isinstance(jsa_like, JsaGrid) else jsa_like
    return np.asarray(amp, dtype=complex)


def schmidt_analysis(jsa_like) -> dict:
    """Schmidt decomposition of the (discretized) joint spectral amplitude.

    Singular values of the amplitude matrix give the Schmidt coefficients
    ``lambda_j = s_j^2 / sum s^2`` (descending, unit sum); the Schmidt number
    ``K = 1 / sum lambda_j^2`` and heralded purity ``1/K`` follow.  Accepts a
    JsaGrid or a bare matrix; on uniform axes the discretization measure is
    a constant that cancels in the normalization.
    """
    amp = _amplitude_of(jsa_like)
    if not np.all(np.isfinite(amp)):
        raise ValueError("amplitude must be finite")
    s = np.linalg.svd(amp, compute_uv=False)
    total = float(np.sum(s**2))
    if total == 0.0:
        raise ValueError("cannot decompose an identically zero amplitude")
    coefficients = s**2 / total
    schmidt_number = 1.0 / float(np.sum(coefficients**2))
    return {
        "schmidt_coefficients": coefficients,
        "schmidt_number": schmidt_number,
        "heralded_purity": 1.0 / schmidt_number,
    }


def marginals(jsa_like) -> tuple[np.ndarray, np.ndarray]:
    """Signal and idler marginal spectra of the JSI, each normalized to unit sum."""
    intensity = np.abs(_amplitude_of(jsa_like)) ** 2
    total = float(intensity.sum())
    if total == 0.0:
        raise ValueError("cannot form marginals of an identically zero intensity")
    return intensity.sum(axis=1) / total, intensity.sum(axis=0) / total


def phase_matched_pair(
    cross_section: CrossSection,
    omega_p: float,
    signal_window: tuple[float, float],
    *,
    modes: ModeQuartet = ALL_HE11,
    tables: Optional[ModeBank] = None,
) -> tuple[float, float]:
    """Zero-mismatch signal/idler pair on the energy-conservation line.

    Finds ``omega_s`` in ``signal_window`` (rad/s) with
    ``delta_k(omega_s, 2 omega_p - omega_s) = 0`` by bracketing bisection and
    returns ``(omega_s, omega_i)``.  Raises ValueError when the mismatch does
    not change sign across the window (no crossing for this geometry).
    """
    lo, hi = float(signal_window[0]), float(signal_window[1])
    if not 0 < lo < hi:
        raise ValueError("signal_window must satisfy 0 < min < max")
    if tables is None:
        span = [lo, hi, 2.0 * omega_p - hi, 2.0 * omega_p - lo, omega_p]
        tables = ModeBank(min(span), max(span))

    def mismatch(w):
        return delta_k(cross_section, omega_p, w, 2.0 * omega_p - w, tables, modes=modes)

    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise ValueError(
            "phase mismatch does not change sign across the signal window; "
            "no phase-matched pair for this geometry"
        )
    omega_s = brentq(mismatch, lo, hi, xtol=1e3)
    return float(omega_s), float(2.0 * omega_p - omega_s)


# --------------------------------------------------------------------------
# exports (formats documented in docs/formats.md)
# --------------------------------------------------------------------------


def _format_float(x: float) -> str:
    return repr(float(x))


def write_matrix_csv(path, grid: SpectralGrid, matrix: np.ndarray, *, name: str, comments=()):
    """Write one grid-shaped matrix as CSV with axis header rows.

    Layout: '#' comment lines, then a header row of idler angular
    frequencies (first cell empty), then one row per signal frequency with
    the axis value in column 0.  Floats are written with shortest
    round-trip precision, so outputs are byte-stable for identical inputs.
    """
    matrix = np.asarray(matrix)
    if matrix.shape != (grid.n_signal, grid.n_idler):
        raise ValueError("matrix shape does not match grid")
    lines = [f"# {name}"]
    lines += [f"# {c}" for c in comments]
    lines.append("# rows: signal_omega_rad_s; columns: idler_omega_rad_s")
    lines.append("," + ",".join(_format_float(v) for v in grid.idler_omega))
    for i, ws in enumerate(grid.signal_omega):
        row = ",".join(_format_float(v) for v in matrix[i])
        lines.append(f"{_format_float(ws)},{row}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_marginals_csv(jsa_grid: JsaGrid, path):
    """Write both unit-sum marginal spectra as a two-block CSV."""
    sig, idl = marginals(jsa_grid)
    lines = ["# marginal spectra (unit sum)", "axis,omega_rad_s,weight"]
    for om, v in zip(jsa_grid.grid.signal_omega, sig):
        lines.append(f"signal,{_format_float(om)},{_format_float(v)}")
    for om, v in zip(jsa_grid.grid.idler_omega, idl):
        lines.append(f"idler,{_format_float(om)},{_format_float(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_jsa_json(jsa_grid: JsaGrid, path):
    """Write the peak-normalized amplitude plus full metadata as JSON.

    The raw scale is recoverable from metadata['raw_peak_amplitude'].  Keys
    are sorted and separators fixed, so identical inputs produce
    byte-identical files.
    """
    raw_peak = float(np.max(np.abs(jsa_grid.amplitude)))
    if raw_peak == 0.0:
        raise ValueError("refusing to export an identically zero amplitude")
    norm = jsa_grid.amplitude / raw_peak
    payload = {
        "schema": "taperfwm.jsa/1",
        "signal_omega": [float(v) for v in jsa_grid.grid.signal_omega],
        "idler_omega": [float(v) for v in jsa_grid.grid.idler_omega],
        "amplitude_real": norm.real.tolist(),
        "amplitude_imag": norm.imag.tolist(),
        "metadata": jsa_grid.metadata,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")
