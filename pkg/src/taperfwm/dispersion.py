"""Material dispersion and guided modes of a circular step-index waveguide.

The waist of a tapered fiber is modelled as a silica cylinder surrounded by
air.  This module provides the Sellmeier material model, a full-vector mode
solver for the HE/EH/TE/TM families (Bessel J core, modified Bessel K
cladding), normalized transverse field profiles, and tabulated ``n_eff(omega)``
with monotone cubic interpolation for fast downstream evaluation.

Effective indices are found by bracketing sign changes of a pole-free form of
the characteristic equation on a uniform ``n_eff`` scan and refining by
bisection, which converges even arbitrarily close to cutoff.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np
from scipy.constants import c as C_VAC
from scipy.integrate import simpson
from scipy.interpolate import PchipInterpolator
from scipy.special import jv, jvp, kve

__all__ = [
    "DispersionError",
    "WavelengthRangeError",
    "NoGuidedModeError",
    "SolverConvergenceError",
    "ExtrapolationError",
    "SellmeierGlass",
    "FUSED_SILICA",
    "CrossSection",
    "ModeLabel",
    "HE11",
    "ModeSolution",
    "NeffTable",
    "refractive_index",
    "solve_mode",
    "neff_table",
    "load_glass",
    "parse_glass",
]


class DispersionError(Exception):
    """Base class for errors raised by this module."""


class WavelengthRangeError(DispersionError, ValueError):
    """Wavelength outside the validity interval of a glass model."""


class NoGuidedModeError(DispersionError, ValueError):
    """The requested mode is below cutoff (no root of the characteristic equation)."""


class SolverConvergenceError(DispersionError, RuntimeError):
    """The root finder produced a candidate that fails its residual check."""


class ExtrapolationError(DispersionError, ValueError):
    """A tabulated quantity was queried outside its tabulation range."""


# --------------------------------------------------------------------------
# material model
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SellmeierGlass:
    """Sellmeier dispersion model ``n^2 = 1 + sum_j B_j lam^2/(lam^2 - C_j)``.

    Attributes:
        name: Text label used in error messages and file round-trips.
        terms: Resonance terms ``(B_j, C_j)`` with ``B_j`` dimensionless and
            ``C_j`` in um^2.  ``B_j = 0`` is allowed (inert term); ``C_j``
            must be positive.
        validity_um: Closed wavelength interval ``(lo, hi)`` in um inside
            which the model may be evaluated.
    """

    name: str
    terms: tuple[tuple[float, float], ...]
    validity_um: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(b), float(c)) for b, c in self.terms))
        object.__setattr__(self, "validity_um", (float(self.validity_um[0]), float(self.validity_um[1])))
        if not self.terms:
            raise ValueError("SellmeierGlass needs at least one (B, C) term")
        for b, c in self.terms:
            if b < 0.0:
                raise ValueError(f"Sellmeier B coefficient must be >= 0, got {b}")
            if c <= 0.0:
                raise ValueError(f"Sellmeier C coefficient must be > 0, got {c}")
        lo, hi = self.validity_um
        if not (0.0 < lo < hi):
            raise ValueError(f"invalid validity interval {self.validity_um}")

    def index(self, wavelength: Union[float, np.ndarray]):
        """Refractive index at vacuum ``wavelength`` (meters; scalar or array).

        Raises:
            WavelengthRangeError: If any wavelength falls outside
                ``validity_um``.
        """
        lam_um = np.asarray(wavelength, dtype=float) * 1e6
        lo, hi = self.validity_um
        bad = (lam_um < lo) | (lam_um > hi) | ~np.isfinite(lam_um)
        if np.any(bad):
            offending = np.atleast_1d(lam_um)[np.atleast_1d(bad)]
            raise WavelengthRangeError(
                f"wavelength {offending[0]:.6g} um outside validity interval "
                f"[{lo} um, {hi} um] of glass {self.name!r}"
            )
        l2 = lam_um**2
        # B=0 terms are inert and must not trip 0/0 at an accidental resonance
        s = 1.0 + sum(b * l2 / (l2 - c) for b, c in self.terms if b != 0.0)
        n = np.sqrt(s)
        if not np.all(np.isfinite(n)):
            raise WavelengthRangeError(
                f"Sellmeier sum for glass {self.name!r} is not a valid index "
                f"(resonance inside the validity interval?)"
            )
        return n.item() if np.ndim(wavelength) == 0 else n


#: Fused silica, three-term Sellmeier fit (Malitson coefficients, C_j = lam_j^2).
FUSED_SILICA = SellmeierGlass(
    name="fused-silica",
    terms=(
        (0.6961663, 0.0684043**2),
        (0.4079426, 0.1162414**2),
        (0.8974794, 9.896161**2),
    ),
    validity_um=(0.21, 3.71),
)


def refractive_index(glass: SellmeierGlass, wavelength: Union[float, np.ndarray]):
    """Evaluate ``glass`` at vacuum ``wavelength`` in meters.  See ``SellmeierGlass.index``."""
    return glass.index(wavelength)


_GLASS_KEYS = {"name", "B", "C", "validity_um"}


def parse_glass(text: str, *, source: str = "<string>") -> SellmeierGlass:
    """Parse the key-value glass format (see docs/formats.md).

    Keys: ``name`` (rest of line), ``B`` and ``C`` (whitespace-separated float
    lists of equal length, C in um^2), ``validity_um`` (two floats).  ``#``
    starts a comment; blank lines are ignored.
    """
    fields: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        key = parts[0]
        rest = parts[1] if len(parts) > 1 else ""
        if key not in _GLASS_KEYS:
            raise ValueError(f"{source}:{lineno}: unknown key {key!r} (expected one of {sorted(_GLASS_KEYS)})")
        if key in fields:
            raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
        if key == "name":
            if not rest:
                raise ValueError(f"{source}:{lineno}: empty glass name")
            fields["name"] = rest
        else:
            try:
                values = tuple(float(tok) for tok in rest.split())
            except ValueError as exc:
                raise ValueError(f"{source}:{lineno}: malformed number in {key!r}: {exc}") from None
            fields[key] = values
    missing = _GLASS_KEYS - fields.keys()
    if missing:
        raise ValueError(f"{source}: missing required keys {sorted(missing)}")
    bs, cs = fields["B"], fields["C"]
    if len(bs) != len(cs):
        raise ValueError(f"{source}: B has {len(bs)} entries but C has {len(cs)}")
    validity = fields["validity_um"]
    if len(validity) != 2:
        raise ValueError(f"{source}: validity_um needs exactly 2 values, got {len(validity)}")
    return SellmeierGlass(name=fields["name"], terms=tuple(zip(bs, cs)), validity_um=validity)


def load_glass(path: Union[str, Path]) -> SellmeierGlass:
    """Load a glass definition file.  Format documented in docs/formats.md."""
    p = Path(path)
    return parse_glass(p.read_text(encoding="utf-8"), source=str(p))


# --------------------------------------------------------------------------
# waveguide geometry and mode labels
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CrossSection:
    """One cross-section of the taper: a step-index cylinder.

    Attributes:
        diameter: Core diameter in meters.
        core: Core glass model.
        cladding: Either a constant index (air: 1.0) or a SellmeierGlass.
    """

    diameter: float
    core: SellmeierGlass = FUSED_SILICA
    cladding: Union[float, SellmeierGlass] = 1.0

    def __post_init__(self):
        if not (self.diameter > 0.0 and np.isfinite(self.diameter)):
            raise ValueError(f"diameter must be positive and finite, got {self.diameter}")
        if isinstance(self.cladding, (int, float)) and not self.cladding > 0.0:
            raise ValueError(f"cladding index must be positive, got {self.cladding}")

    def core_index(self, wavelength):
        return self.core.index(wavelength)

    def cladding_index(self, wavelength):
        if isinstance(self.cladding, SellmeierGlass):
            return self.cladding.index(wavelength)
        return float(self.cladding) if np.ndim(wavelength) == 0 else np.full(np.shape(wavelength), float(self.cladding))


_LABEL_RE = re.compile(r"^(HE|EH|TE|TM)(?:(\d)(\d)|(\d+)[_,-](\d+))$")


@dataclass(frozen=True)
class ModeLabel:
    """Guided-mode label: family HE/EH/TE/TM, azimuthal order m, radial order n."""

    family: str
    m: int
    n: int

    def __post_init__(self):
        if self.family not in ("HE", "EH", "TE", "TM"):
            raise ValueError(f"unknown mode family {self.family!r}")
        if self.family in ("TE", "TM"):
            if self.m != 0:
                raise ValueError(f"{self.family} modes require m=0, got m={self.m}")
        elif self.m < 1:
            raise ValueError(f"{self.family} modes require m>=1, got m={self.m}")
        if self.n < 1:
            raise ValueError(f"radial order must be >=1, got n={self.n}")

    @classmethod
    def parse(cls, text: str) -> "ModeLabel":
        """Parse compact labels like ``HE11``, ``TE01`` or separated ``HE1-13``."""
        match = _LABEL_RE.match(text.strip().upper())
        if not match:
            raise ValueError(f"cannot parse mode label {text!r} (expected e.g. 'HE11' or 'HE1-13')")
        family = match.group(1)
        if match.group(2) is not None:
            m, n = int(match.group(2)), int(match.group(3))
        else:
            m, n = int(match.group(4)), int(match.group(5))
        return cls(family, m, n)

    def __str__(self):
        return f"{self.family}{self.m}{self.n}"


HE11 = ModeLabel("HE", 1, 1)


# --------------------------------------------------------------------------
# characteristic equation
# --------------------------------------------------------------------------

# Scan-edge clips in the x = n_eff^2 variable, as fractions of (n1^2 - n2^2).
# Top clip: the EH-branch function has an analytic double-precision-invisible
# zero at u -> 0; bottom clip: both hybrid branches lose precision to
# cancellation as w -> 0.  Roots inside the clipped slivers are physically
# unbound (evanescent decay lengths >> 1e4 radii) and reported as not guided.
_CLIP_TOP = 1e-8
_CLIP_BOT = 2e-9

_BISECT_ITERS = 46
_RESIDUAL_RTOL = 1e-8


def _char_fn(family: str, m: int, n1, n2, ak0) -> Callable[[np.ndarray], np.ndarray]:
    """Pole-free characteristic function h(n_eff); h = 0 at guided modes.

    ``n1``, ``n2``, ``ak0`` may be scalars or arrays broadcastable against the
    ``n_eff`` argument.  Modified Bessel factors use the exponentially scaled
    ``kve``; the e^{-w} factors cancel in every ratio (hybrid) or are a common
    positive factor (TE/TM), so signs and zeros are unaffected.
    """
    n1sq = np.asarray(n1, dtype=float) ** 2
    n2sq = np.asarray(n2, dtype=float) ** 2
    ak0 = np.asarray(ak0, dtype=float)

    def h(neff):
        neff = np.asarray(neff, dtype=float)
        u = ak0 * np.sqrt(n1sq - neff**2)
        w = ak0 * np.sqrt(neff**2 - n2sq)
        if family == "TE":
            return jv(1, u) * w * kve(0, w) + kve(1, w) * u * jv(0, u)
        if family == "TM":
            return n1sq * jv(1, u) * w * kve(0, w) + n2sq * kve(1, w) * u * jv(0, u)
        kk = -(kve(m - 1, w) + kve(m + 1, w)) / (2.0 * w * kve(m, w))  # K'_m/(w K_m)
        nu = n2sq / n1sq
        csq = m * m * (1.0 / u**2 + 1.0 / w**2) * (1.0 / u**2 + nu / w**2)
        mid = -kk * (1.0 + nu) / 2.0
        split = np.sqrt((kk * (1.0 - nu) / 2.0) ** 2 + csq)
        x = mid - split if family == "HE" else mid + split
        return jvp(m, u) - x * u * jv(m, u)

    return h


def _scan_bounds(n1, n2):
    """Clipped [n_lo, n_hi] scan interval (see _CLIP_* above)."""
    n1sq, n2sq = n1 * n1, n2 * n2
    dx = n1sq - n2sq
    return np.sqrt(n2sq + _CLIP_BOT * dx), np.sqrt(n1sq - _CLIP_TOP * dx)


def _scan_points(v_max: float) -> int:
    # Adjacent roots are ~pi apart in u; near u -> 0 their n_eff spacing
    # shrinks like 1/V^2, so the uniform-n_eff scan density must grow with V^2.
    return max(512, int(np.ceil(0.5 * v_max * v_max)))


def _bisect_refine(h, lo, hi, flo, iters: int = _BISECT_ITERS):
    """Vectorized bisection; (lo, hi) must bracket a sign change with h(lo)=flo."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = np.array(flo, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = h(mid)
        same = np.signbit(fm) == np.signbit(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _solve_many(cross_section: CrossSection, omegas: np.ndarray, label: ModeLabel) -> np.ndarray:
    """Effective indices of ``label`` at each angular frequency (vectorized).

    Raises NoGuidedModeError listing every frequency at which fewer than
    ``label.n`` roots exist, and SolverConvergenceError if a refined root
    fails its residual check.
    """
    omegas = np.asarray(omegas, dtype=float)
    lam = 2.0 * np.pi * C_VAC / omegas
    n1 = np.asarray(cross_section.core_index(lam), dtype=float)
    n2 = np.asarray(cross_section.cladding_index(lam), dtype=float)
    if np.any(n1 <= n2):
        i = int(np.argmax(n1 <= n2))
        raise NoGuidedModeError(
            f"guidance condition violated: core index {n1.flat[i]:.6f} <= cladding "
            f"index {n2.flat[i]:.6f} at wavelength {lam.flat[i]*1e9:.1f} nm"
        )
    a = cross_section.diameter / 2.0
    ak0 = a * omegas / C_VAC
    v = ak0 * np.sqrt(n1**2 - n2**2)

    n_eff = np.empty_like(omegas)
    chunk = max(1, int(4e6 // _scan_points(float(v.max()))))
    missing: list[float] = []
    for start in range(0, omegas.size, chunk):
        sl = slice(start, min(start + chunk, omegas.size))
        n_eff[sl] = _solve_chunk(cross_section, label, omegas[sl], n1[sl], n2[sl], ak0[sl], v[sl], missing)
    if missing:
        lam_nm = ", ".join(f"{2*np.pi*C_VAC/w*1e9:.2f} nm" for w in missing[:8])
        more = "" if len(missing) <= 8 else f" (+{len(missing)-8} more)"
        raise NoGuidedModeError(
            f"no guided {label} mode at diameter {cross_section.diameter*1e9:.1f} nm "
            f"for wavelengths: {lam_nm}{more} (mode below cutoff)"
        )
    return n_eff


def _solve_chunk(cross_section, label, omegas, n1, n2, ak0, v, missing):
    points = _scan_points(float(v.max()))
    n_lo, n_hi = _scan_bounds(n1, n2)
    t = np.linspace(0.0, 1.0, points)[:, None]
    grid = n_lo[None, :] + t * (n_hi - n_lo)[None, :]
    h = _char_fn(label.family, label.m, n1[None, :], n2[None, :], ak0[None, :])
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        vals = h(grid)
    if not np.all(np.isfinite(vals)):
        raise SolverConvergenceError(
            f"characteristic function not finite on the scan grid for {label} "
            f"at diameter {cross_section.diameter*1e9:.1f} nm"
        )
    sign = np.signbit(vals)
    flips = sign[:-1, :] != sign[1:, :]

    lo = np.empty_like(omegas)
    hi = np.empty_like(omegas)
    flo = np.empty_like(omegas)
    scale = np.empty_like(omegas)
    ok = np.ones(omegas.size, dtype=bool)
    for j in range(omegas.size):
        rows = np.nonzero(flips[:, j])[0]
        if rows.size < label.n:
            missing.append(float(omegas[j]))
            ok[j] = False
            continue
        r = rows[rows.size - label.n]  # radial order counts down from the largest n_eff
        lo[j], hi[j] = grid[r, j], grid[r + 1, j]
        flo[j] = vals[r, j]
        scale[j] = max(abs(vals[r, j]), abs(vals[r + 1, j]))
    if not np.all(ok):
        lo, hi, flo, scale = lo[ok], hi[ok], flo[ok], scale[ok]
        n1, n2, ak0 = n1[ok], n2[ok], ak0[ok]
    out = np.full(omegas.size, np.nan)
    if lo.size:
        h1 = _char_fn(label.family, label.m, n1, n2, ak0)
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            roots = _bisect_refine(h1, lo, hi, flo)
            resid = np.abs(h1(roots))
        if np.any(resid > _RESIDUAL_RTOL * scale):
            i = int(np.argmax(resid / scale))
            raise SolverConvergenceError(
                f"root residual {resid[i]:.3e} exceeds {_RESIDUAL_RTOL:g} x local scale "
                f"{scale[i]:.3e} for {label}"
            )
        out[ok] = roots
    return out


# --------------------------------------------------------------------------
# mode solutions
# --------------------------------------------------------------------------

# Quasi-linear-polarization field: azimuthal Bessel order of the dominant
# transverse component.
def _lp_order(label: ModeLabel) -> int:
    if label.family == "HE":
        return label.m - 1
    if label.family == "EH":
        return label.m + 1
    return 1  # TE0n / TM0n


_CORE_SAMPLES = 601
_CLAD_SAMPLES = 2400
_TAIL_XI = 37.0  # field sampled out to K_l(w r/a) ~ e^-37; truncated tail < 1e-32 of the norm


@dataclass(frozen=True)
class ModeSolution:
    """One guided mode at one cross-section and frequency.

    The scalar profile ``u(rho)`` (quasi-LP dominant transverse component) is
    normalized so that ``integral |u|^2 d^2 rho = 1``; units of ``u`` are 1/m.
    ``r`` and ``field`` hold radial samples; ``field_at`` evaluates the
    closed-form profile anywhere.
    """

    label: ModeLabel
    omega: float
    n_eff: float
    beta: float
    cross_section: CrossSection
    r: np.ndarray
    field: np.ndarray
    u: float  # core transverse parameter a*k0*sqrt(n1^2 - n_eff^2)
    w: float  # cladding decay parameter a*k0*sqrt(n_eff^2 - n2^2)
    ell: int
    _amplitude: float

    def field_at(self, r):
        """Normalized profile u(rho) at radius ``r`` (meters; scalar or array)."""
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        if np.any(r < 0):
            raise ValueError("radius must be >= 0")
        a, u, w, ell = self.cross_section.diameter / 2.0, self.u, self.w, self.ell
        out = np.empty_like(r)
        inside = r <= a
        out[inside] = jv(ell, u * r[inside] / a)
        rr = r[~inside]
        # K_l(w r/a)/K_l(w) via scaled kve; explicit exponent avoids underflow
        out[~inside] = jv(ell, u) / kve(ell, w) * kve(ell, w * rr / a) * np.exp(-w * (rr / a - 1.0))
        out *= self._amplitude
        return out[0].item() if scalar else out

    def normalization_integral(self) -> float:
        """Numerical check of ``integral |u|^2 2 pi r dr`` over the stored samples."""
        y = 2.0 * np.pi * self.r * self.field**2
        core = simpson(y[:_CORE_SAMPLES], x=self.r[:_CORE_SAMPLES])
        clad = simpson(y[_CORE_SAMPLES - 1 :], x=self.r[_CORE_SAMPLES - 1 :])
        return float(core + clad)


def _norm_amplitude(a: float, u, w, ell: int):
    """Amplitude A with A^2 * 2 pi * int |g|^2 r dr = 1 for the piecewise Bessel g.

    Uses the closed forms
      int_0^a J_l(ur/a)^2 r dr           = a^2/2 [J_l(u)^2 - J_{l-1}(u) J_{l+1}(u)]
      int_a^inf K_l(wr/a)^2 r dr         = a^2/2 [K_{l-1}(w) K_{l+1}(w) - K_l(w)^2]
    with the outside term rescaled by (J_l(u)/K_l(w))^2 for continuity at r=a.
    ``u``/``w`` may be arrays (one amplitude per frequency).
    """
    i_core = 0.5 * a * a * (jv(ell, u) ** 2 - jv(ell - 1, u) * jv(ell + 1, u))
    k_ratio = (kve(ell - 1, w) * kve(ell + 1, w) - kve(ell, w) ** 2) / kve(ell, w) ** 2
    i_clad = 0.5 * a * a * jv(ell, u) ** 2 * k_ratio
    total = 2.0 * np.pi * (i_core + i_clad)
    if not (np.all(total > 0.0) and np.all(np.isfinite(total))):
        raise SolverConvergenceError("non-positive field norm")
    return 1.0 / np.sqrt(total)


def batch_field_matrix(cross_section: CrossSection, omegas, n_effs, ell: int, r) -> np.ndarray:
    """Normalized profiles for many frequencies of one cross-section.

    Vectorized equivalent of ``ModeSolution.field_at``: returns a matrix of
    shape ``(len(omegas), len(r))`` where row f samples the normalized
    quasi-LP profile of the mode with effective index ``n_effs[f]`` at
    ``omegas[f]``.  Radii in meters.
    """
    omegas = np.asarray(omegas, dtype=float)
    n_effs = np.asarray(n_effs, dtype=float)
    r = np.asarray(r, dtype=float)
    lam = 2.0 * np.pi * C_VAC / omegas
    a = cross_section.diameter / 2.0
    ak0 = a * omegas / C_VAC
    n1 = np.asarray(cross_section.core_index(lam), dtype=float)
    n2 = np.asarray(cross_section.cladding_index(lam), dtype=float)
    u = ak0 * np.sqrt(n1**2 - n_effs**2)
    w = ak0 * np.sqrt(n_effs**2 - n2**2)
    amp = _norm_amplitude(a, u, w, ell)

    out = np.empty((omegas.size, r.size))
    inside = r <= a
    out[:, inside] = jv(ell, u[:, None] * r[None, inside] / a)
    rr = r[~inside]
    out[:, ~inside] = (
        jv(ell, u)[:, None]
        / kve(ell, w)[:, None]
        * kve(ell, w[:, None] * rr[None, :] / a)
        * np.exp(-w[:, None] * (rr[None, :] / a - 1.0))
    )
    return amp[:, None] * out


def solve_mode(cross_section: CrossSection, omega: float, mode_label: ModeLabel = HE11) -> ModeSolution:
    """Solve the full-vector characteristic equation for one guided mode.

    Args:
        cross_section: Waveguide geometry and materials.
        omega: Angular frequency in rad/s (> 0).
        mode_label: Requested mode; default HE11.

    Returns:
        ModeSolution with ``n_eff`` refined to |delta n_eff| <= 1e-10 and a
        normalized field profile.

    Raises:
        NoGuidedModeError: Mode below cutoff at this frequency/diameter.
        SolverConvergenceError: Root refinement failed its residual check.
        WavelengthRangeError: Frequency outside the glass validity interval.
    """
    if not (omega > 0.0 and np.isfinite(omega)):
        raise ValueError(f"omega must be positive and finite, got {omega}")
    if isinstance(mode_label, str):
        mode_label = ModeLabel.parse(mode_label)
    n_eff = float(_solve_many(cross_section, np.array([omega]), mode_label)[0])

    lam = 2.0 * np.pi * C_VAC / omega
    a = cross_section.diameter / 2.0
    ak0 = a * omega / C_VAC
    n1 = float(cross_section.core_index(lam))
    n2 = float(np.asarray(cross_section.cladding_index(lam)))
    u = ak0 * np.sqrt(n1 * n1 - n_eff * n_eff)
    w = ak0 * np.sqrt(n_eff * n_eff - n2 * n2)
    ell = _lp_order(mode_label)
    amplitude = _norm_amplitude(a, u, w, ell)

    r_core = np.linspace(0.0, a, _CORE_SAMPLES)
    # geometric cladding grid: resolves the power-law region near r=a for
    # near-cutoff modes (small w) as well as the exponential tail
    r_clad = a * np.exp(np.linspace(0.0, np.log1p(_TAIL_XI / w), _CLAD_SAMPLES + 1)[1:])
    r = np.concatenate([r_core, r_clad])

    sol = ModeSolution(
        label=mode_label,
        omega=float(omega),
        n_eff=n_eff,
        beta=float(omega) * n_eff / C_VAC,
        cross_section=cross_section,
        r=r,
        field=np.empty(0),
        u=float(u),
        w=float(w),
        ell=ell,
        _amplitude=amplitude,
    )
    object.__setattr__(sol, "field", sol.field_at(r))
    return sol


# --------------------------------------------------------------------------
# tabulated effective index
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NeffTable:
    """Monotone-cubic-interpolated ``n_eff(omega)`` for one mode and cross-section.

    Call the table with angular frequencies inside ``[omega[0], omega[-1]]``;
    queries outside raise ExtrapolationError.  ``k(omega)`` returns the
    propagation constant ``omega * n_eff / c``.
    """

    cross_section: CrossSection
    label: ModeLabel
    omega: np.ndarray
    n_eff: np.ndarray
    _interp: object

    def __call__(self, omega):
        omega_arr = np.asarray(omega, dtype=float)
        lo, hi = self.omega[0], self.omega[-1]
        if np.any(omega_arr < lo) or np.any(omega_arr > hi):
            raise ExtrapolationError(
                f"query outside tabulated range [{lo:.6e}, {hi:.6e}] rad/s for {self.label}"
            )
        if self._interp is None:  # single-point table degenerates to a constant
            out = np.full(omega_arr.shape, self.n_eff[0])
        else:
            out = self._interp(omega_arr)
        return out.item() if np.ndim(omega) == 0 else out

    def k(self, omega):
        """Propagation constant omega * n_eff(omega) / c in rad/m."""
        return np.asarray(omega, dtype=float) * self(omega) / C_VAC


def neff_table(
    cross_section: CrossSection,
    omega_grid: Sequence[float],
    mode_label: ModeLabel = HE11,
    *,
    refine: int = 16,
) -> NeffTable:
    """Tabulate ``n_eff(omega)`` on ``omega_grid`` with PCHIP interpolation.

    The solver runs on an internally ``refine``-times denser grid so that the
    interpolant reproduces direct solves at held-out midpoints to 1e-8; this
    is verified internally at five midpoints and the refinement is doubled
    once if the check fails.

    Args:
        cross_section: Waveguide geometry.
        omega_grid: Strictly increasing angular frequencies (rad/s), all guided.
        mode_label: Mode to tabulate.
        refine: Internal grid refinement factor (>= 1).

    Raises:
        NoGuidedModeError: Any grid point below cutoff (message lists them).
        ExtrapolationError: On later queries outside the grid range.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    if omega_grid.ndim != 1 or omega_grid.size < 1:
        raise ValueError("omega_grid must be a 1-D array with at least one point")
    if np.any(np.diff(omega_grid) <= 0):
        raise ValueError("omega_grid must be strictly increasing")
    if isinstance(mode_label, str):
        mode_label = ModeLabel.parse(mode_label)

    if omega_grid.size == 1:
        value = _solve_many(cross_section, omega_grid, mode_label)
        return NeffTable(cross_section, mode_label, omega_grid.copy(), value, None)

    coarse = _solve_many(cross_section, omega_grid, mode_label)
    for factor in (refine, 2 * refine):
        dense = _refined_grid(omega_grid, factor)
        n_dense = _solve_dense(cross_section, mode_label, omega_grid, coarse, dense)
        interp = PchipInterpolator(dense, n_dense, extrapolate=False)
        checks = dense[:-1] + 0.5 * np.diff(dense)
        checks = checks[np.linspace(0, checks.size - 1, 5).astype(int)]
        direct = _solve_many(cross_section, checks, mode_label)
        if np.max(np.abs(interp(checks) - direct)) <= 5e-9:
            break
    else:
        raise SolverConvergenceError(
            f"neff_table failed its held-out midpoint check for {mode_label} even at refine={2*refine}"
        )
    return NeffTable(cross_section, mode_label, omega_grid.copy(), interp(omega_grid), interp)


def _refined_grid(grid: np.ndarray, factor: int) -> np.ndarray:
    steps = np.linspace(0.0, 1.0, factor + 1)[:-1]
    dense = (grid[:-1, None] + steps[None, :] * np.diff(grid)[:, None]).ravel()
    return np.append(dense, grid[-1])


def _solve_dense(cross_section, label, coarse_grid, coarse_neff, dense):
    """Roots on a dense grid via brackets predicted from a coarse solution.

    The bracket half-width is a quarter of the local coarse step in n_eff, so
    it cannot reach a neighboring radial order; every point whose predicted
    bracket fails to enclose a sign change falls back to the full scan of
    _solve_many, and the bisected roots pass the same residual check.
    """
    pred = PchipInterpolator(coarse_grid, coarse_neff, extrapolate=False)(dense)
    lam = 2.0 * np.pi * C_VAC / dense
    n1 = np.asarray(cross_section.core_index(lam), dtype=float)
    n2 = np.asarray(cross_section.cladding_index(lam), dtype=float)
    ak0 = (cross_section.diameter / 2.0) * dense / C_VAC
    idx = np.clip(np.searchsorted(coarse_grid, dense, side="right") - 1, 0, coarse_grid.size - 2)
    delta = 1e-7 + 0.25 * np.abs(np.diff(coarse_neff))[idx]
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        n_lo, n_hi = _scan_bounds(n1, n2)
        lo = np.maximum(pred - delta, n_lo)
        hi = np.minimum(pred + delta, n_hi)
        h = _char_fn(label.family, label.m, n1, n2, ak0)
        flo, fhi = h(lo), h(hi)
    good = (
        np.isfinite(flo) & np.isfinite(fhi) & (lo < hi) & (np.signbit(flo) != np.signbit(fhi))
    )
    out = np.empty_like(dense)
    if np.any(good):
        hg = _char_fn(label.family, label.m, n1[good], n2[good], ak0[good])
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            roots = _bisect_refine(hg, lo[good], hi[good], flo[good])
            resid = np.abs(hg(roots))
        scale = np.maximum(np.abs(flo[good]), np.abs(fhi[good]))
        if np.any(resid > _RESIDUAL_RTOL * scale):
            i = int(np.argmax(resid / scale))
            raise SolverConvergenceError(
                f"root residual {resid[i]:.3e} exceeds {_RESIDUAL_RTOL:g} x local scale "
                f"{scale[i]:.3e} for {label}"
            )
        out[good] = roots
    if not np.all(good):
        out[~good] = _solve_many(cross_section, dense[~good], label)
    return out
