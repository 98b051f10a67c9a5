"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written from scratch against the underlying
definitions (textbook eigenvalue equation, closed-form Gaussian integrals,
O(n^2) pair counting) rather than importing package internals, so agreement
is meaningful.
"""

import math

import numpy as np
from scipy.special import jv, jvp, kv, kvp

# --- material: Malitson fused-silica Sellmeier, restated locally -----------

_B = (0.6961663, 0.4079426, 0.8974794)
_C = (0.0684043**2, 0.1162414**2, 9.896161**2)


def silica_index(lam_m: float) -> float:
    l2 = (lam_m * 1e6) ** 2
    return math.sqrt(1.0 + sum(b * l2 / (l2 - c) for b, c in zip(_B, _C)))


# --- mode solver oracle -----------------------------------------------------


def _product_form(neff, a, k0, n1, n2, m=1):
    """Full-vector eigenvalue equation for hybrid modes, in the pole-free
    product form (J'm + kk u Jm)(J'm + nu kk u Jm) - C^2 (u Jm)^2 with
    kk = K'm/(w Km).  Zeros are the union of the HE and EH m-family roots."""
    u = a * k0 * np.sqrt(n1**2 - neff**2)
    w = a * k0 * np.sqrt(neff**2 - n2**2)
    jm, jp = jv(m, u), jvp(m, u)
    kk = kvp(m, w) / (w * kv(m, w))
    nu = (n2 / n1) ** 2
    csq = m * m * (1.0 / u**2 + 1.0 / w**2) * (1.0 / u**2 + nu / w**2)
    ujm = u * jm
    return (jp + kk * ujm) * (jp + nu * kk * ujm) - csq * ujm**2


def dense_scan_he11(diameter: float, lam: float, points: int = 1_000_000) -> float:
    """Fundamental-mode n_eff by brute force: sign-change bracketing on a dense
    uniform n_eff grid of the product-form eigenvalue equation, refined by
    plain scalar bisection.  The fundamental is the largest root of the m=1
    family (it has no cutoff and the tightest confinement)."""
    n1, n2 = silica_index(lam), 1.0
    a, k0 = diameter / 2.0, 2.0 * math.pi / lam
    lo_edge = n2 + 1e-4 * (n1 - n2)  # clear of the w->0 cancellation zone
    hi_edge = n1 - 1e-6 * (n1 - n2)
    grid = np.linspace(lo_edge, hi_edge, points)
    with np.errstate(all="ignore"):
        vals = _product_form(grid, a, k0, n1, n2)
    sign = np.signbit(vals)
    flips = np.nonzero(sign[:-1] != sign[1:])[0]
    if flips.size == 0:
        raise ValueError(f"oracle found no guided m=1 mode at d={diameter}, lam={lam}")
    i = flips[-1]
    lo, hi, flo = grid[i], grid[i + 1], vals[i]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = float(_product_form(np.array([mid]), a, k0, n1, n2)[0])
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- pulsed pair-source statistics ------------------------------------------
# Closed forms for per-pulse click probabilities when the pair number N has a
# known generating function E[x^N], the idler is detected with probability q
# per pair, and each signal photon is routed to arm A with probability p_a or
# arm B with p_b (mutually exclusive).  All joint probabilities follow from
# inclusion-exclusion over "no click" events, whose per-pair survival factors
# multiply because pairs act independently.


def _pgf_poisson(mu):
    return lambda x: math.exp(-mu * (1.0 - x))


def _pgf_thermal(mu):
    return lambda x: 1.0 / (1.0 + mu * (1.0 - x))


def pulse_click_probabilities(mu, q, p_a, p_b, statistics="poisson"):
    """Per-pulse probabilities of herald/arm clicks and their coincidences."""
    gf = {"poisson": _pgf_poisson, "thermal": _pgf_thermal}[statistics](mu)
    # survival probabilities per pair for each "no click" combination
    no_h = gf(1.0 - q)
    no_a = gf(1.0 - p_a)
    no_b = gf(1.0 - p_b)
    no_ab = gf(1.0 - p_a - p_b)  # one signal photon cannot serve both arms
    no_ah = gf((1.0 - p_a) * (1.0 - q))
    no_bh = gf((1.0 - p_b) * (1.0 - q))
    no_abh = gf((1.0 - p_a - p_b) * (1.0 - q))
    p_h = 1.0 - no_h
    p_click_a = 1.0 - no_a
    p_click_b = 1.0 - no_b
    p_ah = 1.0 - no_a - no_h + no_ah
    p_bh = 1.0 - no_b - no_h + no_bh
    p_ab = 1.0 - no_a - no_b + no_ab
    p_abh = (1.0 - no_a - no_b - no_h + no_ab + no_ah + no_bh - no_abh)
    return {
        "H": p_h, "A": p_click_a, "B": p_click_b,
        "AH": p_ah, "BH": p_bh, "AB": p_ab, "ABH": p_abh,
    }


def g2h_zero_prediction(mu, q, p_a, p_b, statistics="poisson"):
    """Expected heralded g2 at zero herald separation for the pulsed source."""
    p = pulse_click_probabilities(mu, q, p_a, p_b, statistics)
    return p["ABH"] * p["H"] / (p["AH"] * p["BH"])


def car_prediction(mu, q, p_arm, statistics="poisson"):
    """Expected CAR for an arm x herald coincidence comb: same-pulse
    coincidences over the different-pulse (accidental) floor."""
    p = pulse_click_probabilities(mu, q, p_arm, 0.0, statistics)
    return p["AH"] / (p["A"] * p["H"])


# --- O(n^2) counting twins ----------------------------------------------------


def brute_force_coincidences(stream, ch_a, ch_b, bin_width, delay_range):
    """All-pairs delay histogram by nested loops; self-pairs excluded when the
    channels coincide.  Returns (delay bin centers, counts)."""
    rec = [(int(c), int(t)) for c, t in zip(stream.channels, stream.timestamps)]
    half = delay_range // bin_width
    counts = [0] * (2 * half + 1)
    a_events = [(i, t) for i, (c, t) in enumerate(rec) if c == ch_a]
    b_events = [(i, t) for i, (c, t) in enumerate(rec) if c == ch_b]
    for ia, ta in a_events:
        for ib, tb in b_events:
            if ch_a == ch_b and ia == ib:
                continue
            d = tb - ta
            if abs(d) <= delay_range:
                k = math.floor((2 * d + bin_width) / (2 * bin_width))
                counts[k + half] += 1
    centers = [k * bin_width for k in range(-half, half + 1)]
    return centers, counts


def brute_force_g2(stream, herald_ch, ch_a, ch_b, window, m_max):
    """Heralded autocorrelation by naively scanning every herald's window."""
    heralds = sorted(int(t) for c, t in zip(stream.channels, stream.timestamps)
                     if c == herald_ch)
    arm = {
        ch: sorted(int(t) for c, t in zip(stream.channels, stream.timestamps) if c == ch)
        for ch in (ch_a, ch_b)
    }

    def has_click(channel, t0):
        lo = t0 - window // 2
        return any(lo <= t < lo + window for t in arm[channel])

    a_flags = [1 if has_click(ch_a, t) else 0 for t in heralds]
    b_flags = [1 if has_click(ch_b, t) else 0 for t in heralds]
    n_h = len(heralds)
    sum_a, sum_b = sum(a_flags), sum(b_flags)
    out = []
    for m in range(min(m_max, n_h - 1) + 1):
        triples = sum(a_flags[i] * b_flags[i + m] for i in range(n_h - m))
        out.append((m, triples, triples * n_h / (sum_a * sum_b)))
    return out
