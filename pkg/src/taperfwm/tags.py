"""Time-tag streams: parsing, coincidence histograms, heralded autocorrelation.

Detector clicks are integer multiples of an 81 ps tick.  Channel ids follow
the three-detector convention of a heralded-pair setup: 1 = signal arm A,
2 = idler (herald), 3 = signal arm B.  Analyses are single passes over
time-ordered integer arrays.  A synthetic pulsed-source generator with
losses, dark counts, timing jitter and detector dead time produces streams
with closed-form statistics, which is what the statistical tests lean on.

One quoted loss figure for a two-detector setup is ambiguous (total vs per
channel); rate reporting that depends on it lives in :mod:`.rates` and
surfaces both readings.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "TICK_SECONDS",
    "TagParseError",
    "TagOrderWarning",
    "TagRecord",
    "TagStream",
    "CoincidenceHistogram",
    "HeraldedG2Histogram",
    "SimulationConfig",
    "parse_tags",
    "write_tags_text",
    "write_tags_binary",
    "coincidence_histogram",
    "peak_and_accidentals",
    "heralded_g2",
    "simulate_tags",
    "write_coincidence_csv",
    "write_coincidence_json",
    "write_g2_csv",
    "write_g2_json",
]

#: Default timing resolution of one tag tick.
TICK_SECONDS = 81e-12

DEFAULT_CHANNELS = frozenset({1, 2, 3})

_BINARY_MAGIC = b"TTAG1"
_INT64_MAX = np.iinfo(np.int64).max


class TagParseError(ValueError):
    """Malformed tag input; message carries the line or byte offset."""


class TagOrderWarning(UserWarning):
    """Input records were not time-ordered and have been sorted."""


@dataclass(frozen=True)
class TagRecord:
    channel: int
    timestamp: int  # ticks

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError("timestamp must be non-negative")


@dataclass(frozen=True)
class TagStream:
    """Immutable, time-ordered click record.

    ``channels`` and ``timestamps`` are parallel arrays sorted by
    (timestamp, channel); ties are broken by channel id.  ``metadata`` may
    carry ``rep_period_ticks``, ``duration_ticks`` and generator echo; the
    acquisition duration falls back to the observed span when absent.
    """

    channels: np.ndarray
    timestamps: np.ndarray
    tick_duration: float = TICK_SECONDS
    channel_set: frozenset = DEFAULT_CHANNELS
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        ch = np.asarray(self.channels)
        ts = np.asarray(self.timestamps)
        if ch.shape != ts.shape or ch.ndim != 1:
            raise ValueError("channels and timestamps must be parallel 1-D arrays")
        if not self.tick_duration > 0:
            raise ValueError("tick_duration must be positive")
        ch = ch.astype(np.int64, copy=False)
        ts = ts.astype(np.int64, copy=False)
        if ts.size:
            if ch.min() < 0 or ch.max() > 255:
                raise ValueError("channel ids must fit an unsigned byte")
            if not np.isin(ch, list(self.channel_set)).all():
                bad = ch[~np.isin(ch, list(self.channel_set))][0]
                raise ValueError(f"channel {bad} not in declared set {sorted(self.channel_set)}")
            if ts.min() < 0:
                raise ValueError("timestamps must be non-negative")
            dt = np.diff(ts)
            if np.any(dt < 0):
                raise ValueError("timestamps must be non-decreasing")
            if np.any((dt == 0) & (np.diff(ch) < 0)):
                raise ValueError("equal timestamps must be ordered by channel")
        object.__setattr__(self, "channels", ch.astype(np.uint8))
        object.__setattr__(self, "timestamps", ts)

    @classmethod
    def from_records(cls, records, tick_duration: float = TICK_SECONDS,
                     channel_set=DEFAULT_CHANNELS, metadata=None) -> "TagStream":
        """Build a stream from (channel, timestamp) pairs, sorting as needed."""
        ch = np.array([r[0] if not isinstance(r, TagRecord) else r.channel for r in records],
                      dtype=np.int64)
        ts = np.array([r[1] if not isinstance(r, TagRecord) else r.timestamp for r in records],
                      dtype=np.int64)
        order = np.lexsort((ch, ts))
        return cls(ch[order], ts[order], tick_duration, channel_set, dict(metadata or {}))

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def records(self):
        for ch, ts in zip(self.channels, self.timestamps):
            yield TagRecord(int(ch), int(ts))

    def channel_timestamps(self, channel: int) -> np.ndarray:
        """Sorted tick timestamps of one channel."""
        return self.timestamps[self.channels == channel]

    def counts_by_channel(self) -> dict:
        return {int(c): int(n) for c, n in
                zip(*np.unique(self.channels, return_counts=True))}

    @property
    def duration_ticks(self) -> int:
        meta = self.metadata.get("duration_ticks")
        if meta is not None:
            return int(meta)
        if self.timestamps.size == 0:
            return 0
        return int(self.timestamps[-1] - self.timestamps[0] + 1)

    @property
    def duration_seconds(self) -> float:
        return self.duration_ticks * self.tick_duration


# ---------------------------------------------------------------------------
# parsing / serialization

def parse_tags(source, *, channels=DEFAULT_CHANNELS) -> TagStream:
    """Parse a tag stream from a path (str/Path) or raw bytes.

    Binary payloads are recognized by the ``TTAG1`` magic; everything else is
    treated as UTF-8 text with lines ``channel<TAB>ticks``, ``#`` comments and
    an optional ``#tick_ps <int>`` header.  Out-of-order records are sorted
    and counted in ``metadata["out_of_order_records"]`` with a
    :class:`TagOrderWarning`.
    """
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = bytes(source)
    if data.startswith(_BINARY_MAGIC):
        ch, ts, tick = _parse_binary(data, channels)
    else:
        ch, ts, tick = _parse_text(data, channels)
    out_of_order = 0
    if ts.size > 1:
        later = (ts[1:] < ts[:-1]) | ((ts[1:] == ts[:-1]) & (ch[1:] < ch[:-1]))
        out_of_order = int(np.count_nonzero(later))
    if out_of_order:
        warnings.warn(f"{out_of_order} out-of-order records sorted", TagOrderWarning)
        order = np.lexsort((ch, ts))
        ch, ts = ch[order], ts[order]
    return TagStream(ch, ts, tick, frozenset(channels),
                     {"out_of_order_records": out_of_order})


def _parse_text(data: bytes, channels):
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as err:
        raise TagParseError(f"byte {err.start}: not UTF-8 text and not a TTAG1 payload") from None
    tick = None
    chs, ts = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*tick_ps\s+(\d+)\s*$", line)
            if m:
                declared = int(m.group(1)) * 1e-12
                if tick is not None and declared != tick:
                    raise TagParseError(f"line {lineno}: conflicting tick_ps declaration")
                tick = declared
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise TagParseError(f"line {lineno}: expected 'channel<TAB>ticks', got {raw!r}")
        try:
            chan, t = int(parts[0]), int(parts[1])
        except ValueError:
            raise TagParseError(f"line {lineno}: non-integer field in {raw!r}") from None
        if chan not in channels:
            raise TagParseError(
                f"line {lineno}: unknown channel {chan} (declared {sorted(channels)})")
        if t < 0:
            raise TagParseError(f"line {lineno}: negative timestamp {t}")
        chs.append(chan)
        ts.append(t)
    return (np.asarray(chs, dtype=np.int64), np.asarray(ts, dtype=np.int64),
            TICK_SECONDS if tick is None else tick)


def _parse_binary(data: bytes, channels):
    header = len(_BINARY_MAGIC) + 4
    if len(data) < header:
        raise TagParseError(f"byte {len(data)}: truncated binary header")
    tick_fs = int.from_bytes(data[len(_BINARY_MAGIC):header], "little")
    if tick_fs == 0:
        raise TagParseError("byte 5: tick duration must be positive")
    body = data[header:]
    if len(body) % 9:
        raise TagParseError(f"byte {header + 9 * (len(body) // 9)}: truncated 9-byte record")
    rec = np.frombuffer(body, dtype=np.dtype([("channel", "u1"), ("ticks", "<u8")]))
    ch = rec["channel"].astype(np.int64)
    raw_ts = rec["ticks"]
    bad = ~np.isin(ch, list(channels))
    if bad.any():
        i = int(np.argmax(bad))
        raise TagParseError(
            f"byte {header + 9 * i}: unknown channel {ch[i]} (declared {sorted(channels)})")
    too_big = raw_ts > np.uint64(_INT64_MAX)
    if too_big.any():
        i = int(np.argmax(too_big))
        raise TagParseError(f"byte {header + 9 * i}: timestamp overflows signed 64-bit ticks")
    return ch, raw_ts.astype(np.int64), tick_fs * 1e-15


def write_tags_text(stream: TagStream, path) -> None:
    lines = [f"#tick_ps {round(stream.tick_duration * 1e12)}"]
    lines.extend(f"{int(c)}\t{int(t)}" for c, t in zip(stream.channels, stream.timestamps))
    Path(path).write_text("\n".join(lines) + "\n")


def write_tags_binary(stream: TagStream, path) -> None:
    rec = np.empty(len(stream), dtype=np.dtype([("channel", "u1"), ("ticks", "<u8")]))
    rec["channel"] = stream.channels
    rec["ticks"] = stream.timestamps
    tick_fs = round(stream.tick_duration * 1e15)
    Path(path).write_bytes(_BINARY_MAGIC + tick_fs.to_bytes(4, "little") + rec.tobytes())


# ---------------------------------------------------------------------------
# coincidence analysis

@dataclass(frozen=True)
class CoincidenceHistogram:
    """Delay histogram between two channels, bins centred on k * bin_width.

    Bin k covers delays in [k*bin_width - bin_width/2, k*bin_width +
    bin_width/2); delays run over [-delay_range, delay_range].
    """

    bin_width: int  # ticks
    delay_range: int  # ticks
    counts: np.ndarray  # int64, 2*(delay_range//bin_width) + 1 bins
    tick_duration: float
    duration_ticks: int
    ch_a: int
    ch_b: int
    n_ch_a: int
    n_ch_b: int

    def __post_init__(self):
        if self.bin_width < 1:
            raise ValueError("bin_width must be at least one tick")
        counts = np.asarray(self.counts, dtype=np.int64)
        expected = 2 * (self.delay_range // self.bin_width) + 1
        if counts.shape != (expected,):
            raise ValueError(f"expected {expected} bins, got {counts.shape}")
        if counts.min(initial=0) < 0:
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def delay_centers(self) -> np.ndarray:
        half = self.delay_range // self.bin_width
        return np.arange(-half, half + 1, dtype=np.int64) * self.bin_width


def _pair_indices(ta: np.ndarray, tb: np.ndarray, reach: int):
    """Indices of all (a, b) pairs with |tb - ta| <= reach, via a merge-style
    sliding window over the two sorted arrays."""
    lo = np.searchsorted(ta, tb - reach, side="left")
    hi = np.searchsorted(ta, tb + reach, side="right")
    per_b = hi - lo
    total = int(per_b.sum())
    b_idx = np.repeat(np.arange(tb.size), per_b)
    starts = np.concatenate(([0], np.cumsum(per_b)[:-1]))
    a_idx = np.arange(total) - np.repeat(starts, per_b) + np.repeat(lo, per_b)
    return a_idx, b_idx


def coincidence_histogram(stream: TagStream, ch_a: int = 1, ch_b: int = 2, *,
                          bin_width: int, delay_range: int) -> CoincidenceHistogram:
    """Histogram of delays t_b - t_a over all cross-channel pairs in range.

    Every (a, b) pair with |t_b - t_a| <= delay_range contributes once; when
    ch_a == ch_b the self-pairing of a record with itself is excluded.  Cost
    is O(tags + pairs in range).
    """
    if bin_width < 1:
        raise ValueError("bin_width must be at least one tick")
    if delay_range < 0 or delay_range % bin_width:
        raise ValueError("delay_range must be a non-negative multiple of bin_width")
    ta = stream.channel_timestamps(ch_a)
    tb = stream.channel_timestamps(ch_b)
    half = delay_range // bin_width
    counts = np.zeros(2 * half + 1, dtype=np.int64)
    if ta.size and tb.size:
        a_idx, b_idx = _pair_indices(ta, tb, delay_range)
        if ch_a == ch_b:
            keep = a_idx != b_idx
            a_idx, b_idx = a_idx[keep], b_idx[keep]
        delays = tb[b_idx] - ta[a_idx]
        # round-half-up binning keeps bin k centred on k*bin_width
        k = np.floor_divide(2 * delays + bin_width, 2 * bin_width)
        counts = np.bincount((k + half).astype(np.intp), minlength=2 * half + 1).astype(np.int64)
    return CoincidenceHistogram(
        bin_width=int(bin_width), delay_range=int(delay_range), counts=counts,
        tick_duration=stream.tick_duration, duration_ticks=stream.duration_ticks,
        ch_a=int(ch_a), ch_b=int(ch_b), n_ch_a=int(ta.size), n_ch_b=int(tb.size),
    )


def peak_and_accidentals(hist: CoincidenceHistogram, rep_period: float, window: int) -> dict:
    """Zero-delay peak rate vs the accidental floor sampled one and two pulse
    periods away.

    ``peak`` sums counts in bins within +-window/2 of zero delay; the
    accidental estimate is the mean of the same window centred on -2, -1, +1
    and +2 rep periods (rounded to the nearest tick).  Rates are counts per
    second of acquisition; CAR is their ratio (inf when no accidentals).
    """
    if window < 1:
        raise ValueError("window must be at least one tick")
    if not rep_period > 0:
        raise ValueError("rep_period must be positive")
    centers = hist.delay_centers

    def window_counts(center: int) -> int:
        return int(hist.counts[np.abs(centers - center) <= window / 2].sum())

    peak = window_counts(0)
    accidental = float(np.mean([window_counts(round(m * rep_period)) for m in (-2, -1, 1, 2)]))
    duration_s = hist.duration_ticks * hist.tick_duration
    if not duration_s > 0:
        raise ValueError("histogram carries no acquisition duration")
    return {
        "peak_rate": peak / duration_s,
        "accidental_rate": accidental / duration_s,
        "CAR": math.inf if accidental == 0 else peak / accidental,
    }


# ---------------------------------------------------------------------------
# heralded autocorrelation

@dataclass(frozen=True)
class HeraldedG2Histogram:
    """g2_h versus herald separation m, with the raw counts retained.

    ``triples[m]`` is sum_i A_i * B_{i+m} over heralds i; the normalization
    g2_h(m) = triples[m] * n_heralds / (singles_a * singles_b) follows, so
    uncertainty estimates can be rebuilt from the stored counts.
    """

    separations: np.ndarray  # m = 0..m_max
    g2: np.ndarray
    triples: np.ndarray
    n_heralds: int
    singles_a: int
    singles_b: int
    window: int  # ticks
    herald_ch: int = 2
    ch_a: int = 1
    ch_b: int = 3

    def __post_init__(self):
        m = np.asarray(self.separations, dtype=np.int64)
        g2 = np.asarray(self.g2, dtype=float)
        triples = np.asarray(self.triples, dtype=np.int64)
        if not (m.shape == g2.shape == triples.shape):
            raise ValueError("separations, g2 and triples must be parallel arrays")
        if g2.size and g2.min() < 0:
            raise ValueError("g2 values must be non-negative")
        object.__setattr__(self, "separations", m)
        object.__setattr__(self, "g2", g2)
        object.__setattr__(self, "triples", triples)

    @property
    def zero_separation(self) -> float:
        return float(self.g2[0])


def heralded_g2(stream: TagStream, herald_ch: int = 2, ch_a: int = 1, ch_b: int = 3, *,
                window: int = 10, m_max: int = 10) -> HeraldedG2Histogram:
    """Heralded autocorrelation versus the number of heralds between clicks.

    For each herald i, A_i (B_i) flags a ch_a (ch_b) click inside the window
    [t_i - window//2, t_i - window//2 + window); the default 10-tick window is
    one 810 ps histogram bar.  g2_h(m) = sum_i A_i B_{i+m} * H / (sum A sum B)
    for m = 0..m_max (clamped to H-1).
    """
    if window < 1:
        raise ValueError("window must be at least one tick")
    if m_max < 0:
        raise ValueError("m_max must be non-negative")
    th = stream.channel_timestamps(herald_ch)
    if th.size == 0:
        raise ValueError("no herald events; g2_h normalization undefined")
    shift = window // 2

    def click_flags(channel: int) -> np.ndarray:
        t = stream.channel_timestamps(channel)
        lo = np.searchsorted(t, th - shift, side="left")
        hi = np.searchsorted(t, th - shift + window, side="left")
        return (hi > lo).astype(np.int64)

    a = click_flags(ch_a)
    b = click_flags(ch_b)
    n_heralds = int(th.size)
    singles_a = int(a.sum())
    singles_b = int(b.sum())
    if singles_a == 0 or singles_b == 0:
        raise ValueError("zero heralded singles in one arm; g2_h normalization undefined")
    m_hi = min(m_max, n_heralds - 1)
    separations = np.arange(m_hi + 1, dtype=np.int64)
    triples = np.array(
        [int(a[: n_heralds - m] @ b[m:]) if m else int(a @ b) for m in separations],
        dtype=np.int64,
    )
    g2 = triples * n_heralds / (singles_a * singles_b)
    return HeraldedG2Histogram(
        separations=separations, g2=g2.astype(float), triples=triples,
        n_heralds=n_heralds, singles_a=singles_a, singles_b=singles_b,
        window=int(window), herald_ch=int(herald_ch), ch_a=int(ch_a), ch_b=int(ch_b),
    )


# ---------------------------------------------------------------------------
# synthetic source

@dataclass(frozen=True)
class SimulationConfig:
    """Pulsed pair source with losses, darks, jitter and detector dead time.

    Per pulse the pair number is Poisson (or thermal) with mean
    ``mean_pairs_per_pulse``; each idler is detected with
    ``herald_transmittance``, each signal survives with
    ``signal_transmittance`` and is routed to arm A with probability
    ``splitter_ratio``.  Clicks of one detector within a pulse collapse to a
    single click (the detector cannot resolve them); dead time is enforced
    per detector afterwards.  Fully reproducible from ``seed``.
    """

    duration: float  # s
    mean_pairs_per_pulse: float
    rep_period: float = 54e-9  # s
    herald_transmittance: float = 0.1
    signal_transmittance: float = 0.4
    splitter_ratio: float = 0.47  # fraction of surviving signals to arm A
    dark_rates: tuple = (0.0, 0.0, 0.0)  # Hz for channels (1, 2, 3)
    dead_time: float = 15e-6  # s per detector
    jitter_std: float = 0.0  # s
    pair_statistics: str = "poisson"  # or "thermal"
    seed: int = 0
    tick_duration: float = TICK_SECONDS

    def __post_init__(self):
        if not self.duration >= 0:
            raise ValueError("duration must be non-negative")
        if not self.rep_period > 0:
            raise ValueError("rep_period must be positive")
        if not self.mean_pairs_per_pulse >= 0:
            raise ValueError("mean_pairs_per_pulse must be non-negative")
        for name in ("herald_transmittance", "signal_transmittance", "splitter_ratio"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability in [0, 1]")
        if len(self.dark_rates) != 3 or any(r < 0 for r in self.dark_rates):
            raise ValueError("dark_rates must be three non-negative rates (Hz)")
        if self.dead_time < 0 or self.jitter_std < 0:
            raise ValueError("dead_time and jitter_std must be non-negative")
        if self.pair_statistics not in ("poisson", "thermal"):
            raise ValueError("pair_statistics must be 'poisson' or 'thermal'")
        if not self.tick_duration > 0:
            raise ValueError("tick_duration must be positive")

    @property
    def n_pulses(self) -> int:
        return int(round(self.duration / self.rep_period))


def _dead_time_filter(ticks: np.ndarray, dead_ticks: float) -> np.ndarray:
    """Non-paralyzable dead time: keep a click iff it falls at least
    dead_ticks after the previously kept one."""
    if dead_ticks <= 0 or ticks.size == 0:
        return ticks
    keep = np.zeros(ticks.size, dtype=bool)
    last = -math.inf
    for i, t in enumerate(ticks):
        if t - last >= dead_ticks:
            keep[i] = True
            last = t
    return ticks[keep]


def simulate_tags(config: SimulationConfig) -> TagStream:
    rng = np.random.default_rng(config.seed)
    n_pulses = config.n_pulses
    tick = config.tick_duration
    p_a = config.signal_transmittance * config.splitter_ratio
    p_b = config.signal_transmittance * (1.0 - config.splitter_ratio)
    q = config.herald_transmittance
    mu = config.mean_pairs_per_pulse

    clicks = {1: [], 2: [], 3: []}
    chunk = 1_000_000
    for start in range(0, n_pulses, chunk):
        count = min(chunk, n_pulses - start)
        if config.pair_statistics == "thermal":
            pairs = rng.geometric(1.0 / (1.0 + mu), count) - 1 if mu > 0 else np.zeros(count, np.int64)
        else:
            pairs = rng.poisson(mu, count)
        hot = np.nonzero(pairs)[0]
        n_hot = pairs[hot]
        n_herald = rng.binomial(n_hot, q)
        n_a = rng.binomial(n_hot, p_a)
        remaining = n_hot - n_a
        if p_a < 1.0:
            n_b = rng.binomial(remaining, p_b / (1.0 - p_a))
        else:
            n_b = np.zeros_like(remaining)
        pulse_index = start + hot
        for channel, detected in ((1, n_a), (2, n_herald), (3, n_b)):
            hit = pulse_index[detected > 0]
            t = hit * config.rep_period
            if config.jitter_std > 0:
                t = t + rng.normal(0.0, config.jitter_std, t.size)
            clicks[channel].append(np.maximum(np.rint(t / tick), 0).astype(np.int64))

    for channel, rate in zip((1, 2, 3), config.dark_rates):
        if rate > 0 and config.duration > 0:
            n_dark = rng.poisson(rate * config.duration)
            t = rng.uniform(0.0, config.duration, n_dark)
            clicks[channel].append(np.rint(t / tick).astype(np.int64))

    dead_ticks = config.dead_time / tick
    all_ch, all_ts = [], []
    for channel in (1, 2, 3):
        if not clicks[channel]:
            continue
        ticks = np.unique(np.concatenate(clicks[channel]))  # collapse same-tick arrivals
        ticks = _dead_time_filter(ticks, dead_ticks)
        all_ch.append(np.full(ticks.size, channel, dtype=np.int64))
        all_ts.append(ticks)

    if all_ts:
        ch = np.concatenate(all_ch)
        ts = np.concatenate(all_ts)
        order = np.lexsort((ch, ts))
        ch, ts = ch[order], ts[order]
    else:
        ch = np.zeros(0, dtype=np.int64)
        ts = np.zeros(0, dtype=np.int64)

    metadata = {
        "rep_period_ticks": config.rep_period / tick,
        "duration_ticks": int(math.ceil(config.duration / tick)) if config.duration > 0 else 0,
        "n_pulses": n_pulses,
        "seed": config.seed,
    }
    return TagStream(ch, ts, tick, DEFAULT_CHANNELS, metadata)


# ---------------------------------------------------------------------------
# result serialization (CSV for plotting, JSON with full parameter echo)

def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def write_coincidence_csv(hist: CoincidenceHistogram, path) -> None:
    lines = [
        f"# bin_width_ticks {hist.bin_width}",
        f"# delay_range_ticks {hist.delay_range}",
        f"# tick_duration_s {hist.tick_duration!r}",
        f"# duration_ticks {hist.duration_ticks}",
        f"# channels {hist.ch_a},{hist.ch_b}",
        f"# singles {hist.n_ch_a},{hist.n_ch_b}",
        "delay_ticks,count",
    ]
    lines.extend(f"{int(d)},{int(c)}" for d, c in zip(hist.delay_centers, hist.counts))
    Path(path).write_text("\n".join(lines) + "\n")


def write_coincidence_json(hist: CoincidenceHistogram, path) -> None:
    _write_json(path, {
        "schema": "taperfwm.coincidences/1",
        "bin_width_ticks": hist.bin_width,
        "delay_range_ticks": hist.delay_range,
        "tick_duration_s": hist.tick_duration,
        "duration_ticks": hist.duration_ticks,
        "ch_a": hist.ch_a,
        "ch_b": hist.ch_b,
        "n_ch_a": hist.n_ch_a,
        "n_ch_b": hist.n_ch_b,
        "delay_ticks": hist.delay_centers.tolist(),
        "counts": hist.counts.tolist(),
    })


def write_g2_csv(hist: HeraldedG2Histogram, path) -> None:
    lines = [
        f"# window_ticks {hist.window}",
        f"# herald_ch {hist.herald_ch}",
        f"# channels {hist.ch_a},{hist.ch_b}",
        f"# n_heralds {hist.n_heralds}",
        f"# singles {hist.singles_a},{hist.singles_b}",
        "separation,g2,triples",
    ]
    lines.extend(
        f"{int(m)},{float(g)!r},{int(t)}"
        for m, g, t in zip(hist.separations, hist.g2, hist.triples)
    )
    Path(path).write_text("\n".join(lines) + "\n")


def write_g2_json(hist: HeraldedG2Histogram, path) -> None:
    _write_json(path, {
        "schema": "taperfwm.g2h/1",
        "window_ticks": hist.window,
        "herald_ch": hist.herald_ch,
        "ch_a": hist.ch_a,
        "ch_b": hist.ch_b,
        "n_heralds": hist.n_heralds,
        "singles_a": hist.singles_a,
        "singles_b": hist.singles_b,
        "separations": hist.separations.tolist(),
        "g2": hist.g2.tolist(),
        "triples": hist.triples.tolist(),
    })
