"""SRAM fault maps.

A fault map lists which bits of one SRAM instance are faulty at one supply
voltage. Two generation methods are provided:

* uniform-random maps (every bit equally likely), and
* hardware-like maps, where faults form vertical runs in a few weak
  columns, cluster toward the bottom rows, and carry an onset voltage (the
  highest supply voltage at which the bit misbehaves). Filtering a
  hardware-like fault set by onset voltage yields one map per voltage step
  with the inclusion property: a bit faulty at some voltage is faulty at
  every lower voltage.

Maps serialize to a line-oriented text format (``# sram-fault-map v1``)
with LF endings and faults sorted by linear bit index.
"""

from __future__ import annotations

import enum
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .rng import SeedLike, make_rng

VOLTAGE_MIN_MV = 540
VOLTAGE_MAX_MV = 600
VOLTAGE_STEP_MV = 10
VOLTAGE_SWEEP_MV = tuple(range(VOLTAGE_MIN_MV, VOLTAGE_MAX_MV + 1, VOLTAGE_STEP_MV))

# Onset voltage of the bottom bit of a weak-column run is drawn from this set.
RUN_ONSET_CHOICES_MV = (560, 570, 580, 590, 600)

# Share of SRAM instances that show any fault at the lowest voltage.
DEFAULT_FAULTY_FRACTION = 2174 / 14420

FORMAT_MAGIC = "# sram-fault-map v1"

_ID_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


class FaultMapFormatError(ValueError):
    """Raised for malformed fault-map text; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class SramGeometry:
    """Bit layout of one SRAM instance as a rows x cols grid."""

    rows: int = 128
    cols: int = 128

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"geometry must be at least 1x1, got {self.rows}x{self.cols}")

    @property
    def capacity(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True, order=True)
class BitLocation:
    """Bit coordinate; row index grows toward higher addresses."""

    row: int
    col: int

    def linear(self, geometry: SramGeometry) -> int:
        return self.row * geometry.cols + self.col


class CorruptionKind(enum.Enum):
    STUCK_AT_0 = "stuck0"
    STUCK_AT_1 = "stuck1"
    BIT_FLIP = "flip"


class TimingMode(enum.Enum):
    PERMANENT = "permanent"
    TRANSIENT = "transient"
    INTERMITTENT = "intermittent"


@dataclass(frozen=True)
class FaultTiming:
    """When a fault is active, in units of cache access ticks.

    Permanent faults are active at every tick. A transient fault fires at
    the first qualifying access (tick >= fire_tick) and is then removed by
    the injector. An intermittent fault is active for ticks in
    [start_tick, start_tick + duration).
    """

    mode: TimingMode = TimingMode.PERMANENT
    fire_tick: int = 0
    start_tick: int = 0
    duration: int = 0

    def __post_init__(self):
        if self.mode is TimingMode.TRANSIENT and self.fire_tick < 0:
            raise ValueError("transient fire_tick must be >= 0")
        if self.mode is TimingMode.INTERMITTENT:
            if self.start_tick < 0 or self.duration < 1:
                raise ValueError("intermittent needs start_tick >= 0 and duration >= 1")

    @classmethod
    def permanent(cls) -> "FaultTiming":
        return cls(TimingMode.PERMANENT)

    @classmethod
    def transient(cls, fire_tick: int) -> "FaultTiming":
        return cls(TimingMode.TRANSIENT, fire_tick=fire_tick)

    @classmethod
    def intermittent(cls, start_tick: int, duration: int) -> "FaultTiming":
        return cls(TimingMode.INTERMITTENT, start_tick=start_tick, duration=duration)

    def token(self) -> str:
        if self.mode is TimingMode.PERMANENT:
            return "permanent"
        if self.mode is TimingMode.TRANSIENT:
            return f"transient:{self.fire_tick}"
        return f"intermittent:{self.start_tick}:{self.duration}"


@dataclass(frozen=True)
class FaultSpec:
    """One faulty bit: where, when, and how it corrupts."""

    location: BitLocation
    timing: FaultTiming = field(default_factory=FaultTiming.permanent)
    kind: CorruptionKind = CorruptionKind.STUCK_AT_0
    onset_voltage_mv: int | None = None

    def __post_init__(self):
        o = self.onset_voltage_mv
        if o is not None and not VOLTAGE_MIN_MV <= o <= VOLTAGE_MAX_MV:
            raise ValueError(f"onset voltage {o} mV outside [{VOLTAGE_MIN_MV}, {VOLTAGE_MAX_MV}]")


@dataclass(frozen=True)
class FaultMap:
    """Fault set of one SRAM instance at one supply voltage.

    Faults are stored sorted by linear bit index and must not share a
    location. Construction normalizes the order.
    """

    sram_id: str
    voltage_mv: int
    geometry: SramGeometry
    faults: tuple[FaultSpec, ...] = ()

    def __post_init__(self):
        if not _ID_RE.match(self.sram_id):
            raise ValueError(f"invalid sram_id token: {self.sram_id!r}")
        geo = self.geometry
        seen = set()
        for f in self.faults:
            loc = f.location
            if not (0 <= loc.row < geo.rows and 0 <= loc.col < geo.cols):
                raise ValueError(f"fault location {loc} outside {geo.rows}x{geo.cols}")
            if loc in seen:
                raise ValueError(f"duplicate fault location {loc}")
            seen.add(loc)
        ordered = tuple(sorted(self.faults, key=lambda f: f.location.linear(geo)))
        object.__setattr__(self, "faults", ordered)

    @property
    def fault_count(self) -> int:
        return len(self.faults)

    def location_array(self) -> np.ndarray:
        """(n, 2) int array of fault (row, col) pairs."""
        return np.array([(f.location.row, f.location.col) for f in self.faults], dtype=np.int64).reshape(-1, 2)


@dataclass(frozen=True)
class FaultCountDistribution:
    """Discrete distribution over per-SRAM fault counts."""

    counts: tuple[int, ...]
    masses: tuple[float, ...]

    def __post_init__(self):
        if len(self.counts) != len(self.masses) or not self.counts:
            raise ValueError("counts and masses must be non-empty and equal length")
        if list(self.counts) != sorted(set(self.counts)):
            raise ValueError("counts must be strictly increasing")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be >= 0")
        if any(m < 0 for m in self.masses):
            raise ValueError("masses must be >= 0")
        total = float(sum(self.masses))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"masses must sum to 1 (got {total})")

    @cached_property
    def cumulative(self) -> tuple[float, ...]:
        cum = []
        acc = 0.0
        for m in self.masses:
            acc += m
            cum.append(acc)
        cum[-1] = max(cum[-1], 1.0)
        return tuple(cum)

    def sample(self, rng: np.random.Generator) -> int:
        r = float(rng.random())
        idx = bisect_right(self.cumulative, r)
        return self.counts[min(idx, len(self.counts) - 1)]

    @classmethod
    def point_mass(cls, count: int) -> "FaultCountDistribution":
        return cls((count,), (1.0,))

    @classmethod
    def default(cls) -> "FaultCountDistribution":
        """Default per-SRAM fault-count histogram.

        Counts 2/4/6/8 carry 37%/15%/9%/5%. The untabulated remainder is an
        explicit choice: 8%/6%/5%/4% on 10/12/14/16 and the last 11% spread
        over even counts in [18, 600] with weight proportional to 1/count.
        """
        counts = [2, 4, 6, 8, 10, 12, 14, 16]
        masses = [0.37, 0.15, 0.09, 0.05, 0.08, 0.06, 0.05, 0.04]
        tail = list(range(18, 601, 2))
        w = np.array([1.0 / c for c in tail])
        w *= 0.11 / w.sum()
        counts += tail
        masses += [float(x) for x in w]
        return cls(tuple(counts), tuple(masses))


@dataclass(frozen=True)
class SpatialParams:
    """Knobs of the weak-column vertical-run generator."""

    count_dist: FaultCountDistribution = field(default_factory=FaultCountDistribution.default)
    mean_run_length: float = 4.0
    gap_probability: float = 0.2
    outlier_probability: float = 0.05

    def __post_init__(self):
        if self.mean_run_length <= 0:
            raise ValueError("mean_run_length must be > 0")
        if not 0 <= self.gap_probability < 1:
            raise ValueError("gap_probability must be in [0, 1)")
        if not 0 <= self.outlier_probability <= 1:
            raise ValueError("outlier_probability must be in [0, 1]")


@dataclass(frozen=True)
class CorpusParams:
    """Parameters of a synthetic multi-SRAM corpus."""

    geometry: SramGeometry = field(default_factory=SramGeometry)
    spatial: SpatialParams = field(default_factory=SpatialParams)
    faulty_fraction: float = DEFAULT_FAULTY_FRACTION

    def __post_init__(self):
        if not 0 <= self.faulty_fraction <= 1:
            raise ValueError("faulty_fraction must be in [0, 1]")


# ---------------------------------------------------------------------------
# Serialization (v1 text format)
# ---------------------------------------------------------------------------


def serialize_fault_map(fmap: FaultMap) -> str:
    """Render a fault map in the v1 text format (LF endings, sorted faults)."""
    lines = [
        FORMAT_MAGIC,
        f"sram_id={fmap.sram_id}",
        f"voltage_mv={fmap.voltage_mv}",
        f"rows={fmap.geometry.rows}",
        f"cols={fmap.geometry.cols}",
    ]
    for f in fmap.faults:
        parts = [
            "fault",
            str(f.location.row),
            str(f.location.col),
            f.kind.value,
            f.timing.token(),
        ]
        if f.onset_voltage_mv is not None:
            parts.append(f"onset_mv={f.onset_voltage_mv}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _parse_int(token: str, what: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FaultMapFormatError(f"invalid {what}: {token!r}", line) from None


def _parse_header_kv(line_text: str, key: str, line: int) -> str:
    prefix = key + "="
    if not line_text.startswith(prefix):
        raise FaultMapFormatError(f"expected '{key}=<value>', got {line_text!r}", line)
    return line_text[len(prefix):]


def _parse_timing(token: str, line: int) -> FaultTiming:
    if token == "permanent":
        return FaultTiming.permanent()
    if token.startswith("transient:"):
        return FaultTiming.transient(_parse_int(token[10:], "transient tick", line))
    if token.startswith("intermittent:"):
        bits = token[13:].split(":")
        if len(bits) != 2:
            raise FaultMapFormatError(f"invalid intermittent timing: {token!r}", line)
        return FaultTiming.intermittent(
            _parse_int(bits[0], "intermittent start", line),
            _parse_int(bits[1], "intermittent duration", line),
        )
    raise FaultMapFormatError(f"unknown timing: {token!r}", line)


def parse_fault_map(text: str) -> FaultMap:
    """Parse v1 fault-map text; errors carry the offending line number."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 5:
        raise FaultMapFormatError("truncated header (need magic + 4 keys)", len(lines) + 1)
    if lines[0] != FORMAT_MAGIC:
        raise FaultMapFormatError(f"bad magic line, expected {FORMAT_MAGIC!r}", 1)
    sram_id = _parse_header_kv(lines[1], "sram_id", 2)
    if not _ID_RE.match(sram_id):
        raise FaultMapFormatError(f"invalid sram_id token: {sram_id!r}", 2)
    voltage = _parse_int(_parse_header_kv(lines[2], "voltage_mv", 3), "voltage_mv", 3)
    rows = _parse_int(_parse_header_kv(lines[3], "rows", 4), "rows", 4)
    cols = _parse_int(_parse_header_kv(lines[4], "cols", 5), "cols", 5)
    try:
        geo = SramGeometry(rows, cols)
    except ValueError as e:
        raise FaultMapFormatError(str(e), 4) from None

    kinds = {k.value: k for k in CorruptionKind}
    faults = []
    seen: set[tuple[int, int]] = set()
    for i, raw in enumerate(lines[5:], start=6):
        toks = raw.split(" ")
        if toks[0] != "fault" or len(toks) not in (5, 6):
            raise FaultMapFormatError(f"expected fault line, got {raw!r}", i)
        row = _parse_int(toks[1], "row", i)
        col = _parse_int(toks[2], "col", i)
        if not (0 <= row < geo.rows and 0 <= col < geo.cols):
            raise FaultMapFormatError(f"location ({row}, {col}) outside {geo.rows}x{geo.cols}", i)
        if (row, col) in seen:
            raise FaultMapFormatError(f"duplicate fault location ({row}, {col})", i)
        seen.add((row, col))
        if toks[3] not in kinds:
            raise FaultMapFormatError(f"unknown corruption kind: {toks[3]!r}", i)
        timing = _parse_timing(toks[4], i)
        onset = None
        if len(toks) == 6:
            if not toks[5].startswith("onset_mv="):
                raise FaultMapFormatError(f"expected onset_mv=<int>, got {toks[5]!r}", i)
            onset = _parse_int(toks[5][9:], "onset_mv", i)
            if not VOLTAGE_MIN_MV <= onset <= VOLTAGE_MAX_MV:
                raise FaultMapFormatError(f"onset_mv {onset} outside [{VOLTAGE_MIN_MV}, {VOLTAGE_MAX_MV}]", i)
        faults.append(FaultSpec(BitLocation(row, col), timing, kinds[toks[3]], onset))
    return FaultMap(sram_id, voltage, geo, tuple(faults))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def generate_random_map(
    n_faults: int,
    geometry: SramGeometry,
    seed: SeedLike | np.random.Generator,
    *,
    sram_id: str = "rnd",
    voltage_mv: int = VOLTAGE_MIN_MV,
) -> FaultMap:
    """Uniform-random map: n distinct bits without replacement, permanent stuck-at-0."""
    if not 0 <= n_faults <= geometry.capacity:
        raise ValueError(f"n_faults {n_faults} exceeds capacity {geometry.capacity}")
    rng = make_rng(seed)
    idx = rng.choice(geometry.capacity, size=n_faults, replace=False)
    faults = tuple(
        FaultSpec(BitLocation(int(i) // geometry.cols, int(i) % geometry.cols))
        for i in np.sort(idx)
    )
    return FaultMap(sram_id, voltage_mv, geometry, faults)


def match_random_map(hw: FaultMap, seed: SeedLike | np.random.Generator) -> FaultMap:
    """Random map with the same fault count and geometry as a hardware map."""
    return generate_random_map(
        hw.fault_count, hw.geometry, seed, sram_id=hw.sram_id, voltage_mv=hw.voltage_mv
    )


def sample_fault_count(dist: FaultCountDistribution, seed: SeedLike | np.random.Generator) -> int:
    """Draw one per-SRAM fault count."""
    return dist.sample(make_rng(seed))


def generate_hwlike_sram(
    geometry: SramGeometry,
    params: SpatialParams,
    seed: SeedLike | np.random.Generator,
) -> tuple[FaultSpec, ...]:
    """Generate one SRAM's full fault set with weak-column vertical runs.

    The drawn fault count is split over K = max(1, round(N / mean_run_length))
    runs in distinct columns. Each run is anchored at a row in the bottom
    quartile and grows upward, skipping bits with the gap probability. The
    bottom bit of a run draws its onset voltage from RUN_ONSET_CHOICES_MV and
    onsets drop by 0 or 10 mV per bit upward (equal odds, floored at 540 mV),
    which guarantees voltage inclusion by construction. Each fault is finally
    relocated to a uniform random free bit with the outlier probability,
    keeping its onset.
    """
    rng = make_rng(seed)
    n = min(params.count_dist.sample(rng), geometry.capacity)
    if n == 0:
        return ()
    k = max(1, round(n / params.mean_run_length))
    k = min(k, geometry.cols)
    run_cols = [int(c) for c in rng.choice(geometry.cols, size=k, replace=False)]
    base, extra = divmod(n, k)
    anchor_lo = (3 * geometry.rows) // 4

    placed: list[tuple[int, int, int]] = []  # (row, col, onset_mv)
    for j, col in enumerate(run_cols):
        want = base + (1 if j < extra else 0)
        if want == 0:
            continue
        anchor = int(rng.integers(anchor_lo, geometry.rows))
        rows_in_run: list[int] = []
        row = anchor
        while len(rows_in_run) < want and row >= 0:
            if rng.random() >= params.gap_probability:
                rows_in_run.append(row)
            row -= 1
        # Ran off the top (only possible for very dense runs): extend below
        # the anchor, which is always free within this column.
        row = anchor + 1
        while len(rows_in_run) < want:
            rows_in_run.append(row)
            row += 1
        rows_in_run.sort(reverse=True)
        onset = int(rng.choice(RUN_ONSET_CHOICES_MV))
        for step, r in enumerate(rows_in_run):
            if step > 0 and rng.integers(0, 2) == 1:
                onset = max(VOLTAGE_MIN_MV, onset - VOLTAGE_STEP_MV)
            placed.append((r, col, onset))

    occupied = {(r, c) for r, c, _ in placed}
    out: list[FaultSpec] = []
    for r, c, onset in placed:
        if rng.random() < params.outlier_probability:
            occupied.discard((r, c))
            while True:
                i = int(rng.integers(0, geometry.capacity))
                cand = (i // geometry.cols, i % geometry.cols)
                if cand not in occupied:
                    break
            occupied.add(cand)
            r, c = cand
        out.append(FaultSpec(BitLocation(r, c), onset_voltage_mv=onset))
    out.sort(key=lambda f: f.location.linear(geometry))
    return tuple(out)


def derive_map_at_voltage(
    faults: Iterable[FaultSpec],
    voltage_mv: int,
    geometry: SramGeometry,
    sram_id: str = "sram",
) -> FaultMap:
    """Project a hardware-like fault set onto one voltage of the sweep.

    A bit is faulty at voltage V exactly when its onset voltage is >= V, so
    maps at lower voltages are supersets of maps at higher voltages.
    """
    if not VOLTAGE_MIN_MV <= voltage_mv <= VOLTAGE_MAX_MV:
        raise ValueError(f"voltage {voltage_mv} mV outside modeled window")
    selected = []
    for f in faults:
        if f.onset_voltage_mv is None:
            raise ValueError("fault without onset voltage cannot be voltage-filtered")
        if f.onset_voltage_mv >= voltage_mv:
            selected.append(f)
    return FaultMap(sram_id, voltage_mv, geometry, tuple(selected))


def generate_corpus(n_srams: int, params: CorpusParams, seed: SeedLike) -> list[FaultMap]:
    """Generate n_srams x 7 maps (one per sweep voltage, ascending).

    Each SRAM is faulty at the lowest voltage with probability
    params.faulty_fraction; the rest stay empty at every voltage. SRAM i
    consumes the stream (seed, 0, i), so corpora are reproducible and
    SRAM-parallel.
    """
    if n_srams < 1:
        raise ValueError("n_srams must be >= 1")
    maps: list[FaultMap] = []
    for i in range(n_srams):
        rng = make_rng(seed, 0, i)
        faults: tuple[FaultSpec, ...] = ()
        if rng.random() < params.faulty_fraction:
            faults = generate_hwlike_sram(params.geometry, params.spatial, rng)
        sram_id = f"sram{i:05d}"
        for v in VOLTAGE_SWEEP_MV:
            maps.append(derive_map_at_voltage(faults, v, params.geometry, sram_id))
    return maps


def probability_heatmap(corpus: Sequence[FaultMap]) -> np.ndarray:
    """Per-bit fault frequency over a corpus: entry (r, c) in [0, 1]."""
    maps = list(corpus)
    if not maps:
        raise ValueError("empty corpus")
    geo = maps[0].geometry
    if any(m.geometry != geo for m in maps):
        raise ValueError("corpus mixes geometries")
    acc = np.zeros((geo.rows, geo.cols), dtype=np.float64)
    for m in maps:
        for f in m.faults:
            acc[f.location.row, f.location.col] += 1.0
    return acc / len(maps)
