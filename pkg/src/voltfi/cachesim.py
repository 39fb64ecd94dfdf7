"""Set-associative write-back cache with bit-granular fault bindings.

The cache intercepts every read/write request. Installing a fault map binds
each SRAM bit to a physical cache bit (set, way, bit offset in the line);
active faults corrupt the stored line on every access that touches it, so
evictions carry the corruption out to the backing store.

Bit numbering inside a line is little-endian: line bit b lives in byte
b // 8 at weight 1 << (b % 8).

Layout convention from SRAM linear bit index to cache bits:
line index = bit // line_bits, set = line % num_sets, way = line // num_sets.
With the 128x128 SRAM default and 16 sets x 2 ways x 64 B lines, the bottom
quarter of the SRAM (rows 96..127) maps to sets 8..15 of way 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .faultmap import CorruptionKind, FaultMap, TimingMode


class CrashReason(enum.Enum):
    OUT_OF_RANGE = "out_of_range"
    STEP_BUDGET_EXCEEDED = "step_budget_exceeded"
    NON_FINITE_CONTROL = "non_finite_control"


class CrashSignal(Exception):
    """Raised when a simulated run dies (the segfault analogue)."""

    def __init__(self, reason: CrashReason):
        super().__init__(reason.value)
        self.reason = reason


@dataclass(frozen=True)
class CacheGeometry:
    num_sets: int = 16
    associativity: int = 2
    line_bytes: int = 64

    def __post_init__(self):
        if self.num_sets < 1 or self.associativity < 1 or self.line_bytes < 1:
            raise ValueError("cache geometry fields must be >= 1")

    @property
    def num_lines(self) -> int:
        return self.num_sets * self.associativity

    @property
    def line_bits(self) -> int:
        return self.line_bytes * 8

    @property
    def capacity_bits(self) -> int:
        return self.num_lines * self.line_bits


@dataclass(frozen=True)
class CacheBitAddr:
    set: int
    way: int
    bit_in_line: int


@dataclass(frozen=True)
class AccessRequest:
    """One cache request; must not span a line boundary."""

    kind: str  # "read" | "write"
    address: int
    length: int
    payload: bytes | None = None

    def __post_init__(self):
        if self.kind not in ("read", "write"):
            raise ValueError(f"kind must be 'read' or 'write', got {self.kind!r}")
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if self.kind == "write":
            if self.payload is None or len(self.payload) != self.length:
                raise ValueError("write payload must match length")
        elif self.payload is not None:
            raise ValueError("read takes no payload")


def map_fault_to_cache(linear_bit: int, geometry: CacheGeometry) -> CacheBitAddr:
    """Map an SRAM linear bit index onto (set, way, bit_in_line)."""
    if not 0 <= linear_bit < geometry.capacity_bits:
        raise ValueError(f"bit {linear_bit} outside capacity {geometry.capacity_bits}")
    line = linear_bit // geometry.line_bits
    return CacheBitAddr(
        set=line % geometry.num_sets,
        way=line // geometry.num_sets,
        bit_in_line=linear_bit % geometry.line_bits,
    )


class MainMemory:
    """Flat, fault-free backing store."""

    line_bytes = 0  # no line granularity

    def __init__(self, size: int):
        self.size = size
        self.buf = bytearray(size)

    def read(self, addr: int, n: int) -> bytes:
        return bytes(self.buf[addr:addr + n])

    def write(self, addr: int, data: bytes) -> None:
        self.buf[addr:addr + len(data)] = data

    def load(self, addr: int, n: int):
        if addr < 0 or addr + n > self.size:
            raise CrashSignal(CrashReason.OUT_OF_RANGE)
        return self.buf, addr

    def store(self, addr: int, data: bytes) -> None:
        if addr < 0 or addr + len(data) > self.size:
            raise CrashSignal(CrashReason.OUT_OF_RANGE)
        self.buf[addr:addr + len(data)] = data

    def flush(self) -> None:
        pass


class _Binding:
    """One installed fault on a cache line; mutable for transient removal."""

    __slots__ = ("byte", "mask", "kind", "mode", "fire_tick", "start_tick", "end_tick", "spent")

    def __init__(self, bit_in_line: int, kind: CorruptionKind, timing):
        self.byte = bit_in_line >> 3
        self.mask = 1 << (bit_in_line & 7)
        self.kind = kind
        self.mode = timing.mode
        self.fire_tick = timing.fire_tick
        self.start_tick = timing.start_tick
        self.end_tick = timing.start_tick + timing.duration
        self.spent = False


class CacheModel:
    """Write-back, write-allocate, LRU cache over a backing store.

    The backing store may be a MainMemory or another CacheModel (multi-level
    by composition). Faults corrupt data bits only, never tags or state
    bits. The tick counter advances by one per access.
    """

    def __init__(self, geometry: CacheGeometry, backing):
        if backing.size % geometry.line_bytes:
            raise ValueError("backing store size must be a multiple of line_bytes")
        self.geometry = geometry
        self.backing = backing
        n = geometry.num_lines
        self._tags = [-1] * n
        self._dirty = [False] * n
        self._lru = [0] * n
        self._data = [bytearray(geometry.line_bytes) for _ in range(n)]
        self._bindings: dict[int, list[_Binding]] = {}
        self.tick = 0

    @property
    def size(self) -> int:
        return self.backing.size

    @property
    def line_bytes(self) -> int:
        return self.geometry.line_bytes

    def install_fault_map(self, fmap: FaultMap) -> None:
        """Bind every fault of the map; clears previously installed bindings."""
        if fmap.geometry.capacity != self.geometry.capacity_bits:
            raise ValueError(
                f"fault map capacity {fmap.geometry.capacity} != cache capacity "
                f"{self.geometry.capacity_bits} bits"
            )
        self._bindings = {}
        for f in fmap.faults:
            addr = map_fault_to_cache(f.location.linear(fmap.geometry), self.geometry)
            li = addr.set * self.geometry.associativity + addr.way
            self._bindings.setdefault(li, []).append(_Binding(addr.bit_in_line, f.kind, f.timing))

    def fault_binding_count(self) -> int:
        return sum(len(v) for v in self._bindings.values())

    # -- access path --------------------------------------------------------

    def _touch(self, addr: int, n: int) -> int:
        """Bring the line holding [addr, addr+n) resident; returns line slot."""
        if addr < 0 or addr + n > self.backing.size:
            raise CrashSignal(CrashReason.OUT_OF_RANGE)
        geo = self.geometry
        lb = geo.line_bytes
        la = addr // lb
        if (addr + n - 1) // lb != la:
            raise ValueError("request spans a cache line boundary")
        ns = geo.num_sets
        si = la % ns
        tag = la // ns
        assoc = geo.associativity
        base = si * assoc
        tags = self._tags
        for li in range(base, base + assoc):
            if tags[li] == tag:
                return li
        # miss: pick invalid way first, else LRU victim
        lru = self._lru
        victim = -1
        best = None
        for li in range(base, base + assoc):
            if tags[li] < 0:
                victim = li
                break
            if best is None or lru[li] < best:
                best = lru[li]
                victim = li
        buf = self._data[victim]
        if tags[victim] >= 0 and self._dirty[victim]:
            self.backing.write((tags[victim] * ns + si) * lb, bytes(buf))
        buf[:] = self.backing.read(la * lb, lb)
        tags[victim] = tag
        self._dirty[victim] = False
        return victim

    def _apply_faults(self, li: int, tick: int) -> None:
        bl = self._bindings.get(li)
        if bl is None:
            return
        buf = self._data[li]
        drop = False
        for b in bl:
            mode = b.mode
            if mode is TimingMode.PERMANENT:
                pass
            elif mode is TimingMode.TRANSIENT:
                if b.spent or tick < b.fire_tick:
                    continue
                b.spent = True
                drop = True
            else:  # intermittent
                if not (b.start_tick <= tick < b.end_tick):
                    continue
            kind = b.kind
            if kind is CorruptionKind.STUCK_AT_0:
                buf[b.byte] &= ~b.mask
            elif kind is CorruptionKind.STUCK_AT_1:
                buf[b.byte] |= b.mask
            else:
                buf[b.byte] ^= b.mask
        if drop:
            bl = [b for b in bl if not b.spent]
            if bl:
                self._bindings[li] = bl
            else:
                del self._bindings[li]

    def load(self, addr: int, n: int):
        """Read access; returns (line buffer, offset of addr within it)."""
        tick = self.tick + 1
        self.tick = tick
        li = self._touch(addr, n)
        if self._bindings:
            self._apply_faults(li, tick)
        self._lru[li] = tick
        return self._data[li], addr % self.geometry.line_bytes

    def store(self, addr: int, data: bytes) -> None:
        """Write access; merges payload into the stored line."""
        tick = self.tick + 1
        self.tick = tick
        n = len(data)
        li = self._touch(addr, n)
        off = addr % self.geometry.line_bytes
        self._data[li][off:off + n] = data
        self._dirty[li] = True
        if self._bindings:
            self._apply_faults(li, tick)
        self._lru[li] = tick

    def access(self, request: AccessRequest):
        """Serve one request: returns bytes for reads, None for writes."""
        if request.kind == "read":
            buf, off = self.load(request.address, request.length)
            return bytes(buf[off:off + request.length])
        self.store(request.address, request.payload)
        return None

    # -- store protocol for composition -------------------------------------

    def read(self, addr: int, n: int) -> bytes:
        buf, off = self.load(addr, n)
        return bytes(buf[off:off + n])

    def write(self, addr: int, data: bytes) -> None:
        self.store(addr, data)

    def flush(self) -> None:
        """Write back all dirty lines and invalidate; idempotent."""
        geo = self.geometry
        ns = geo.num_sets
        lb = geo.line_bytes
        assoc = geo.associativity
        for li in range(geo.num_lines):
            if self._tags[li] >= 0 and self._dirty[li]:
                si = li // assoc
                self.backing.write((self._tags[li] * ns + si) * lb, bytes(self._data[li]))
            self._tags[li] = -1
            self._dirty[li] = False
        self.backing.flush()
