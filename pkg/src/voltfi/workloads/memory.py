"""Sandboxed address space for benchmark kernels.

Every data load/store of a kernel goes through a SimMemory, which validates
the access against the mapped regions and forwards it to the cache stack
(or a flat store for the no-cache reference run). Accesses that land in
unmapped space raise CrashSignal(OUT_OF_RANGE), the segfault analogue.

Index/offset tables live in a small low region; bulk data is mapped at
DATA_BASE = 0x18000, leaving a wide unmapped gap. Table entries hold
absolute byte addresses, so a stuck-at fault that clears one of the high
address bits of a table entry usually redirects the dereference into the
gap and kills the run, while faults on bulk data merely corrupt values.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..cachesim import CrashReason, CrashSignal

TAB_BASE = 0x0
DATA_BASE = 0x18000

_F64 = struct.Struct("<d")
_U64 = struct.Struct("<Q")
_U32 = struct.Struct("<I")

_pack_f64 = _F64.pack
_pack_u64 = _U64.pack
_pack_u32 = _U32.pack
_unpack_f64 = _F64.unpack_from
_unpack_u64 = _U64.unpack_from
_unpack_u32 = _U32.unpack_from


@dataclass(frozen=True)
class Region:
    name: str
    base: int
    size: int

    @property
    def end(self) -> int:
        return self.base + self.size


class FlatStore:
    """Cache-less store with the same access protocol; reference runs only."""

    line_bytes = 0

    def __init__(self, size: int):
        self.size = size
        self.buf = bytearray(size)

    def load(self, addr: int, n: int):
        return self.buf, addr

    def store(self, addr: int, data: bytes) -> None:
        self.buf[addr:addr + len(data)] = data

    def read(self, addr: int, n: int) -> bytes:
        return bytes(self.buf[addr:addr + n])

    def write(self, addr: int, data: bytes) -> None:
        self.buf[addr:addr + len(data)] = data

    def flush(self) -> None:
        pass


class SimMemory:
    """Region-validated typed access to a store, plus the step budget."""

    def __init__(self, store, regions: tuple[Region, ...], step_budget: int):
        if step_budget < 1:
            raise ValueError("step_budget must be >= 1")
        spans = sorted((r.base, r.end) for r in regions)
        for (b0, e0), (b1, _) in zip(spans, spans[1:]):
            if b1 < e0:
                raise ValueError("regions overlap")
        self.store = store
        self.regions = {r.name: r for r in regions}
        self._spans = tuple(spans)
        self._lb = store.line_bytes
        self._load = store.load
        self._store = store.store
        self.step_budget = step_budget
        self.ops = 0

    def charge(self, n: int = 1) -> None:
        """Account primitive kernel operations against the step budget."""
        self.ops += n
        if self.ops > self.step_budget:
            raise CrashSignal(CrashReason.STEP_BUDGET_EXCEEDED)

    def _check(self, addr: int, n: int) -> None:
        for lo, hi in self._spans:
            if lo <= addr and addr + n <= hi:
                return
        raise CrashSignal(CrashReason.OUT_OF_RANGE)

    # -- split helpers for line-crossing (misaligned pointer) accesses ------

    def _read_split(self, addr: int, n: int) -> bytes:
        lb = self._lb
        out = bytearray()
        while n:
            take = min(n, lb - addr % lb)
            buf, off = self._load(addr, take)
            out += buf[off:off + take]
            addr += take
            n -= take
        return bytes(out)

    def _write_split(self, addr: int, data: bytes) -> None:
        lb = self._lb
        pos = 0
        n = len(data)
        while pos < n:
            take = min(n - pos, lb - addr % lb)
            self._store(addr, data[pos:pos + take])
            addr += take
            pos += take

    # -- typed accessors -----------------------------------------------------

    def load_f64(self, addr: int) -> float:
        self._check(addr, 8)
        lb = self._lb
        if lb and addr % lb > lb - 8:
            return _F64.unpack(self._read_split(addr, 8))[0]
        buf, off = self._load(addr, 8)
        return _unpack_f64(buf, off)[0]

    def store_f64(self, addr: int, value: float) -> None:
        self._check(addr, 8)
        lb = self._lb
        data = _pack_f64(value)
        if lb and addr % lb > lb - 8:
            self._write_split(addr, data)
        else:
            self._store(addr, data)

    def load_u64(self, addr: int) -> int:
        self._check(addr, 8)
        lb = self._lb
        if lb and addr % lb > lb - 8:
            return _U64.unpack(self._read_split(addr, 8))[0]
        buf, off = self._load(addr, 8)
        return _unpack_u64(buf, off)[0]

    def store_u64(self, addr: int, value: int) -> None:
        self._check(addr, 8)
        lb = self._lb
        data = _pack_u64(value)
        if lb and addr % lb > lb - 8:
            self._write_split(addr, data)
        else:
            self._store(addr, data)

    def load_u32(self, addr: int) -> int:
        self._check(addr, 4)
        lb = self._lb
        if lb and addr % lb > lb - 4:
            return _U32.unpack(self._read_split(addr, 4))[0]
        buf, off = self._load(addr, 4)
        return _unpack_u32(buf, off)[0]

    def store_u32(self, addr: int, value: int) -> None:
        self._check(addr, 4)
        lb = self._lb
        data = _pack_u32(value)
        if lb and addr % lb > lb - 4:
            self._write_split(addr, data)
        else:
            self._store(addr, data)

    def load_u8(self, addr: int) -> int:
        self._check(addr, 1)
        buf, off = self._load(addr, 1)
        return buf[off]

    def store_u8(self, addr: int, value: int) -> None:
        self._check(addr, 1)
        self._store(addr, bytes((value,)))

    # -- bulk helpers ---------------------------------------------------------

    def write_bytes(self, addr: int, data: bytes) -> None:
        """Byte-wise store of a block, each byte through the access path."""
        self._check(addr, len(data))
        for i, b in enumerate(data):
            self._store(addr + i, data[i:i + 1])

    def flush(self) -> None:
        self.store.flush()

    def dump(self, addr: int, n: int) -> bytes:
        """Read raw bytes from the root backing store (call flush first)."""
        root = self.store
        while hasattr(root, "backing"):
            root = root.backing
        return root.read(addr, n)
