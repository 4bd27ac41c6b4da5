"""Byte, rate and duration helpers.

All internal arithmetic is in raw bytes and seconds. Decimal prefixes are the
house convention (1 MB = 10^6 B); binary renderings are offered alongside
because sustained camera rates are often quoted in GiB/s.
"""

from __future__ import annotations

KB = 10**3
MB = 10**6
GB = 10**9
TB = 10**12

KIB = 2**10
MIB = 2**20
GIB = 2**30
TIB = 2**40

_DECIMAL = ((TB, "TB"), (GB, "GB"), (MB, "MB"), (KB, "kB"))
_BINARY = ((TIB, "TiB"), (GIB, "GiB"), (MIB, "MiB"), (KIB, "KiB"))


def format_bytes(n: float, binary: bool = False) -> str:
    """Render a byte count with the largest fitting unit, e.g. 27.54 TB."""
    table = _BINARY if binary else _DECIMAL
    for factor, suffix in table:
        if abs(n) >= factor:
            return f"{n / factor:.2f} {suffix}"
    return f"{n:.0f} B"


def format_rate(bytes_per_second: float, binary: bool = False) -> str:
    return format_bytes(bytes_per_second, binary=binary) + "/s"


def format_duration(seconds: float) -> str:
    """Render seconds as the most readable of s / min / h / days."""
    if seconds >= 2 * 86400:
        return f"{seconds / 86400:.1f} days"
    if seconds >= 3 * 3600:
        return f"{seconds / 3600:.1f} h"
    if seconds >= 120:
        return f"{seconds / 60:.1f} min"
    return f"{seconds:.1f} s"
