"""64-bit FNV-1a hashing for checkpoint checksums and config digests."""

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def digest16(text: str) -> str:
    """Hex-encoded 64-bit FNV-1a of a string, used as a short stable digest."""
    return f"{fnv1a64(text.encode('utf-8')):016x}"
