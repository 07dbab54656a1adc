"""IPv4 classful/subnet arithmetic: dotted-decimal conversion, network and
broadcast addresses by bitwise mask operations, address-space counts.

Everything here is plain 32-bit integer arithmetic; no networking libraries.
"""
from __future__ import annotations

from dataclasses import dataclass

_MAX32 = 0xFFFFFFFF


class AddressError(ValueError):
    """Raised for malformed addresses or non-contiguous masks."""


@dataclass(frozen=True)
class Ipv4Address:
    """One IPv4 address held as a 32-bit unsigned value."""

    bits: int

    def __post_init__(self) -> None:
        if not 0 <= self.bits <= _MAX32:
            raise AddressError(f"address out of 32-bit range: {self.bits}")

    @classmethod
    def parse(cls, text: str) -> "Ipv4Address":
        parts = text.strip().split(".")
        if len(parts) != 4:
            raise AddressError(f"expected four dotted octets: {text!r}")
        value = 0
        for part in parts:
            if not part.isdigit():
                raise AddressError(f"octet is not a number: {part!r} in {text!r}")
            octet = int(part)
            if octet > 255:
                raise AddressError(f"octet out of range 0-255: {octet} in {text!r}")
            value = (value << 8) | octet
        return cls(value)

    @property
    def octets(self) -> tuple[int, int, int, int]:
        b = self.bits
        return ((b >> 24) & 0xFF, (b >> 16) & 0xFF, (b >> 8) & 0xFF, b & 0xFF)

    @property
    def dotted(self) -> str:
        return ".".join(str(o) for o in self.octets)

    def __str__(self) -> str:
        return self.dotted


@dataclass(frozen=True)
class NetworkMask:
    """A mask whose binary form is ones followed by zeros (e.g. 255.0.0.0)."""

    bits: int

    def __post_init__(self) -> None:
        if not 0 <= self.bits <= _MAX32:
            raise AddressError(f"mask out of 32-bit range: {self.bits}")
        host_part = ~self.bits & _MAX32
        # ones-then-zeros <=> the complement is of the form 2^k - 1
        if host_part & (host_part + 1):
            raise AddressError(
                f"mask is not contiguous ones followed by zeros: {Ipv4Address(self.bits).dotted}"
            )

    @classmethod
    def parse(cls, text: str) -> "NetworkMask":
        """Accept dotted form ("255.255.0.0") or CIDR prefix ("/16" or "16")."""
        text = text.strip()
        if text.startswith("/"):
            text = text[1:]
        if "." in text:
            return cls(Ipv4Address.parse(text).bits)
        if not text.isdigit():
            raise AddressError(f"mask is neither dotted nor a prefix length: {text!r}")
        return cls.from_prefix(int(text))

    @classmethod
    def from_prefix(cls, prefix_len: int) -> "NetworkMask":
        if not 0 <= prefix_len <= 32:
            raise AddressError(f"prefix length out of range 0-32: {prefix_len}")
        if prefix_len == 0:
            return cls(0)
        return cls((_MAX32 << (32 - prefix_len)) & _MAX32)

    @property
    def prefix_len(self) -> int:
        return bin(self.bits).count("1")

    @property
    def dotted(self) -> str:
        return Ipv4Address(self.bits).dotted

    def __str__(self) -> str:
        return self.dotted


def first_address(addr: Ipv4Address, mask: NetworkMask) -> Ipv4Address:
    """Network address: bitwise AND of the address with the mask."""
    return Ipv4Address(addr.bits & mask.bits)


def last_address(addr: Ipv4Address, mask: NetworkMask) -> Ipv4Address:
    """Broadcast address: bitwise OR of the address with the mask complement."""
    return Ipv4Address(addr.bits | (~mask.bits & _MAX32))


def address_count(mask: NetworkMask) -> int:
    """Number of addresses in the network: 2 to the number of host bits."""
    return 1 << (32 - mask.prefix_len)


def classful_mask(addr: Ipv4Address) -> NetworkMask:
    """Default mask from the historical class of the first octet.

    Class A (0-127) -> /8, class B (128-191) -> /16, class C (192-223) -> /24.
    Class D/E addresses (224 and up) have no default mask and are rejected.
    """
    first_octet = addr.octets[0]
    if first_octet <= 127:
        return NetworkMask.from_prefix(8)
    if first_octet <= 191:
        return NetworkMask.from_prefix(16)
    if first_octet <= 223:
        return NetworkMask.from_prefix(24)
    raise AddressError(f"class D/E address has no classful mask: {addr.dotted}")


def binary_expansion(addr: Ipv4Address) -> str:
    """Dotted binary rendering, eight bits per octet: '00001010.00111101...'."""
    return ".".join(format(o, "08b") for o in addr.octets)


def describe(addr_text: str, mask_text: str | None = None) -> dict[str, str]:
    """Resolve one address (and optional mask) into the printable summary used
    by the CLI. With no mask, the classful default is applied."""
    addr = Ipv4Address.parse(addr_text)
    mask = NetworkMask.parse(mask_text) if mask_text else classful_mask(addr)
    return {
        "address": addr.dotted,
        "binary": binary_expansion(addr),
        "mask": f"{mask.dotted} (/{mask.prefix_len})",
        "first": first_address(addr, mask).dotted,
        "last": last_address(addr, mask).dotted,
        "count": str(address_count(mask)),
    }
