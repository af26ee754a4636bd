"""Global atom budget used as a memory guard by exact (non-truncating) code."""
from contextlib import contextmanager

from .errors import ResourceError

# a stored atom costs ~370 bytes with dict and key overhead, and exact loops keep
# about three measures alive at once (power, next power, running sum)
BYTES_PER_ATOM = 1000
_max_atoms = 1_000_000  # about 1 GB


def max_atoms() -> int:
    return _max_atoms


def set_max_atoms(n: int) -> None:
    global _max_atoms
    if n <= 0:
        raise ValueError("atom budget must be positive")
    _max_atoms = int(n)


def atoms_for_megabytes(mb: float) -> int:
    return max(1, int(mb * 1e6 / BYTES_PER_ATOM))


@contextmanager
def atom_limit(n: int):
    old = _max_atoms
    set_max_atoms(n)
    try:
        yield
    finally:
        set_max_atoms(old)


def check(count: int, what: str = "atoms") -> None:
    if count > _max_atoms:
        raise ResourceError(f"{what}: {count} exceeds budget of {_max_atoms}")


def check_bytes(nbytes: int, what: str = "allocation") -> None:
    """Budget check for array-backed data, measured against the same memory cap."""
    cap = _max_atoms * BYTES_PER_ATOM
    if nbytes > cap:
        raise ResourceError(f"{what}: {nbytes / 1e6:.0f} MB exceeds budget of {cap / 1e6:.0f} MB")
