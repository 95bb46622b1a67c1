"""Shared exception types."""


class ClusterFieldError(Exception):
    """Base class for all package errors."""


class ConfigError(ClusterFieldError):
    """Invalid user-supplied configuration or file content."""


class DomainMismatchError(ClusterFieldError):
    """An object was used with a graph/edge/site domain it was not built for."""


class CapExceededError(ClusterFieldError):
    """An exact enumeration would exceed the configured state cap."""


# Exhaustive enumeration is refused beyond this many states.
ENUMERATION_CAP = 2 ** 24


def check_cap(n_states, what="state space"):
    if n_states > ENUMERATION_CAP:
        raise CapExceededError(
            f"{what} has {n_states} states, above the cap of {ENUMERATION_CAP}"
        )
