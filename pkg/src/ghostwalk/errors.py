class GhostwalkError(Exception):
    pass


class InvalidArgument(GhostwalkError, ValueError):
    pass


class ResourceLimit(GhostwalkError):
    """An enumeration cap was exceeded."""
