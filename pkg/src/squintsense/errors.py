"""Exception types shared across the library."""


class SquintError(Exception):
    """Base class for library-specific failures."""


class ConfigError(SquintError):
    """Invalid or inconsistent configuration input."""


class DesignError(SquintError):
    """A beamformer design cannot realize the requested geometry."""


class UnresolvedAmbiguityError(SquintError):
    """No range hypothesis is consistent with all subcarrier groups."""


class InconsistentGroupsError(SquintError):
    """Several incompatible range hypotheses fit the group peaks equally well."""


class FrequencyDiversityError(SquintError):
    """Peak frequencies carry no diversity, so phase ranging cannot work."""
