"""Exception types shared across the toolkit.

Each class maps to one failure mode surfaced by the CLI with a distinct
exit code (see cli.EXIT_CODES).
"""


class GapcertError(Exception):
    """Base class for all toolkit errors."""


class GraphError(GapcertError):
    """Malformed graph input: duplicate coordinates, unknown vertex ids, ..."""


class UnreachablePairError(GraphError):
    """Two vertices with no connecting path."""


class RegionError(GapcertError):
    """A region is not usable for the requested operation."""


class SplitError(GapcertError):
    """Split-pair construction failed (insufficient width, unsupported region)."""


class InteractionError(GapcertError):
    """Invalid interaction terms (non-Hermitian, negative eigenvalue, empty)."""


class DimensionCapError(GapcertError):
    """Requested Hilbert-space dimension exceeds the configured cap."""


class EigensolverError(GapcertError):
    """Eigenvalue computation failed or could not be resolved."""


class AdmissibilityError(GapcertError):
    """A detectability-lemma construction was requested outside its regime."""


class CertificationError(GapcertError):
    """Certificate assembly failed (inconsistent sequences, bad data)."""


class ConfigError(GapcertError):
    """Invalid run configuration or input file."""
