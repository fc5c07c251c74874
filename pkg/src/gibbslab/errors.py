"""Exception types shared across the package."""


class GibbsLabError(Exception):
    """Base class for all errors raised by gibbslab."""


class SupportNotContained(GibbsLabError):
    """An operator's support is not contained in the embedding target."""


class DimensionOverflow(GibbsLabError):
    """A requested Hilbert-space dimension exceeds the dense backend cap."""


class SiteNotInSupport(GibbsLabError):
    """A site referenced by a trace or reduction is outside the operator support."""


class NotHermitian(GibbsLabError):
    """An operation requiring a Hermitian input received a non-Hermitian matrix."""


class SingularOperator(GibbsLabError):
    """An inverse-type matrix function hit a (near-)singular spectrum."""


class NotAState(GibbsLabError):
    """An input expected to be a density matrix fails trace or positivity checks."""


class SupportMismatch(GibbsLabError):
    """Two operators expected on identical supports live on different ones."""


class InvalidOrder(GibbsLabError):
    """A Renyi order parameter is outside its admissible range."""


class UnknownModel(GibbsLabError):
    """A model preset name is not in the catalog."""


class ConfigInvalid(GibbsLabError):
    """A sweep configuration violates its invariants or cannot be parsed."""


class TooFewSamples(GibbsLabError):
    """A fit was requested on fewer above-floor samples than the minimum."""


class SchemaMismatch(GibbsLabError):
    """A CSV file does not conform to the expected schema."""


class NumericalInconsistency(GibbsLabError):
    """Two independent routes to the same quantity disagree beyond tolerance."""
