class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class NumericalContractError(RuntimeError):
    """A computed quantity failed a numerical sanity contract (e.g. captured mass)."""
