"""Exception hierarchy for rcmkit."""


class RcmError(Exception):
    """Base class for all rcmkit errors."""


class SchemaMismatchError(RcmError):
    """An identifier is not declared in the schema it is used with."""


class DomainError(RcmError, ValueError):
    """An operation was called outside its precondition."""


class ConstructionError(RcmError):
    """A requested skeleton cannot be built."""


class ModelInstantiationError(RcmError):
    """Grounding a model on a skeleton produced an invalid graph (e.g. a cycle)."""


class BoundError(RcmError):
    """A query refers to variables beyond the hop bound of an abstract ground graph."""
