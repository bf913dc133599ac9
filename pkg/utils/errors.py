class HForgeError(Exception):
    """
    Root of every error raised by hforge.

    Subclasses carry the process exit code the command line maps them to.
    """

    exit_code: int = 2


class ParamError(HForgeError, ValueError):
    """Parameters violate a documented range."""


class IndexOutOfRange(HForgeError, IndexError):
    """A coordinate or label index lies outside its range."""


class BudgetExceeded(HForgeError):
    """An enumeration or construction would exceed the configured budget."""

    exit_code = 3


class InvalidGraph(HForgeError, ValueError):
    """Graph data violates a structural invariant."""


class UnknownVertex(InvalidGraph):
    """A referenced vertex does not exist in the graph."""


class CyclicInput(HForgeError, ValueError):
    """An operation requiring a DAG received a graph with a cycle."""


class BitDeletion(HForgeError, ValueError):
    """Deletion of an undeletable bit vertex was requested."""


class NonBooleanFunction(HForgeError, ValueError):
    """A 0/1-valued function was required."""


class InconsistentWitness(HForgeError, ValueError):
    """A partition witness does not match its graph."""

    exit_code = 1


class InconsistentInput(HForgeError, ValueError):
    """A deletion set or coloring does not match its graph."""


class CyclicSurvivor(HForgeError, ValueError):
    """The surviving test vertices do not induce an acyclic graph."""

    exit_code = 1


class PartialLabeling(HForgeError, ValueError):
    """A labeling is missing some vertex."""


class InfeasibleDegrees(HForgeError, ValueError):
    """No regular bipartite multigraph exists for the requested degrees."""


class InvalidInstance(HForgeError, ValueError):
    """A Deadline or Unique Games instance violates its invariants."""


class NotTopologicallyOrdered(HForgeError, ValueError):
    """A DAG arc (i, j) has i >= j."""


class BadGamma(HForgeError, ValueError):
    """The closure margin lies outside (0, 1/(10(k-1)))."""


class ForeignInstance(HForgeError, ValueError):
    """A Deadline instance was not produced from the given graph."""


class Infeasible(HForgeError):
    """No realization meets the deadline."""

    exit_code = 1


class FormatError(HForgeError, ValueError):
    """A serialized document does not match its declared format."""
