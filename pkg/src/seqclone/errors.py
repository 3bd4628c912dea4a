"""Exception types shared across the package.

Plain ``ValueError`` is used for ordinary argument validation; the classes
here mark failure modes callers may want to handle separately.
"""


class StructureError(ValueError):
    """Incompatible shapes between composite objects (mismatched chains,
    mismatched qubit counts, bad bond dimensions)."""


class CanonicalFormError(ValueError):
    """Operation requires a left-orthonormal (canonical) matrix-product
    state; rebuild one with ``from_statevector`` first."""


class NumericalFailure(RuntimeError):
    """An underlying iterative numerical routine (SVD/eigensolver) did not
    converge."""


class ResourceLimitError(RuntimeError):
    """Requested problem size exceeds the configured dense-simulation cap."""
