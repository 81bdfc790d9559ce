"""Error taxonomy shared by every module and mirrored in CLI error JSON."""


class GCoverError(Exception):
    """Base class. ``kind`` is the machine-readable name used by the CLI."""

    kind = "Error"

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class InvariantViolation(GCoverError, ValueError):
    """Input fails a structural invariant (wrong symmetry, not in the group, ...)."""

    kind = "InvariantViolation"


class FermionBoundary(GCoverError):
    """Fermionic element on the quasi-boundary, where det(1 + Delta_M) vanishes."""

    kind = "FermionBoundary"

    def __init__(self, determinant, message=None):
        self.determinant = determinant
        super().__init__(message or f"element on fermionic quasi-boundary, |det(1+Delta)| = {abs(determinant):.3e}")

    def to_dict(self):
        d = super().to_dict()
        d["determinant"] = float(abs(self.determinant))
        return d


class DegeneratePair(GCoverError):
    """Cocycle precondition violated: some C or 1 - Z1 Z2 is singular."""

    kind = "DegeneratePair"

    def __init__(self, message, pair=None):
        self.pair = pair
        super().__init__(message)

    def to_dict(self):
        d = super().to_dict()
        if self.pair is not None:
            d["pair"] = list(self.pair)
        return d


class ReferenceMismatch(GCoverError):
    kind = "ReferenceMismatch"


class InvalidTarget(GCoverError):
    kind = "InvalidTarget"


class RepairFailed(GCoverError):
    kind = "RepairFailed"


class IllConditioned(GCoverError):
    kind = "IllConditioned"


class DimensionTooLarge(GCoverError):
    kind = "DimensionTooLarge"


class TruncationNotConverged(GCoverError):
    kind = "TruncationNotConverged"


class IndexOutOfRange(GCoverError, IndexError):
    kind = "IndexOutOfRange"


class ContinuationAmbiguous(GCoverError):
    kind = "ContinuationAmbiguous"
