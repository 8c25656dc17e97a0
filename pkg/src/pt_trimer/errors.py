"""Exception hierarchy.

Everything the toolkit raises for a physically meaningless request derives
from :class:`PhysicsError`; the CLI maps those to exit code 1.
"""


class PhysicsError(Exception):
    """Base class for errors caused by the physical configuration."""


class ChainBreak(PhysicsError):
    """Jordan-chain linear system inconsistent: block size overestimated."""


class NegativeRadicand(PhysicsError):
    def __init__(self, radicand: float):
        super().__init__(f"no real critical gain/loss: radicand {radicand:.6g} < 0")
        self.radicand = radicand


class StepTooLarge(PhysicsError):
    pass


class NotAtEP(PhysicsError):
    pass


class OscillationPresent(PhysicsError):
    pass


class BandEdge(PhysicsError):
    pass


class NotSingular(PhysicsError):
    pass


class SingularSystem(PhysicsError):
    pass


class PacketClipped(PhysicsError):
    pass


class BoundaryContamination(PhysicsError):
    pass


class EmptyRegion(PhysicsError):
    pass
