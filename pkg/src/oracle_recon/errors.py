"""Exception hierarchy shared by every module of the package."""


class OracleReconError(Exception):
    """Base class; the CLI turns these into one-line error reports."""


class ConnectivityError(OracleReconError):
    """G(n,p) resampling gave up before producing a connected graph."""


class DisconnectedGraphError(OracleReconError, ValueError):
    """An operation that assumes a connected graph received a disconnected one."""


class NearPairError(OracleReconError, ValueError):
    """The pair is at distance <= 2, outside the sphere-partition regime."""


class InexactReconstructionError(OracleReconError):
    """A reconstruction disagreed with the hidden graph.

    Correctness of the landmark algorithm is unconditional, so this always
    signals an implementation bug.
    """

    def __init__(self, message: str, seed: int | None = None):
        super().__init__(message)
        self.seed = seed
