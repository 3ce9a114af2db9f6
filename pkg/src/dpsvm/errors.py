"""Exception types raised by the estimators and the benchmark harness."""


class DPSVMError(Exception):
    """Base class for all package-specific errors."""


class EmptyData(DPSVMError):
    """A data matrix with zero rows was supplied."""


class SingularCovariance(DPSVMError):
    """Covariance (plus ridge) has a non-positive eigenvalue; whitening impossible."""


class SingularSystem(DPSVMError):
    """A linear system stayed numerically singular even after ridging."""


class DegenerateSlicing(DPSVMError):
    """Response ties make the requested slice dividing points collide."""


class OracleTooLarge(DPSVMError):
    """Brute-force grid oracle requested for a dimension it cannot enumerate."""


class RefinementSingular(DPSVMError):
    """The aggregated refinement system could not be solved."""


class ZeroDistanceVariance(DPSVMError):
    """Distance correlation is undefined for a constant argument."""
