class MixedKanError(Exception):
    """Base class for package errors."""


class ConfigurationError(MixedKanError):
    """Parameters or configuration cannot describe a valid system."""


class SearchExhaustedError(ConfigurationError):
    """A deterministic search ran out of candidates."""


class UncertifiedParamsError(MixedKanError):
    """An experiment was asked to run on parameters without a passing certificate."""


class CertificationError(MixedKanError):
    """Raised when a certificate is required to pass but does not."""

    def __init__(self, report):
        self.report = report
        names = ", ".join(report.failures()) or "unknown"
        super().__init__(f"certification failed: {names}")
