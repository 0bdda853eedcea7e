"""Error taxonomy shared across the library.

Plain ValueError covers ordinary domain/parameter misuse.  The classes
here exist because callers (notably the CLI, which maps them to exit
codes) need to distinguish resource exhaustion, certificate
insufficiency, and verification failures from bad input.
"""

from __future__ import annotations


class BreakpointBudgetError(RuntimeError):
    """A piecewise-linear operation would exceed the configured segment cap.

    Never raised silently after partial work: the offending operation is
    abandoned whole.  The message names the operation and the cap.
    """


class GenerationError(RuntimeError):
    """A generate-and-verify routine exhausted its retry budget."""


class CertificateError(RuntimeError):
    """Certified evidence was required and is absent or insufficient.

    Raised, for example, when a factorization run requests small-folds
    parameters for a scale no certificate covers.  Deliberately not
    retried: the caller must produce better certificates.
    """


class VerificationError(RuntimeError):
    """An exact post-hoc check of a constructed object failed.

    ``condition`` names the violated clause (for example "(9)_2" or
    "conclusion (4)").
    """

    def __init__(self, condition: str, message: str = ""):
        self.condition = condition
        super().__init__(f"{condition}: {message}" if message else condition)


class BondingViolationError(ValueError):
    """A thread's coordinates do not satisfy the exact bonding relation."""


class TreeStructureError(ValueError):
    """Node/edge data does not describe a finite metric tree."""
