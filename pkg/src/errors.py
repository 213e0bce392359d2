"""
Errors — exception hierarchy shared by the verifier modules.

Mathematical failures (an identity that does not hold) are never raised;
checks report them as result entries. Exceptions signal that a computation
could not be carried out at all.
"""

from __future__ import annotations

from collections.abc import Callable
from typing import Any


class VerifierError(Exception):
    """Base class for every error raised by the verifier."""


class ConfigError(VerifierError, ValueError):
    """Invalid run configuration, GCM file or rule deck."""


class WindowError(VerifierError, ValueError):
    """A window is empty, mismatched, or misses a required degree."""


class OutOfWindowError(WindowError):
    """A step cannot be represented exactly at the requested truncation."""


class TruncationError(VerifierError, ArithmeticError):
    """A series operation would not terminate modulo ħ^N."""


class KernelError(VerifierError, ValueError):
    """Illegal kernel factor, incompatible expansion directions, or a pole hit by substitution."""


class RuleError(VerifierError, RuntimeError):
    """Rewriting failed: missing exchange rule, termination bound, or non-central kernel."""


class PreconditionError(VerifierError):
    """The hypothesis of a check does not hold on the truncation."""


# ── Result entries ───────────────────────────────────────────

PASS = "pass"
FAIL = "fail"
PRECONDITION_FAILED = "precondition-failed"
OUT_OF_WINDOW = "out-of-window"

STATUSES = (PASS, FAIL, PRECONDITION_FAILED, OUT_OF_WINDOW)


def check_result(check: str, passed: bool, message: str,
                 witness: Any = None, **extra: Any) -> dict[str, Any]:
    """A check outcome in the shared {check, status, message, witness} shape."""
    return {
        "check": check,
        "status": PASS if passed else FAIL,
        "message": message,
        "witness": witness,
        **extra,
    }


def guarded(check: str, run: Callable[[], dict[str, Any]]) -> dict[str, Any]:
    """
    Run a check, mapping unrepresentable steps to their report status.

    PreconditionError becomes precondition-failed; window and truncation
    errors become out-of-window. A kernel or rewriting error raised inside
    the check fails that check only, with the error as its witness.
    Anything else propagates and aborts the run.
    """
    try:
        return run()
    except PreconditionError as exc:
        return {"check": check, "status": PRECONDITION_FAILED, "message": str(exc), "witness": None}
    except (WindowError, TruncationError) as exc:
        return {"check": check, "status": OUT_OF_WINDOW, "message": str(exc), "witness": None}
    except (KernelError, RuleError) as exc:
        return check_result(check, False, f"{type(exc).__name__}: {exc}",
                            {"error": type(exc).__name__, "message": str(exc)})
