"""
Error types and user facing diagnostics of the filament tool chain.

Problems found in a user program are reported as :class:`Diagnostic` values so that one
pass can collect all of them. Exceptions are used when a stage cannot continue: a syntax
error, a program that failed resolution, or a broken compiler invariant.
"""

import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Span:
    """Location of a piece of source text

    Parameters
    ----------
    filename: str
        Name of the source file, "<string>" for text passed directly
    line: int
        Line number, starting at 1
    column: int
        Column number, starting at 1
    length: int
        Number of characters covered on the line
    """
    filename: str = "<string>"
    line: int = 0
    column: int = 0
    length: int = 1

    def __str__(self):
        return "{}:{}:{}".format(self.filename, self.line, self.column)


class ErrorCode(enum.Enum):
    ParseError = "E001"
    UnboundName = "E002"
    DuplicateName = "E003"
    ExternWithBody = "E004"
    MissingBody = "E005"
    ArityMismatch = "E006"
    IllFormedEvent = "E007"
    OffsetTooLarge = "E008"
    InconsistentFacts = "E009"
    EmptyInterval = "E010"
    DelayTooShort = "E011"
    InsufficientAvailability = "E012"
    InstanceConflict = "E013"
    UnsafeTrigger = "E014"
    NonConstantDelay = "E015"
    MixedEventSharing = "E016"
    PipelineSpanExceedsDelay = "E017"
    PhantomSharing = "E018"
    PhantomDrivesInterfaced = "E019"
    OrderingConstraintInUserComponent = "E020"
    ParamsOnUserComponent = "E021"
    UnassignedOutput = "E022"
    MultipleDrivers = "E023"
    BadPort = "E024"
    WidthMismatch = "E025"
    UnsatisfiedConstraint = "E026"
    RecursiveInstantiation = "E027"
    OverlappingGuards = "E028"
    StageOutOfRange = "E029"
    MissingPrimitive = "E030"


@dataclass(frozen=True)
class Diagnostic:
    """A single problem found in a program

    The message names both sides of a failed check, e.g. the availability of a source and
    the requirement of its destination. ``related`` holds extra spans together with a
    label that tells the reader what is located there.
    """
    code: ErrorCode
    message: str
    span: Optional[Span] = None
    related: Tuple[Tuple[Span, str], ...] = ()
    notes: Tuple[str, ...] = ()
    label: str = ""

    @property
    def sort_key(self):
        span = self.span or Span("", 0, 0)
        return span.filename, span.line, span.column, self.code.value, self.message

    def render(self, sources: Optional[Dict[str, str]] = None) -> str:
        """Render the diagnostic in the compiler style

        Parameters
        ----------
        sources: dict, optional
            Source text per file name. When given, the offending line is quoted and the
            span is underlined

        Returns
        -------
        str:
            Multi-line string starting with ``error[E0xx]: <message>``
        """
        lines = ["error[{}]: {}".format(self.code.value, self.message)]
        spans = []
        if self.span is not None:
            spans.append((self.span, self.label))
        spans.extend(self.related)
        for span, label in spans:
            lines.append("  --> {}".format(span))
            text = _source_line(sources, span)
            if text is None:
                if label:
                    lines.append("   = {}".format(label))
                continue
            gutter = " " * len(str(span.line))
            lines.append(" {} |".format(gutter))
            lines.append(" {} | {}".format(span.line, text))
            marker = " " * max(span.column - 1, 0) + "^" * max(span.length, 1)
            lines.append(" {} | {} {}".format(gutter, marker, label).rstrip())
        for note in self.notes:
            lines.append("   = note: {}".format(note))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        def span_dict(span):
            return dict(file=span.filename, line=span.line, column=span.column,
                        length=span.length)

        return dict(
            code=self.code.value,
            name=self.code.name,
            message=self.message,
            span=span_dict(self.span) if self.span is not None else None,
            label=self.label,
            related=[dict(span_dict(span), label=label) for span, label in self.related],
            notes=list(self.notes),
        )


def _source_line(sources, span):
    if not sources or span.filename not in sources or span.line < 1:
        return None
    lines = sources[span.filename].splitlines()
    if span.line > len(lines):
        return None
    return lines[span.line - 1]


def sort_diagnostics(diagnostics: Iterable[Diagnostic]) -> List[Diagnostic]:
    """Order diagnostics by source position; duplicates are dropped"""
    unique = []
    seen = set()
    for diagnostic in diagnostics:
        key = (diagnostic.sort_key, diagnostic.related)
        if key in seen:
            continue
        seen.add(key)
        unique.append(diagnostic)
    return sorted(unique, key=lambda d: d.sort_key)


def render_diagnostics(diagnostics: Sequence[Diagnostic], sources=None) -> str:
    return "\n\n".join(d.render(sources) for d in diagnostics)


def diagnostics_to_json(diagnostics: Sequence[Diagnostic]) -> str:
    return json.dumps([d.to_dict() for d in diagnostics], indent=2)


class FilamentError(Exception):
    """Base class of all errors raised by the tool chain"""


class ParseError(FilamentError):
    """Malformed source text

    Parameters
    ----------
    message: str
        What went wrong
    span: Span
        Where it went wrong
    expected: sequence of str, optional
        Tokens that would have been accepted at this position
    """

    def __init__(self, message, span: Span, expected: Sequence[str] = (),
                 code: ErrorCode = ErrorCode.ParseError):
        self.message = message
        self.span = span
        self.expected = tuple(expected)
        self.code = code
        text = "{}: {}".format(span, message)
        if self.expected:
            text += " (expected {})".format(" or ".join(self.expected))
        super().__init__(text)

    def to_diagnostic(self) -> Diagnostic:
        notes = ()
        if self.expected:
            notes = ("expected {}".format(" or ".join(self.expected)),)
        return Diagnostic(self.code, self.message, self.span, notes=notes)


class EventError(FilamentError, ValueError):
    """Ill formed symbolic time"""
    code = ErrorCode.IllFormedEvent


class IllFormedEvent(EventError):
    code = ErrorCode.IllFormedEvent


class OffsetOverflow(EventError):
    code = ErrorCode.OffsetTooLarge


class InconsistentFacts(EventError):
    code = ErrorCode.InconsistentFacts


class DiagnosticsError(FilamentError):
    """A stage produced diagnostics that prevent the next stage from running"""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        summary = "; ".join("{} {}".format(d.code.value, d.message) for d in self.diagnostics[:3])
        if len(self.diagnostics) > 3:
            summary += "; ..."
        super().__init__(summary)


class ResolutionError(DiagnosticsError):
    pass


class TypeCheckError(DiagnosticsError):
    pass


class MissingPrimitive(DiagnosticsError):
    pass


class SimulationError(FilamentError):
    pass


class CombinationalLoop(SimulationError):
    pass


class WidthMismatch(SimulationError):
    pass


class InternalError(AssertionError):
    """A compiler invariant does not hold"""

    def __init__(self, message, diagnostics: Sequence[Diagnostic] = ()):
        self.diagnostics = list(diagnostics)
        super().__init__(message)
