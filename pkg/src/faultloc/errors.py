"""Exception hierarchy shared by all faultloc modules."""


class FaultLocError(Exception):
    """Base class for every error raised by faultloc."""


class InputError(FaultLocError):
    """Malformed or inconsistent on-disk input (maps to CLI exit code 3)."""


# spectra
class MalformedLine(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NoFailingTest(InputError):
    pass


class EmptyExternalScores(InputError):
    pass


class MalformedMethodId(InputError):
    pass


# codegraph
class MalformedGraph(InputError):
    pass


class DanglingEdge(MalformedGraph):
    pass


class DuplicateMethod(MalformedGraph):
    pass


class MethodNotFound(FaultLocError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


# preprocess
class UnparsableTrace(InputError):
    pass


class FailingLineOutOfRange(FaultLocError, ValueError):
    pass


class TestNotInGraph(UserWarning):
    """Helper extraction was skipped because the test is absent from the graph."""

    __test__ = False  # keep pytest from collecting this


# division
class UnknownCounter(FaultLocError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class EntryExceedsBudget(FaultLocError):
    pass


# llm
class TransportError(FaultLocError):
    pass


class BackendRefusal(FaultLocError):
    pass


class ContextOverflow(FaultLocError):
    pass


class ScriptMismatch(FaultLocError):
    """The scripted mock received a request its next step does not match."""


class ScriptExhausted(ScriptMismatch):
    pass


class UnknownToolRequested(FaultLocError):
    pass


class ToolLoopExhausted(FaultLocError):
    pass


class UnparsableRanking(FaultLocError):
    pass


class UnparsableReply(FaultLocError):
    pass


# agents
class MissingSection(FaultLocError):
    pass


class PreconditionError(FaultLocError, ValueError):
    pass


class PipelineError(FaultLocError):
    """Wraps a module error with the id of the fault being localized."""

    def __init__(self, fault_id: str, cause: BaseException):
        super().__init__(f"[{fault_id}] {type(cause).__name__}: {cause}")
        self.fault_id = fault_id
        self.cause = cause
