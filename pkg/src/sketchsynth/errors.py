"""Exception types shared across the engine."""


class SketchSynthError(Exception):
    """Base class for all engine errors."""


class DomainError(SketchSynthError):
    """Invalid ontology document or lookup against one."""


class WorldError(SketchSynthError):
    """Invalid world state or reference to a missing region/entity."""


class DocumentError(SketchSynthError):
    """Malformed or unknown-field document."""


class SketchParseError(SketchSynthError):
    """Sketch cannot be turned into a region sequence."""


class UnparseableClauseError(SketchSynthError):
    """No command schema matches any verb in the clause."""

    def __init__(self, clause_text: str, index: int | None = None):
        self.clause_text = clause_text
        self.index = index
        where = f" (clause {index})" if index is not None else ""
        super().__init__(f"unparseable clause{where}: {clause_text!r}")


class PlanError(SketchSynthError):
    """Planning failed."""


class UnresolvableHoleError(PlanError):
    """No candidate entity or entity type anywhere in the domain fits a hole."""


class BudgetExhaustedError(PlanError):
    """Node budget ran out before a plan was found."""


class AmbiguousLoopError(SketchSynthError):
    """Region sequence repeats in a way that does not describe a single loop."""


class FoldMismatchError(SketchSynthError):
    """Loop iterations in a trace are not identical; indicates a planner bug."""

    def __init__(self, first, second):
        self.first = first
        self.second = second
        super().__init__(
            "loop iterations differ:\n  first:  %s\n  second: %s" % (first, second)
        )


class RuntimeFault(SketchSynthError):
    """An action's precondition was false when the executor reached it."""

    def __init__(self, state_id: str, detail: str):
        self.state_id = state_id
        self.detail = detail
        super().__init__(f"runtime fault at state {state_id}: {detail}")


class SynthesisError(SketchSynthError):
    """Pipeline failure, annotated with the recording and stage that failed."""

    def __init__(self, recording_id: str, stage: str, cause: Exception):
        self.recording_id = recording_id
        self.stage = stage
        self.cause = cause
        super().__init__(f"recording {recording_id!r}, stage {stage}: {cause}")
