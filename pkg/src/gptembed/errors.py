"""Exception hierarchy. Every domain error carries a short machine-readable code."""


class GptError(Exception):
    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"error": self.code, "message": str(self)}
        for k, v in self.details.items():
            out[k] = v
        return out


class InvalidArgument(GptError, ValueError):
    code = "invalid-argument"


class PreconditionViolation(GptError):
    code = "precondition-violation"


class UnsupportedRepresentation(GptError):
    code = "unsupported-representation"


class SizeLimitExceeded(GptError):
    code = "size-limit"


class MissingReference(GptError):
    code = "missing-reference"


class NotABipartiteState(GptError):
    code = "not-a-bipartite-state"


class InvalidScenario(GptError):
    code = "invalid-scenario"


class NoAlignment(GptError):
    code = "no-alignment"


class ParseError(GptError, ValueError):
    code = "parse-error"


class InternalError(GptError):
    code = "internal-error"


class PipelineError(GptError):
    code = "pipeline-error"
