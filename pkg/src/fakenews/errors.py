"""Exception hierarchy shared by every stage of the pipeline."""


class FakeNewsError(Exception):
    """Base class for all toolkit errors."""


# -- data / ingestion (CLI exit code 2) ---------------------------------------


class DataError(FakeNewsError):
    """Input data could not be read or is not usable."""


class DatasetNotFound(DataError, FileNotFoundError):
    pass


class MalformedCsv(DataError):
    pass


class MissingColumn(DataError):
    pass


class UnknownLabel(DataError):
    def __init__(self, value, row):
        self.value = value
        self.row = row
        super().__init__(f"data row {row}: unknown label {value!r}")


class EmptyCorpus(DataError):
    pass


class UnlabeledDocument(DataError):
    pass


class EmptyVocabulary(DataError):
    pass


class ConfigError(DataError):
    """Config file missing, unparsable, or inconsistent."""


# -- model artifacts (CLI exit code 2) ----------------------------------------


class ArtifactError(DataError):
    pass


class UnsupportedVersion(ArtifactError):
    pass


class ChecksumMismatch(ArtifactError):
    pass


class UnknownModelKind(ArtifactError):
    pass


# -- training / inference (CLI exit code 3) -----------------------------------


class ModelError(FakeNewsError):
    pass


class DimensionMismatch(ModelError, ValueError):
    pass


class SingleClassTraining(ModelError, ValueError):
    pass


class WrongModelKind(ModelError):
    pass


class DivergedTraining(ModelError):
    pass


class StaleCache(ModelError):
    pass


class EmptyNode(ModelError):
    pass


# -- evaluation ---------------------------------------------------------------


class LengthMismatch(FakeNewsError, ValueError):
    pass


class EmptyInput(FakeNewsError, ValueError):
    pass


class EmptyMatrix(FakeNewsError, ValueError):
    pass


# -- orchestration ------------------------------------------------------------


class PipelineError(FakeNewsError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


class PartialFailure(FakeNewsError):
    """Some enabled models failed; the others completed and were reported."""

    def __init__(self, failures, result=None):
        self.failures = dict(failures)
        self.result = result
        names = ", ".join(sorted(self.failures))
        super().__init__(f"{len(self.failures)} model(s) failed: {names}")
