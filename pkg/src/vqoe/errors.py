"""Exception hierarchy.

Input problems derive from :class:`InputError`, model-file problems from
:class:`ModelError`; the CLI maps the two families to distinct exit codes.
"""


class VqoeError(Exception):
    pass


class InputError(VqoeError):
    pass


class ModelError(VqoeError):
    pass


# video_io
class MalformedHeader(InputError):
    pass


class UnsupportedChroma(InputError):
    pass


class TruncatedFrame(InputError):
    pass


class NonPositiveBitrate(InputError):
    pass


# metrics
class DimensionMismatch(InputError):
    pass


class EmptyClip(InputError):
    pass


class MissingRecordedBitrate(InputError):
    pass


# features / dataset
class MosOutOfRange(InputError):
    pass


class MissingFile(InputError):
    pass


class MalformedRow(InputError):
    def __init__(self, row_index, message):
        super().__init__(f"row {row_index}: {message}")
        self.row_index = row_index


# synth
class SpanOutOfBounds(InputError):
    pass


class OverlappingSpans(InputError):
    pass


# learn
class LengthMismatch(InputError):
    pass


class EmptyInput(InputError):
    pass


class TooFewSamples(InputError):
    pass


class DegenerateTargets(InputError):
    pass


class UntrainedModel(ModelError):
    pass


class SchemaVersionMismatch(ModelError):
    pass


class CorruptModel(ModelError):
    pass
