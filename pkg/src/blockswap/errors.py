"""Exception types shared across the toolkit."""


class BlockswapError(Exception):
    """Base class for all toolkit errors."""


class MalformedDocument(BlockswapError):
    """Input bytes are not a well-formed JSON document."""


class SchemaViolation(BlockswapError):
    """A JSON document does not match the expected schema.

    ``path`` is a JSON path such as ``$.edges``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class NotSISO(BlockswapError):
    """A layer subset does not form a single-input/single-output region."""


class InconsistentSpatial(BlockswapError):
    """Input-to-output paths disagree on their spatial-change product."""


class StartNotSingleInput(BlockswapError):
    """The traversal start layer has more than one inbound connection."""


class TooLarge(BlockswapError):
    """Input exceeds the size cap of an exhaustive oracle."""


class NoSubnetFound(BlockswapError):
    """Sub-network sampling exhausted its retry budget."""


class EmptyPretrainedSet(BlockswapError):
    """Alternatives were requested but no pretrained networks supplied."""


class MaskLengthMismatch(BlockswapError):
    """A channel mask does not match its boundary width."""


class UnknownAlternative(BlockswapError):
    """A plan references an alternative the profile or house does not know."""


class BoundaryMismatch(BlockswapError):
    """Replacement boundary channels or spatial change disagree."""


class TargetNotIntact(BlockswapError):
    """A replacement target is missing layers or its boundary was altered."""
