"""Exception hierarchy shared by all infocap components.

Two failure families matter to callers: bad input (malformed files,
arguments outside their domain, contract violations by user-supplied
models) and integrity failures (independently produced data sources that
disagree where they must agree). The CLI maps the first family to exit
code 1 and the second to exit code 2.
"""


class InfoCapError(Exception):
    """Base class for every error raised by this package."""


class InputError(InfoCapError):
    """Unusable input: bad arguments, unreadable or malformed sources."""


class DomainError(InputError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class EmptyInputError(DomainError):
    """A non-empty collection was required."""


class ParseError(InputError, ValueError):
    """A definition or config file does not parse; message names the location."""


class DescriptorError(ParseError):
    """An architecture descriptor is missing fields or violates invariants."""


class CoverageError(InputError):
    """A tokenizer cannot represent some byte of its input."""


class ModelError(InputError):
    """A probability model violated its frequency-table contract."""


class DecodeError(InfoCapError):
    """A compressed bitstream is truncated or corrupt."""


class PipelineError(InfoCapError):
    """Internal pipeline precondition broken (e.g. truncating a short sample)."""


class IntegrityError(InfoCapError):
    """Independently produced inputs disagree (e.g. token ids diverge)."""
