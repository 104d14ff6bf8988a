"""Exception hierarchy shared across the package.

Every error that callers are expected to branch on gets its own class;
generic misuse raises ``InvalidInput`` (a ``ValueError``).
"""


class EntrywayError(Exception):
    """Base class for all package errors."""


class InvalidInput(EntrywayError, ValueError):
    """Malformed or out-of-contract input."""


class NotTrained(EntrywayError):
    """Predict called on a model with no entries."""


class ModeMismatch(InvalidInput):
    """A model was queried through the pipeline of the other mode."""


class NoFaceDetected(EntrywayError):
    """Full-face pipeline: the detector produced no face box."""


class InsufficientLandmarks(EntrywayError):
    """Occluded pipeline: fewer than two eyes available."""


class EmptyRoi(InvalidInput):
    """Requested crop box lies fully outside the image."""


class ModelFormatError(EntrywayError):
    """Base for model (de)serialization failures."""


class BadMagic(ModelFormatError):
    """Model bytes do not start with the expected magic."""


class UnsupportedVersion(ModelFormatError):
    """Model format version is not one this build can read."""


class TruncatedModel(ModelFormatError):
    """Model bytes end mid-structure; no partial model is returned."""


class AnnotationError(InvalidInput):
    """Malformed landmark sidecar line; message names file and line."""


class ScenarioParseError(InvalidInput):
    """Malformed scenario line; message names the line number."""


class ManifestError(InvalidInput):
    """Malformed or unusable evaluation manifest."""


class DuplicateUser(InvalidInput):
    """add_user with an id that already exists."""


class UnknownUser(EntrywayError, KeyError):
    """Operation on a user id that is not in the store."""


class MalformedPin(InvalidInput):
    """PIN is not exactly four decimal digits."""


class SessionStateError(EntrywayError):
    """Enrollment session operation in the wrong state."""
