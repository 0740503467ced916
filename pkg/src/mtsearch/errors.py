"""Exception hierarchy shared by all mtsearch modules.

Every error carries a stable machine-readable ``code`` and the HTTP status
the REST layer maps it to, so the service can surface module errors without
translation tables.
"""

from __future__ import annotations


class MtsError(Exception):
    """Base class for all library errors."""

    code = "internal_error"
    http_status = 500


class FormatError(MtsError):
    """CSV row has the wrong number of columns."""

    code = "format_error"
    http_status = 400

    def __init__(self, row: int):
        super().__init__(f"row {row} has an inconsistent number of columns")
        self.row = row


class ParseError(MtsError):
    """A CSV cell is not numeric."""

    code = "parse_error"
    http_status = 400

    def __init__(self, row: int, col: int):
        super().__init__(f"cell ({row}, {col}) is not numeric")
        self.row = row
        self.col = col


class BadRequest(MtsError):
    code = "bad_request"
    http_status = 400


class EmptyDataset(MtsError):
    code = "empty_dataset"
    http_status = 400


class UnknownTrack(MtsError):
    code = "unknown_track"
    http_status = 400


class WindowTooLarge(MtsError):
    code = "window_too_large"
    http_status = 422


class ShapeError(MtsError):
    code = "shape_error"
    http_status = 400


class EmptyInput(MtsError):
    code = "empty_input"
    http_status = 400


class EmptyCandidates(MtsError):
    """No window collided with the query even at the widest search radius.

    Usually indicates a pathological query; widening the bucket width helps.
    """

    code = "empty_candidates"
    http_status = 422


class NoPositiveTables(MtsError):
    code = "no_positive_tables"
    http_status = 400


class NoPositiveSamples(MtsError):
    code = "no_positive_samples"
    http_status = 400


class UnknownNode(MtsError):
    code = "unknown_node"
    http_status = 404


class UnknownDataset(MtsError):
    code = "unknown_dataset"
    http_status = 404


class UnknownSession(MtsError):
    code = "unknown_session"
    http_status = 404


class StaleResults(MtsError):
    code = "stale_results"
    http_status = 409


class TrainInProgress(MtsError):
    code = "train_in_progress"
    http_status = 409


class ResourceExhausted(MtsError):
    code = "resource_exhausted"
    http_status = 507
