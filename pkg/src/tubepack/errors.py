class SynopsisError(Exception):
    pass


class InvalidTrackError(SynopsisError, ValueError):
    def __init__(self, message, frame=None):
        if frame is not None:
            message = f"{message} (frame {frame})"
        super().__init__(message)
        self.frame = frame


class TrackFileError(SynopsisError, ValueError):
    """Unparseable or invalid track / schedule file."""


class InstanceRejected(SynopsisError, ValueError):
    """The instance has no feasible placement (a tube is longer than t_max)."""


class InvalidStateError(SynopsisError, ValueError):
    pass


class UndefinedCostError(SynopsisError, ValueError):
    pass


class OracleTooLargeError(SynopsisError, RuntimeError):
    pass
