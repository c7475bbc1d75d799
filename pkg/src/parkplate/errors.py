"""Exception types raised across the package."""


class ParkplateError(Exception):
    pass


class EmptyGlyph(ParkplateError, ValueError):
    pass


class NoCharacters(ParkplateError):
    pass


class DimensionError(ParkplateError, ValueError):
    pass


class ModelEmpty(ParkplateError):
    pass


class StratifyError(ParkplateError, ValueError):
    pass


class InvalidRatio(ParkplateError, ValueError):
    pass


class FormatError(ParkplateError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownPlateType(ParkplateError):
    pass


class RejectedReading(ParkplateError, ValueError):
    pass


class JournalCorrupt(ParkplateError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvalidRange(ParkplateError, ValueError):
    pass


class ConfigError(ParkplateError, ValueError):
    pass
