# errors.py

class GroundwaterError(Exception):
    """Base class for every failure the pipeline reports to the operator"""
    exit_code = 1


class ConfigError(GroundwaterError, ValueError):
    """Invalid configuration, sizes or hyperparameters"""
    exit_code = 1


class ShapeError(ConfigError):
    """Dimension mismatch between matrices, models or datasets"""


class ModelFileError(ConfigError):
    """Unreadable or corrupt model file"""

    def __init__(self, section: str, detail: str):
        self.section = section
        super().__init__(f"model file section '{section}': {detail}")


class DataError(GroundwaterError, ValueError):
    """Input data is missing or violates its schema"""
    exit_code = 2


class SchemaError(DataError):
    pass


class ParseError(DataError):
    pass


class TemporalError(DataError):
    pass


class AlignmentError(DataError):
    pass


class EmptyDataError(DataError):
    pass


class DegenerateColumnError(DataError):
    pass


class NumericError(GroundwaterError, ArithmeticError):
    """NaN/Inf produced during training"""
    exit_code = 3
