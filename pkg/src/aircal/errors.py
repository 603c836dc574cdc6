"""Exception hierarchy shared by every stage of the pipeline."""


class AircalError(Exception):
    """Base class for all library errors."""


class EmptySeries(AircalError, ValueError):
    pass


class EmptyInput(AircalError, ValueError):
    pass


class TooFewValues(AircalError, ValueError):
    pass


class LengthMismatch(AircalError, ValueError):
    pass


class ZeroVariance(AircalError, ValueError):
    pass


class InvalidWindow(AircalError, ValueError):
    pass


class InvalidConfig(AircalError, ValueError):
    pass


class EmptyFile(AircalError, ValueError):
    pass


class _LineError(AircalError, ValueError):
    def __init__(self, line_no: int, detail: str = ""):
        self.line_no = line_no
        msg = f"line {line_no}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class MalformedLine(_LineError):
    pass


class NonIntegerValue(_LineError):
    pass


class InvalidValue(_LineError):
    pass


class EmptyTruth(AircalError, ValueError):
    pass


class ZeroTruthValue(AircalError, ValueError):
    pass


class ZeroVarianceTruth(ZeroVariance):
    pass


class TooFewSamples(AircalError, ValueError):
    pass


class ZeroVarianceColumn(ZeroVariance):
    pass


class NonFiniteLoss(AircalError, ArithmeticError):
    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"loss became non-finite at epoch {epoch}")


class BadRowWidth(AircalError, ValueError):
    pass


class NonFiniteInput(AircalError, ValueError):
    pass


class FormatVersionMismatch(AircalError, ValueError):
    pass


class CorruptPayload(AircalError, ValueError):
    pass


class PlanError(AircalError, ValueError):
    pass
