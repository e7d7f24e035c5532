"""Exception types raised by the engine modules."""


class PathCalcError(ValueError):
    """Base class for every error raised by pathcalc."""


class DegenerateIntervalError(PathCalcError):
    pass


class ZeroLengthPathError(PathCalcError):
    pass


class JoinError(PathCalcError):
    def __init__(self, index, gap):
        self.index = index
        self.gap = gap
        super().__init__(f"endpoint mismatch between parts {index} and {index + 1} (gap {gap:.3e})")


class EmptySetError(PathCalcError):
    pass


class MembershipError(PathCalcError):
    pass


class PerfectnessError(PathCalcError):
    pass


class RefinementLimitError(PathCalcError):
    def __init__(self, message, best):
        self.best = best
        super().__init__(message)


class ProximityError(PathCalcError):
    pass


class UnderResolvedError(PathCalcError):
    pass


class NoPathsError(PathCalcError):
    pass


class IllConditionedChordError(PathCalcError):
    def __init__(self, generator, s, chord):
        self.generator = generator
        self.s = s
        self.chord = chord
        super().__init__(
            f"chord of length {chord:.3e} at arc length {s:.6g} on generator {generator} is ill-conditioned"
        )


class ZeroChordError(PathCalcError):
    pass


class ResolutionError(PathCalcError):
    pass


class NotDifferentiableError(PathCalcError):
    pass


class UnderdeterminedError(PathCalcError):
    pass


class DeltaTooCoarseError(PathCalcError):
    pass


class PolePlacementError(PathCalcError):
    pass


class NonAntidifferentiableError(PathCalcError):
    pass


class NotRadiallySelfAbsorbingError(PathCalcError):
    pass


class UnknownCorpusError(PathCalcError, KeyError):
    pass


class DescriptorError(PathCalcError):
    pass
