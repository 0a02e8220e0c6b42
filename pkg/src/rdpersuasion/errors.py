"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` so the CLI can emit a
structured error object.
"""


class PersuasionError(Exception):
    code = "error"

    def to_dict(self):
        return {"code": self.code, "type": type(self).__name__, "message": str(self)}


class MixedTreatmentPresence(PersuasionError):
    code = "mixed_treatment_presence"


class InsufficientSideData(PersuasionError):
    code = "insufficient_side_data"


class ScenarioMismatch(PersuasionError):
    code = "scenario_mismatch"


class NonBinaryValue(PersuasionError):
    code = "non_binary_value"


class InvalidValue(PersuasionError):
    code = "invalid_value"


class SingularDesign(PersuasionError):
    code = "singular_design"


class DegenerateRunning(PersuasionError):
    code = "degenerate_running"


class WeakDenominator(PersuasionError):
    code = "weak_denominator"


class WeakFirstStage(PersuasionError):
    code = "weak_first_stage"


class NoVariance(PersuasionError):
    code = "no_variance"


class DomainError(PersuasionError, ValueError):
    code = "domain_error"


class IncoherentPlan(PersuasionError):
    code = "incoherent_plan"


class Infeasible(PersuasionError):
    code = "infeasible"


class IncoherentInputs(PersuasionError):
    code = "incoherent_inputs"


class InvalidDgp(PersuasionError):
    code = "invalid_dgp"


class MissingColumn(PersuasionError):
    code = "missing_column"


class ParseError(PersuasionError):
    code = "parse_error"


class ConfigError(PersuasionError):
    code = "config_error"
