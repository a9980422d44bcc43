"""Probabilistic lambda calculi with exact multidistribution semantics and a
monadic, non-idempotent intersection type system that bounds expected runtime."""

from .derivation import (Derivation, DerivationError, Judgment, check_derivation, derive,
                         deserialize, merge_derivations, partition_derivation,
                         scale_derivation, serialize, size, tight_value_derivations,
                         weight)
from .multidist import DomainError, MassOverflow, MultiDist
from .semantics import (EvaluationError, OpenTermError, StateLimitExceeded, approximants,
                        et_approx, evaluate, lift, p_approx, step)
from .syntax import (App, Choice, Lam, Let, Mode, Term, Var, format_term, parse,
                     substitute)
from .transform import (ExpansionResult, anti_substitute, null_complete, subject_expand,
                        subject_reduce, substitute_derivation, tight_complete)
from .types import (EMPTY, NULL, STAR, Arrow, Context, InterType, TypeDist, is_tight,
                    parse_type)

__all__ = [
    "App", "Arrow", "Choice", "Context", "Derivation", "DerivationError", "DomainError",
    "EMPTY", "EvaluationError", "ExpansionResult", "InterType", "Judgment", "Lam", "Let",
    "MassOverflow", "Mode", "MultiDist", "NULL", "OpenTermError", "STAR",
    "StateLimitExceeded", "Term", "TypeDist", "Var", "anti_substitute", "approximants",
    "check_derivation", "derive", "deserialize", "et_approx", "evaluate", "format_term",
    "is_tight", "lift", "merge_derivations", "null_complete", "p_approx", "parse",
    "parse_type", "partition_derivation", "scale_derivation", "serialize", "size",
    "step", "subject_expand", "subject_reduce", "substitute", "substitute_derivation",
    "tight_complete", "tight_value_derivations", "weight",
]
