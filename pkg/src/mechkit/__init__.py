"""Budget-minimal socially efficient mechanisms via shortest paths on type graphs."""
from .core import (Environment, MechanismOutcome, QuadraticLine, QuadraticType, Tabular, Value,
                   as_value, assemble_outcome, format_value, social_welfare, validate_environment)
from .errors import (AuditError, CapacityError, DominanceError, InputError, MechkitError,
                     NegativeCycleError, UnsupportedError)
from .rules import (HIGHEST, LOWEST, AffineWeights, OptionRule, TieBreak, affine_rule, affine_select,
                    enumerate_se_rules, optimize_option_rule, quadratic_rule, quadratic_select, se_rule,
                    se_select, table_rule)
from .spm import (STAR, build_contracted_graph, build_type_graph, compute_payments, contract_graph,
                  run_mechanism, shortest_distance)
from .vcg import clarke_payments, vcg_budget_payments, weighted_vcg_payments

__version__ = "0.1.0"
