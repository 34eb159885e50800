"""SymForge: a symbolic-mathematics dataset forge and evaluator.

Random expression sampling, calculus-based construction of integration and
ODE (problem, solution) datasets in prefix token form, and an equivalence
metric that scores model predictions by simplifying and numerically probing
the difference against the reference.
"""

from .expr import (
    App,
    ARITY,
    BINARY_OPS,
    EvalDomainError,
    Expr,
    Int,
    LEAF_SYMBOLS,
    OPERATORS,
    Sym,
    UNARY_OPS,
    UnboundSymbolError,
    add,
    div,
    evaluate,
    free_symbols,
    metrics,
    mul,
    neg,
    pow_,
    simplify,
    simplify_ex,
    structural_equal,
    sub,
    substitute,
)
from .prefix import (
    MalformedSequenceError,
    TokenSequence,
    Vocabulary,
    build_vocabulary,
    decode,
    encode,
    text_to_tokens,
    tokens_to_text,
)
from .sampling import (
    GenProfile,
    ProfileError,
    count_shapes,
    decorate,
    preset_profile,
    sample_expression,
    sample_shape,
)
from .calculus import (
    IsolationResult,
    Primitive,
    as_fraction,
    differentiate,
    integrate_rule_based,
    isolate_leaf,
)
from .taskgen import (
    GenStats,
    GenerationExhausted,
    PrimitiveTable,
    SamplePair,
    gen_bwd,
    gen_fwd,
    gen_ibp,
    gen_ode1,
    gen_ode2,
    generate_samples,
    seed_table_from_bwd,
)
from .evalkit import (
    EquivVerdict,
    EvalReport,
    Outcome,
    check_equiv,
    check_equiv_exprs,
    check_ode_solution,
    score_files,
    shift_matrix,
)
from .datafiles import (
    DatasetFormatError,
    SplitSpec,
    dataset_stats,
    read_dataset,
    split_dataset,
    write_dataset,
)

__version__ = "0.1.0"
