from bbm_voting.settings import VERSION

from bbm_voting.poly import (
    Polynomial,
    BernsteinVector,
    binomial,
    evaluate,
    to_bernstein,
    from_bernstein,
    parse_polynomial,
    format_polynomial,
)

from bbm_voting.models import (
    OffspringDistribution,
    RandomOutcomeModel,
    RandomThresholdModel,
    RecursiveModel,
    CompositeLabelModel,
    McKeanDecomposition,
    NotMcKean,
    compile_outcome,
    compile_threshold,
    compile_recursive,
    forward_nonlinearity,
    mckean_decompose,
    validate,
)

from bbm_voting.catalog import catalog

__version__ = VERSION
