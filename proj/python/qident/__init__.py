from ._core import (
    QidentError,
    __version__,
    check_dina,
    check_gdina,
    dina_distribution,
    enumerate,
    fit,
    generic_complete,
    q24_witnesses,
    q_equivalent,
    simulate_dina,
)

__all__ = [
    "QidentError",
    "__version__",
    "check_dina",
    "check_gdina",
    "dina_distribution",
    "enumerate",
    "fit",
    "generic_complete",
    "q24_witnesses",
    "q_equivalent",
    "simulate_dina",
]
