"""ABL retrodiction, pre/post-selection paradoxes and KCBS contextuality scans."""
from .abl import (
    AblDistribution,
    TwoState,
    abl_dichotomic,
    abl_probabilities,
    counterfactual_assignment,
)
from .cycles import (
    CycleGraph,
    CycleInstance,
    exclusivity_ok,
    k_value,
    kcbs_projectors,
    ncycle_projectors,
    noncontextual_bound,
)
from .errors import *  # noqa: F401,F403
from .hilbert import (
    PVM,
    Projector,
    StateVector,
    born_probability,
    collapse,
    complement,
    inner_product,
    normalize,
    rank1_projector,
)
from .montecarlo import SimConfig, SimEstimate, simulate_pps, verify_abl
from .scan import (
    ScanResult,
    SphereGrid,
    constrained_max,
    paradox_search,
    region_above,
    scan_postselection,
)
from .scenarios import (
    DichotomicSetting,
    ParadoxWitness,
    SectorLabel,
    check_logical_paradox,
    classify_sector,
    three_box_scenario,
)

__version__ = "0.1.0"
