"""Profile undirected graphical models."""
from .errors import CapacityError, GenerationError, InputError, NumericalError, ProfileGMError
from .graph import (
    CIRCLE,
    SQUARE,
    MultipleGraphs,
    ProfileGraph,
    StateSpace,
    graph_from_multiple,
    induced_multiple_graphs,
    neighbours_x,
    to_dot,
    validate,
    x_connected_components,
    x_path_exists,
    x_separates,
)
from .gaussian import (
    GaussianProfileParams,
    PosteriorSummaries,
    ProfileDataset,
    conforms_to_graph,
    extract_profile_graph,
    zeta_from,
)

__version__ = "0.1.0"
