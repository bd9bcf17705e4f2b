"""Speaker-listener label propagation for overlapping community detection."""
from .core import Memories, RunConfig, evolve, initialize, listener_choice, speaker_choice
from .errors import (
    ConfigurationError,
    ParameterError,
    ParseError,
    ResolutionError,
    SLPAError,
    StructuralError,
)
from .graph import (
    AttributeTable,
    Cover,
    Graph,
    load_attribute_table,
    load_cover_file,
    load_edge_list,
    project_bipartite,
)
from .pipeline import slpa
from .postprocess import (
    apply_threshold,
    attribute_match,
    containment_forest,
    detect,
    group_connected,
    membership_distribution,
    prune_subsets,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeTable",
    "ConfigurationError",
    "Cover",
    "Graph",
    "Memories",
    "ParameterError",
    "ParseError",
    "ResolutionError",
    "RunConfig",
    "SLPAError",
    "StructuralError",
    "apply_threshold",
    "attribute_match",
    "containment_forest",
    "detect",
    "evolve",
    "group_connected",
    "initialize",
    "listener_choice",
    "load_attribute_table",
    "load_cover_file",
    "load_edge_list",
    "membership_distribution",
    "project_bipartite",
    "prune_subsets",
    "slpa",
    "speaker_choice",
]
