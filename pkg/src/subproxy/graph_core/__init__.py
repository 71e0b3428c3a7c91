"""Graph types and exact graph algorithms."""

from .mag import (
    confounder_paths,
    find_latent_confounder,
    has_inducing_path,
    is_inducing_path,
    mag_from_full_time_dag,
)
from .separation import ancestors, d_separated, descendants
from .structures import confounding_structure_within, directed_path_within
from .text import (
    GraphFormatError,
    detect_kind,
    format_mag,
    format_pd_dag,
    format_summary,
    parse_mag,
    parse_pd_dag,
    parse_summary,
    read_summary,
    write_text,
)
from .types import (
    Dag,
    FullTimeDag,
    GraphError,
    Mag,
    PdDag,
    SubsamplingError,
    SummaryGraph,
    TimeVertex,
    UnknownVertexError,
    default_names,
)
from .unroll import unroll

__all__ = [
    "Dag",
    "FullTimeDag",
    "GraphError",
    "GraphFormatError",
    "Mag",
    "PdDag",
    "SubsamplingError",
    "SummaryGraph",
    "TimeVertex",
    "UnknownVertexError",
    "confounder_paths",
    "default_names",
    "detect_kind",
    "find_latent_confounder",
    "format_mag",
    "format_pd_dag",
    "format_summary",
    "has_inducing_path",
    "is_inducing_path",
    "mag_from_full_time_dag",
    "parse_mag",
    "parse_pd_dag",
    "parse_summary",
    "read_summary",
    "unroll",
    "write_text",
]
