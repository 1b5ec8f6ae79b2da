"""Binary document signatures, streaming tree clustering, and cluster validity evaluation."""

from .clustering import Clustering, read_clustering, write_clustering
from .errors import (
    CoverageError,
    DataError,
    DimensionMismatchError,
    DuplicateDocIdError,
    EmptyTreeError,
    FormatError,
    InsufficientDataError,
    InvariantError,
    MagicError,
    ParseError,
    SigtreeError,
    TruncatedError,
    UsageError,
    VersionError,
)
from .evaluation import (
    Curve,
    CurveSummary,
    Qrels,
    SpamScores,
    curve_summary,
    oracle_recall_curve,
    parse_qrels,
    parse_spam,
    read_curve_csv,
    spam_oracle_curve,
    spam_purity_curve,
    structure_matched_baseline,
    write_curve_csv,
)
from .routing import RouteResult, TreeRouter
from .sigfile import SignatureWriter, read_header, read_signatures, write_signatures
from .signatures import (
    Signature,
    SignatureCollection,
    SignatureSpec,
    TermVector,
    hamming,
    hamming_matrix,
    hamming_words,
    pack_bits,
    project_and_quantize,
    term_code,
    unpack_bits,
)
from .streaming import (
    CollectionSource,
    FileSource,
    RunStats,
    StreamingTree,
    assign_pass,
    measure_insertion_throughput,
    streaming_emtree,
    streaming_iteration,
)
from .text import load_stopwords, porter_stem, term_weights, tokenize
from .tree import (
    Accumulator,
    LeafBucket,
    Node,
    TreeConfig,
    copy_tree,
    count_clusters,
    distortion,
    emtree,
    extract_clustering,
    insert_all,
    nearest_record,
    prune,
    quantize_counts,
    reservoir_indices,
    seed_tree,
    trees_equal,
    update_keys,
)
from .treefile import read_tree, write_tree

__version__ = "0.1.0"
