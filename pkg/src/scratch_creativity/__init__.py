"""Distance-based creativity scores for Scratch projects.

Fluency, flexibility, and originality are computed per modality (code,
visual, audio) from concept distances; a gradient-boosted tree model
maps the nine features to expert-like creativity rankings.
"""

from .align import (
    Alignment,
    LabeledTree,
    alignment_distance,
    hungarian,
    sequence_edit_distance,
    tree_edit_distance,
)
from .concepts import (
    NULL,
    AxiomReport,
    Concept,
    Metric,
    Product,
    SemanticNetwork,
    check_metric_axioms,
    cosine_distance,
    cosine_metric,
    discrete_metric,
    euclidean_distance,
    euclidean_metric,
    matrix_concept,
    matrix_distance,
    matrix_metric,
    network_distance,
    network_metric,
    symbol_concept,
    vector_concept,
)
from .errors import (
    CreativityError,
    DimensionMismatch,
    FeatureError,
    LabelsError,
    MissingFeatures,
    NetworkError,
    Sb3Error,
    SidecarError,
)
from .measures import (
    AUDIO_CONFIG,
    CODE_CONFIG,
    FEATURE_NAMES,
    VISUAL_CONFIG,
    CreativityVector,
    MeasureConfig,
    flexibility,
    fluency,
    mean_pairwise_distance,
    originality,
)
from .media import (
    AudioFrameConfig,
    FeatureSidecar,
    FeatureStore,
    audio_creativity,
    baseline_audio_features,
    baseline_image_embedding,
    load_sidecar,
    visual_creativity,
    write_sidecar,
)
from .ranking import (
    DEFAULT_SEED,
    EvalReport,
    ExpertLabels,
    GbtModel,
    GbtParams,
    ScoredCorpus,
    fit_gbt,
    kendall_tau,
    load_labels_csv,
    load_model,
    load_weights_csv,
    predict,
    restricted_tau,
    run_experiment,
    save_model,
    weighted_combination,
)
from .sb3 import (
    AssetRef,
    BlockConcept,
    Sb3Project,
    SpriteCode,
    Taxonomy,
    block_distance,
    block_metric,
    build_block_network,
    classify_block,
    code_creativity,
    code_project_distance,
    parse_sb3,
    project_summary,
)

__version__ = "0.1.0"
