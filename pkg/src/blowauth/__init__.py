"""blowauth: blow-acoustic + face-embedding biometric authentication toolkit.

Pipeline: raw audio -> RMS/SMA intensity series -> pairwise similarity
(six interchangeable kernels) -> optional fusion with a face-embedding
channel -> kNN scoring against per-user calibrated thresholds -> FAR/FRR/
EER/accuracy evaluation.
"""

from .signal_prep import (
    BlowSeries,
    PreprocessConfig,
    RawAudio,
    preprocess_session,
    read_samples_csv,
    read_wav,
    rms_windows,
    sma,
    write_wav,
)
from .kernels import (
    KERNEL_KINDS,
    KernelConfig,
    ScoreMatrix,
    ShapeletConfig,
    dtw,
    dtw_path,
    dtw_plus_s,
    euclidean,
    kernel_distance,
    pairwise_matrix,
    sbd,
    shape_descriptors,
    shape_dtw,
    shapelet_representation,
    twed,
    warm_up_jit,
)
from .face import (
    EMBEDDING_DIM,
    FaceEmbedding,
    cosine_distance,
    load_embeddings,
    synth_embeddings,
    write_embeddings,
)
from .fusion import (
    DecisionConfig,
    NormalizationBounds,
    Threshold,
    authenticate,
    calibrate_threshold,
    fit_bounds,
    fuse,
    knn_score,
    min_max_normalize,
)
from .dataset import (
    ColumnMap,
    Dataset,
    MODES,
    SessionRecord,
    load_matrix,
    load_sessions_csv,
    load_thresholds,
    save_matrix,
    save_sessions_csv,
    save_thresholds,
    synth_dataset,
)
from .evaluation import (
    CHANNELS,
    ConfusionCounts,
    EvalRow,
    ProtocolResult,
    dba_signature,
    eer,
    genuine_scores,
    impostor_scores,
    load_report,
    rates,
    render_report_text,
    run_protocol,
    save_report,
)

__version__ = "0.1.0"
