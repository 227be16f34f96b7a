"""Condition-to-caption toolkit.

Structured six-component video captions, the evaluation suite around them
(lexical, semantic, intent-reasoning, and condition-fidelity metrics),
camera/pose condition geometry, and the dataset pipeline for building
condition-to-caption training data.
"""

__version__ = "0.1.0"

from .captions import (
    COMPONENTS,
    Condition,
    ConditionKind,
    ConditionSet,
    StructuredCaption,
    condition_dropout,
    corpus_integrity,
    parse_structured_caption,
    sentence_dropout,
    serialize_structured_caption,
    split_sentences,
    structural_integrity,
)
from .camera import (
    CameraPose,
    CameraTrajectory,
    PlueckerMap,
    cam_mc,
    camera_metrics,
    classify_movement,
    describe_movement,
    load_trajectory,
    normalize_to_first,
    pluecker_embedding,
    rot_err,
    trans_err,
)
from .dataset import (
    CaptionRecord,
    DatasetStats,
    StageConfig,
    TrainingManifest,
    assemble_condition_sequence,
    build_manifest,
    compute_stats,
    read_records,
    write_records,
)
from .irscore import (
    IntentAspect,
    IRReport,
    JudgeVerdict,
    QAPair,
    aggregate,
    answer_from_caption,
    build_qa_pairs,
    extract_intent,
    grade,
    run_irscore,
)
from .judge import (
    HttpJudgeClient,
    JudgeClient,
    JudgeConfig,
    JudgeRequest,
    ReplayCache,
    ReplayJudgeClient,
)
from .lexical import bleu_n, corpus_lexical, meteor, rouge_l, tokenize
from .pose_depth import (
    COCO17,
    PoseTrack,
    SkeletonTopology,
    depth_mae,
    load_pose_tracks,
    pose_accuracy,
    rasterize_pose,
)
from .prompts import (
    PromptTemplate,
    check_prompt_constraints,
    get_template,
    render_prompt,
)
from .semantic import (
    CachingProvider,
    EmbeddingProvider,
    MockProvider,
    RemoteProvider,
    bertscore,
    clip_text_sim,
    identity_preservation,
)
