//! File formats, dataset layout, corpus generation and depth rendering.

mod codec;
mod corpus;
mod evaluate;
mod layout;
mod render;

pub use self::codec::{
    decode_depth, decode_image, encode_depth_png16, encode_float_map, encode_image_png, load_depth, load_image,
    save_depth, save_image, DepthEncoding, LoadedDepth, DEFAULT_DEPTH_SCALE, FLOAT_MAP_EXTENSION, FLOAT_MAP_MAGIC,
    FLOAT_MAP_VERSION,
};
pub use self::corpus::{
    build_corpus, output_relpath, rebuild_from_manifest, sha256_hex, verify_corpus, CorpusRequest, DatasetManifest,
    ManifestRecord, MANIFEST_FILE_NAME, MANIFEST_SCHEMA_VERSION,
};
pub use self::evaluate::{evaluate_predictions, frame_ids_in, EvaluateOutcome, EvaluateRequest, CLEAN_DIR};
pub use self::layout::{check_disjoint, discover_predictions, Discovery, NamingRule, SplitName, SplitSpec};
pub use self::render::{compose_strip, render_depth, turbo, DepthRange};
