//! Manifests, embedding tables, WAV I/O and dataset splits.

mod embedding;
mod manifest;
mod ravdess;
mod split;
mod wav;

pub use embedding::{load_embedding_table, EmbeddingTable};
pub use manifest::{load_manifest, save_manifest, Manifest, ManifestRow, Modality, MANIFEST_COLUMNS};
pub use ravdess::{parse_ravdess_filename, RavdessInfo};
pub use split::split;
pub use wav::{read_wav, read_wav_from, write_wav_pcm16, write_wav_pcm16_to};
