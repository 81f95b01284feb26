use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{EmotionLabel, Group};

pub const MANIFEST_COLUMNS: [&str; 5] = ["id", "source", "emotion", "group", "modality"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Audio,
    Text,
    Embedding,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Audio => "audio",
            Modality::Text => "text",
            Modality::Embedding => "embedding",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "audio" => Ok(Modality::Audio),
            "text" => Ok(Modality::Text),
            "embedding" => Ok(Modality::Embedding),
            other => Err(Error::format(format!("unknown modality `{other}`"))),
        }
    }
}

/// One labelled example. `source` is a WAV path for audio, the utterance
/// itself for text, and `table.csv#row-id` for embeddings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub id: String,
    pub source: String,
    pub emotion: EmotionLabel,
    pub group: Group,
    pub modality: Modality,
}

impl ManifestRow {
    /// Splits an embedding source into table path and row id.
    pub fn embedding_ref(&self) -> Option<(&str, &str)> {
        self.source.rsplit_once('#')
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
    /// Directory that relative sources resolve against.
    pub base_dir: Option<PathBuf>,
}

impl Manifest {
    pub fn new(rows: Vec<ManifestRow>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, r) in rows.iter().enumerate() {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::format_at(i + 2, Some("id"), format!("duplicate id `{}`", r.id)));
            }
        }
        Ok(Self {
            rows,
            base_dir: None,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn of_modality(&self, modality: Modality) -> impl Iterator<Item = &ManifestRow> {
        self.rows.iter().filter(move |r| r.modality == modality)
    }

    pub fn resolve(&self, source: &str) -> PathBuf {
        let p = Path::new(source);
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Parses manifest CSV without touching the filesystem.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::None)
            .from_reader(reader);
        let headers = csv
            .headers()
            .map_err(|e| Error::format_at(1, None, format!("unreadable header: {e}")))?
            .clone();
        let mut cols = [0usize; 5];
        for (slot, name) in cols.iter_mut().zip(MANIFEST_COLUMNS) {
            *slot = headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::format_at(1, Some(name), "missing column"))?;
        }
        if let Some(extra) = headers.iter().find(|h| !MANIFEST_COLUMNS.contains(h)) {
            return Err(Error::format_at(1, Some(extra), "unexpected column"));
        }

        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for record in csv.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Error::format_at(line, None, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let field = |c: usize| -> Result<&str> {
                record
                    .get(cols[c])
                    .ok_or_else(|| Error::format_at(line, Some(MANIFEST_COLUMNS[c]), "missing field"))
            };
            let at = |c: usize, e: Error| match e {
                Error::Format { message, .. } => Error::format_at(line, Some(MANIFEST_COLUMNS[c]), message),
                other => other,
            };
            let id = field(0)?.to_owned();
            if id.is_empty() {
                return Err(Error::format_at(line, Some("id"), "empty id"));
            }
            if !seen.insert(id.clone()) {
                return Err(Error::format_at(line, Some("id"), format!("duplicate id `{id}`")));
            }
            rows.push(ManifestRow {
                id,
                source: field(1)?.to_owned(),
                emotion: field(2)?.parse().map_err(|e| at(2, e))?,
                group: field(3)?.parse().map_err(|e| at(3, e))?,
                modality: field(4)?.parse().map_err(|e| at(4, e))?,
            });
        }
        Ok(Self {
            rows,
            base_dir: None,
        })
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::format(e.to_string());
        csv.write_record(MANIFEST_COLUMNS).map_err(io)?;
        for r in &self.rows {
            csv.write_record([
                r.id.as_str(),
                r.source.as_str(),
                r.emotion.as_str(),
                r.group.as_str(),
                r.modality.as_str(),
            ])
            .map_err(io)?;
        }
        csv.flush().map_err(|e| Error::format(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("manifest is UTF-8")
    }

    /// Checks that every audio and embedding source points at a file.
    pub fn check_sources(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            let path = match r.modality {
                Modality::Text => continue,
                Modality::Audio => r.source.as_str(),
                Modality::Embedding => r
                    .embedding_ref()
                    .map(|(p, _)| p)
                    .ok_or_else(|| Error::format_at(i + 2, Some("source"), "embedding source must be `path#id`"))?,
            };
            if !self.resolve(path).is_file() {
                return Err(Error::format_at(
                    i + 2,
                    Some("source"),
                    format!("referenced file `{path}` does not exist"),
                ));
            }
        }
        Ok(())
    }
}

/// Loads a manifest CSV; relative sources resolve against its directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::format(format!("cannot open manifest {}: {e}", path.display())))?;
    let mut manifest = Manifest::from_reader(file)?;
    manifest.base_dir = path.parent().map(Path::to_path_buf);
    manifest.check_sources()?;
    Ok(manifest)
}

pub fn save_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())
        .map_err(|e| Error::format(format!("cannot create {}: {e}", path.as_ref().display())))?;
    manifest.write(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    const VALID: &str = "id,source,emotion,group,modality\n\
                         u1,what a lovely day,happy,A,text\n\
                         u2,\"rain, rain, go away\",sad,B,text\n";

    #[test]
    fn parses_valid_rows() {
        let m = Manifest::from_reader(VALID.as_bytes()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.rows[1].source, "rain, rain, go away");
        assert_eq!(m.rows[1].emotion, EmotionLabel::Sad);
        assert_eq!(m.rows[1].group, Group::B);
    }

    #[test]
    fn unknown_emotion_names_token() {
        let csv = "id,source,emotion,group,modality\nu1,hi,joyful,A,text\n";
        let err = Manifest::from_reader(csv.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("joyful") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn missing_column_and_duplicates() {
        let csv = "id,source,emotion,modality\nu1,hi,happy,text\n";
        let err = Manifest::from_reader(csv.as_bytes()).unwrap_err();
        assert_eq!(
            err,
            Error::format_at(1, Some("group"), "missing column")
        );
        let csv = "id,source,emotion,group,modality\nu1,hi,happy,A,text\nu1,yo,sad,B,text\n";
        let err = Manifest::from_reader(csv.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("duplicate id"));
    }

    #[test]
    fn unknown_group_is_rejected() {
        let csv = "id,source,emotion,group,modality\nu1,hi,happy,C,text\n";
        assert!(matches!(
            Manifest::from_reader(csv.as_bytes()),
            Err(Error::Format { line: Some(2), .. })
        ));
    }

    #[test]
    fn crlf_and_reordered_columns() {
        let csv = "modality,id,group,emotion,source\r\ntext,u1,A,calm,hello\r\n";
        let m = Manifest::from_reader(csv.as_bytes()).unwrap();
        assert_eq!(m.rows[0].emotion, EmotionLabel::Calm);
        assert_eq!(m.rows[0].source, "hello");
    }

    #[test]
    fn round_trip_through_csv() {
        let m = Manifest::from_reader(VALID.as_bytes()).unwrap();
        let back = Manifest::from_reader(m.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn load_checks_referenced_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.wav"), b"RIFF").unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "id,source,emotion,group,modality\nx,a.wav,happy,A,audio\n").unwrap();
        let m = load_manifest(&path).unwrap();
        assert!(m.resolve("a.wav").is_file());

        std::fs::write(&path, "id,source,emotion,group,modality\nx,missing.wav,happy,A,audio\n").unwrap();
        assert!(load_manifest(&path).is_err());
    }
}
