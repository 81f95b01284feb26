use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector};
use crate::scalar::Scalar;

/// Externally computed embeddings keyed by id, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<Vec<T>>,
    index: HashMap<String, usize>,
}

impl<T: Scalar> EmbeddingTable<T> {
    /// Parses `id,dim,v0,...,v{dim-1}` CSV.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
        let headers = csv
            .headers()
            .map_err(|e| Error::format_at(1, None, format!("unreadable header: {e}")))?
            .clone();
        if headers.get(0) != Some("id") || headers.get(1) != Some("dim") {
            return Err(Error::format_at(1, None, "header must start with `id,dim`"));
        }
        let dim = headers.len() - 2;
        if dim == 0 {
            return Err(Error::format_at(1, None, "header declares no value columns"));
        }
        for (i, h) in headers.iter().skip(2).enumerate() {
            if h != format!("v{i}") {
                return Err(Error::format_at(1, Some(h), format!("expected column `v{i}`")));
            }
        }

        let mut table = Self {
            dim,
            ids: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        };
        for record in csv.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Error::format_at(line, None, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let id = record.get(0).unwrap_or_default().to_owned();
            let declared: usize = record
                .get(1)
                .and_then(|d| d.trim().parse().ok())
                .ok_or_else(|| Error::format_at(line, Some("dim"), "dim is not an integer"))?;
            if declared != dim || record.len() != dim + 2 {
                return Err(Error::format_at(
                    line,
                    None,
                    format!(
                        "row has {} values (declared {declared}), table dim is {dim}",
                        record.len().saturating_sub(2)
                    ),
                ));
            }
            let mut values = Vec::with_capacity(dim);
            for (i, raw) in record.iter().skip(2).enumerate() {
                let col = format!("v{i}");
                let v: f64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::format_at(line, Some(&col), format!("`{raw}` is not a number")))?;
                if !v.is_finite() {
                    return Err(Error::format_at(line, Some(&col), format!("non-finite value `{raw}`")));
                }
                values.push(T::lit(v));
            }
            if table.index.insert(id.clone(), table.ids.len()).is_some() {
                return Err(Error::format_at(line, Some("id"), format!("duplicate id `{id}`")));
            }
            table.ids.push(id);
            table.vectors.push(values);
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, id: &str) -> Option<FeatureVector<T>> {
        self.index.get(id).map(|&i| FeatureVector {
            values: self.vectors[i].clone(),
            kind: FeatureKind::ExternalEmbedding,
        })
    }
}

pub fn load_embedding_table<T: Scalar>(path: impl AsRef<Path>) -> Result<EmbeddingTable<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::format(format!("cannot open {}: {e}", path.display())))?;
    EmbeddingTable::from_reader(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "id,dim,v0,v1,v2,v3\n";

    #[test]
    fn two_rows_of_dim_four() {
        let csv = format!("{HEADER}a,4,0.1,0.2,0.3,0.4\nb,4,-1,0,1,2\n");
        let t = EmbeddingTable::<f64>::from_reader(csv.as_bytes()).unwrap();
        assert_eq!(t.dim(), 4);
        assert_eq!(t.len(), 2);
        let v = t.get("b").unwrap();
        assert_eq!(v.values, vec![-1.0, 0.0, 1.0, 2.0]);
        assert_eq!(v.kind, FeatureKind::ExternalEmbedding);
        assert!(t.get("c").is_none());
    }

    #[test]
    fn ragged_row_reports_line() {
        let csv = format!("{HEADER}a,4,0.1,0.2,0.3,0.4\nb,4,1,2,3\n");
        let err = EmbeddingTable::<f64>::from_reader(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { line: Some(3), .. }), "{err}");
    }

    #[test]
    fn nan_is_rejected() {
        let csv = format!("{HEADER}a,4,0.1,NaN,0.3,0.4\n");
        let err = EmbeddingTable::<f64>::from_reader(csv.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("NaN"));
    }

    #[test]
    fn header_and_duplicates() {
        assert!(EmbeddingTable::<f64>::from_reader("id,v0\n".as_bytes()).is_err());
        assert!(EmbeddingTable::<f64>::from_reader("id,dim,v1\n".as_bytes()).is_err());
        let csv = "id,dim,v0\na,1,1\na,1,2\n";
        assert!(EmbeddingTable::<f32>::from_reader(csv.as_bytes()).is_err());
    }
}
