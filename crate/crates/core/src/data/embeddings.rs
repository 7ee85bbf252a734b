use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::nn::PretrainedEmbeddings;
use crate::{Error, Result};

/// Loads pretrained embeddings from a text file: one `token v1 ... v_dim`
/// entry per line, with an optional `count dim` header on the first line.
/// Tokens are matched case-sensitively at lookup time; rows of the wrong
/// width are rejected with their line number.
pub fn load_embeddings(path: &Path, expected_dim: usize) -> Result<PretrainedEmbeddings> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let mut table = PretrainedEmbeddings::new(expected_dim);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line has a first field");
        let values: Vec<&str> = parts.collect();
        if lineno == 0 && values.len() == 1 {
            // header line: `count dim`
            if token.parse::<usize>().is_ok() {
                let dim: usize = values[0].parse().map_err(|_| Error::Parse {
                    path: path.display().to_string(),
                    line: 1,
                    msg: "malformed header".into(),
                })?;
                if dim != expected_dim {
                    return Err(Error::Parse {
                        path: path.display().to_string(),
                        line: 1,
                        msg: format!("header declares dimension {dim}, expected {expected_dim}"),
                    });
                }
                continue;
            }
        }
        if values.len() != expected_dim {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("entry has {} values, expected {}", values.len(), expected_dim),
            });
        }
        let mut row = Vec::with_capacity(expected_dim);
        for v in values {
            row.push(v.parse::<f64>().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("bad float '{v}'"),
            })?);
        }
        table.insert(token.to_string(), row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_entries_of_declared_width() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "cat 0.1 0.2\ndog -1.0 3.5\n").unwrap();
        let table = load_embeddings(&path, 2).unwrap();
        assert_eq!(table.lookup("cat"), Some(&[0.1, 0.2][..]));
        assert_eq!(table.lookup("missing"), None);
    }

    #[test]
    fn rejects_wrong_width_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "cat 0.1 0.2\ndog 1.0\n").unwrap();
        let err = load_embeddings(&path, 2).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
    }

    #[test]
    fn optional_header_is_accepted_and_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "2 3\ncat 0.1 0.2 0.3\ndog 1 2 3\n").unwrap();
        let table = load_embeddings(&path, 3).unwrap();
        assert!(table.lookup("dog").is_some());

        std::fs::write(&path, "2 4\ncat 0.1 0.2 0.3\n").unwrap();
        assert!(load_embeddings(&path, 3).is_err());
    }
}
