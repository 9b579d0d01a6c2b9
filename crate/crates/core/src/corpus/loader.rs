use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use super::{Corpus, Document};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One `{"id", "text", "label"}` object per line.
    Jsonl,
    /// `<root>/<label>/<id>` plain-text files.
    ClassDirectories,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "class-directories" | "dirs" => Ok(Self::ClassDirectories),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

impl std::fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Jsonl => "jsonl",
            Self::ClassDirectories => "class-directories",
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    text: String,
    label: String,
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    match format {
        CorpusFormat::Jsonl => load_jsonl(path),
        CorpusFormat::ClassDirectories => load_class_directories(path),
    }
}

fn load_jsonl(path: &Path) -> Result<Corpus> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut documents = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        documents.push(Document {
            id: record.id,
            text: record.text,
            label: record.label,
        });
    }
    Corpus::new(documents)
}

fn load_class_directories(root: &Path) -> Result<Corpus> {
    let mut documents = Vec::new();
    for label_entry in sorted_entries(root)? {
        let label_path = label_entry.path();
        if !label_path.is_dir() {
            continue;
        }
        let label = label_entry.file_name().to_string_lossy().into_owned();
        for doc_entry in sorted_entries(&label_path)? {
            let doc_path = doc_entry.path();
            if doc_path.is_dir() {
                return Err(Error::MalformedRecord {
                    path: doc_path,
                    line: 0,
                    reason: "nested directory inside a class directory".into(),
                });
            }
            let bytes = fs::read(&doc_path).map_err(|e| Error::io(&doc_path, e))?;
            let text = String::from_utf8(bytes).map_err(|e| Error::MalformedRecord {
                path: doc_path.clone(),
                line: 0,
                reason: format!("not valid UTF-8: {e}"),
            })?;
            documents.push(Document {
                id: doc_entry.file_name().to_string_lossy().into_owned(),
                text,
                label: label.clone(),
            });
        }
    }
    Corpus::new(documents)
}

fn sorted_entries(dir: &Path) -> Result<Vec<fs::DirEntry>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_two_records_in_id_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        fs::write(
            &path,
            "{\"id\":\"z\",\"text\":\"hello\",\"label\":\"a\"}\n{\"id\":\"m\",\"text\":\"bye\",\"label\":\"b\"}\n",
        )
        .unwrap();
        let c = load_corpus(&path, CorpusFormat::Jsonl).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.documents()[0].id, "m");
        assert_eq!(c.documents()[1].text, "hello");
    }

    #[test]
    fn jsonl_malformed_line_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        fs::write(
            &path,
            "{\"id\":\"a\",\"text\":\"t\",\"label\":\"x\"}\n{\"id\":\"b\",\"text\":\"t\"}\n",
        )
        .unwrap();
        let err = load_corpus(&path, CorpusFormat::Jsonl).unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { line: 2, .. }), "{err}");
    }

    #[test]
    fn jsonl_rejects_extra_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        fs::write(&path, "{\"id\":\"a\",\"text\":\"t\",\"label\":\"x\",\"y\":1}\n").unwrap();
        assert!(load_corpus(&path, CorpusFormat::Jsonl).is_err());
    }

    #[test]
    fn jsonl_duplicate_id() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        fs::write(
            &path,
            "{\"id\":\"a\",\"text\":\"t\",\"label\":\"x\"}\n{\"id\":\"a\",\"text\":\"u\",\"label\":\"y\"}\n",
        )
        .unwrap();
        let err = load_corpus(&path, CorpusFormat::Jsonl).unwrap_err();
        assert!(err.to_string().contains("duplicate id"));
    }

    #[test]
    fn class_directories_label_by_directory() {
        let dir = tempfile::tempdir().unwrap();
        for (label, ids) in [("spam", vec!["s1", "s2", "s3"]), ("ham", vec!["h1", "h2"])] {
            let sub = dir.path().join(label);
            fs::create_dir(&sub).unwrap();
            for id in ids {
                fs::write(sub.join(id), format!("text of {id}")).unwrap();
            }
        }
        let c = load_corpus(dir.path(), CorpusFormat::ClassDirectories).unwrap();
        assert_eq!(c.len(), 5);
        let spam = c.documents().iter().filter(|d| d.label == "spam").count();
        assert_eq!(spam, 3);
        assert_eq!(c.documents()[0].id, "h1");
        assert_eq!(c.documents()[0].label, "ham");
    }

    #[test]
    fn missing_path_is_io_error() {
        let err = load_corpus(Path::new("/nonexistent/x.jsonl"), CorpusFormat::Jsonl).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
