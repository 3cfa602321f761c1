//! Corpus writer, the loader's inverse. Used by the synthetic generator and
//! by round-trip tests.

use std::fs;
use std::path::Path;

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::SessionRecord;

/// File name a page snapshot is stored under: sha256 of the URL, hex encoded.
pub(crate) fn page_file_name(url: &str) -> String {
    let digest = Sha256::digest(url.as_bytes());
    format!("{}.html", hex::encode(digest))
}

/// Write sessions as participant directories under `root`, creating it if
/// needed. Existing participant directories are overwritten file by file.
pub fn write_corpus(root: &Path, sessions: &[SessionRecord]) -> Result<()> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    for session in sessions {
        write_session(root, session)?;
    }
    Ok(())
}

fn write_session(root: &Path, session: &SessionRecord) -> Result<()> {
    session.validate()?;
    let dir = root.join(&session.participant_id);
    let pages_dir = dir.join("pages");
    fs::create_dir_all(&pages_dir).map_err(|e| Error::io(&pages_dir, e))?;

    let manifest = json!({
        "participant_id": session.participant_id,
        "pre_score": session.pre_score,
        "post_score": session.post_score,
    });
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, format!("{}\n", serde_json::to_string_pretty(&manifest)?))
        .map_err(|e| Error::io(&manifest_path, e))?;

    let timeline_path = dir.join("timeline.csv");
    let mut timeline = csv::Writer::from_path(&timeline_path).map_err(Error::Csv)?;
    for iv in &session.timeline {
        timeline.serialize(iv)?;
    }
    timeline.flush().map_err(|e| Error::io(&timeline_path, e))?;

    let frames_path = dir.join("frames.jsonl");
    let mut lines = String::new();
    for frame in &session.frames {
        lines.push_str(&serde_json::to_string(frame)?);
        lines.push('\n');
    }
    fs::write(&frames_path, lines).map_err(|e| Error::io(&frames_path, e))?;

    let index_path = pages_dir.join("index.csv");
    let mut index = csv::Writer::from_path(&index_path).map_err(Error::Csv)?;
    index
        .write_record(["url", "file"])
        .map_err(Error::Csv)?;
    for (url, snapshot) in &session.pages {
        let file = page_file_name(url);
        index.write_record([url.as_str(), file.as_str()]).map_err(Error::Csv)?;
        let page_path = pages_dir.join(&file);
        fs::write(&page_path, &snapshot.html_bytes).map_err(|e| Error::io(&page_path, e))?;
    }
    index.flush().map_err(|e| Error::io(&index_path, e))?;
    Ok(())
}
