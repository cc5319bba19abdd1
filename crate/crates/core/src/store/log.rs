//! Append-only commit log.
//!
//! Each record is one line: a 16-hex-digit SHA-256 prefix of the payload, a
//! space, the JSON payload and `\n`. Replay stops at the first torn or
//! corrupt line and truncates the file there, so a crash mid-append loses
//! only the record being written.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{Frame, FrameId, LexicalUnit};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub(crate) enum Record {
    Init { schema_version: u32, license: String },
    Commit { frames: Vec<Frame> },
    AddLu { frame: FrameId, lu: LexicalUnit },
}

/// Simulated failure points for crash-recovery tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Fail before anything reaches the log.
    BeforeWrite,
    /// Write half of the record, then stop as if the process died.
    TornWrite,
    /// Write and sync the full record, then fail before publishing it in memory.
    AfterWrite,
}

fn checksum(payload: &[u8]) -> String {
    let digest = Sha256::digest(payload);
    hex::encode(&digest[..8])
}

pub(crate) fn encode(record: &Record) -> io::Result<Vec<u8>> {
    let payload = serde_json::to_vec(record)?;
    let mut line = Vec::with_capacity(payload.len() + 18);
    line.extend_from_slice(checksum(&payload).as_bytes());
    line.push(b' ');
    line.extend_from_slice(&payload);
    line.push(b'\n');
    Ok(line)
}

fn decode(line: &[u8]) -> Option<Record> {
    let body = line.strip_suffix(b"\n")?;
    if body.len() < 17 || body[16] != b' ' {
        return None;
    }
    let (sum, payload) = (&body[..16], &body[17..]);
    if sum != checksum(payload).as_bytes() {
        return None;
    }
    serde_json::from_slice(payload).ok()
}

#[derive(Debug)]
pub(crate) struct LogFile {
    path: PathBuf,
    file: File,
    len: u64,
}

impl LogFile {
    /// Opens (or creates) the log and returns the intact records.
    pub(crate) fn open(path: &Path) -> io::Result<(Self, Vec<Record>)> {
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
        let mut records = Vec::new();
        let mut good = 0u64;
        {
            let mut reader = BufReader::new(&file);
            let mut buf = Vec::new();
            loop {
                buf.clear();
                let n = reader.read_until(b'\n', &mut buf)?;
                if n == 0 {
                    break;
                }
                match decode(&buf) {
                    Some(r) => {
                        records.push(r);
                        good += n as u64;
                    }
                    None => break,
                }
            }
        }
        let actual = file.seek(SeekFrom::End(0))?;
        if actual != good {
            tracing::warn!(path = %path.display(), dropped = actual - good, "discarding incomplete log tail");
            file.set_len(good)?;
            file.sync_all()?;
        }
        Ok((Self { path: path.to_path_buf(), file, len: good }, records))
    }

    pub(crate) fn append(&mut self, record: &Record, fault: Option<Fault>) -> io::Result<()> {
        let line = encode(record)?;
        match fault {
            Some(Fault::BeforeWrite) => return Err(injected()),
            Some(Fault::TornWrite) => {
                self.file.write_all(&line[..line.len() / 2])?;
                self.file.sync_data()?;
                return Err(injected());
            }
            _ => {}
        }
        if let Err(e) = self.file.write_all(&line).and_then(|_| self.file.sync_data()) {
            // best effort: drop the partial tail so the next append starts clean
            let _ = self.file.set_len(self.len);
            return Err(e);
        }
        self.len += line.len() as u64;
        if fault == Some(Fault::AfterWrite) {
            return Err(injected());
        }
        Ok(())
    }

    pub(crate) fn path(&self) -> &Path {
        &self.path
    }
}

fn injected() -> io::Error {
    io::Error::other("injected fault")
}
