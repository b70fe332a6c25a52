//! Append-only JSON-lines persistence, one file per session.
//!
//! Line 1 is the session as created; every further line is one response. A
//! response is written and synced before it is acknowledged, so replaying
//! the files after a restart recovers every acknowledged answer.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::data::StimulusManifest;

use super::{create_session, Response, SessionConfig, SurveyError, SurveySession, Task};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Session(SurveySession),
    Response(Response),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub session_id: String,
    pub index: usize,
    pub cursor: usize,
    pub completed: bool,
}

struct Entry {
    session: SurveySession,
    responses: Vec<Response>,
    file: File,
}

pub struct SurveyStore {
    dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Mutex<Entry>>>>,
}

fn io_err(path: &Path, source: std::io::Error) -> SurveyError {
    SurveyError::Io { path: path.display().to_string(), source }
}

fn append(file: &mut File, path: &Path, line: &Line) -> Result<(), SurveyError> {
    let mut text = serde_json::to_string(line).expect("line serializes");
    text.push('\n');
    file.write_all(text.as_bytes()).map_err(|e| io_err(path, e))?;
    file.sync_data().map_err(|e| io_err(path, e))
}

impl SurveyStore {
    /// Open (creating if needed) a store directory and replay every session log in it.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, SurveyError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| io_err(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let entry = Self::replay(&path)?;
            sessions.insert(entry.session.session_id.clone(), Arc::new(Mutex::new(entry)));
        }
        Ok(Self { dir, sessions: RwLock::new(sessions) })
    }

    fn replay(path: &Path) -> Result<Entry, SurveyError> {
        let corrupt =
            |line: usize, message: String| SurveyError::Corrupt { path: path.display().to_string(), line, message };
        let file = File::open(path).map_err(|e| io_err(path, e))?;
        let mut reader = BufReader::new(file);
        let mut session: Option<SurveySession> = None;
        let mut responses = Vec::new();
        let mut buf = String::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            let n = reader.read_line(&mut buf).map_err(|e| io_err(path, e))?;
            if n == 0 {
                break;
            }
            line_no += 1;
            if !buf.ends_with('\n') {
                // a write that never completed was never acknowledged
                log::warn!("{}: ignoring torn final line {line_no}", path.display());
                break;
            }
            match serde_json::from_str::<Line>(buf.trim_end()).map_err(|e| corrupt(line_no, e.to_string()))? {
                Line::Session(s) if session.is_none() => session = Some(s),
                Line::Session(_) => return Err(corrupt(line_no, "second session header".into())),
                Line::Response(r) => {
                    let s =
                        session.as_mut().ok_or_else(|| corrupt(line_no, "response before session header".into()))?;
                    if r.index != s.cursor {
                        return Err(corrupt(line_no, format!("response {} out of order", r.index)));
                    }
                    s.cursor += 1;
                    s.completed = s.cursor == s.task_sequence.len();
                    responses.push(r);
                }
            }
        }
        let session = session.ok_or_else(|| corrupt(0, "missing session header".into()))?;
        let file = OpenOptions::new().append(true).open(path).map_err(|e| io_err(path, e))?;
        Ok(Entry { session, responses, file })
    }

    fn path_for(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, SurveyError> {
        self.sessions.read().get(id).cloned().ok_or_else(|| SurveyError::UnknownSession(id.to_string()))
    }

    pub fn create(&self, manifest: &StimulusManifest, config: &SessionConfig) -> Result<SurveySession, SurveyError> {
        let session = create_session(manifest, config)?;
        let path = self.path_for(&session.session_id);
        let mut file = OpenOptions::new().create_new(true).append(true).open(&path).map_err(|e| io_err(&path, e))?;
        append(&mut file, &path, &Line::Session(session.clone()))?;
        let entry = Entry { session: session.clone(), responses: Vec::new(), file };
        self.sessions.write().insert(session.session_id.clone(), Arc::new(Mutex::new(entry)));
        Ok(session)
    }

    pub fn session(&self, id: &str) -> Result<SurveySession, SurveyError> {
        Ok(self.entry(id)?.lock().session.clone())
    }

    /// The task at the cursor, or `None` once every task is answered.
    pub fn next_task(&self, id: &str) -> Result<Option<Task>, SurveyError> {
        Ok(self.entry(id)?.lock().session.current_task().cloned())
    }

    pub fn submit(&self, id: &str, index: usize, choice: &str, response_time_ms: u64) -> Result<Ack, SurveyError> {
        let entry = self.entry(id)?;
        let mut guard = entry.lock();
        let cursor = guard.session.cursor;
        if index < cursor {
            return Err(SurveyError::Duplicate(index));
        }
        let task = guard.session.current_task().ok_or(SurveyError::Completed)?;
        if index > cursor {
            return Err(SurveyError::OutOfOrder { expected: cursor, got: index });
        }
        if !task.candidate_classes.iter().any(|c| c == choice) {
            return Err(SurveyError::InvalidChoice { index, choice: choice.to_string() });
        }
        let response = Response {
            session_id: id.to_string(),
            index,
            chosen: choice.to_string(),
            response_time_ms,
            received_at: chrono::Utc::now(),
        };
        let path = self.path_for(id);
        append(&mut guard.file, &path, &Line::Response(response.clone()))?;
        guard.responses.push(response);
        guard.session.cursor += 1;
        guard.session.completed = guard.session.cursor == guard.session.task_sequence.len();
        Ok(Ack { session_id: id.to_string(), index, cursor: guard.session.cursor, completed: guard.session.completed })
    }

    /// Snapshot of every session with its responses, ordered by session id.
    pub fn snapshot(&self) -> Vec<(SurveySession, Vec<Response>)> {
        let entries: Vec<Arc<Mutex<Entry>>> = self.sessions.read().values().cloned().collect();
        let mut out: Vec<(SurveySession, Vec<Response>)> = entries
            .iter()
            .map(|e| {
                let g = e.lock();
                (g.session.clone(), g.responses.clone())
            })
            .collect();
        out.sort_by(|a, b| a.0.session_id.cmp(&b.0.session_id));
        out
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}
