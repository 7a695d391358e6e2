//! Certifying-authority store: an append-only JSON Lines file of watermark
//! records.
//!
//! Each line is one [`WatermarkRecord`]. Records are never rewritten or
//! removed. Appends are serialized through a single writer and fsynced before
//! `register` returns. When two authors register the same text, the earliest
//! registration owns it.

use std::collections::HashSet;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::text::{select_keyword_in, tokenize, FrequencyTable, KeywordPolicy};
use crate::watermark::{generate_from_tokens, Watermark};

/// UTC instant truncated to whole milliseconds, rendered as RFC 3339 with a
/// `Z` suffix (`2026-10-15T09:30:00.250Z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub fn from_millis(ms: i64) -> Self {
        Timestamp(Utc.timestamp_millis_opt(ms).single().expect("timestamp in range"))
    }

    pub fn from_datetime(dt: DateTime<Utc>) -> Self {
        Self::from_millis(dt.timestamp_millis())
    }

    pub fn millis(self) -> i64 {
        self.0.timestamp_millis()
    }

    pub fn as_datetime(self) -> DateTime<Utc> {
        self.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_rfc3339_opts(SecondsFormat::Millis, true))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|dt| Timestamp::from_datetime(dt.with_timezone(&Utc)))
            .map_err(serde::de::Error::custom)
    }
}

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Timestamp::from_datetime(Utc::now())
    }
}

/// Clock that only moves when told to.
#[derive(Debug)]
pub struct ManualClock(AtomicI64);

impl ManualClock {
    pub fn new(start: Timestamp) -> Self {
        ManualClock(AtomicI64::new(start.millis()))
    }

    pub fn set(&self, t: Timestamp) {
        self.0.store(t.millis(), Ordering::SeqCst);
    }

    pub fn advance_ms(&self, ms: i64) {
        self.0.fetch_add(ms, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Timestamp {
        Timestamp::from_millis(self.0.load(Ordering::SeqCst))
    }
}

/// `sha256:<64 hex>` over the exact document bytes.
pub fn text_digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatermarkRecord {
    pub id: String,
    pub author: String,
    pub keyword: String,
    pub watermark: Watermark,
    pub text_digest: String,
    pub registered_at: Timestamp,
    pub word_count: usize,
    pub kw_count: usize,
}

impl WatermarkRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.kw_count != self.watermark.kw_count() {
            return Err(format!(
                "kw_count {} disagrees with watermark ({})",
                self.kw_count,
                self.watermark.kw_count()
            ));
        }
        if self.keyword != self.watermark.keyword() {
            return Err("keyword disagrees with watermark".into());
        }
        if self.id.len() < 16 || !self.id.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("invalid id {:?}", self.id));
        }
        Ok(())
    }
}

/// Conjunctive record filter; unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyword: Option<String>,
    #[serde(default, alias = "digest", skip_serializing_if = "Option::is_none")]
    pub text_digest: Option<String>,
}

impl Query {
    pub fn matches(&self, r: &WatermarkRecord) -> bool {
        fn ok(want: &Option<String>, have: &str) -> bool {
            want.as_deref().is_none_or(|w| w == have)
        }
        ok(&self.id, &r.id) && ok(&self.author, &r.author) && ok(&self.keyword, &r.keyword) && ok(&self.text_digest, &r.text_digest)
    }
}

/// Earliest registration wins; equal timestamps fall back to the smaller id.
pub fn resolve_owner(records: &[WatermarkRecord]) -> Result<&WatermarkRecord> {
    records
        .iter()
        .min_by(|a, b| a.registered_at.cmp(&b.registered_at).then_with(|| a.id.cmp(&b.id)))
        .ok_or(Error::EmptyInput)
}

/// A final line that was cut short by a crash and dropped on load.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TornTail {
    pub line: usize,
    pub bytes: usize,
}

impl fmt::Display for TornTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dropped truncated record at line {} ({} bytes)", self.line, self.bytes)
    }
}

#[derive(Debug)]
struct Writer {
    file: Option<File>,
    /// Length of the file up to the end of the last intact record.
    clean_len: u64,
    /// Bytes past `clean_len` must be cut before the next append.
    dirty: bool,
    /// The last intact record has no terminating newline.
    needs_newline: bool,
}

#[derive(Debug)]
pub struct Registry {
    path: PathBuf,
    records: RwLock<Vec<WatermarkRecord>>,
    writer: Mutex<Writer>,
    torn_tail: Option<TornTail>,
}

impl Registry {
    /// Replays the store at `path`. A missing file is an empty store; it is
    /// created on the first registration.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let replay = replay(&bytes)?;
        Ok(Registry {
            path,
            records: RwLock::new(replay.records),
            writer: Mutex::new(Writer {
                file: None,
                clean_len: replay.clean_len as u64,
                dirty: replay.torn_tail.is_some(),
                needs_newline: replay.needs_newline,
            }),
            torn_tail: replay.torn_tail,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn torn_tail(&self) -> Option<&TornTail> {
        self.torn_tail.as_ref()
    }

    pub fn len(&self) -> usize {
        self.records.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All records in append order.
    pub fn records(&self) -> Vec<WatermarkRecord> {
        self.records.read().unwrap().clone()
    }

    pub fn find(&self, query: &Query) -> Vec<WatermarkRecord> {
        self.records.read().unwrap().iter().filter(|r| query.matches(r)).cloned().collect()
    }

    pub fn get(&self, id: &str) -> Option<WatermarkRecord> {
        self.records.read().unwrap().iter().find(|r| r.id == id).cloned()
    }

    /// Owner of a document among all registrations of its digest.
    pub fn owner_of(&self, text_digest: &str) -> Option<WatermarkRecord> {
        let matching = self.find(&Query {
            text_digest: Some(text_digest.to_owned()),
            ..Query::default()
        });
        resolve_owner(&matching).ok().cloned()
    }

    /// Generates the watermark for `text`, stamps it and appends it durably.
    pub fn register(&self, text: &str, author: &str, policy: &KeywordPolicy, clock: &dyn Clock) -> Result<WatermarkRecord> {
        let tokens = tokenize(text);
        let table = FrequencyTable::from_tokens(&tokens);
        let (keyword, _) = select_keyword_in(&table, policy)?;
        let watermark = generate_from_tokens(&tokens, &keyword)?;
        let text_digest = text_digest(text.as_bytes());

        let mut writer = self.writer.lock().unwrap();
        let (id, registered_at) = {
            let records = self.records.read().unwrap();
            let taken: HashSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
            let id = loop {
                let candidate = hex::encode(rand::random::<[u8; 16]>());
                if !taken.contains(candidate.as_str()) {
                    break candidate;
                }
            };
            let now = clock.now();
            let floor = records.last().map(|r| r.registered_at);
            (id, floor.map_or(now, |f| now.max(f)))
        };
        let record = WatermarkRecord {
            id,
            author: author.to_owned(),
            kw_count: watermark.kw_count(),
            keyword,
            watermark,
            text_digest,
            registered_at,
            word_count: table.total(),
        };
        self.append(&mut writer, &record)?;
        self.records.write().unwrap().push(record.clone());
        Ok(record)
    }

    fn append(&self, writer: &mut Writer, record: &WatermarkRecord) -> Result<()> {
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        if writer.needs_newline {
            line.insert(0, '\n');
        }
        let result = (|| -> io::Result<()> {
            if writer.file.is_none() {
                if let Some(parent) = self.path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent)?;
                }
                writer.file = Some(OpenOptions::new().create(true).append(true).open(&self.path)?);
            }
            let file = writer.file.as_mut().expect("opened above");
            if writer.dirty {
                file.set_len(writer.clean_len)?;
                writer.dirty = false;
            }
            file.write_all(line.as_bytes())?;
            file.sync_data()
        })();
        match result {
            Ok(()) => {
                writer.clean_len += line.len() as u64;
                writer.needs_newline = false;
                Ok(())
            }
            Err(e) => {
                // Whatever reached the file is garbage now; cut it next time.
                writer.dirty = true;
                writer.file = None;
                Err(Error::StorageFailure(e))
            }
        }
    }
}

struct Replay {
    records: Vec<WatermarkRecord>,
    clean_len: usize,
    needs_newline: bool,
    torn_tail: Option<TornTail>,
}

fn replay(bytes: &[u8]) -> Result<Replay> {
    let mut records = Vec::new();
    let mut clean_len = 0;
    let mut needs_newline = false;
    let mut torn_tail = None;
    let mut offset = 0;
    let mut line_no = 0;
    while offset < bytes.len() {
        line_no += 1;
        let (line, terminated, next) = match bytes[offset..].iter().position(|&b| b == b'\n') {
            Some(i) => (&bytes[offset..offset + i], true, offset + i + 1),
            None => (&bytes[offset..], false, bytes.len()),
        };
        if line.iter().all(u8::is_ascii_whitespace) {
            offset = next;
            if terminated {
                clean_len = next;
            }
            continue;
        }
        let parsed = std::str::from_utf8(line)
            .map_err(|e| e.to_string())
            .and_then(|s| serde_json::from_str::<WatermarkRecord>(s).map_err(|e| e.to_string()))
            .and_then(|r| r.validate().map(|_| r));
        match parsed {
            Ok(record) => {
                if records.iter().any(|r: &WatermarkRecord| r.id == record.id) {
                    return Err(Error::CorruptRecord {
                        line: line_no,
                        reason: format!("duplicate id {}", record.id),
                    });
                }
                records.push(record);
                clean_len = next;
                needs_newline = !terminated;
            }
            Err(_) if !terminated => {
                torn_tail = Some(TornTail {
                    line: line_no,
                    bytes: line.len(),
                });
            }
            Err(reason) => return Err(Error::CorruptRecord { line: line_no, reason }),
        }
        offset = next;
    }
    Ok(Replay {
        records,
        clean_len,
        needs_newline,
        torn_tail,
    })
}
