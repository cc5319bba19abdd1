//! Multilingual synset store used for redundancy checks during frame creation.
//!
//! Synsets are loaded from a tab-separated file with the columns
//! `synset_id, language, pos, lemma`. Ingestion is idempotent and atomic:
//! readers hold an `Arc` to an immutable snapshot, and an ingest builds a new
//! snapshot before swapping it in.

mod distance;
mod search;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::language::Language;
use crate::model::{fold_name, Pos};

pub use distance::{fold_spelling, levenshtein, normalized_edit_distance};
pub use search::{search_lemma, CrossLingualHit, ExactHit, LemmaSearchResult, LexicalUnitIndex, SynonymHit};

/// Default cross-lingual spelling threshold on normalized edit distance.
pub const DEFAULT_THRESHOLD: f64 = 0.25;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lemma text is empty")]
    EmptyLemma,
    #[error("cannot read synset source {path}: {source}")]
    SourceUnreadable { path: String, source: io::Error },
    #[error("synset source contains no valid lines")]
    EmptySource,
    #[error("cannot persist lexicon: {0}")]
    Storage(io::Error),
}

impl LexiconError {
    pub fn code(&self) -> &'static str {
        match self {
            LexiconError::EmptyLemma => "EMPTY_LEMMA",
            LexiconError::SourceUnreadable { .. } => "SOURCE_UNREADABLE",
            LexiconError::EmptySource => "EMPTY_SOURCE",
            LexiconError::Storage(_) => "STORAGE_FAILURE",
        }
    }
}

/// A word form with its part of speech and language. Text is NFC-normalized
/// and trimmed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "LemmaRepr")]
pub struct Lemma {
    #[serde(rename = "lemma")]
    pub text: String,
    pub pos: Pos,
    pub language: Language,
}

#[derive(Deserialize)]
struct LemmaRepr {
    lemma: String,
    pos: Pos,
    language: Language,
}

impl TryFrom<LemmaRepr> for Lemma {
    type Error = LexiconError;

    fn try_from(r: LemmaRepr) -> Result<Self, Self::Error> {
        Lemma::new(&r.lemma, r.pos, r.language)
    }
}

impl Lemma {
    pub fn new(text: &str, pos: Pos, language: Language) -> Result<Self, LexiconError> {
        let text: String = text.trim().nfc().collect();
        if text.is_empty() {
            return Err(LexiconError::EmptyLemma);
        }
        Ok(Self { text, pos, language })
    }

    pub fn key(&self) -> LemmaKey {
        LemmaKey::new(&self.text, self.pos, &self.language)
    }
}

/// Identity of a lemma for lookups: casefolded NFC text, POS and language.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LemmaKey {
    pub text: String,
    pub pos: Pos,
    pub language: Language,
}

impl LemmaKey {
    pub fn new(text: &str, pos: Pos, language: &Language) -> Self {
        let nfc: String = text.nfc().collect();
        Self { text: fold_name(&nfc), pos, language: language.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Synset {
    pub id: String,
    pub members: BTreeSet<Lemma>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub synsets_loaded: usize,
    pub lemmas_loaded: usize,
    pub lines_rejected: usize,
}

/// Immutable view of the lexicon.
#[derive(Debug, Clone, Default)]
pub struct LexiconSnapshot {
    synsets: BTreeMap<String, BTreeMap<LemmaKey, Lemma>>,
    by_lemma: HashMap<LemmaKey, BTreeSet<String>>,
}

impl LexiconSnapshot {
    pub fn synset_count(&self) -> usize {
        self.synsets.len()
    }

    pub fn lemma_count(&self) -> usize {
        self.synsets.values().map(BTreeMap::len).sum()
    }

    pub fn synset(&self, id: &str) -> Option<Synset> {
        self.synsets.get(id).map(|members| Synset {
            id: id.to_string(),
            members: members.values().cloned().collect(),
        })
    }

    pub fn synsets(&self) -> impl Iterator<Item = Synset> + '_ {
        self.synsets.iter().map(|(id, members)| Synset {
            id: id.clone(),
            members: members.values().cloned().collect(),
        })
    }

    /// Ids of every synset the lemma belongs to.
    pub fn synsets_of(&self, key: &LemmaKey) -> impl Iterator<Item = &str> {
        self.by_lemma.get(key).into_iter().flatten().map(String::as_str)
    }

    /// Other members of the synsets containing `key`.
    pub fn co_members(&self, key: &LemmaKey) -> BTreeSet<&Lemma> {
        self.synsets_of(key)
            .filter_map(|id| self.synsets.get(id))
            .flat_map(|members| members.iter())
            .filter(|(k, _)| *k != key)
            .map(|(_, lemma)| lemma)
            .collect()
    }

    fn insert(&mut self, synset: &str, lemma: Lemma) -> (bool, bool) {
        let key = lemma.key();
        let new_synset = !self.synsets.contains_key(synset);
        let members = self.synsets.entry(synset.to_string()).or_default();
        let new_lemma = !members.contains_key(&key);
        if new_lemma {
            members.insert(key.clone(), lemma);
            self.by_lemma.entry(key).or_default().insert(synset.to_string());
        }
        (new_synset, new_lemma)
    }

    /// Canonical tab-separated form, sorted by synset then member.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, members) in &self.synsets {
            for lemma in members.values() {
                out.push_str(&format!("{id}\t{}\t{}\t{}\n", lemma.language, lemma.pos, lemma.text));
            }
        }
        out
    }
}

struct SynsetLine {
    synset: String,
    lemma: Lemma,
}

fn parse_line(raw: &[u8]) -> Option<Result<SynsetLine, ()>> {
    let Ok(line) = std::str::from_utf8(raw) else {
        return Some(Err(()));
    };
    let line = line.trim_end_matches(['\r', '\n']);
    if line.trim().is_empty() || line.trim_start().starts_with('#') {
        return None;
    }
    let cols: Vec<&str> = line.split('\t').collect();
    let [synset, language, pos, text] = cols.as_slice() else {
        return Some(Err(()));
    };
    let synset = synset.trim();
    if synset.is_empty() {
        return Some(Err(()));
    }
    let pos = match pos.trim() {
        "n" => Pos::Noun,
        "v" => Pos::Verb,
        "a" => Pos::Adjective,
        "r" => Pos::Adverb,
        "p" => Pos::Preposition,
        "x" => Pos::Other,
        _ => return Some(Err(())),
    };
    let Ok(language) = Language::parse(language) else {
        return Some(Err(()));
    };
    let Ok(lemma) = Lemma::new(text, pos, language) else {
        return Some(Err(()));
    };
    Some(Ok(SynsetLine { synset: synset.to_string(), lemma }))
}

/// Shared, persistently backed synset store.
#[derive(Debug, Default)]
pub struct Lexicon {
    current: RwLock<Arc<LexiconSnapshot>>,
    write: Mutex<()>,
    path: Option<PathBuf>,
}

impl Lexicon {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens the lexicon persisted at `path`, creating it empty if absent.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, LexiconError> {
        let path = path.into();
        let lexicon = Self { path: Some(path.clone()), ..Self::default() };
        match fs::File::open(&path) {
            Ok(file) => {
                let (snapshot, _, _) = Self::apply(&LexiconSnapshot::default(), BufReader::new(file))
                    .map_err(|source| LexiconError::SourceUnreadable { path: path.display().to_string(), source })?;
                *lexicon.current.write() = Arc::new(snapshot);
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(source) => {
                return Err(LexiconError::SourceUnreadable { path: path.display().to_string(), source });
            }
        }
        Ok(lexicon)
    }

    pub fn snapshot(&self) -> Arc<LexiconSnapshot> {
        self.current.read().clone()
    }

    pub fn ingest_file(&self, source: &Path) -> Result<IngestStats, LexiconError> {
        let unreadable = |e| LexiconError::SourceUnreadable { path: source.display().to_string(), source: e };
        let file = fs::File::open(source).map_err(unreadable)?;
        self.ingest_reader(BufReader::new(file)).map_err(|e| match e {
            LexiconError::SourceUnreadable { source: err, .. } => unreadable(err),
            other => other,
        })
    }

    /// Merges synset lines into the lexicon. Malformed lines are counted and
    /// skipped; readers see either the old or the new state, never a mix.
    pub fn ingest_reader(&self, reader: impl Read) -> Result<IngestStats, LexiconError> {
        let _guard = self.write.lock();
        let base = self.snapshot();
        let (next, stats, valid) = Self::apply(&base, BufReader::new(reader))
            .map_err(|source| LexiconError::SourceUnreadable { path: "<reader>".into(), source })?;
        if valid == 0 {
            return Err(LexiconError::EmptySource);
        }
        if stats.synsets_loaded + stats.lemmas_loaded > 0 {
            if let Some(path) = &self.path {
                persist(path, &next.to_tsv()).map_err(LexiconError::Storage)?;
            }
            *self.current.write() = Arc::new(next);
        }
        Ok(stats)
    }

    /// Returns the merged snapshot, the stats, and the number of valid lines.
    fn apply(base: &LexiconSnapshot, mut reader: impl BufRead) -> io::Result<(LexiconSnapshot, IngestStats, usize)> {
        let mut next = base.clone();
        let mut stats = IngestStats::default();
        let mut valid = 0;
        let mut buf = Vec::new();
        loop {
            buf.clear();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            match parse_line(&buf) {
                None => {}
                Some(Err(())) => stats.lines_rejected += 1,
                Some(Ok(line)) => {
                    valid += 1;
                    let (new_synset, new_lemma) = next.insert(&line.synset, line.lemma);
                    stats.synsets_loaded += usize::from(new_synset);
                    stats.lemmas_loaded += usize::from(new_lemma);
                }
            }
        }
        Ok((next, stats, valid))
    }
}

fn persist(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIXTURE: &str = "s1\ten\tn\tpurchase\ns1\ten\tn\tbuy\ns1\tpt-BR\tn\tcompra\ns2\ten\tv\tfix\n";

    #[test]
    fn four_line_fixture_counts() {
        let lex = Lexicon::in_memory();
        let stats = lex.ingest_reader(FIXTURE.as_bytes()).unwrap();
        assert_eq!(stats, IngestStats { synsets_loaded: 2, lemmas_loaded: 4, lines_rejected: 0 });
    }

    #[test]
    fn reingest_is_a_no_op() {
        let lex = Lexicon::in_memory();
        lex.ingest_reader(FIXTURE.as_bytes()).unwrap();
        let before = lex.snapshot().to_tsv();
        let stats = lex.ingest_reader(FIXTURE.as_bytes()).unwrap();
        assert_eq!(stats, IngestStats::default());
        assert_eq!(lex.snapshot().to_tsv(), before);
    }

    #[test]
    fn empty_and_comment_only_sources() {
        let lex = Lexicon::in_memory();
        assert!(matches!(lex.ingest_reader(&b""[..]), Err(LexiconError::EmptySource)));
        assert!(matches!(lex.ingest_reader(&b"# only a comment\n\n"[..]), Err(LexiconError::EmptySource)));
        assert!(matches!(lex.ingest_reader(&b"broken line\n"[..]), Err(LexiconError::EmptySource)));
    }

    #[test]
    fn malformed_lines_are_counted_not_fatal() {
        let src = b"# header\ns1\ten\tn\tbuy\ns1\ten\tq\tbad-pos\nonly\tthree\tcols\n\ten\tn\tnoid\ns2\t??\tn\tx\ns3\ten\tn\t  \n\xff\xfe\ts\tn\tx\ns1\tEN\tn\tBuy \n";
        let lex = Lexicon::in_memory();
        let stats = lex.ingest_reader(&src[..]).unwrap();
        assert_eq!(stats.lines_rejected, 6);
        assert_eq!(stats.synsets_loaded, 1);
        // `Buy ` folds onto the existing `buy` member
        assert_eq!(stats.lemmas_loaded, 1);
    }

    #[test]
    fn lemma_membership_across_synsets() {
        let lex = Lexicon::in_memory();
        lex.ingest_reader(&b"s1\ten\tv\tfix\ns2\ten\tv\tfix\ns2\ten\tv\trepair\n"[..]).unwrap();
        let snap = lex.snapshot();
        let key = LemmaKey::new("Fix", Pos::Verb, &Language::parse("en").unwrap());
        assert_eq!(snap.synsets_of(&key).collect::<Vec<_>>(), vec!["s1", "s2"]);
        let co: Vec<_> = snap.co_members(&key).into_iter().map(|l| l.text.as_str()).collect();
        assert_eq!(co, vec!["repair"]);
    }

    #[test]
    fn persisted_lexicon_reopens() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lexicon.tsv");
        {
            let lex = Lexicon::open(&path).unwrap();
            lex.ingest_reader(FIXTURE.as_bytes()).unwrap();
        }
        let lex = Lexicon::open(&path).unwrap();
        assert_eq!(lex.snapshot().synset_count(), 2);
        assert_eq!(lex.snapshot().lemma_count(), 4);
    }

    #[test]
    fn lemma_text_is_trimmed_and_nfc() {
        let decomposed = "algue\u{301}m";
        let l = Lemma::new(&format!("  {decomposed} "), Pos::Noun, Language::parse("pt").unwrap()).unwrap();
        assert_eq!(l.text, "algu\u{e9}m");
        assert!(matches!(Lemma::new(" ", Pos::Noun, Language::parse("pt").unwrap()), Err(LexiconError::EmptyLemma)));
    }
}
