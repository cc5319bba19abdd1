use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{normalized_edit_distance, Lemma, LexiconSnapshot};
use crate::language::Language;
use crate::model::{FrameId, FrameSummary, LexicalUnit, Pos};

/// Read access to registered lexical units, implemented by the frame store.
pub trait LexicalUnitIndex {
    /// LUs whose (lemma, pos, language) equals the query after casefold/NFC.
    fn find_lus(&self, lemma: &str, pos: Pos, language: &Language) -> Vec<LexicalUnit>;

    fn frame_summary(&self, id: &FrameId) -> Option<FrameSummary>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactHit {
    pub lu: LexicalUnit,
    pub frame: FrameSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynonymHit {
    pub lemma: Lemma,
    pub frames: Vec<FrameSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossLingualHit {
    pub lemma: Lemma,
    /// Normalized edit distance to the query spelling; 0 means identical.
    pub distance: f64,
    pub frames: Vec<FrameSummary>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaSearchResult {
    pub exact_lus: Vec<ExactHit>,
    pub synonym_hits: Vec<SynonymHit>,
    pub cross_lingual_hits: Vec<CrossLingualHit>,
}

impl LemmaSearchResult {
    pub fn is_empty(&self) -> bool {
        self.exact_lus.is_empty() && self.synonym_hits.is_empty() && self.cross_lingual_hits.is_empty()
    }

    /// Every frame any hit evokes, deduplicated.
    pub fn frame_ids(&self) -> BTreeSet<FrameId> {
        let mut ids: BTreeSet<FrameId> = self.exact_lus.iter().map(|h| h.frame.id.clone()).collect();
        ids.extend(self.synonym_hits.iter().flat_map(|h| h.frames.iter().map(|f| f.id.clone())));
        ids.extend(self.cross_lingual_hits.iter().flat_map(|h| h.frames.iter().map(|f| f.id.clone())));
        ids
    }
}

fn evoked_frames(db: &impl LexicalUnitIndex, lemma: &Lemma) -> Vec<FrameSummary> {
    let ids: BTreeSet<FrameId> = db
        .find_lus(&lemma.text, lemma.pos, &lemma.language)
        .into_iter()
        .map(|lu| lu.frame)
        .collect();
    let mut frames: Vec<FrameSummary> = ids.iter().filter_map(|id| db.frame_summary(id)).collect();
    frames.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.id.cmp(&b.id)));
    frames
}

/// Looks a lemma up in the store, then among its synonyms, then among
/// similarly spelled co-synset lemmas of other languages.
///
/// Only co-synset members with the query's POS are considered. Each hit
/// lemma appears once, with the frames its LUs evoke. `threshold` is clamped
/// to `[0, 1]`.
pub fn search_lemma(
    query: &Lemma,
    lexicon: &LexiconSnapshot,
    db: &impl LexicalUnitIndex,
    threshold: f64,
) -> LemmaSearchResult {
    let threshold = if threshold.is_nan() { 0.0 } else { threshold.clamp(0.0, 1.0) };
    let mut result = LemmaSearchResult::default();

    let mut exact = db.find_lus(&query.text, query.pos, &query.language);
    exact.sort_by(|a, b| a.frame.cmp(&b.frame).then_with(|| a.id.cmp(&b.id)));
    result.exact_lus = exact
        .into_iter()
        .filter_map(|lu| db.frame_summary(&lu.frame).map(|frame| ExactHit { lu, frame }))
        .collect();

    let key = query.key();
    // keyed by lemma identity so a lemma in several synsets is reported once
    let mut synonyms: BTreeMap<_, SynonymHit> = BTreeMap::new();
    let mut cross: BTreeMap<_, CrossLingualHit> = BTreeMap::new();
    for member in lexicon.co_members(&key) {
        if member.pos != query.pos {
            continue;
        }
        if member.language == query.language {
            let frames = evoked_frames(db, member);
            if !frames.is_empty() {
                synonyms.entry(member.key()).or_insert(SynonymHit { lemma: member.clone(), frames });
            }
        } else {
            let distance = normalized_edit_distance(&query.text, &member.text);
            if distance <= threshold {
                let frames = evoked_frames(db, member);
                if !frames.is_empty() {
                    cross
                        .entry(member.key())
                        .or_insert(CrossLingualHit { lemma: member.clone(), distance, frames });
                }
            }
        }
    }

    result.synonym_hits = synonyms.into_values().collect();
    result.synonym_hits.sort_by(|a, b| {
        a.lemma.text.cmp(&b.lemma.text).then_with(|| a.lemma.language.cmp(&b.lemma.language))
    });
    result.cross_lingual_hits = cross.into_values().collect();
    result.cross_lingual_hits.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.lemma.text.cmp(&b.lemma.text))
            .then_with(|| a.lemma.language.cmp(&b.lemma.language))
    });
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{fold_spelling, LemmaKey, Lexicon};
    use crate::model::{FrameType, Lexicality, LuId};
    use proptest::prelude::*;
    use std::collections::HashMap;

    /// In-memory LU table keyed by lookup identity.
    #[derive(Default)]
    struct Db {
        lus: HashMap<LemmaKey, Vec<LexicalUnit>>,
        frames: HashMap<FrameId, FrameSummary>,
    }

    impl Db {
        fn register(&mut self, lemma: &str, pos: Pos, lang: &str, frame: &str) {
            let language = Language::parse(lang).unwrap();
            let id = FrameId::new(format!("fr-{frame}"));
            self.frames.insert(
                id.clone(),
                FrameSummary {
                    id: id.clone(),
                    name: frame.into(),
                    frame_type: FrameType::Event,
                    lexicality: Lexicality::Lexical,
                    languages: vec![language.clone()],
                },
            );
            let lu = LexicalUnit {
                id: LuId::new(format!("lu-{lemma}-{frame}")),
                lemma: lemma.into(),
                pos,
                language: language.clone(),
                frame: id,
                example_sentence: "x".into(),
                incorporated_fe: None,
            };
            self.lus.entry(LemmaKey::new(lemma, pos, &language)).or_default().push(lu);
        }
    }

    impl LexicalUnitIndex for Db {
        fn find_lus(&self, lemma: &str, pos: Pos, language: &Language) -> Vec<LexicalUnit> {
            self.lus.get(&LemmaKey::new(lemma, pos, language)).cloned().unwrap_or_default()
        }

        fn frame_summary(&self, id: &FrameId) -> Option<FrameSummary> {
            self.frames.get(id).cloned()
        }
    }

    fn lemma(text: &str, pos: Pos, lang: &str) -> Lemma {
        Lemma::new(text, pos, Language::parse(lang).unwrap()).unwrap()
    }

    fn fixture() -> Lexicon {
        let lex = Lexicon::in_memory();
        lex.ingest_reader(super::super::tests::FIXTURE.as_bytes()).unwrap();
        lex.ingest_reader(&b"s3\ten\ta\tsocial\ns3\tde\ta\tsozial\ns3\tpt-BR\ta\tsocial\n"[..]).unwrap();
        lex
    }

    #[test]
    fn purchase_finds_buy_synonym() {
        let lex = fixture();
        let mut db = Db::default();
        db.register("buy", Pos::Noun, "en", "Commerce");
        let r = search_lemma(&lemma("purchase", Pos::Noun, "en"), &lex.snapshot(), &db, 0.25);
        assert!(r.exact_lus.is_empty());
        assert_eq!(r.synonym_hits.len(), 1);
        assert_eq!(r.synonym_hits[0].lemma.text, "buy");
        assert_eq!(r.synonym_hits[0].frames[0].name, "Commerce");
        assert!(r.cross_lingual_hits.is_empty());
    }

    #[test]
    fn unknown_lemma_yields_nothing() {
        let lex = fixture();
        let mut db = Db::default();
        db.register("buy", Pos::Noun, "en", "Commerce");
        let r = search_lemma(&lemma("jeitinho", Pos::Noun, "pt-BR"), &lex.snapshot(), &db, 0.25);
        assert!(r.is_empty());
    }

    #[test]
    fn sozial_finds_social_across_languages() {
        let lex = fixture();
        let mut db = Db::default();
        db.register("social", Pos::Adjective, "en", "Sociability");
        let r = search_lemma(&lemma("sozial", Pos::Adjective, "de"), &lex.snapshot(), &db, 0.25);
        assert_eq!(r.cross_lingual_hits.len(), 1);
        let hit = &r.cross_lingual_hits[0];
        assert_eq!(hit.lemma.text, "social");
        assert!((hit.distance - 0.1667).abs() < 1e-4);
        assert_eq!(hit.frames[0].name, "Sociability");

        let strict = search_lemma(&lemma("sozial", Pos::Adjective, "de"), &lex.snapshot(), &db, 0.1);
        assert!(strict.cross_lingual_hits.is_empty());
    }

    #[test]
    fn exact_hits_and_pos_mismatch() {
        let lex = fixture();
        let mut db = Db::default();
        db.register("Purchase", Pos::Noun, "en", "Commerce");
        db.register("buy", Pos::Verb, "en", "Commerce_buy");
        let r = search_lemma(&lemma("purchase", Pos::Noun, "en"), &lex.snapshot(), &db, 0.25);
        assert_eq!(r.exact_lus.len(), 1);
        // buy.v is registered but the synset member is buy.n
        assert!(r.synonym_hits.is_empty());
    }

    #[test]
    fn hits_are_deduplicated_across_synsets() {
        let lex = Lexicon::in_memory();
        lex.ingest_reader(&b"a\ten\tv\tfix\na\ten\tv\trepair\nb\ten\tv\tfix\nb\ten\tv\trepair\n"[..]).unwrap();
        let mut db = Db::default();
        db.register("repair", Pos::Verb, "en", "Repairing");
        let r = search_lemma(&lemma("fix", Pos::Verb, "en"), &lex.snapshot(), &db, 0.25);
        assert_eq!(r.synonym_hits.len(), 1);
        assert_eq!(r.synonym_hits[0].frames.len(), 1);
    }

    #[test]
    fn cross_lingual_sorted_by_distance_then_text() {
        let lex = Lexicon::in_memory();
        lex.ingest_reader(&b"s\ten\tn\tnation\ns\tfr\tn\tnation\ns\tde\tn\tnazion\ns\tit\tn\tnazione\n"[..]).unwrap();
        let mut db = Db::default();
        for (l, lang) in [("nation", "fr"), ("nazion", "de"), ("nazione", "it")] {
            db.register(l, Pos::Noun, lang, "People");
        }
        let r = search_lemma(&lemma("nation", Pos::Noun, "en"), &lex.snapshot(), &db, 0.5);
        let got: Vec<_> = r.cross_lingual_hits.iter().map(|h| h.lemma.text.as_str()).collect();
        assert_eq!(got, vec!["nation", "nazion", "nazione"]);
    }

    proptest! {
        /// Every reported hit shares a synset with the query (brute-force
        /// scan over all synsets), and threshold 0 admits only identical
        /// folded spellings.
        #[test]
        fn hits_share_a_synset_with_the_query(
            rows in proptest::collection::vec((0u8..4, 0usize..3, "[a-c]{1,3}"), 1..24),
            registered in proptest::collection::vec((0usize..3, "[a-c]{1,3}"), 0..12),
            query_lang in 0usize..3,
            query_text in "[a-c]{1,3}",
            threshold in 0.0f64..=1.0,
            zero in proptest::bool::ANY,
        ) {
            let langs = ["en", "de", "pt-BR"];
            let src: String = rows
                .iter()
                .map(|(s, l, t)| format!("s{s}\t{}\tn\t{t}\n", langs[*l]))
                .collect();
            let lex = Lexicon::in_memory();
            lex.ingest_reader(src.as_bytes()).unwrap();
            let snap = lex.snapshot();
            let mut db = Db::default();
            for (l, t) in &registered {
                db.register(t, Pos::Noun, langs[*l], "F");
            }
            let threshold = if zero { 0.0 } else { threshold };
            let query = lemma(&query_text, Pos::Noun, langs[query_lang]);
            let r = search_lemma(&query, &snap, &db, threshold);

            let shares = |hit: &Lemma| {
                snap.synsets().any(|s| {
                    s.members.iter().any(|m| m.key() == query.key())
                        && s.members.iter().any(|m| m.key() == hit.key())
                })
            };
            for h in &r.synonym_hits {
                prop_assert!(shares(&h.lemma));
                prop_assert_eq!(&h.lemma.language, &query.language);
            }
            for h in &r.cross_lingual_hits {
                prop_assert!(shares(&h.lemma));
                prop_assert!(h.lemma.language != query.language);
                prop_assert!(h.distance <= threshold);
                if threshold == 0.0 {
                    prop_assert_eq!(fold_spelling(&h.lemma.text), fold_spelling(&query.text));
                }
            }
        }
    }
}
