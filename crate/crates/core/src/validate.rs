//! Stateless validators for frame names, FE relations and whole drafts.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::model::{fold_name, FeId, FeOrigin, FeRelationKind, Frame, FrameType, Lexicality};
use crate::report::{codes, ValidationReport};

/// `[A-Z][A-Za-z0-9_]*`, the charset shared by frame and FE names.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

/// Checks the naming standards for a frame name. Uniqueness is the store's job.
pub fn validate_frame_name(name: &str, frame_type: FrameType, is_scenario: bool) -> ValidationReport {
    let mut report = ValidationReport::new();
    if !is_identifier(name) {
        report.error(
            codes::NAME_CHARSET,
            "name",
            format!("frame name {name:?} must start with an uppercase letter and contain only letters, digits and '_'"),
        );
    }
    let has_suffix = name.ends_with("_scenario");
    if is_scenario && !has_suffix {
        report.warning(codes::SCENARIO_SUFFIX, "name", "scenario frame names should end with \"_scenario\"");
    }
    if !is_scenario && has_suffix {
        report.warning(
            codes::SCENARIO_SUFFIX_UNEXPECTED,
            "name",
            "only scenario frames should use the \"_scenario\" suffix",
        );
    }
    if frame_type == FrameType::State && !(name.len() > "Being_".len() && name.starts_with("Being_")
        || name.len() > "_state".len() && name.ends_with("_state")) {
        report.warning(
            codes::STATE_PATTERN,
            "name",
            "state frame names should follow the \"Being_x\" or \"x_state\" pattern",
        );
    }
    report
}

pub fn validate_fe_relations(frame: &Frame) -> ValidationReport {
    let mut report = ValidationReport::new();
    let fes: HashMap<&FeId, _> = frame.fes.iter().map(|fe| (&fe.id, fe)).collect();
    let mut requires: HashSet<(FeId, FeId)> = HashSet::new();
    let mut excludes: HashSet<(FeId, FeId)> = HashSet::new();

    for (i, rel) in frame.fe_relations.iter().enumerate() {
        let subject = format!("fe_relations[{i}]");
        let arity_ok = match rel.kind {
            FeRelationKind::Requires | FeRelationKind::Excludes => rel.members.len() == 2,
            FeRelationKind::CoreSet => rel.members.len() >= 2,
        };
        if !arity_ok {
            report.error(
                codes::FE_REL_ARITY,
                subject.clone(),
                format!("{:?} relation has {} members", rel.kind, rel.members.len()),
            );
        }
        for m in &rel.members {
            if !fes.contains_key(m) {
                report.error(codes::FE_REL_DANGLING, subject.clone(), format!("unknown frame element {m}"));
            }
        }
        let distinct: BTreeSet<&FeId> = rel.members.iter().collect();
        if distinct.len() != rel.members.len() {
            report.error(codes::FE_REL_SELF, subject.clone(), "a frame element cannot be related to itself");
        }
        if rel.kind == FeRelationKind::CoreSet {
            for m in &rel.members {
                if let Some(fe) = fes.get(m) {
                    if !fe.coreness.is_core() {
                        report.warning(
                            codes::CORESET_NONCORE,
                            subject.clone(),
                            format!("core set member {} is not core", fe.name),
                        );
                    }
                }
            }
        }
        if let [a, b] = rel.members.as_slice() {
            if a != b {
                let pair = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                match rel.kind {
                    FeRelationKind::Requires => {
                        requires.insert(pair);
                    }
                    FeRelationKind::Excludes => {
                        excludes.insert(pair);
                    }
                    FeRelationKind::CoreSet => {}
                }
            }
        }
    }

    let mut contradictions: Vec<_> = requires.intersection(&excludes).collect();
    contradictions.sort();
    for (a, b) in contradictions {
        report.error(
            codes::FE_REL_CONTRADICTION,
            "fe_relations",
            format!("{a} and {b} are related by both Requires and Excludes"),
        );
    }
    report
}

/// Runs every frame-level check and aggregates the findings.
pub fn validate_frame_draft(draft: &Frame) -> ValidationReport {
    let mut report = validate_frame_name(&draft.name, draft.frame_type, draft.scenario);
    if draft.scenario && draft.frame_type != FrameType::Event {
        report.error(codes::SCENARIO_NOT_EVENT, "scenario", "only event frames can be scenario frames");
    }

    if draft.definition.trim().is_empty() {
        report.error(codes::EMPTY_DEFINITION, "definition", "frame definition is empty");
    }

    if draft.fes.is_empty() {
        report.error(codes::NO_FES, "fes", "at least one frame element is required");
    }
    let mut names = HashSet::new();
    let mut ids = HashSet::new();
    for (i, fe) in draft.fes.iter().enumerate() {
        if !is_identifier(&fe.name) {
            report.error(codes::FE_NAME_CHARSET, format!("fes[{i}].name"), format!("invalid FE name {:?}", fe.name));
        }
        if !names.insert(fold_name(&fe.name)) {
            report.error(codes::FE_DUPLICATE_NAME, format!("fes[{i}].name"), format!("duplicate FE name {}", fe.name));
        }
        if !ids.insert(&fe.id) {
            report.error(codes::FE_DUPLICATE_ID, format!("fes[{i}].id"), format!("duplicate FE id {}", fe.id));
        }
        if fe.definition.trim().is_empty() {
            report.error(codes::EMPTY_DEFINITION, format!("fes[{i}].definition"), format!("FE {} has no definition", fe.name));
        }
        if let FeOrigin::MappedFromRelation(rel) = &fe.origin {
            if !draft.relations.iter().any(|r| &r.id == rel) {
                report.error(
                    codes::FE_ORIGIN_DANGLING,
                    format!("fes[{i}].origin"),
                    format!("FE {} is mapped from unknown relation {rel}", fe.name),
                );
            }
        }
    }

    report.merge(validate_fe_relations(draft), "");

    let mut rel_ids = HashSet::new();
    let mut rel_keys = HashSet::new();
    for (i, rel) in draft.relations.iter().enumerate() {
        let subject = format!("relations[{i}]");
        if !rel_ids.insert(&rel.id) {
            report.error(codes::RELATION_DUPLICATE_ID, subject.clone(), format!("duplicate relation id {}", rel.id));
        }
        if !rel_keys.insert((rel.kind, fold_name(&rel.mother.name))) {
            report.error(
                codes::RELATION_DUPLICATE,
                subject.clone(),
                format!("{:?} relation to {} is listed twice", rel.kind, rel.mother.name),
            );
        }
        let self_ref = rel.mother.id.as_ref() == Some(&draft.id)
            || (!draft.name.is_empty() && fold_name(&rel.mother.name) == fold_name(&draft.name));
        if self_ref {
            report.error(codes::RELATION_SELF, subject.clone(), "a frame cannot be related to itself");
        }
        if rel.daughter != draft.id {
            report.error(
                codes::RELATION_DAUGHTER,
                subject.clone(),
                format!("relation daughter {} is not this frame", rel.daughter),
            );
        }
        for (j, m) in rel.fe_mappings.iter().enumerate() {
            if draft.fe_by_name(&m.daughter_fe).is_none() {
                report.error(
                    codes::MAPPING_TARGET_MISSING,
                    format!("{subject}.fe_mappings[{j}]"),
                    format!("mapped FE {} does not exist in this frame", m.daughter_fe),
                );
            }
        }
    }

    match draft.lexicality {
        Lexicality::Lexical => {
            if draft.lus.is_empty() {
                report.error(codes::LEXICAL_NO_LU, "lus", "a lexical frame needs at least one lexical unit");
            }
        }
        Lexicality::NonLexical => {
            if draft.languages.is_empty() {
                report.error(
                    codes::NONLEXICAL_NO_LANGUAGE,
                    "languages",
                    "a non-lexical frame must declare at least one language",
                );
            }
            if !draft.lus.is_empty() {
                report.error(codes::NONLEXICAL_HAS_LU, "lus", "a non-lexical frame cannot have lexical units");
            }
        }
    }

    let mut lu_keys = HashSet::new();
    for (i, lu) in draft.lus.iter().enumerate() {
        let subject = format!("lus[{i}]");
        if lu.lemma.trim().is_empty() {
            report.error(codes::LU_EMPTY_LEMMA, subject.clone(), "lexical unit has no lemma");
        }
        if lu.example_sentence.trim().is_empty() {
            report.error(codes::LU_NO_EXAMPLE, subject.clone(), format!("{} has no example sentence", lu.label()));
        }
        if lu.frame != draft.id {
            report.error(codes::LU_WRONG_FRAME, subject.clone(), format!("{} evokes another frame", lu.label()));
        }
        if let Some(fe) = &lu.incorporated_fe {
            if draft.fe(fe).is_none() {
                report.error(
                    codes::LU_BAD_INCORPORATED_FE,
                    subject.clone(),
                    format!("incorporated FE {fe} is not an FE of this frame"),
                );
            }
        }
        if !lu_keys.insert((fold_name(&lu.lemma), lu.pos, lu.language.clone())) {
            report.error(codes::LU_DUPLICATE, subject, format!("{} is listed twice", lu.label()));
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Language;
    use crate::model::*;
    use crate::report::Verdict;
    use chrono::Utc;

    fn fe(id: &str, name: &str, coreness: CorenessStatus) -> FrameElement {
        FrameElement {
            id: FeId::new(id),
            name: name.into(),
            definition: format!("The {name}."),
            coreness,
            origin: FeOrigin::Manual,
        }
    }

    fn abc_frame() -> Frame {
        let mut f = Frame::draft(Lexicality::NonLexical, "alice".into(), Utc::now());
        f.name = "Test_frame".into();
        f.definition = "A test frame.".into();
        f.frame_type = FrameType::Event;
        f.languages.insert(Language::parse("en").unwrap());
        f.fes = vec![
            fe("a", "A", CorenessStatus::Core),
            fe("b", "B", CorenessStatus::Core),
            fe("c", "C", CorenessStatus::Peripheral),
        ];
        f
    }

    #[test]
    fn name_examples() {
        assert_eq!(validate_frame_name("Brazilian_way", FrameType::Event, false).verdict(), Verdict::Pass);
        assert_eq!(validate_frame_name("Being_happy", FrameType::State, false).verdict(), Verdict::Pass);
        let r = validate_frame_name("Happiness", FrameType::State, false);
        assert_eq!(r.verdict(), Verdict::PassWithWarnings);
        assert_eq!(r.codes(), vec![codes::STATE_PATTERN]);
        let r = validate_frame_name("lowercase_name", FrameType::Event, false);
        assert_eq!(r.verdict(), Verdict::Fail);
        assert_eq!(r.codes(), vec![codes::NAME_CHARSET]);
    }

    #[test]
    fn scenario_suffix_rules() {
        let r = validate_frame_name("Attempting_and_resolving_scenario", FrameType::Event, true);
        assert_eq!(r.verdict(), Verdict::Pass);
        assert_eq!(validate_frame_name("Commerce", FrameType::Event, true).codes(), vec![codes::SCENARIO_SUFFIX]);
        assert_eq!(
            validate_frame_name("Commerce_scenario", FrameType::Event, false).codes(),
            vec![codes::SCENARIO_SUFFIX_UNEXPECTED]
        );
        assert_eq!(validate_frame_name("Sleep_state", FrameType::State, false).verdict(), Verdict::Pass);
        assert!(validate_frame_name("", FrameType::Event, false).has_code(codes::NAME_CHARSET));
    }

    #[test]
    fn fe_relation_examples() {
        let mut f = abc_frame();
        f.fe_relations = vec![FeRelation::new(FeRelationKind::Requires, vec!["a".into(), "b".into()])];
        assert_eq!(validate_fe_relations(&f).verdict(), Verdict::Pass);

        f.fe_relations = vec![FeRelation::new(FeRelationKind::Excludes, vec!["a".into(), "a".into()])];
        let r = validate_fe_relations(&f);
        assert_eq!(r.verdict(), Verdict::Fail);
        assert!(r.has_code(codes::FE_REL_SELF));

        f.fe_relations = vec![
            FeRelation::new(FeRelationKind::Requires, vec!["a".into(), "b".into()]),
            FeRelation::new(FeRelationKind::Excludes, vec!["b".into(), "a".into()]),
        ];
        assert_eq!(validate_fe_relations(&f).codes(), vec![codes::FE_REL_CONTRADICTION]);
    }

    #[test]
    fn fe_relation_dangling_arity_and_coreset() {
        let mut f = abc_frame();
        f.fe_relations = vec![FeRelation::new(FeRelationKind::Requires, vec!["a".into(), "zz".into()])];
        assert_eq!(validate_fe_relations(&f).codes(), vec![codes::FE_REL_DANGLING]);

        f.fe_relations = vec![FeRelation::new(FeRelationKind::CoreSet, vec!["a".into()])];
        assert_eq!(validate_fe_relations(&f).codes(), vec![codes::FE_REL_ARITY]);

        f.fe_relations = vec![FeRelation::new(FeRelationKind::CoreSet, vec!["a".into(), "c".into()])];
        let r = validate_fe_relations(&f);
        assert_eq!(r.verdict(), Verdict::PassWithWarnings);
        assert_eq!(r.codes(), vec![codes::CORESET_NONCORE]);
    }

    /// Every combination of Requires/Excludes over the ordered pairs of a
    /// three-FE frame, checked against a direct contradiction oracle.
    #[test]
    fn contradiction_matches_brute_force_oracle() {
        let ids = ["a", "b", "c"];
        let mut candidates = Vec::new();
        for x in ids {
            for y in ids {
                if x != y {
                    candidates.push((FeRelationKind::Requires, x, y));
                    if x < y {
                        candidates.push((FeRelationKind::Excludes, x, y));
                    }
                }
            }
        }
        // 6 Requires + 3 Excludes candidate relations: 512 subsets.
        assert_eq!(candidates.len(), 9);
        for mask in 0u32..(1 << candidates.len()) {
            let chosen: Vec<_> = candidates
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, c)| *c)
                .collect();
            let mut f = abc_frame();
            f.fe_relations = chosen
                .iter()
                .map(|(k, x, y)| FeRelation::new(*k, vec![FeId::new(*x), FeId::new(*y)]))
                .collect();

            let oracle_contradictions = {
                let mut n = 0;
                for (i, x) in ids.iter().enumerate() {
                    for y in &ids[i + 1..] {
                        let req = chosen.iter().any(|(k, p, q)| {
                            *k == FeRelationKind::Requires && ((p == x && q == y) || (p == y && q == x))
                        });
                        let exc = chosen.iter().any(|(k, p, q)| {
                            *k == FeRelationKind::Excludes && ((p == x && q == y) || (p == y && q == x))
                        });
                        if req && exc {
                            n += 1;
                        }
                    }
                }
                n
            };
            let report = validate_fe_relations(&f);
            let found = report.codes().iter().filter(|c| **c == codes::FE_REL_CONTRADICTION).count();
            assert_eq!(found, oracle_contradictions, "mask {mask:#b}");
            assert_eq!(report.is_fail(), oracle_contradictions > 0, "mask {mask:#b}");
        }
    }

    #[test]
    fn draft_level_errors() {
        let mut f = abc_frame();
        assert_eq!(validate_frame_draft(&f).verdict(), Verdict::Pass);

        let mut empty = f.clone();
        empty.fes.clear();
        assert!(validate_frame_draft(&empty).has_code(codes::NO_FES));

        f.languages.clear();
        assert_eq!(validate_frame_draft(&f).codes(), vec![codes::NONLEXICAL_NO_LANGUAGE]);

        let mut lexical = abc_frame();
        lexical.lexicality = Lexicality::Lexical;
        assert_eq!(validate_frame_draft(&lexical).codes(), vec![codes::LEXICAL_NO_LU]);
        lexical.lus.push(LexicalUnit {
            id: LuId::new("lu"),
            lemma: "test".into(),
            pos: Pos::Noun,
            language: Language::parse("en").unwrap(),
            frame: lexical.id.clone(),
            example_sentence: "  ".into(),
            incorporated_fe: Some(FeId::new("nope")),
        });
        let r = validate_frame_draft(&lexical);
        assert!(r.has_code(codes::LU_NO_EXAMPLE));
        assert!(r.has_code(codes::LU_BAD_INCORPORATED_FE));

        let mut undefined = abc_frame();
        undefined.fes[1].definition.clear();
        undefined.definition.clear();
        let r = validate_frame_draft(&undefined);
        assert_eq!(r.codes(), vec![codes::EMPTY_DEFINITION, codes::EMPTY_DEFINITION]);
    }

    #[test]
    fn fe_names_and_origins() {
        let mut f = abc_frame();
        f.fes[2].name = "a".into();
        let r = validate_frame_draft(&f);
        assert!(r.has_code(codes::FE_NAME_CHARSET));
        assert!(r.has_code(codes::FE_DUPLICATE_NAME));

        let mut f = abc_frame();
        f.fes[0].origin = FeOrigin::MappedFromRelation(RelationId::new("rel-9"));
        assert_eq!(validate_frame_draft(&f).codes(), vec![codes::FE_ORIGIN_DANGLING]);
    }

    #[test]
    fn relation_checks() {
        let mut f = abc_frame();
        f.relations.push(FrameRelation {
            id: RelationId::new("rel-1"),
            kind: FrameRelationKind::Using,
            mother: FrameRef::unresolved("test_FRAME"),
            daughter: FrameId::new("other"),
            fe_mappings: vec![FeMapping {
                mother_fe: None,
                mother_fe_name: "X".into(),
                daughter_fe: "Missing".into(),
            }],
        });
        let r = validate_frame_draft(&f);
        assert_eq!(
            r.codes(),
            vec![codes::RELATION_SELF, codes::RELATION_DAUGHTER, codes::MAPPING_TARGET_MISSING]
        );
    }
}
