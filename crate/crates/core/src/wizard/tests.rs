use serde_json::json;

use super::*;
use crate::model::*;
use crate::report::codes;
use crate::validate::validate_frame_draft;

const FIXTURE: &str = "s1\ten\tn\tpurchase\ns1\ten\tn\tbuy\ns1\tpt-BR\tn\tcompra\ns2\ten\tv\tfix\n";

fn payload(v: serde_json::Value) -> StepPayload {
    serde_json::from_value(v).unwrap()
}

fn wizard() -> Wizard {
    let lexicon = Lexicon::in_memory();
    lexicon.ingest_reader(FIXTURE.as_bytes()).unwrap();
    Wizard::new(Arc::new(FrameStore::in_memory()), Arc::new(lexicon), LanguageRegistry::open(), WizardConfig::default())
        .unwrap()
}

fn alice() -> ContributorId {
    ContributorId::new("alice")
}

fn seed_attempting(w: &Wizard) -> FrameId {
    let s = w.start_session(alice(), FlowKind::NonLexical).unwrap();
    for p in [
        json!({"step": "TypeSelection", "payload": {"frame_type": "event", "scenario": true, "languages": ["en"]}}),
        json!({"step": "NameAndDefinition", "payload": {
            "name": "Attempting_and_resolving_scenario",
            "definition": "An Agent attempts to reach a Goal in some Manner."}}),
        json!({"step": "FrameRelations", "payload": {}}),
        json!({"step": "FrameElements", "payload": {"add": [
            {"name": "Agent", "definition": "The one who attempts.", "coreness": "core"},
            {"name": "Goal", "definition": "What the Agent wants.", "coreness": "peripheral"},
            {"name": "Manner", "definition": "How it is attempted.", "coreness": "peripheral"}]}}),
        json!({"step": "FERelations", "payload": {}}),
    ] {
        w.submit_step(&s.id, &payload(p)).unwrap();
    }
    let (done, outcome) = w.finalize(&s.id, &ExampleInput::default()).unwrap();
    assert_eq!(done.step, WizardStep::Committed);
    assert_eq!(outcome.lu_id, None);
    outcome.frame_id
}

/// Runs the Brazilian_way session up to ExampleSentence.
fn brazilian_way_until_example(w: &Wizard) -> WizardSession {
    let s = w.start_session(alice(), FlowKind::Lexical).unwrap();
    assert_eq!(s.step, WizardStep::LemmaSearch);
    let lemma = LemmaInput { lemma: "jeitinho".into(), pos: Pos::Noun, language: "pt-BR".into() };
    let s = w.submit_lemma(&s.id, &lemma).unwrap();
    assert_eq!(s.step, WizardStep::TypeSelection);
    assert!(s.search_result.as_ref().unwrap().is_empty());
    for p in [
        json!({"step": "TypeSelection", "payload": {"frame_type": "event"}}),
        json!({"step": "NameAndDefinition", "payload": {
            "name": "Brazilian_way",
            "definition": "An Interested_party bends a Norm upheld by an Authority."}}),
        json!({"step": "FrameRelations", "payload": {"relations": [{
            "kind": "inheritance", "mother": "Attempting_and_resolving_scenario",
            "mappings": [{"mother_fe": "Agent", "daughter_fe": "Interested_party"}]}]}}),
        json!({"step": "FrameElements", "payload": {"add": [
            {"name": "Authority", "definition": "Who upholds the Norm.", "coreness": "core"},
            {"name": "Norm", "definition": "The rule being bent.", "coreness": "core"}]}}),
        json!({"step": "FERelations", "payload": {}}),
        json!({"step": "Summary"}),
    ] {
        w.submit_step(&s.id, &payload(p)).unwrap();
    }
    let s = w.get_session(&s.id).unwrap();
    assert_eq!(s.step, WizardStep::ExampleSentence);
    s
}

fn core_names(f: &Frame) -> Vec<&str> {
    let mut v: Vec<&str> = f.fes.iter().filter(|fe| fe.coreness.is_core()).map(|fe| fe.name.as_str()).collect();
    v.sort();
    v
}

#[test]
fn sessions_start_at_the_flow_entry() {
    let w = wizard();
    let a = w.start_session(alice(), FlowKind::Lexical).unwrap();
    let b = w.start_session(alice(), FlowKind::NonLexical).unwrap();
    assert_eq!(a.step, WizardStep::LemmaSearch);
    assert_eq!(b.step, WizardStep::TypeSelection);
    assert_ne!(a.id, b.id);
    assert_eq!(w.session_count(), 2);
}

#[test]
fn brazilian_way_walkthrough() {
    let w = wizard();
    seed_attempting(&w);
    let s = brazilian_way_until_example(&w);
    let after_mapping: Vec<&str> = s.draft.fes.iter().map(|fe| fe.name.as_str()).collect();
    assert_eq!(after_mapping, ["Interested_party", "Goal", "Manner", "Authority", "Norm"]);

    let example = ExampleInput { sentence: "Alguém deu um jeitinho no problema do visto".into(), incorporated_fe: None };
    let (s, outcome) = w.finalize(&s.id, &example).unwrap();
    assert_eq!(s.step, WizardStep::Committed);
    let frame = w.store().get_frame(&outcome.frame_id).unwrap();
    assert_eq!(core_names(&frame), ["Authority", "Interested_party", "Norm"]);
    assert!(frame.fe_by_name("Goal").is_some() && frame.fe_by_name("Manner").is_some());
    assert_eq!(frame.lus.len(), 1);
    assert_eq!(frame.lus[0].label(), "jeitinho.n");
    assert_eq!(Some(frame.lus[0].id.clone()), outcome.lu_id);
    assert_eq!(frame.created_by, alice());
    assert!(!validate_frame_draft(&frame).is_fail());

    // a committed session cannot move any more
    assert_eq!(w.go_back(&s.id, WizardStep::Summary).unwrap_err().code(), "WRONG_STEP");
    assert_eq!(w.finalize(&s.id, &example).unwrap_err().code(), "WRONG_STEP");
}

#[test]
fn synonym_hit_leads_to_review_and_attach() {
    let w = wizard();
    let s = w.start_session(alice(), FlowKind::Lexical).unwrap();
    w.submit_lemma(&s.id, &LemmaInput { lemma: "buy".into(), pos: Pos::Noun, language: "en".into() }).unwrap();
    for p in [
        json!({"step": "TypeSelection", "payload": {"frame_type": "event"}}),
        json!({"step": "NameAndDefinition", "payload": {"name": "Commerce_buy", "definition": "A Buyer buys Goods."}}),
        json!({"step": "FrameRelations", "payload": {"relations": []}}),
        json!({"step": "FrameElements", "payload": {"add": [
            {"name": "Buyer", "definition": "The one buying.", "coreness": "core"}],
            "accept_suggestions": ["Time"]}}),
        json!({"step": "FERelations", "payload": {"relations": []}}),
        json!({"step": "Summary", "payload": {}}),
    ] {
        w.submit_step(&s.id, &payload(p)).unwrap();
    }
    let (_, commerce) =
        w.finalize(&s.id, &ExampleInput { sentence: "A good buy.".into(), incorporated_fe: None }).unwrap();

    let s = w.start_session(alice(), FlowKind::Lexical).unwrap();
    let lemma = LemmaInput { lemma: "purchase".into(), pos: Pos::Noun, language: "en".into() };
    let s = w.submit_lemma(&s.id, &lemma).unwrap();
    assert_eq!(s.step, WizardStep::ExistingFrameReview);
    let result = s.search_result.as_ref().unwrap();
    assert_eq!(result.synonym_hits[0].lemma.text, "buy");
    assert_eq!(result.synonym_hits[0].frames[0].id, commerce.frame_id);

    let err = w
        .resolve_review(&s.id, &ReviewDecision::AttachToFrame { frame_id: FrameId::new("fr-404") })
        .unwrap_err();
    assert_eq!(err.code(), codes::UNKNOWN_FRAME);
    assert_eq!(w.get_session(&s.id).unwrap(), s);

    let s = w
        .resolve_review(&s.id, &ReviewDecision::AttachToFrame { frame_id: commerce.frame_id.clone() })
        .unwrap();
    assert_eq!(s.step, WizardStep::ExampleSentence);
    let err = w.go_back(&s.id, WizardStep::Summary).unwrap_err();
    assert_eq!(err.code(), "WRONG_STEP");
    let example = ExampleInput { sentence: "I made a purchase.".into(), incorporated_fe: Some("Time".into()) };
    let (_, outcome) = w.finalize(&s.id, &example).unwrap();
    assert_eq!(outcome.frame_id, commerce.frame_id);
    let frame = w.store().get_frame(&commerce.frame_id).unwrap();
    assert_eq!(frame.lus.len(), 2);
    let purchase = frame.lus.iter().find(|l| l.lemma == "purchase").unwrap();
    assert_eq!(frame.fe(purchase.incorporated_fe.as_ref().unwrap()).unwrap().name, "Time");
}

#[test]
fn create_new_frame_from_review() {
    let w = wizard();
    let s = w.start_session(alice(), FlowKind::Lexical).unwrap();
    w.submit_lemma(&s.id, &LemmaInput { lemma: "buy".into(), pos: Pos::Noun, language: "en".into() }).unwrap();
    let seed = w.start_session(alice(), FlowKind::Lexical).unwrap();
    assert_eq!(w.resolve_review(&seed.id, &ReviewDecision::CreateNewFrame).unwrap_err().code(), "WRONG_STEP");
    // nothing registered yet, so the first session went straight on
    assert_eq!(w.get_session(&s.id).unwrap().step, WizardStep::TypeSelection);
}

#[test]
fn wrong_step_calls_are_refused() {
    let w = wizard();
    let s = w.start_session(alice(), FlowKind::NonLexical).unwrap();
    let lemma = LemmaInput { lemma: "x".into(), pos: Pos::Noun, language: "en".into() };
    assert_eq!(w.submit_lemma(&s.id, &lemma).unwrap_err().code(), "WRONG_STEP");
    let p = payload(json!({"step": "NameAndDefinition", "payload": {"name": "A", "definition": "b"}}));
    assert_eq!(w.submit_step(&s.id, &p).unwrap_err().code(), "WRONG_STEP");
    assert_eq!(w.finalize(&s.id, &ExampleInput::default()).unwrap_err().code(), "WRONG_STEP");
    assert_eq!(w.go_back(&s.id, WizardStep::LemmaSearch).unwrap_err().code(), "WRONG_STEP");
    assert_eq!(w.get_session(&s.id).unwrap(), s);
}

#[test]
fn rejections_leave_the_session_untouched() {
    let w = wizard();
    seed_attempting(&w);
    let s = w.start_session(alice(), FlowKind::Lexical).unwrap();
    let bad_lemma = LemmaInput { lemma: "  ".into(), pos: Pos::Noun, language: "not a tag".into() };
    let err = w.submit_lemma(&s.id, &bad_lemma).unwrap_err();
    let codes_seen = err.report().unwrap().codes();
    assert_eq!(codes_seen, [codes::UNKNOWN_LANGUAGE, codes::LU_EMPTY_LEMMA]);
    assert_eq!(w.get_session(&s.id).unwrap(), s);

    w.submit_lemma(&s.id, &LemmaInput { lemma: "jeitinho".into(), pos: Pos::Noun, language: "pt-BR".into() })
        .unwrap();
    w.submit_step(&s.id, &payload(json!({"step": "TypeSelection", "payload": {"frame_type": "event"}}))).unwrap();

    let before = w.get_session(&s.id).unwrap();
    let dup = payload(json!({"step": "NameAndDefinition", "payload": {
        "name": "attempting_and_resolving_SCENARIO", "definition": "x"}}));
    let err = w.submit_step(&s.id, &dup).unwrap_err();
    let WizardError::Rejected(rejection) = &err else { panic!("{err:?}") };
    assert_eq!(rejection.stayed_at, WizardStep::NameAndDefinition);
    assert!(rejection.report.has_code(codes::NAME_CHARSET));
    assert!(rejection.report.has_code(codes::DUPLICATE_NAME));
    assert_eq!(w.get_session(&s.id).unwrap(), before);

    w.submit_step(&s.id, &payload(json!({"step": "NameAndDefinition", "payload": {
        "name": "Brazilian_way", "definition": "Bending norms."}})))
        .unwrap();
    let before = w.get_session(&s.id).unwrap();
    let incomplete = payload(json!({"step": "FrameRelations", "payload": {"relations": [{
        "kind": "inheritance", "mother": "Attempting_and_resolving_scenario", "mappings": []}]}}));
    let err = w.submit_step(&s.id, &incomplete).unwrap_err();
    assert!(err.report().unwrap().has_code(codes::INCOMPLETE_MAPPING));
    assert_eq!(w.get_session(&s.id).unwrap(), before);

    w.submit_step(&s.id, &payload(json!({"step": "FrameRelations", "payload": {}}))).unwrap();
    let before = w.get_session(&s.id).unwrap();
    let err = w.submit_step(&s.id, &payload(json!({"step": "FrameElements", "payload": {}}))).unwrap_err();
    assert_eq!(err.report().unwrap().codes(), [codes::NO_FES]);
    assert_eq!(w.get_session(&s.id).unwrap(), before);
}

#[test]
fn empty_example_sentence_fails_validation() {
    let w = wizard();
    seed_attempting(&w);
    let s = brazilian_way_until_example(&w);
    let err = w.finalize(&s.id, &ExampleInput { sentence: " ".into(), incorporated_fe: None }).unwrap_err();
    assert_eq!(err.code(), "VALIDATION_FAILED");
    assert!(err.report().unwrap().has_code(codes::LU_NO_EXAMPLE));
    let err = w
        .finalize(&s.id, &ExampleInput { sentence: "Ok.".into(), incorporated_fe: Some("Nobody".into()) })
        .unwrap_err();
    assert!(err.report().unwrap().has_code(codes::LU_BAD_INCORPORATED_FE));
    assert_eq!(w.get_session(&s.id).unwrap(), s);
    assert!(w.store().snapshot().by_name("Brazilian_way").is_none());
}

#[test]
fn racing_finalizes_have_one_winner() {
    let w = Arc::new(wizard());
    seed_attempting(&w);
    let a = brazilian_way_until_example(&w);
    let b = brazilian_way_until_example(&w);
    let example = ExampleInput { sentence: "Um jeitinho.".into(), incorporated_fe: None };
    let handles: Vec<_> = [a.id, b.id]
        .into_iter()
        .map(|id| {
            let w = w.clone();
            let example = example.clone();
            std::thread::spawn(move || w.finalize(&id, &example).map(|(_, o)| o))
        })
        .collect();
    let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(results.iter().filter(|r| r.is_ok()).count(), 1);
    let loser = results.into_iter().find_map(Result::err).unwrap();
    assert_eq!(loser.code(), codes::DUPLICATE_NAME);
}

#[test]
fn backward_navigation_invalidates_dependent_data() {
    let w = wizard();
    let s = w.start_session(alice(), FlowKind::NonLexical).unwrap();
    for p in [
        json!({"step": "TypeSelection", "payload": {"frame_type": "relation", "languages": ["de"]}}),
        json!({"step": "NameAndDefinition", "payload": {"name": "Spatial_link", "definition": "Links places."}}),
        json!({"step": "FrameRelations", "payload": {}}),
        json!({"step": "FrameElements", "payload": {
            "add": [{"name": "Figure", "definition": "What is placed.", "coreness": "core"}],
            "accept_suggestions": ["Direction"]}}),
        json!({"step": "FERelations", "payload": {"relations": [{"kind": "requires", "members": ["Direction", "Figure"]}]}}),
    ] {
        w.submit_step(&s.id, &payload(p)).unwrap();
    }
    let s = w.get_session(&s.id).unwrap();
    assert_eq!(s.step, WizardStep::Summary);
    assert_eq!(s.draft.fes.len(), 2);
    assert_eq!(s.draft.fe_relations.len(), 1);

    assert_eq!(w.go_back(&s.id, WizardStep::Summary).unwrap_err().code(), "WRONG_STEP");
    let s = w.go_back(&s.id, WizardStep::TypeSelection).unwrap();
    assert_eq!(s.draft.fes.len(), 2, "nothing is dropped until the new type is confirmed");
    let s = w.submit_step(&s.id, &payload(json!({"step": "TypeSelection", "payload": {
        "frame_type": "entity", "languages": ["de"]}})))
        .unwrap();
    assert_eq!(s.step, WizardStep::NameAndDefinition);
    assert_eq!(s.draft.fes.iter().map(|f| f.name.as_str()).collect::<Vec<_>>(), ["Figure"]);
    assert!(s.draft.fe_relations.is_empty());
    assert!(s.suggestions.iter().any(|x| x.name == "Material"));

    // the remaining steps must be passed again in order
    let summary = payload(json!({"step": "Summary"}));
    assert_eq!(w.submit_step(&s.id, &summary).unwrap_err().code(), "WRONG_STEP");
    assert_eq!(w.finalize(&s.id, &ExampleInput::default()).unwrap_err().code(), "WRONG_STEP");
}

#[test]
fn back_to_lemma_search_clears_search_state() {
    let w = wizard();
    let s = w.start_session(alice(), FlowKind::Lexical).unwrap();
    w.submit_lemma(&s.id, &LemmaInput { lemma: "jeitinho".into(), pos: Pos::Noun, language: "pt-BR".into() })
        .unwrap();
    assert_eq!(w.go_back(&s.id, WizardStep::ExistingFrameReview).unwrap_err().code(), "WRONG_STEP");
    let s = w.go_back(&s.id, WizardStep::LemmaSearch).unwrap();
    assert!(s.pending_lemma.is_none() && s.search_result.is_none());
    assert_eq!(s.step, WizardStep::LemmaSearch);
}

#[test]
fn mapped_fes_are_locked() {
    let w = wizard();
    seed_attempting(&w);
    let s = w.start_session(alice(), FlowKind::NonLexical).unwrap();
    for p in [
        json!({"step": "TypeSelection", "payload": {"frame_type": "event", "languages": ["en"]}}),
        json!({"step": "NameAndDefinition", "payload": {"name": "Trying", "definition": "Trying things."}}),
        json!({"step": "FrameRelations", "payload": {"relations": [{
            "kind": "inheritance", "mother": "fr-1",
            "mappings": [{"mother_fe": "agent", "daughter_fe": "Trier"}]}]}}),
    ] {
        w.submit_step(&s.id, &payload(p)).unwrap();
    }
    for bad in [
        json!({"remove": ["Trier"]}),
        json!({"edit": [{"fe": "Trier", "rename": "Other"}]}),
        json!({"edit": [{"fe": "Goal", "coreness": "core"}]}),
    ] {
        let err = w.submit_step(&s.id, &payload(json!({"step": "FrameElements", "payload": bad}))).unwrap_err();
        assert_eq!(err.report().unwrap().codes(), [codes::FE_MAPPED_LOCKED]);
    }
    let ok = json!({"edit": [{"fe": "Trier", "definition": "Who tries."}], "remove": []});
    let s = w.submit_step(&s.id, &payload(json!({"step": "FrameElements", "payload": ok}))).unwrap();
    assert_eq!(s.draft.fe_by_name("Trier").unwrap().definition, "Who tries.");
    let err = w
        .submit_step(&s.id, &payload(json!({"step": "FERelations", "payload": {"relations": [
            {"kind": "excludes", "members": ["Goal", "Nobody"]}]}})))
        .unwrap_err();
    assert!(err.report().unwrap().has_code(codes::FE_REL_DANGLING));
}

#[test]
fn unknown_suggestions_and_languages_are_rejected() {
    let w = wizard();
    let s = w.start_session(alice(), FlowKind::NonLexical).unwrap();
    let err = w
        .submit_step(&s.id, &payload(json!({"step": "TypeSelection", "payload": {"frame_type": "state"}})))
        .unwrap_err();
    assert_eq!(err.report().unwrap().codes(), [codes::NONLEXICAL_NO_LANGUAGE]);
    let err = w
        .submit_step(&s.id, &payload(json!({"step": "TypeSelection", "payload": {
            "frame_type": "state", "scenario": true, "languages": ["en", "??"]}})))
        .unwrap_err();
    assert_eq!(err.report().unwrap().codes(), [codes::SCENARIO_NOT_EVENT, codes::UNKNOWN_LANGUAGE]);
    w.submit_step(&s.id, &payload(json!({"step": "TypeSelection", "payload": {"frame_type": "state", "languages": ["en"]}})))
        .unwrap();
    let s = w
        .submit_step(&s.id, &payload(json!({"step": "NameAndDefinition", "payload": {"name": "Happiness", "definition": "Being happy."}})))
        .unwrap();
    assert_eq!(s.warnings.codes(), [codes::STATE_PATTERN]);
    w.submit_step(&s.id, &payload(json!({"step": "FrameRelations", "payload": {}}))).unwrap();
    let err = w
        .submit_step(&s.id, &payload(json!({"step": "FrameElements", "payload": {"accept_suggestions": ["Material"]}})))
        .unwrap_err();
    assert!(err.report().unwrap().has_code(codes::UNKNOWN_SUGGESTION));
}

#[test]
fn registry_limits_languages() {
    let lexicon = Arc::new(Lexicon::in_memory());
    let registry = LanguageRegistry::from_tags(["en", "pt-BR"]).unwrap();
    let w = Wizard::new(Arc::new(FrameStore::in_memory()), lexicon, registry, WizardConfig::default()).unwrap();
    let s = w.start_session(alice(), FlowKind::Lexical).unwrap();
    let err = w
        .submit_lemma(&s.id, &LemmaInput { lemma: "Haus".into(), pos: Pos::Noun, language: "de".into() })
        .unwrap_err();
    assert_eq!(err.report().unwrap().codes(), [codes::UNKNOWN_LANGUAGE]);
}

#[test]
fn sessions_persist_and_expire() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(FrameStore::in_memory());
    let lexicon = Arc::new(Lexicon::in_memory());
    let config = WizardConfig { session_dir: Some(dir.path().to_path_buf()), ..WizardConfig::default() };
    let t0 = Utc::now();
    let w = Wizard::new(store.clone(), lexicon.clone(), LanguageRegistry::open(), config.clone()).unwrap();
    let s = w.start_session(alice(), FlowKind::NonLexical).unwrap();
    let s = w
        .submit_step(&s.id, &payload(json!({"step": "TypeSelection", "payload": {"frame_type": "event", "languages": ["en"]}})))
        .unwrap();
    drop(w);

    let resumed = Wizard::new(store.clone(), lexicon.clone(), LanguageRegistry::open(), config.clone()).unwrap();
    assert_eq!(resumed.get_session(&s.id).unwrap(), s);

    let later = t0 + Duration::days(DEFAULT_SESSION_TTL_DAYS + 1);
    let expired = Wizard::new(store.clone(), lexicon.clone(), LanguageRegistry::open(), config.clone())
        .unwrap()
        .with_clock(move || later);
    assert_eq!(expired.get_session(&s.id).unwrap_err().code(), "SESSION_EXPIRED");
    assert_eq!(expired.get_session(&s.id).unwrap_err().code(), "UNKNOWN_SESSION");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn purge_drops_stale_sessions() {
    let now = Arc::new(Mutex::new(Utc::now()));
    let clock = now.clone();
    let w = wizard().with_clock(move || *clock.lock());
    w.start_session(alice(), FlowKind::Lexical).unwrap();
    *now.lock() += Duration::days(2);
    w.start_session(alice(), FlowKind::Lexical).unwrap();
    *now.lock() += Duration::days(DEFAULT_SESSION_TTL_DAYS - 1);
    assert_eq!(w.purge_expired(), 1);
    assert_eq!(w.session_count(), 1);
}

#[test]
fn payloads_round_trip_through_json() {
    let p = payload(json!({"step": "FERelations", "payload": {"relations": [{"kind": "core_set", "members": ["A", "B"]}]}}));
    let v = serde_json::to_value(&p).unwrap();
    assert_eq!(v["step"], "FERelations");
    assert_eq!(serde_json::from_value::<StepPayload>(v).unwrap(), p);
    assert!(serde_json::from_value::<StepPayload>(json!({"step": "Summary"})).is_ok());
    assert!(serde_json::from_value::<StepPayload>(json!({"step": "Committed"})).is_err());
    assert!(serde_json::from_value::<StepPayload>(json!({"step": "NameAndDefinition", "payload": {"name": "A"}})).is_err());
    let d: ReviewDecision = serde_json::from_value(json!({"decision": "attach_to_frame", "frame_id": "fr-3"})).unwrap();
    assert_eq!(d, ReviewDecision::AttachToFrame { frame_id: FrameId::new("fr-3") });
}
