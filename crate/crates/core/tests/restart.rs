use std::path::Path;
use std::sync::Arc;

use framemaker_core::lexicon::Lexicon;
use framemaker_core::wizard::{ExampleInput, LemmaInput};
use framemaker_core::{
    ContributorId, FlowKind, FrameFilter, FrameStore, Language, LanguageRegistry, Pos, StepPayload, Wizard,
    WizardConfig, WizardStep,
};
use serde_json::json;

fn open(dir: &Path) -> Wizard {
    let lexicon = Lexicon::open(dir.join("lexicon.tsv")).unwrap();
    let config = WizardConfig { session_dir: Some(dir.join("sessions")), ..WizardConfig::default() };
    Wizard::new(
        Arc::new(FrameStore::open(dir.join("frames.log")).unwrap()),
        Arc::new(lexicon),
        LanguageRegistry::open(),
        config,
    )
    .unwrap()
}

fn step(v: serde_json::Value) -> StepPayload {
    serde_json::from_value(v).unwrap()
}

#[test]
fn a_session_survives_a_restart_and_its_frame_persists() {
    let dir = tempfile::tempdir().unwrap();
    let synsets = dir.path().join("synsets.tsv");
    std::fs::write(&synsets, "s1\ten\tn\tbuy\ns1\ten\tn\tpurchase\n").unwrap();

    let session = {
        let w = open(dir.path());
        w.lexicon().ingest_file(&synsets).unwrap();
        let s = w.start_session(ContributorId::new("alice"), FlowKind::Lexical).unwrap();
        let input = LemmaInput { lemma: "haggle".into(), pos: Pos::Verb, language: "en".into() };
        let s = w.submit_lemma(&s.id, &input).unwrap();
        assert_eq!(s.step, WizardStep::TypeSelection);
        w.submit_step(&s.id, &step(json!({"step": "TypeSelection", "payload": {"frame_type": "event"}}))).unwrap();
        s.id
    };

    let w = open(dir.path());
    let s = w.get_session(&session).unwrap();
    assert_eq!(s.step, WizardStep::NameAndDefinition);
    for p in [
        json!({"step": "NameAndDefinition", "payload": {"name": "Haggling", "definition": "A Buyer bargains with a Seller over a price."}}),
        json!({"step": "FrameRelations", "payload": {"relations": []}}),
        json!({"step": "FrameElements", "payload": {"add": [
            {"name": "Buyer", "definition": "The one who wants the goods.", "coreness": "core"},
            {"name": "Seller", "definition": "The one who has the goods.", "coreness": "core"}
        ]}}),
        json!({"step": "FERelations", "payload": {"relations": []}}),
        json!({"step": "Summary", "payload": {}}),
    ] {
        w.submit_step(&session, &step(p)).unwrap();
    }
    let example = ExampleInput { sentence: "They haggled for an hour.".into(), incorporated_fe: None };
    let (_, outcome) = w.finalize(&session, &example).unwrap();
    drop(w);

    let w = open(dir.path());
    let frame = w.store().get_frame(&outcome.frame_id).unwrap();
    assert_eq!(frame.name, "Haggling");
    assert_eq!(w.store().find_lus("haggle", Pos::Verb, &Language::parse("en").unwrap()).len(), 1);
    assert_eq!((w.lexicon().snapshot().synset_count(), w.lexicon().snapshot().lemma_count()), (1, 2));
    assert_eq!(w.store().list_frames(&FrameFilter::all()).total, 1);
}
