mod common;

use std::path::Path;

use common::*;
use terridoc::ontology::{EntityOrigin, LinkPolicy, OntoEdgeType};
use terridoc::pipeline::{self, PipelineConfig};
use terridoc::Error;

fn config(out: &Path) -> PipelineConfig {
    PipelineConfig::new(
        fixture("bareges/notices.xml"),
        fixture("bareges/thesaurus.jsonl"),
        fixture("bareges/gazetteer.csv"),
        out,
    )
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("pipeline").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn missing_gazetteer_is_an_input_error() {
    let mut cfg = config(&tmp("missing"));
    cfg.gazetteer_path = fixture("bareges/nope.csv");
    let err = pipeline::run_build(&cfg).unwrap_err();
    assert!(matches!(err, Error::Validation(_)), "{err}");
    assert!(err.is_input_error());
    assert!(!cfg.out_dir.exists(), "nothing written on failure");
}

#[test]
fn unwritable_output_is_an_environment_error() {
    let dir = tmp("unwritable");
    std::fs::create_dir_all(&dir).unwrap();
    let blocker = dir.join("file");
    std::fs::write(&blocker, "x").unwrap();
    let err = pipeline::run_build(&config(&blocker.join("out"))).unwrap_err();
    assert!(matches!(err, Error::Io { .. }), "{err}");
    assert!(!err.is_input_error());
}

#[test]
fn thesaurus_errors_name_the_file() {
    let dir = tmp("bad-thesaurus");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("t.jsonl");
    std::fs::write(&bad, "{\"id\": \"a\", \"pref\": \"A\", \"tg\": [\"b\"]}\n").unwrap();
    let mut cfg = config(&dir.join("out"));
    cfg.thesaurus_path = bad.clone();
    let msg = pipeline::run_build(&cfg).unwrap_err().to_string();
    assert!(msg.starts_with(&bad.display().to_string()), "{msg}");
    assert!(msg.contains("\"b\""), "{msg}");
}

#[test]
fn create_policy_adds_text_concept_for_unknown_qualifier() {
    let mut cfg = config(&tmp("create"));
    cfg.options.link_policy = LinkPolicy::Create;
    let out = pipeline::run_build(&cfg).unwrap();
    let o = &out.ontology;
    let eaux = o.concepts().find(|c| c.label == "eaux").expect("text concept");
    assert_eq!(eaux.origin, EntityOrigin::Text);
    assert!(o.has_edge(&eaux.id, "bareges", OntoEdgeType::InstanceOf));
    assert_eq!(out.report.details.text_links, 3);
    assert!(out.report.details.unlinked_qualifiers.is_empty());
}

#[test]
fn custom_lexicon_dir_changes_extraction() {
    let dir = tmp("lexicon");
    std::fs::create_dir_all(&dir).unwrap();
    // without "et" as coordinator the Béarn continuation is lost
    std::fs::write(dir.join("cc.txt"), "ou\n").unwrap();
    std::fs::write(dir.join("det.txt"), "le la les l' un une des ce\n").unwrap();
    std::fs::write(dir.join("prep.txt"), "de du des d' à au aux en\n").unwrap();
    let mut cfg = config(&dir.join("out"));
    cfg.lexicon_dir = Some(dir.clone());
    let out = pipeline::run_build(&cfg).unwrap();
    assert!(!out
        .ontology
        .has_edge("eaux_minerales", "bearn", OntoEdgeType::InstanceOf));

    cfg.lexicon_dir = Some(dir.join("absent"));
    assert!(pipeline::run_build(&cfg).unwrap_err().is_input_error());
}

#[test]
fn export_and_stats_read_the_built_graph() {
    let dir = tmp("export");
    let out = pipeline::run_build(&config(&dir)).unwrap();
    let re = dir.join("re");
    let written = pipeline::run_export(&dir.join("terridoc.json"), &re).unwrap();
    assert_eq!(written.len(), 2);
    for name in ["ontology.ttl", "graph.dot"] {
        assert_eq!(
            std::fs::read(re.join(name)).unwrap(),
            std::fs::read(dir.join(name)).unwrap()
        );
    }
    assert_eq!(
        pipeline::run_stats(&dir.join("terridoc.json")).unwrap(),
        out.report.ontology
    );
}

#[test]
fn invalid_graph_for_export_is_an_input_error() {
    let dir = tmp("bad-graph");
    std::fs::create_dir_all(&dir).unwrap();
    let g = dir.join("g.json");
    std::fs::write(&g, "{\"nodes\": 3}").unwrap();
    let err = pipeline::run_export(&g, &dir.join("o")).unwrap_err();
    assert!(err.is_input_error());
    assert!(err.to_string().contains("nodes"), "{err}");
}

#[test]
fn multiple_notice_files_merge() {
    let dir = tmp("merge");
    std::fs::create_dir_all(&dir).unwrap();
    let extra = dir.join("extra.xml");
    std::fs::write(
        &extra,
        "<NOTICES><NOTICE id=\"midr-0002\"><DEE>Eaux minérales -- Béarn</DEE></NOTICE></NOTICES>",
    )
    .unwrap();
    let mut cfg = config(&dir.join("out"));
    cfg.notices_paths.push(extra.clone());
    let out = pipeline::run_build(&cfg).unwrap();
    assert_eq!(out.report.graph.notices, 2);
    let bearn = out.ontology.instance("bearn").unwrap();
    assert!(bearn.docs.contains("midr-0002") && bearn.docs.contains("midr-0001"));
    assert_eq!(bearn.origin, EntityOrigin::Corpus);

    cfg.notices_paths.push(extra);
    assert!(pipeline::run_build(&cfg)
        .unwrap_err()
        .to_string()
        .contains("duplicate notice id"));
}
