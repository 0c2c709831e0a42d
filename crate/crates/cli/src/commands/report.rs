use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use mamid_core::dataset::Level;

use crate::args::ReportArgs;
use crate::layout::{read_root, read_stage, stage_dir, STAGES};

/// Stages a complete run produces; synth and full validation are optional.
const EXPECTED: [&str; 4] = ["preprocess", "tune", "validate-subset", "explain"];

pub fn run(args: &ReportArgs) -> Result<()> {
    let text = render(&args.common.out)?;
    if text.is_none() {
        println!("nothing to report in {}", args.common.out.display());
        return Ok(());
    }
    let text = text.unwrap_or_default();
    let path = args.common.out.join("report.txt");
    std::fs::write(&path, &text).map_err(|e| mamid_core::Error::io(&path, e))?;
    print!("{text}");
    Ok(())
}

/// The consolidated summary, or `None` when no stage has run.
pub fn render(root: &Path) -> Result<Option<String>> {
    if read_root(root)?.is_none() {
        return Ok(None);
    }
    let mut out = String::new();
    let mut present = Vec::new();
    for (stage, _) in STAGES {
        if read_stage(root, stage)?.is_some() {
            present.push(stage);
        }
    }
    if present.is_empty() {
        return Ok(None);
    }
    let _ = writeln!(out, "stages run: {}", present.join(", "));
    let missing: Vec<&str> = EXPECTED.iter().copied().filter(|s| !present.contains(s)).collect();
    if !missing.is_empty() {
        let _ = writeln!(out, "missing stages: {}", missing.join(", "));
    }

    let section = |out: &mut String, title: &str, rel: &str| {
        if let Ok(text) = std::fs::read_to_string(root.join(rel)) {
            let _ = writeln!(out, "\n== {title} ==");
            out.push_str(&text);
        }
    };
    if present.contains(&"preprocess") {
        section(&mut out, "preprocess", "preprocess/provenance.txt");
    }
    if let Some(m) = read_stage(root, "tune")? {
        for level in Level::ALL {
            let top = m
                .artifacts
                .iter()
                .find(|a| a.starts_with(&format!("tune/{level}/top")) && a.ends_with(".txt"));
            if let Some(top) = top {
                section(&mut out, &format!("tune, {level}"), top);
            }
        }
        section(&mut out, "selection", "tune/selection.txt");
    }
    for scope in ["validate-subset", "validate-full"] {
        if present.contains(&scope) {
            for level in Level::ALL {
                section(&mut out, &format!("{scope}, {level}"), &format!("{}/{level}/report.txt", stage_dir(scope)));
            }
        }
    }
    if present.contains(&"explain") {
        for level in Level::ALL {
            section(&mut out, &format!("explain, {level}"), &format!("explain/{level}/importance.txt"));
        }
    }
    Ok(Some(out))
}
