#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::time::Duration;

use tohtn_core::hddl::{self, text::parse_ground};
use tohtn_core::manifest::{parse_manifest, Instance};
use tohtn_core::model::Problem;
use tohtn_core::planner::PlannerConfig;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn suite() -> Vec<(Instance, Problem)> {
    let base = fixtures();
    let text = std::fs::read_to_string(base.join("suite.manifest")).unwrap();
    parse_manifest(&text, &base)
        .unwrap()
        .into_iter()
        .map(|i| {
            let p = hddl::load(&i.domain, i.problem.as_deref(), &Default::default()).unwrap();
            (i, p)
        })
        .collect()
}

pub fn fixture(name: &str) -> Problem {
    suite()
        .into_iter()
        .find(|(i, _)| i.name == name)
        .unwrap_or_else(|| panic!("no fixture {name}"))
        .1
}

pub fn ground_text(name: &str) -> Problem {
    let path = fixtures().join(name);
    parse_ground(name, &std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn config(mode: &str) -> PlannerConfig {
    PlannerConfig {
        mode: mode.into(),
        timeout: Some(Duration::from_secs(30)),
        ..PlannerConfig::default()
    }
}
