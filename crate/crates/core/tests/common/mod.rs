#![allow(dead_code)]

pub mod reference;
pub mod props;

use std::path::PathBuf;

use cnl_core::dl::MicroOntology;
use cnl_core::merge::{partition_senses, SenseInventory};
use cnl_core::parser::load_ontology;
use cnl_core::templates::{parse_templates, ProceduralTemplate};

pub fn fixture(rel: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn ontologies(dir: &str, prefixes: &[&str]) -> Vec<MicroOntology> {
    prefixes.iter().map(|p| load_ontology(&fixture(&format!("{dir}/{p}.ont"))).unwrap()).collect()
}

pub fn geo() -> SenseInventory {
    partition_senses(&ontologies("geo", &["we", "ee", "eu", "b1", "lg", "og", "ps"])).unwrap()
}

pub fn lrrh() -> (SenseInventory, Vec<ProceduralTemplate>) {
    let inv = partition_senses(&ontologies("lrrh", &["pp", "bd", "fd", "sp", "cr"])).unwrap();
    (inv, parse_templates(&fixture("lrrh/templates.tpl")).unwrap())
}
