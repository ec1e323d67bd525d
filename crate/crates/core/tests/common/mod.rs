#![allow(dead_code)]

pub mod oracles;

use std::path::PathBuf;

use semgrasp::geometry::{load_mesh, MeshFormat, TriMesh};
use semgrasp::pipeline::PipelineConfig;

pub const SCENES: [&str; 6] = ["mug", "ice_cream", "doll", "plant", "cupcake", "teapot"];

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn config(name: &str) -> PipelineConfig {
    PipelineConfig::load(&fixtures().join("configs").join(format!("{name}.toml"))).unwrap()
}

pub fn mesh(name: &str) -> TriMesh {
    load_mesh(&fixtures().join("meshes").join(format!("{name}.obj")), MeshFormat::Obj).unwrap()
}

/// Part name of every face, from the generator's sidecar file.
pub fn part_names(name: &str) -> Vec<String> {
    std::fs::read_to_string(fixtures().join("meshes").join(format!("{name}.parts.txt")))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}
