mod common;

use semgrasp::evaluation::{empirical_frequency, similarity_score};
use semgrasp::geometry::Bvh;
use semgrasp::language::{LlmConfig, MockLanguageModel, MockServer, MockVisionModel, VlmConfig};
use semgrasp::pipeline::{
    compute_pipeline, exit_code, run_partition, run_pipeline, GRASPS_FILE, OVERLAY_FILE, PARTITION_FILE,
};
use semgrasp::planner::GraspSetDocument;
use semgrasp::projection::{partition_mesh, CameraModel, FaceLabel, Visibility};
use semgrasp::Mode;

/// Share of graspable faces whose sidecar part name is `part`.
fn share_of(name: &str, labels: &[FaceLabel], part: &str) -> f64 {
    let names = common::part_names(name);
    let graspable: Vec<&String> =
        labels.iter().zip(&names).filter(|(l, _)| **l == FaceLabel::Graspable).map(|(_, n)| n).collect();
    graspable.iter().filter(|n| n.as_str() == part).count() as f64 / graspable.len() as f64
}

#[test]
fn mug_plan_targets_the_handle() {
    let result = compute_pipeline(&common::config("mug")).unwrap();
    assert_eq!(result.part_answer.part_label, "handle");
    assert_eq!(result.grasps.len(), 20);
    assert!(share_of("mug", result.partition.labels(), "handle") > 0.99);
    let names = common::part_names("mug");
    for g in result.grasps.grasps() {
        for f in g.contact_faces() {
            assert_eq!(names[f], "handle");
        }
    }
}

#[test]
fn ice_cream_plan_targets_the_cone() {
    let result = compute_pipeline(&common::config("ice_cream")).unwrap();
    assert_eq!(result.part_answer.part_label, "cone");
    let names = common::part_names("ice_cream");
    for g in result.grasps.grasps() {
        assert!(g.contact_faces().iter().all(|&f| names[f] == "cone"));
    }
}

#[test]
fn run_writes_outputs_that_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = common::config("cupcake");
    cfg.output_dir = Some(dir.path().to_path_buf());
    let result = run_pipeline(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join(GRASPS_FILE)).unwrap();
    let doc = GraspSetDocument::from_json(&text).unwrap();
    assert_eq!(doc.header.fixture_id, "cupcake");
    assert_eq!(doc.to_json(), text);
    assert_eq!(doc.grasps.len(), result.grasps.len());
    let labels = std::fs::read_to_string(dir.path().join(PARTITION_FILE)).unwrap();
    assert_eq!(labels.lines().count(), common::mesh("cupcake").face_count());
    let overlay = image::open(dir.path().join(OVERLAY_FILE)).unwrap();
    assert_eq!((overlay.width(), overlay.height()), (640, 480));
}

#[test]
fn identical_runs_give_identical_documents() {
    let cfg = common::config("plant");
    let a = compute_pipeline(&cfg).unwrap().grasps.to_json("plant", &cfg.gripper);
    let b = compute_pipeline(&cfg).unwrap().grasps.to_json("plant", &cfg.gripper);
    assert_eq!(a, b);
}

#[test]
fn missing_mesh_fails_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = common::config("mug");
    cfg.mesh = "../meshes/nope.obj".into();
    cfg.output_dir = Some(dir.path().join("out"));
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), exit_code::CONFIG);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_object_reports_malformed_answer() {
    let mut cfg = common::config("mug");
    cfg.object_label = "spaceship".into();
    let err = compute_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), exit_code::MALFORMED_RESPONSE);
}

#[test]
fn avoid_partition_complements_grasp_partition() {
    for name in common::SCENES {
        let cfg = common::config(name);
        let (bx, _) = run_partition(&cfg).unwrap();
        let mesh = common::mesh(name);
        let bvh = Bvh::build(&mesh);
        let camera = CameraModel::load(&cfg.camera_path()).unwrap();
        for vis in [Visibility::Silhouette, Visibility::DepthBand { delta: 0.02 }] {
            let g = partition_mesh(&mesh, &bvh, &camera, &bx, Mode::Grasp, vis).unwrap();
            let a = partition_mesh(&mesh, &bvh, &camera, &bx, Mode::Avoid, vis).unwrap();
            for f in 0..mesh.face_count() {
                assert_ne!(g.labels()[f], a.labels()[f], "{name} face {f}");
                assert_eq!(g.in_region_a(f), a.in_region_a(f));
            }
        }
    }
}

#[test]
fn teapot_avoid_grasps_never_touch_the_spout() {
    let cfg = common::config("teapot");
    assert_eq!(cfg.mode, Mode::Avoid);
    let result = compute_pipeline(&cfg).unwrap();
    assert_eq!(result.part_answer.part_label, "spout");
    let names = common::part_names("teapot");
    assert!(!result.grasps.is_empty());
    for g in result.grasps.grasps() {
        for f in g.contact_faces() {
            assert_eq!(result.partition.labels()[f], FaceLabel::Graspable);
            assert_ne!(names[f], "spout");
        }
    }
}

#[test]
fn doll_baseline_fixture_scores_like_the_table() {
    let cfg = common::config("doll");
    let (_, partition) = run_partition(&cfg).unwrap();
    let text = std::fs::read_to_string(common::fixtures().join("grasps/doll_baseline.json")).unwrap();
    let grasps = GraspSetDocument::from_json(&text).unwrap().to_grasp_set().unwrap();
    let freq = empirical_frequency(&grasps, &partition, "doll", "GraspIt!").unwrap();
    assert_eq!(freq.n_grasps, 20);
    assert!((freq.p_a_method - 0.2).abs() < 1e-12);
    let sim = similarity_score(0.921, freq.p_a_method).unwrap();
    assert!((sim - 0.279).abs() < 1e-9);
}

#[test]
fn http_backends_match_mock_backends() {
    let fixtures = common::fixtures();
    let llm = MockLanguageModel::load(&fixtures.join("llm_parts.csv")).unwrap();
    let vlm = MockVisionModel::load(&fixtures.join("vlm_boxes.csv")).unwrap();
    let server = MockServer::start("127.0.0.1:0", llm, vlm).unwrap();

    let local = common::config("mug");
    let mut remote = local.clone();
    remote.backend.llm = LlmConfig::Http { endpoint: server.chat_url(), model: "gpt-4".into(), token_env: None };
    remote.backend.vlm = VlmConfig::Http { endpoint: server.detect_url(), token_env: None };
    let a = compute_pipeline(&local).unwrap();
    let b = compute_pipeline(&remote).unwrap();
    assert_eq!(a.part_answer, b.part_answer);
    assert_eq!(a.bounding_box, b.bounding_box);
    assert_eq!(a.grasps.to_json("mug", &local.gripper), b.grasps.to_json("mug", &remote.gripper));
}

#[test]
fn unreachable_backend_is_reported() {
    let mut cfg = common::config("mug");
    cfg.backend.llm = LlmConfig::Http { endpoint: "http://127.0.0.1:9/chat".into(), model: "gpt-4".into(), token_env: None };
    cfg.backend.retries = 0;
    cfg.backend.timeout_secs = 1.0;
    let err = compute_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), exit_code::BACKEND_UNAVAILABLE);
}
