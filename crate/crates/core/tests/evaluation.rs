mod common;

use semgrasp::evaluation::{backsolve_count, ingest_survey, round_half_even, EvalError, Provenance};
use semgrasp::pipeline::{run_eval, EvalConfig};

/// `(object, graspit, graspgpt, semgrasp)` rows of the published table.
fn published() -> Vec<(String, f64, f64, f64)> {
    let mut rdr = csv::Reader::from_path(common::fixtures().join("eval/published_scores.csv")).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            let num = |i: usize| r[i].parse::<f64>().unwrap();
            (r[0].to_string(), num(1), num(2), num(3))
        })
        .collect()
}

fn eval_config() -> EvalConfig {
    EvalConfig::load(&common::fixtures().join("configs/survey_eval.toml")).unwrap()
}

#[test]
fn report_reproduces_the_deterministic_column() {
    let report = run_eval(&eval_config()).unwrap();
    let table = published();
    let (rows, avg) = table.split_at(table.len() - 1);
    assert_eq!(report.rows.len(), rows.len());
    for (object, _, _, lan) in rows {
        let sim = report.sim(object, "semgrasp").unwrap();
        assert!((sim - lan).abs() <= 0.005, "{object}: {sim} vs {lan}");
    }
    let mean = report.average("semgrasp").unwrap();
    assert!((mean - avg[0].3).abs() <= 0.005, "{mean}");
    assert_eq!(report.provenance["GraspIt!"], Provenance::Reference);
}

#[test]
fn reference_columns_print_as_published() {
    let report = run_eval(&eval_config()).unwrap();
    for (object, graspit, graspgpt, _) in published() {
        if object == "Average" {
            assert_eq!(round_half_even(report.average("GraspIt!").unwrap(), 2), graspit);
            continue;
        }
        assert!((report.sim(&object, "GraspIt!").unwrap() - graspit).abs() <= 0.005, "{object}");
        let gpt = report.sim(&object, "GraspGPT").unwrap();
        if object == "flowers in the vase" {
            assert!((gpt - 0.718).abs() < 1e-9);
        } else {
            assert!((gpt - graspgpt).abs() <= 0.005, "{object}");
        }
    }
}

#[test]
fn every_cell_but_one_has_a_twenty_grasp_count() {
    let survey = ingest_survey(&common::fixtures().join("eval/survey.csv")).unwrap();
    let mut missing = Vec::new();
    for ((object, graspit, graspgpt, _), record) in published().iter().zip(&survey) {
        assert_eq!(object, &record.object_label);
        for (method, value) in [("GraspIt!", graspit), ("GraspGPT", graspgpt)] {
            if backsolve_count(record.p_a_human, *value, 20, 0.005).is_none() {
                missing.push((object.clone(), method));
            }
        }
    }
    assert_eq!(missing, vec![("flowers in the vase".to_string(), "GraspGPT")]);
}

#[test]
fn report_json_and_text_agree() {
    let report = run_eval(&eval_config()).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    let text = report.to_text().unwrap();
    assert!(text.lines().last().unwrap().ends_with("0.94"));
    assert_eq!(json["rows"].as_array().unwrap().len(), 15);
}

#[test]
fn frequency_without_survey_row_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let extra = dir.path().join("extra.csv");
    std::fs::write(&extra, "object,method,p_a,n_grasps,provenance\nlamp,GraspIt!,0.5,20,reference\n").unwrap();
    let mut cfg = eval_config();
    cfg.frequencies.push(extra);
    let err = run_eval(&cfg).unwrap_err();
    assert!(matches!(err, semgrasp::pipeline::PipelineError::Eval { source: EvalError::MissingSurveyRow(_), .. }));
    assert_eq!(err.exit_code(), semgrasp::pipeline::exit_code::EVALUATION);
}

#[test]
fn surveyed_object_without_frequency_leaves_a_blank_cell() {
    let dir = tempfile::tempdir().unwrap();
    let survey = std::fs::read_to_string(common::fixtures().join("eval/survey.csv")).unwrap();
    std::fs::write(dir.path().join("survey.csv"), format!("{survey}lamp,base,shade,0.9,fraction\n")).unwrap();
    let mut cfg = eval_config();
    cfg.survey = dir.path().join("survey.csv");
    cfg.deterministic.clear();
    let report = run_eval(&cfg).unwrap();
    assert_eq!(report.sim("lamp", "GraspIt!"), None);
    assert!((report.average("GraspIt!").unwrap() - 0.3103).abs() < 1e-3);
}
