use pathlen::harness::{
    emit_record, emit_sweep, run, sweep, to_json_string, write_record_csv, ExperimentConfig,
    LearnerConfig, LearnerKind, OutputFormat, StreamConfig, StreamName,
};
use pathlen::{path_lengths, RunRecord};
use serde_json::json;

fn config(kind: LearnerKind, stream: StreamConfig) -> ExperimentConfig {
    ExperimentConfig::new(LearnerConfig::new(kind), stream)
}

fn piecewise(k: usize, t: usize, switches: usize) -> StreamConfig {
    let mut s = StreamConfig::new(StreamName::Piecewise, t);
    s.num_arms = Some(k);
    s.num_switches = Some(switches);
    s
}

fn constant(loss: Vec<f64>, t: usize) -> StreamConfig {
    let mut s = StreamConfig::new(StreamName::Constant, t);
    s.loss = Some(loss);
    s
}

#[test]
fn zero_losses_have_zero_regret() {
    for kind in [LearnerKind::Alg1, LearnerKind::WeiLuo, LearnerKind::Exp3] {
        let r = run(&config(kind, constant(vec![0.0; 4], 200)), 1).unwrap();
        assert_eq!(r.summary.regret, 0.0);
        assert_eq!(r.summary.expected_regret, 0.0);
        assert_eq!(r.summary.variance_sum, 0.0);
    }
}

#[test]
fn equal_losses_have_zero_regret() {
    let mut c = config(LearnerKind::Alg2, constant(vec![0.3; 3], 300));
    c.learner.beta = Some(0.1);
    let r = run(&c, 2).unwrap();
    assert!(r.summary.regret.abs() < 1e-9);
    // Only the first round moves the loss vector.
    assert!((r.summary.path_lengths.v1 - 0.9).abs() < 1e-15);
    assert!((r.summary.path_lengths.vinf - 0.3).abs() < 1e-15);
}

#[test]
fn linear_comparators() {
    let mut s = StreamConfig::new(StreamName::LinearConstant, 100);
    s.loss = Some(vec![0.0, 0.0, 0.0]);
    let r = run(&config(LearnerKind::Scribble, s.clone()), 0).unwrap();
    assert_eq!(r.summary.comparator_loss, 0.0);

    s.loss = Some(vec![0.3, 0.0, -0.4]);
    let r = run(&config(LearnerKind::Scribble, s), 0).unwrap();
    assert!((r.summary.comparator_loss + 50.0).abs() < 1e-9);
}

#[test]
fn json_round_trip_is_exact() {
    let mut c = config(LearnerKind::Alg1, piecewise(5, 300, 4));
    c.learner.path_length_estimate = Some(3.0);
    let r = run(&c, 11).unwrap();
    let text = to_json_string(&r).unwrap();
    let back: RunRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(back.summary, r.summary);
    assert_eq!(back.rows, r.rows);
    assert_eq!(back.meta, r.meta);

    let mut s = StreamConfig::new(StreamName::LinearDrift, 200);
    s.dim = Some(3);
    s.step_size = Some(0.01);
    let r = run(&config(LearnerKind::Scribble, s), 4).unwrap();
    let back: RunRecord = serde_json::from_str(&to_json_string(&r).unwrap()).unwrap();
    assert_eq!(back.summary, r.summary);
    assert_eq!(back.rows, r.rows);
}

#[test]
fn summary_recomputes_from_rows() {
    let r = run(&config(LearnerKind::WeiLuo, piecewise(4, 500, 6)), 3).unwrap();
    let losses: Vec<Vec<f64>> = r.rows.iter().map(|row| row.loss_vector.clone().unwrap()).collect();
    assert_eq!(path_lengths(&losses), r.summary.path_lengths);

    let learner: f64 = r.rows.iter().map(|row| row.loss).sum();
    let best = (0..4)
        .map(|i| losses.iter().map(|l| l[i]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    assert!((r.summary.regret - (learner - best)).abs() < 1e-9);
    let expected: f64 = r.rows.iter().map(|row| row.expected_loss).sum();
    assert!((r.summary.expected_regret - (expected - best)).abs() < 1e-9);
    for row in &r.rows {
        let pathlen::harness::Action::Arm(arm) = row.action else { panic!("bandit action") };
        assert_eq!(row.loss, row.loss_vector.as_ref().unwrap()[arm]);
    }
}

#[test]
fn same_seed_same_record() {
    let c = config(LearnerKind::Alg1, piecewise(6, 400, 3));
    let a = to_json_string(&run(&c, 8).unwrap()).unwrap();
    let b = to_json_string(&run(&c, 8).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, to_json_string(&run(&c, 9).unwrap()).unwrap());
}

#[test]
fn csv_output_shapes() {
    let r = run(&config(LearnerKind::Exp3, piecewise(3, 40, 1)), 0).unwrap();
    let mut buf = Vec::new();
    emit_record(&r, OutputFormat::Csv, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 41);

    let mut empty = r.clone();
    empty.rows.clear();
    let mut buf = Vec::new();
    write_record_csv(&empty, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("t,action,loss"));
}

#[test]
fn one_cell_one_seed_sweep_matches_run() {
    let mut c = config(LearnerKind::Alg1, piecewise(4, 300, 2));
    c.seeds = vec![5];
    let table = sweep(&c).unwrap();
    assert_eq!(table.cells.len(), 1);
    let cell = &table.cells[0];
    let r = run(&c, 5).unwrap();
    assert_eq!(cell.mean_regret, Some(r.summary.regret));
    assert_eq!(cell.mean_vinf, Some(r.summary.path_lengths.vinf));
    assert_eq!(cell.stderr_regret, None);
}

#[test]
fn two_seed_sweep_has_standard_error() {
    let mut c = config(LearnerKind::WeiLuo, piecewise(4, 300, 2));
    c.seeds = vec![1, 2];
    let cell = sweep(&c).unwrap().cells.remove(0);
    let a = run(&c, 1).unwrap().summary.regret;
    let b = run(&c, 2).unwrap().summary.regret;
    // With two samples the standard error of the mean is |a − b| / 2.
    assert!((cell.stderr_regret.unwrap() - (a - b).abs() / 2.0).abs() < 1e-9);
    assert!((cell.mean_regret.unwrap() - (a + b) / 2.0).abs() < 1e-9);
}

#[test]
fn sweep_records_failures_and_continues() {
    let mut c = config(LearnerKind::Alg1, piecewise(4, 100, 2));
    c.seeds = vec![0, 1];
    c.grid.insert("learner.eta".into(), vec![json!(0.001), json!(0.002)]);
    let table = sweep(&c).unwrap();
    assert_eq!(table.cells.len(), 2);
    assert!(table.cells.iter().all(|cell| cell.completed == 2 && cell.failures.is_empty()));
    let mut out = Vec::new();
    emit_sweep(&c, &table, OutputFormat::Csv, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 3);

    // An invalid value in the grid is rejected up front.
    c.grid.insert("learner.eta".into(), vec![json!(0.5)]);
    assert!(sweep(&c).is_err());
}

#[test]
fn lower_bound_regret_grows_with_gamma() {
    let mut s = StreamConfig::new(StreamName::AdaptiveLowerbound, 4000);
    s.num_arms = Some(4);
    s.gamma = Some(0.1);
    let mut c = config(LearnerKind::Alg1, s);
    c.seeds = (0..20).collect();
    c.grid.insert("stream.gamma".into(), vec![json!(0.1), json!(0.3), json!(1.0)]);
    let table = sweep(&c).unwrap();
    let regrets: Vec<f64> = table.cells.iter().map(|c| c.mean_regret.unwrap()).collect();
    assert!(regrets.windows(2).all(|p| p[1] > p[0]), "{regrets:?}");
}

#[test]
fn config_validation() {
    let bad = json!({"learner": {"kind": "alg1", "eta": 0.1}, "stream": {"kind": "piecewise", "horizon": 10, "num_arms": 2}});
    assert_eq!(ExperimentConfig::from_value(bad).unwrap_err().kind(), "config");
    let mismatch = json!({"learner": {"kind": "scribble"}, "stream": {"kind": "piecewise", "horizon": 10, "num_arms": 2}});
    assert!(ExperimentConfig::from_value(mismatch).is_err());
    let no_beta = json!({"learner": {"kind": "alg2"}, "stream": {"kind": "iid_uniform", "horizon": 10, "num_arms": 2}});
    assert!(ExperimentConfig::from_value(no_beta).is_err());
    let typo = json!({"learner": {"kind": "exp3", "lr_": 0.1}, "stream": {"kind": "iid_uniform", "horizon": 10, "num_arms": 2}});
    assert!(ExperimentConfig::from_value(typo).is_err());
}
