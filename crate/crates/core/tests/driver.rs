use ham_eigen::driver::{continuation, iterate, write_csv, ContinuationPlan, ContinuationStage, PassRow, SolveReport, SweepGrid};
use ham_eigen::ham::HamConfig;
use ham_eigen::oscillator::{BasisSpec, WaveVector};
use ham_eigen::{make_context, PrecisionContext};
use proptest::prelude::*;

fn stage(beta: &str, c0: &str, ns: usize, order: usize, passes: usize) -> ContinuationStage {
    ContinuationStage { beta: beta.into(), c0: c0.into(), ns, order, passes }
}

#[test]
fn restarting_a_converged_stage_is_stable() {
    let ctx = make_context(50).unwrap();
    let plan = ContinuationPlan { stages: vec![stage("0.01", "-3/4", 40, 4, 200), stage("0.05", "-1/4", 40, 4, 200)] };
    let out = continuation(&ctx, &plan, 0, 13).unwrap();
    for (s, outcome) in plan.stages.iter().zip(&out.stages) {
        let spec = BasisSpec::new(s.ns, ctx.parse(&s.beta).unwrap()).unwrap();
        let config = HamConfig::new(0, ctx.parse(&s.c0).unwrap(), s.order, spec).unwrap();
        let again = iterate(&ctx, &config, 1, outcome.psi_hat.clone()).unwrap();
        let d = (&again.state.e_hat - &outcome.e_hat).abs();
        assert!(d < ctx.pow10(-12), "beta {}", s.beta);
    }
}

#[test]
fn continuation_agrees_with_direct_restarts() {
    let ctx = make_context(50).unwrap();
    let plan = ContinuationPlan { stages: vec![stage("0.01", "-3/4", 40, 4, 200), stage("0.05", "-1/4", 40, 4, 200)] };
    let out = continuation(&ctx, &plan, 0, 13).unwrap();
    let spec = BasisSpec::new(40, ctx.parse("0.05").unwrap()).unwrap();
    let config = HamConfig::new(0, ctx.ratio(-1, 4), 40, spec).unwrap();
    let direct = iterate(&ctx, &config, 3, WaveVector::unit(&ctx, 41, 0)).unwrap();
    assert!((&direct.state.e_hat - &out.stages[1].e_hat).abs() < ctx.pow10(-12));
}

fn ctx() -> PrecisionContext {
    make_context(30).unwrap()
}

proptest! {
    #[test]
    fn sweep_grid_stays_in_range(start in -40i64..-1, span in 0i64..40, step in 1i64..10) {
        let ctx = ctx();
        let tenth = |k: i64| ctx.ratio(k, 10);
        let end = start + span;
        prop_assume!(end < 0);
        let grid = SweepGrid::new(tenth(start), tenth(end), tenth(step), vec![1]).unwrap();
        let points = grid.points().unwrap();
        prop_assert_eq!(points.len() as i64, span / step + 1);
        prop_assert_eq!(&points[0], &tenth(start));
        for w in points.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        prop_assert!(*points.last().unwrap() <= tenth(end));
    }

    #[test]
    fn csv_rows_survive_a_reader(rows in proptest::collection::vec(("[0-9.e-]{1,12}", "[0-9.e-]{1,12}"), 0..8)) {
        let report = SolveReport {
            command: "iterate".into(),
            passes: rows.iter().enumerate().map(|(i, (e, r))| PassRow { pass: i + 1, e_hat: e.clone(), residual: r.clone() }).collect(),
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_csv(&report, &mut buf).unwrap();
        let mut reader = csv::Reader::from_reader(buf.as_slice());
        prop_assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), vec!["pass", "e_hat", "residual"]);
        let parsed: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        prop_assert_eq!(parsed.len(), rows.len());
        for (rec, (e, r)) in parsed.iter().zip(&rows) {
            prop_assert_eq!(&rec[1], e.as_str());
            prop_assert_eq!(&rec[2], r.as_str());
        }
    }
}
