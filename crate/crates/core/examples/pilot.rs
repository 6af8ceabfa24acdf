//! Held-out pilot used to pin the unreported knobs of the acceptance configs.
//!
//! ```text
//! cargo run --release --example pilot -- configs/pilot_fig1.toml
//! cargo run --release --example pilot -- configs/pilot_fig2.toml --nonconvex
//! ```
//!
//! Picks gamma from {0.01, 0.1, 1} by mean Alg1-L1 SNR. With `--nonconvex`,
//! then picks MCP `b` from {5, 10, 20, 50} and the low sorted-L1 weight from
//! {0.3, 0.5, 0.7, 0.9} by the mean SNR of the respective method.

use m1bitcsl::config::RunConfig;
use m1bitcsl::harness::{run_sweep, Method, SweepResult};
use m1bitcsl::prox::PenaltyKind;
use m1bitcsl::synth::{ExperimentSpec, SortedL1Weights};

fn mean_snr(r: &SweepResult, m: Method) -> f64 {
    r.cell(r.axis_values[0], m).map_or(f64::NAN, |c| c.snr_db.mean)
}

fn argmax(scores: &[(f64, f64)]) -> f64 {
    scores.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let args: Vec<String> = std::env::args().collect();
    let path = args.get(1).ok_or("usage: pilot <config.toml> [--nonconvex]")?;
    let nonconvex = args.iter().any(|a| a == "--nonconvex");
    let cfg = RunConfig::load(path.as_ref())?;
    let sweep = cfg.sweep.clone().ok_or("pilot config needs a [sweep] table")?;
    let run = |spec: &ExperimentSpec| run_sweep(spec, sweep.axis, &sweep.values[..1]);

    let base = ExperimentSpec { penalties: vec![PenaltyKind::L1], ..cfg.spec.clone() };
    let mut scores = Vec::new();
    for gamma in [0.01, 0.1, 1.0] {
        let mut spec = base.clone();
        spec.solver.gamma = gamma;
        let r = run(&spec)?;
        let l1 = mean_snr(&r, Method::Alg1(PenaltyKind::L1));
        println!("gamma {gamma:<5} LASSO {:6.2} dB  Alg1-L1 {l1:6.2} dB", mean_snr(&r, Method::Lasso));
        scores.push((gamma, l1));
    }
    let gamma = argmax(&scores);
    println!("chosen gamma = {gamma}");
    if !nonconvex {
        return Ok(());
    }

    let mut b_scores = Vec::new();
    let mut w_scores = Vec::new();
    for (b, low) in [(5.0, 0.3), (10.0, 0.5), (20.0, 0.7), (50.0, 0.9)] {
        let mut spec = ExperimentSpec {
            penalties: vec![PenaltyKind::L1, PenaltyKind::Mcp, PenaltyKind::SortedL1],
            mcp_b: b,
            sl1_weights: SortedL1Weights::TwoLevel { high: 1.0, low },
            ..cfg.spec.clone()
        };
        spec.solver.gamma = gamma;
        let r = run(&spec)?;
        let mcp = mean_snr(&r, Method::Alg1(PenaltyKind::Mcp));
        let sl1 = mean_snr(&r, Method::Alg1(PenaltyKind::SortedL1));
        println!(
            "b {b:<4} low {low:<4} Alg1-L1 {:6.2}  Alg1-MCP {mcp:6.2}  Alg1-sL1 {sl1:6.2}",
            mean_snr(&r, Method::Alg1(PenaltyKind::L1))
        );
        b_scores.push((b, mcp));
        w_scores.push((low, sl1));
    }
    println!("chosen mcp_b = {}, sorted-L1 low weight = {}", argmax(&b_scores), argmax(&w_scores));
    Ok(())
}
