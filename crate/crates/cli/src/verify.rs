//! Built-in verification suites.

use anyhow::Result;
use clap::ValueEnum;
use rayon::prelude::*;
use serde_json::json;
use thermoshift::random::{random_case, rng};
use thermoshift::renewal::{
    ones_word_mass, periodic_point_excess, verify_exact_x0_minus_x1, verify_loop_comparison,
    verify_mass_bound, verify_nu_recursion,
};
use thermoshift::{
    anneal_records, build_example, check_monotonicity, detect_limit, enumerate_cycles,
    equilibrium_state, max_ergodic_average, rpf_eigendata, AnnealSchedule, FiniteShift,
    MainPathWeights, MarkovPotential, RenewalExample, TransferMatrix,
};

use crate::output::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Closed forms and bounds of the two renewal models.
    PaperExamples,
    /// Taboo-sum ratio identities on seeded random shifts.
    RatioIdentities,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::PaperExamples => "paper-examples",
            Suite::RatioIdentities => "ratio-identities",
        }
    }
}

/// One verified statement.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

pub fn run(suite: Suite, seed: u64) -> Result<Vec<Check>> {
    match suite {
        Suite::PaperExamples => renewal_checks(),
        Suite::RatioIdentities => ratio_checks(seed),
    }
}

pub fn report(suite: Suite, seed: u64, checks: &[Check]) -> Report {
    let mut rep = Report::new(["suite", "check", "status", "detail"].map(String::from).to_vec());
    for c in checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        rep.rows.push(vec![suite.name().into(), c.name.clone(), status.into(), c.detail.clone()]);
    }
    let items: Vec<_> = checks
        .iter()
        .map(|c| json!({ "check": c.name, "pass": c.pass, "detail": c.detail }))
        .collect();
    let passed = checks.iter().filter(|c| c.pass).count();
    rep.json = json!({
        "suite": suite.name(),
        "seed": seed,
        "passed": passed,
        "total": checks.len(),
        "checks": items,
    });
    rep
}

fn renewal_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for t in [1.0, 2.0, 4.0, 7.0] {
        let rep = verify_exact_x0_minus_x1(RenewalExample::X0MinusX1, t, 25)?;
        out.push(check(
            format!("x0_minus_x1 K=25 t={t}: closed forms"),
            rep.passes,
            format!(
                "P err {:.1e}, mass err {:.1e}, entropy err {:.1e}, t-drift {:.1e}",
                rep.pressure_error, rep.max_mass_error, rep.entropy_error, rep.t_independence_error
            ),
        ));
    }
    let schedule = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    for t in schedule {
        let rep = verify_mass_bound(RenewalExample::NegX0, t, 12)?;
        let rows: Vec<_> = rep.rows.iter().filter(|r| r.a <= 9).collect();
        let worst = rows.iter().min_by(|x, y| x.margin.total_cmp(&y.margin)).expect("rows for a = 2..9");
        out.push(check(
            format!("neg_x0 K=12 t={t}: mu[a] <= exp(-(a+2)(a-1)t), a=2..9"),
            rows.iter().all(|r| r.margin >= 0.0),
            format!("worst a={}: log mu {:.3}, log bound {:.1}", worst.a, worst.log_mass, worst.log_bound),
        ));
    }
    let (_, pot, model) = build_example(RenewalExample::NegX0, 12)?;
    let worst = (1..=5).map(|m| ones_word_mass(&pot, 32.0, m)).collect::<thermoshift::Result<Vec<_>>>()?;
    let worst = worst.into_iter().fold(1.0, f64::min);
    out.push(check(
        "neg_x0 K=12 t=32: mu[1^m] >= 1 - 1e-6, m<=5",
        worst >= 1.0 - 1e-6,
        format!("min 1 - {:.2e}", 1.0 - worst),
    ));
    let alpha = max_ergodic_average(&pot)?;
    let recs = anneal_records(&pot, &AnnealSchedule::new(schedule.to_vec())?, &[1, 2, 3])?;
    let (pass, detail) = match detect_limit(&recs, 1e-6, alpha) {
        Ok(lim) => (lim.is_maximizing && alpha == model.exact.alpha, format!("alpha {alpha}, mu[1] {:.9}", lim.masses[0].1)),
        Err(e) => (false, e.to_string()),
    };
    out.push(check("neg_x0 K=12: limit is the maximizing measure", pass, detail));

    let monotone = [
        (RenewalExample::NegX0, 12, vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]),
        (RenewalExample::X0MinusX1, 25, vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1000.0]),
    ];
    for (which, k, ts) in monotone {
        let (_, pot, _) = build_example(which, k)?;
        let alpha = max_ergodic_average(&pot)?;
        let recs = anneal_records(&pot.normalize(alpha), &AnnealSchedule::new(ts)?, &[1])?;
        let rep = check_monotonicity(&recs, 0.0, true)?;
        out.push(check(
            format!("{} K={k}: monotonicity laws (normalized)", which.name()),
            rep.passes() && rep.final_slope_gap().abs() <= 1e-3,
            format!("final P/t - alpha {:.2e}, violations {}", rep.final_slope_gap(), rep.violations.len()),
        ));
    }
    for which in [RenewalExample::NegX0, RenewalExample::X0MinusX1] {
        let (_, pot, _) = build_example(which, 25)?;
        for t in [1.0, 2.0, 4.0] {
            let ex = periodic_point_excess(&pot, t, 40)?;
            out.push(check(
                format!("{} K=25 t={t}: Z_n <= exp(nP), n<=40", which.name()),
                ex <= 1e-10,
                format!("max log Z_n - nP = {ex:.2e}"),
            ));
        }
    }
    for t in [1.0, 4.0] {
        let rep = verify_nu_recursion(RenewalExample::NegX0, t, 15)?;
        out.push(check(
            format!("neg_x0 K=15 t={t}: conformal recursion"),
            rep.max_residual <= 1e-8,
            format!("max residual {:.1e}", rep.max_residual),
        ));
    }
    for t in [1.0, 2.0] {
        let rep = verify_loop_comparison(t, 30, 20, 5)?;
        let failing = rep.rows.iter().filter(|r| !r.holds_stated()).count();
        out.push(check(
            format!("neg_x0 K=30 t={t}: preimage sum <= exp(-(a-1)(a+2)t/2) Z_(n+a-1), n<=20, a<=5"),
            rep.stated_holds,
            format!("{failing}/{} rows fail; positive exponent holds: {}", rep.rows.len(), rep.corrected_holds),
        ));
    }
    Ok(out)
}

const RATIO_CASES: usize = 50;

fn ratio_case(idx: usize, shift: &FiniteShift, pot: &MarkovPotential) -> Result<Check> {
    let (mut ratio, mut dec, mut lp) = (0.0f64, 0.0f64, 0.0f64);
    let cycles = enumerate_cycles(shift, 8);
    let n = shift.n_states();
    for t in [1.0, 2.0, 5.0] {
        let m = TransferMatrix::new(pot, t)?;
        let rpf = rpf_eigendata(&m)?;
        let mu = equilibrium_state(&m, &rpf);
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a) {
                let w = MainPathWeights::new(&m, rpf.log_pressure, a, b)?;
                let direct = mu.mass_ratio(a, b);
                ratio = ratio.max((w.mu_ratio() - direct).abs() / direct);
                dec = dec.max(w.return_decomposition_residual());
            }
        }
        for c in &cycles {
            lp = lp.max(mu.loop_identity_residual(c, &m)?);
        }
    }
    Ok(check(
        format!("case {idx} ({n} states, {} loops)", cycles.len()),
        ratio <= 1e-9 && dec <= 1e-9 && lp <= 1e-10,
        format!("ratio err {ratio:.1e}, decomposition {dec:.1e}, loop {lp:.1e}"),
    ))
}

fn ratio_checks(seed: u64) -> Result<Vec<Check>> {
    let mut r = rng(seed);
    let cases: Vec<_> = (0..RATIO_CASES).map(|_| random_case(&mut r, 6)).collect();
    cases
        .par_iter()
        .enumerate()
        .map(|(i, (s, p))| ratio_case(i, s, p))
        .collect()
}
