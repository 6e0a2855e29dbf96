//! Model commands: pressure, equilibrium, anneal, maximize, truncate.

use std::f64::consts::LN_10;

use anyhow::Result;
use rayon::prelude::*;
use serde_json::{json, Value};
use thermoshift::{
    anneal_records, equilibrium_state, maximizing_cycle, rpf_eigendata, MarkovPotential,
    TransferMatrix,
};

use crate::config::Resolved;
use crate::output::{num, Report};

fn log10(log_e: f64) -> f64 {
    log_e / LN_10
}

fn model_json(r: &Resolved, k: usize) -> Value {
    json!({ "name": r.source.name(), "K": k })
}

/// Watched labels, checked against the shift; `default` when unset.
fn watch_labels(r: &Resolved, pot: &MarkovPotential, default: usize) -> Result<Vec<usize>> {
    let shift = pot.shift();
    let labels = match &r.watch {
        Some(w) => w.clone(),
        None => shift.labels().iter().copied().take(default).collect(),
    };
    for &l in &labels {
        shift.index_of_checked(l)?;
    }
    Ok(labels)
}

pub fn pressure(r: &Resolved) -> Result<Report> {
    let (_, pot) = r.source.build(r.k)?;
    let results = r
        .schedule
        .t_values()
        .par_iter()
        .map(|&t| rpf_eigendata(&TransferMatrix::new(&pot, t)?).map(|d| (t, d)))
        .collect::<thermoshift::Result<Vec<_>>>()?;
    let mut rep = Report::new(["t", "P", "iterations", "resid_right", "resid_left"].map(String::from).to_vec());
    let mut items = Vec::new();
    for (t, d) in &results {
        rep.rows.push(vec![
            num(*t),
            num(d.log_pressure),
            d.iterations.to_string(),
            num(d.residual_right),
            num(d.residual_left),
        ]);
        items.push(json!({
            "t": t,
            "P": d.log_pressure,
            "iterations": d.iterations,
            "resid_right": d.residual_right,
            "resid_left": d.residual_left,
        }));
    }
    rep.json = json!({ "model": model_json(r, r.k), "points": items });
    Ok(rep)
}

pub fn equilibrium(r: &Resolved) -> Result<Report> {
    let (shift, pot) = r.source.build(r.k)?;
    let labels = watch_labels(r, &pot, shift.n_states())?;
    let states = r
        .schedule
        .t_values()
        .par_iter()
        .map(|&t| -> thermoshift::Result<_> {
            let m = TransferMatrix::new(&pot, t)?;
            let rpf = rpf_eigendata(&m)?;
            let mu = equilibrium_state(&m, &rpf);
            Ok((t, rpf.log_pressure, mu))
        })
        .collect::<thermoshift::Result<Vec<_>>>()?;
    let mut rep = Report::new(["t", "a", "mu", "log10_mu"].map(String::from).to_vec());
    let mut items = Vec::new();
    for (t, p, mu) in &states {
        let mut masses = Vec::new();
        for &a in &labels {
            let lp = mu.log_pi[shift.index_of(a).expect("checked label")];
            rep.rows.push(vec![num(*t), a.to_string(), num(lp.exp()), num(log10(lp))]);
            masses.push(json!({ "a": a, "mu": lp.exp(), "log10_mu": log10(lp) }));
        }
        let (entropy, mean_phi) = (mu.entropy(), mu.mean_potential(&pot));
        items.push(json!({
            "t": t,
            "P": p,
            "entropy": entropy,
            "mean_phi": mean_phi,
            "resid_vp": (p - entropy - t * mean_phi).abs(),
            "masses": masses,
        }));
    }
    rep.json = json!({ "model": model_json(r, r.k), "points": items });
    Ok(rep)
}

pub fn anneal(r: &Resolved) -> Result<Report> {
    let (_, pot) = r.source.build(r.k)?;
    let watch = watch_labels(r, &pot, 3)?;
    let records = anneal_records(&pot, &r.schedule, &watch)?;
    let mut header: Vec<String> = ["t", "P", "entropy", "mean_phi", "resid_vp"].map(String::from).to_vec();
    header.extend(watch.iter().map(|a| format!("mu_{a}")));
    header.extend(watch.iter().map(|a| format!("log10_mu_{a}")));
    if let Some(first) = records.first() {
        header.extend(first.ratios.iter().map(|((a, b), _)| format!("ratio_{a}_{b}")));
    }
    let mut rep = Report::new(header);
    for rec in &records {
        if rec.resid_vp > 1e-9 {
            log::warn!("t = {}: metric-pressure residual {:e} exceeds 1e-9", rec.t, rec.resid_vp);
        }
        let mut row = vec![num(rec.t), num(rec.log_pressure), num(rec.entropy), num(rec.mean_phi), num(rec.resid_vp)];
        row.extend(rec.watched.iter().map(|(_, lm)| num(lm.exp())));
        row.extend(rec.watched.iter().map(|(_, lm)| num(log10(*lm))));
        row.extend(rec.ratios.iter().map(|(_, q)| num(*q)));
        rep.rows.push(row);
    }
    rep.json = json!({ "model": model_json(r, r.k), "watch": watch, "records": records });
    Ok(rep)
}

pub fn maximize(r: &Resolved) -> Result<Report> {
    let (shift, pot) = r.source.build(r.k)?;
    let best = maximizing_cycle(&pot)?;
    let orbit: Vec<usize> = best.orbit().iter().map(|&s| shift.label(s)).collect();
    let cycle = orbit.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
    let mut rep = Report::new(["alpha", "cycle", "period"].map(String::from).to_vec());
    rep.rows.push(vec![num(best.mean), cycle, orbit.len().to_string()]);
    let measure: Vec<Value> = best
        .measure
        .iter()
        .map(|&(s, f)| json!({ "a": shift.label(s), "mass": f }))
        .collect();
    rep.json = json!({
        "model": model_json(r, r.k),
        "alpha": best.mean,
        "cycle": orbit,
        "measure": measure,
    });
    Ok(rep)
}

pub fn truncate(r: &Resolved) -> Result<Report> {
    let k_list = r.k_list.clone().unwrap_or_else(|| (2..=r.k).collect());
    let grid: Vec<(f64, usize)> = r
        .schedule
        .t_values()
        .iter()
        .flat_map(|&t| k_list.iter().map(move |&k| (t, k)))
        .collect();
    let pressures = grid
        .par_iter()
        .map(|&(t, k)| -> Result<f64> {
            let (_, pot) = r.source.build(k)?;
            Ok(rpf_eigendata(&TransferMatrix::new(&pot, t)?)?.log_pressure)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rep = Report::new(["t", "K", "P", "increment"].map(String::from).to_vec());
    let mut items = Vec::new();
    for (i, (&(t, k), &p)) in grid.iter().zip(&pressures).enumerate() {
        let prev = (i > 0 && grid[i - 1].0 == t).then(|| pressures[i - 1]);
        let inc = prev.map(|q| p - q);
        rep.rows.push(vec![num(t), k.to_string(), num(p), inc.map(num).unwrap_or_default()]);
        items.push(json!({ "t": t, "K": k, "P": p, "increment": inc }));
    }
    let family = r.source.family()?;
    rep.json = json!({ "model": r.source.name(), "family": family.name(), "points": items });
    Ok(rep)
}
