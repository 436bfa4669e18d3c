//! Builds each subcommand's complete output in memory. Probabilities are
//! printed with 17 significant digits so files round-trip losslessly;
//! error probabilities use the extended-exponent form because deep trees
//! push them far below f64 range.

use relaytree::ext::sig17;
use relaytree::{
    b_upper_boundary, bounds_report, bounds_report_with_c, check_step_ratios, estimate_c, evolve,
    exact_levels, monte_carlo_detailed, ols_slope, required_sensors, ru_upper_boundary,
    weighted_error, FailureSchedule,
};

use crate::{CliError, TreeArgs};

fn version_line() -> String {
    format!("# relaytree v{}\n", env!("CARGO_PKG_VERSION"))
}

fn csv_start(cols: &[&str]) -> String {
    let mut s = version_line();
    s.push_str(&cols.join(","));
    s.push('\n');
    s
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(sig17).unwrap_or_default()
}

fn opt_bool(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

pub fn evolve_csv(tree: &TreeArgs) -> Result<String, CliError> {
    let height = tree.resolve_height()?;
    let traj = evolve(tree.alpha0, tree.beta0, &tree.schedule, height)?;
    let mut out = csv_start(&["k", "alpha", "beta", "q", "l", "half_l", "starvation", "region"]);
    for rec in &traj.levels {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            rec.k,
            rec.triplet.alpha.sci17(),
            rec.triplet.beta.sci17(),
            sig17(rec.triplet.q),
            rec.l.sci17(),
            rec.half_l.sci17(),
            sig17(rec.starvation),
            rec.region.as_str(),
        ));
    }
    Ok(out)
}

pub fn bounds_kv(tree: &TreeArgs, prior0: f64, c: Option<f64>) -> Result<String, CliError> {
    let height = tree.resolve_height()?;
    let traj = evolve(tree.alpha0, tree.beta0, &tree.schedule, height)?;
    let rep = match c {
        Some(c) => bounds_report_with_c(&traj, prior0, c)?,
        None => bounds_report(&traj, prior0)?,
    };
    let mut out = version_line();
    let mut kv = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
    kv("n_sensors", rep.n_sensors.to_string());
    kv("height", rep.height.to_string());
    kv("parity", rep.parity.to_string());
    kv("c_constant", sig17(rep.c_constant));
    kv("prior0", sig17(rep.prior0));
    kv("prior1", sig17(rep.prior1));
    kv("l0", sig17(rep.l0));
    kv("lower_bits", sig17(rep.lower_bits));
    kv("upper_bits", sig17(rep.upper_bits));
    kv("vacuous", rep.vacuous.to_string());
    kv("l_lower_bits", sig17(rep.l_lower_bits));
    kv("l_upper_bits", sig17(rep.l_upper_bits));
    kv("l_vacuous", rep.l_vacuous.to_string());
    kv("measured_l_bits", sig17(rep.measured_l_bits));
    kv("measured_weighted_bits", sig17(rep.measured_weighted_bits));
    Ok(out)
}

pub fn simulate_csv(
    tree: &TreeArgs,
    trials: u64,
    seed: u64,
    prior0: f64,
) -> Result<String, CliError> {
    let height = tree.resolve_height()?;
    let detail =
        monte_carlo_detailed(tree.alpha0, tree.beta0, &tree.schedule, height, trials, seed, prior0)?;
    let traj = evolve(tree.alpha0, tree.beta0, &tree.schedule, height)?;
    let root = traj.root();
    let rec_weighted = weighted_error(&root.triplet, prior0)?;
    let est = &detail.estimate;
    let mut out = csv_start(&[
        "trials",
        "seed",
        "prior0",
        "data_trials",
        "est_type_i",
        "rec_type_i",
        "est_type_ii",
        "rec_type_ii",
        "est_starvation",
        "rec_starvation",
        "half_width_95",
        "unconditional_weighted",
        "rec_weighted",
    ]);
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        est.trials,
        est.seed,
        sig17(prior0),
        detail.data_trials,
        sig17(est.est_type_i),
        root.triplet.alpha.sci17(),
        sig17(est.est_type_ii),
        root.triplet.beta.sci17(),
        sig17(est.est_starvation),
        sig17(root.starvation),
        sig17(est.half_width_95),
        sig17(detail.unconditional_weighted),
        rec_weighted.sci17(),
    ));
    Ok(out)
}

pub fn oracle_csv(tree: &TreeArgs) -> Result<String, CliError> {
    let height = tree.resolve_height()?;
    let levels = exact_levels(tree.alpha0, tree.beta0, &tree.schedule, height)?;
    let traj = evolve(tree.alpha0, tree.beta0, &tree.schedule, height)?;
    let mut out = csv_start(&[
        "k",
        "atoms",
        "oracle_alpha",
        "rec_alpha",
        "alpha_residual",
        "oracle_beta",
        "rec_beta",
        "beta_residual",
        "oracle_silence",
        "rec_q",
        "silence_residual",
    ]);
    for (lvl, rec) in levels.iter().zip(&traj.levels) {
        let (oa, ob) = lvl.dist.mean();
        let (ra, rb) = (rec.triplet.alpha_f64(), rec.triplet.beta_f64());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            lvl.height,
            lvl.dist.atoms.len(),
            sig17(oa),
            sig17(ra),
            sig17(oa - ra),
            sig17(ob),
            sig17(rb),
            sig17(ob - rb),
            sig17(lvl.silence),
            sig17(rec.triplet.q),
            sig17(lvl.silence - rec.triplet.q),
        ));
    }
    Ok(out)
}

pub fn regions_csv(qs: &[f64], alpha_step: f64) -> Result<String, CliError> {
    if !(alpha_step > 0.0 && alpha_step < 0.5) {
        return Err(CliError::Config(format!(
            "--alpha-step must lie in (0, 0.5), got {alpha_step}"
        )));
    }
    let mut out = csv_start(&["q", "alpha", "b_upper", "ru_upper"]);
    for &q in qs {
        let mut i = 0u64;
        loop {
            let alpha = i as f64 * alpha_step;
            if alpha >= 0.5 {
                break;
            }
            out.push_str(&format!(
                "{},{},{},{}\n",
                sig17(q),
                sig17(alpha),
                sig17(b_upper_boundary(alpha, q)?),
                sig17(ru_upper_boundary(alpha, q)?),
            ));
            i += 1;
        }
    }
    Ok(out)
}

pub fn ratios_csv(tree: &TreeArgs, c: Option<f64>) -> Result<String, CliError> {
    let height = tree.resolve_height()?;
    let traj = evolve(tree.alpha0, tree.beta0, &tree.schedule, height)?;
    let c = match c {
        Some(c) => c,
        None => estimate_c(&traj.levels)?,
    };
    let report = check_step_ratios(&traj, c);
    let mut out = csv_start(&[
        "k",
        "l",
        "one_step_ratio",
        "contraction_ok",
        "above_square_ok",
        "two_step_ratio",
        "two_step_in_range",
        "smaller_q_ok",
        "c_constant",
    ]);
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.k,
            row.l.sci17(),
            opt_f64(row.one_step_ratio),
            opt_bool(row.contraction_ok),
            opt_bool(row.above_square_ok),
            opt_f64(row.two_step_ratio),
            opt_bool(row.two_step_in_range),
            opt_bool(row.smaller_q_ok),
            sig17(report.c_constant),
        ));
    }
    Ok(out)
}

pub fn scaling_csv(
    alpha0: f64,
    beta0: f64,
    p0: f64,
    prior0: f64,
    max_height: usize,
    window_lo: usize,
    window_hi: usize,
) -> Result<String, CliError> {
    if max_height < 1 {
        return Err(CliError::Config("--max-height must be at least 1".into()));
    }
    if window_lo >= window_hi {
        return Err(CliError::Config(format!(
            "slope window is empty: [{window_lo}, {window_hi}]"
        )));
    }
    let profiles: [(&str, FailureSchedule); 3] = [
        ("none", FailureSchedule::constant(0.0)?),
        ("quadratic", FailureSchedule::quadratic(p0)?),
        ("constant", FailureSchedule::constant(p0)?),
    ];
    let mut out = csv_start(&[
        "profile",
        "height",
        "log2_n",
        "log2_weighted_inv",
        "log2_log2_weighted_inv",
        "window_lo",
        "window_hi",
        "slope",
    ]);
    for (name, sched) in &profiles {
        let traj = evolve(alpha0, beta0, sched, max_height)?;
        // One trajectory serves every height: level k is the root of the
        // height-k tree over the same schedule prefix.
        let curve: Vec<(usize, f64, f64)> = (1..=max_height)
            .map(|h| {
                let w = weighted_error(&traj.levels[h].triplet, prior0)?;
                let bits = -w.log2();
                Ok((h, bits, bits.log2()))
            })
            .collect::<Result<_, CliError>>()?;
        let window: Vec<(f64, f64)> = curve
            .iter()
            .filter(|(h, _, _)| (window_lo..=window_hi).contains(h))
            .map(|&(h, _, loglog)| (h as f64, loglog))
            .collect();
        let slope = ols_slope(&window).unwrap_or(f64::NAN);
        for (h, bits, loglog) in curve {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                name,
                h,
                h,
                sig17(bits),
                sig17(loglog),
                window_lo,
                window_hi,
                sig17(slope),
            ));
        }
    }
    Ok(out)
}

pub fn size_kv(epsilon: f64, l0: f64, c: f64) -> Result<String, CliError> {
    let n = required_sensors(epsilon, l0, c)?;
    let mut out = version_line();
    out.push_str(&format!("epsilon = {}\n", sig17(epsilon)));
    out.push_str(&format!("l0 = {}\n", sig17(l0)));
    out.push_str(&format!("c_constant = {}\n", sig17(c)));
    out.push_str(&format!("n_sensors = {n}\n"));
    out.push_str(&format!("height = {}\n", n.trailing_zeros()));
    Ok(out)
}
