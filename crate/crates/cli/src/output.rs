//! CSV tables and JSON summaries. Every CSV starts with a `# gfperc <table> schema v1` line.

use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use gfperc_core::experiments::{AuditResult, Curve, FkgResult, QuarterBound, TailTest, VarianceScan};
use gfperc_core::{BoundCheck, Estimate, ARTIFACT_VERSION};

use crate::config::RunConfig;
use crate::error::CliError;

pub const CONFIG_ECHO: &str = "config.resolved.toml";

pub fn csv(table: &str, header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = format!("# gfperc {table} schema v1\n{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn est(e: &Estimate) -> String {
    format!("{},{}", e.value, e.se)
}

fn check_row(c: &BoundCheck) -> String {
    format!("{},{},{},{},{}", c.name, c.lhs, c.rhs, c.se, c.pass)
}

pub const CHECK_HEADER: &str = "check,lhs,rhs,se,pass";

pub fn variance_csv(s: &VarianceScan) -> String {
    csv(
        "variance-scan",
        "side,n,volume,var_t,var_t_se,mean_t,mean_t_se,alpha_sq,log_factor,product,product_se",
        s.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                r.side,
                r.n,
                r.volume,
                est(&r.variance),
                est(&r.mean_threshold),
                r.alpha_sq,
                r.log_factor,
                r.product,
                r.product_se
            )
        }),
    )
}

pub fn quarter_csv(q: &QuarterBound) -> String {
    csv("quarter-bound", CHECK_HEADER, q.summary.checks.iter().map(check_row))
}

pub fn tails_csv(t: &TailTest) -> String {
    csv(
        "tails",
        "eps,level,p_upper,p_upper_se,p_lower,p_lower_se,bound,bound_se,applicable_upper,applicable_lower,upper_pass,lower_pass",
        t.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{},{}",
                r.eps,
                r.level,
                est(&r.p_upper),
                est(&r.p_lower),
                r.bound,
                r.bound_se,
                r.applicable_upper,
                r.applicable_lower,
                r.upper_check.pass,
                r.lower_check.pass
            )
        }),
    )
}

pub fn curve_csv(table: &str, c: &Curve) -> String {
    csv(table, "r,l,level,p,se", c.rows.iter().map(|r| format!("{},{},{},{}", r.r, r.l, r.level, est(&r.estimate))))
}

pub fn fkg_csv(f: &FkgResult) -> String {
    csv(
        "fkg",
        "p_a,p_a_se,p_b,p_b_se,p_ab,p_ab_se,cov,cov_se,pass",
        [format!("{},{},{},{},{}", est(&f.p_a), est(&f.p_b), est(&f.p_ab), est(&f.covariance), f.check.pass)],
    )
}

pub fn audit_csv(a: &AuditResult) -> String {
    csv(
        "audit",
        "n_samples,placements,loop_samples,loop_to_cross_violations,glue_samples,gluing_violations,edge_samples,edge_exceptions,p_loop,p_loop_se,p_dagger,p_dagger_se,phi_prediction,phi_pass,p_glue,p_glue_se,psi_prediction,psi_pass",
        [format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            a.n_samples,
            a.placements,
            a.loop_samples,
            a.loop_to_cross_violations,
            a.glue_samples,
            a.gluing_violations,
            a.edge_samples,
            a.edge_exceptions,
            est(&a.p_loop),
            est(&a.p_dagger),
            a.phi_prediction,
            a.phi_check.pass,
            est(&a.p_glue),
            a.psi_prediction,
            a.psi_check.pass
        )],
    )
}

/// JSON summary shared by every command.
pub fn summary_json(command: &str, cfg: &RunConfig, result: &impl Serialize) -> String {
    let v = json!({
        "artifact_version": ARTIFACT_VERSION,
        "command": command,
        "config_digest": cfg.digest(),
        "config": cfg.portable(),
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("summary serializes");
    s.push('\n');
    s
}

/// Output directory; created on first write so that failed runs leave nothing behind.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// Writes `name` directly under the output directory; `name` is a bare file name.
    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
        debug_assert!(!name.contains(['/', '\\']) && name != "..");
        fs::create_dir_all(&self.root)?;
        let p = self.root.join(name);
        fs::write(&p, contents)?;
        Ok(p)
    }

    pub fn write_config(&self, cfg: &RunConfig) -> Result<PathBuf, CliError> {
        self.write(CONFIG_ECHO, cfg.to_toml())
    }
}
