//! Subcommand drivers. Each returns the text destined for the output file or stdout.

use std::time::Instant;

use hyperell_core::ensemble::{avg_nlevel, EnsembleSpec};
use hyperell_core::ffq::is_squarefree;
use hyperell_core::gao::{a_value, FnSet};
use hyperell_core::lfun::{l_coeffs, l_coeffs_all, star_reduce, LPolynomial, STAR_RECORD_HEADER};
use hyperell_core::rmt::{kernel_integral, nlevel_rmt_empirical, KernelSpec};
use hyperell_core::testfn::SUPPORT_LIMIT;
use hyperell_core::{Error, FieldOrder, MonicPoly, Result};

use crate::config::{Command, ModeKind, RunConfig};
use crate::record::{render, ExperimentRecord, HEADER};
use crate::verify;

/// Output text plus the failure, if any, that should set the exit code.
pub struct Outcome {
    pub text: String,
    pub error: Option<Error>,
}

impl From<Result<String>> for Outcome {
    fn from(r: Result<String>) -> Self {
        match r {
            Ok(text) => Outcome { text, error: None },
            Err(e) => Outcome { text: String::new(), error: Some(e) },
        }
    }
}

pub fn run(cfg: &RunConfig) -> Outcome {
    match cfg.command {
        Command::Verify => verify::run(cfg),
        Command::Lpoly => lpoly(cfg).into(),
        Command::AvgNlevel => records(cfg, avg_nlevel_rows).into(),
        Command::Gao => records(cfg, gao_rows).into(),
        Command::RmtKernel => records(cfg, rmt_kernel_rows).into(),
        Command::RmtEmpirical => records(cfg, rmt_empirical_rows).into(),
        Command::ScanG => records(cfg, scan_g_rows).into(),
        Command::ScanQ => records(cfg, scan_q_rows).into(),
    }
}

fn records(cfg: &RunConfig, rows: fn(&RunConfig) -> Result<Vec<ExperimentRecord>>) -> Result<String> {
    Ok(render(HEADER, rows(cfg)?.iter().map(ExperimentRecord::to_csv)))
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, u128)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed().as_millis()))
}

fn field(q: u64) -> Result<FieldOrder> {
    FieldOrder::new(q)
}

fn support_total(cfg: &RunConfig) -> f64 {
    cfg.tf.iter().map(|f| f.support()).sum()
}

/// A(f) when the supports allow it.
fn gao_reference(cfg: &RunConfig) -> Result<Option<f64>> {
    if support_total(cfg) >= SUPPORT_LIMIT {
        return Ok(None);
    }
    Ok(Some(a_value(&FnSet::new(cfg.tf.clone())?)?.value))
}

fn ensemble_spec(cfg: &RunConfig, q: u64, g: usize) -> Result<EnsembleSpec> {
    let f = field(q)?;
    Ok(match cfg.mode {
        ModeKind::Exhaustive => EnsembleSpec::exhaustive(f, g),
        ModeKind::Sampled => EnsembleSpec::sampled(f, g, cfg.samples, cfg.seed),
    })
}

fn sampled_seed(cfg: &RunConfig) -> Option<u64> {
    (cfg.mode == ModeKind::Sampled).then_some(cfg.seed)
}

fn base(cfg: &RunConfig, q: Option<u64>, g: Option<usize>) -> ExperimentRecord {
    ExperimentRecord {
        suite: cfg.command.name().to_string(),
        q,
        g,
        n: cfg.n,
        tf_spec: cfg.tf_spec(),
        estimate: f64::NAN,
        stderr: None,
        reference: None,
        runtime_ms: 0,
        seed: None,
    }
}

fn ensemble_rows(cfg: &RunConfig, reference: Option<f64>) -> Result<Vec<ExperimentRecord>> {
    cfg.sweep()
        .into_iter()
        .map(|(q, g)| {
            let spec = ensemble_spec(cfg, q, g)?;
            let (r, ms) = timed(|| avg_nlevel(&spec, &cfg.tf, cfg.chunk, cfg.budget))?;
            Ok(ExperimentRecord {
                estimate: r.mean,
                stderr: Some(r.stderr),
                reference,
                runtime_ms: ms,
                seed: sampled_seed(cfg),
                ..base(cfg, Some(q), Some(g))
            })
        })
        .collect()
}

fn avg_nlevel_rows(cfg: &RunConfig) -> Result<Vec<ExperimentRecord>> {
    ensemble_rows(cfg, gao_reference(cfg)?)
}

fn gao_rows(cfg: &RunConfig) -> Result<Vec<ExperimentRecord>> {
    let set = FnSet::new(cfg.tf.clone())?;
    let (a, ms) = timed(|| a_value(&set))?;
    let k = kernel_integral(&cfg.tf, &KernelSpec::new(cfg.n))?;
    Ok(vec![ExperimentRecord {
        estimate: a.value,
        stderr: Some(a.error),
        reference: Some(k.value),
        runtime_ms: ms,
        ..base(cfg, None, None)
    }])
}

fn rmt_kernel_rows(cfg: &RunConfig) -> Result<Vec<ExperimentRecord>> {
    let (k, ms) = timed(|| kernel_integral(&cfg.tf, &KernelSpec::new(cfg.n)))?;
    Ok(vec![ExperimentRecord {
        estimate: k.value,
        stderr: Some(k.error),
        reference: gao_reference(cfg)?,
        runtime_ms: ms,
        ..base(cfg, None, None)
    }])
}

fn rmt_empirical_rows(cfg: &RunConfig) -> Result<Vec<ExperimentRecord>> {
    let reference = kernel_integral(&cfg.tf, &KernelSpec::new(cfg.n))?.value;
    cfg.g
        .iter()
        .map(|&g| {
            let (r, ms) = timed(|| nlevel_rmt_empirical(&cfg.tf, g, cfg.samples, cfg.seed))?;
            Ok(ExperimentRecord {
                estimate: r.mean,
                stderr: Some(r.stderr),
                reference: Some(reference),
                runtime_ms: ms,
                seed: Some(cfg.seed),
                ..base(cfg, None, Some(g))
            })
        })
        .collect()
}

/// Largest |⟨W⟩ − A|·g / log g over rows with g ≥ 2.
pub fn fitted_constant(rows: &[ExperimentRecord]) -> Option<f64> {
    rows.iter()
        .filter_map(|r| {
            let g = r.g? as f64;
            (g >= 2.0).then(|| r.abs_error().map(|d| d * g / g.ln()))?
        })
        .reduce(f64::max)
}

fn scan_g_rows(cfg: &RunConfig) -> Result<Vec<ExperimentRecord>> {
    let rows = ensemble_rows(cfg, gao_reference(cfg)?)?;
    if let Some(c) = fitted_constant(&rows) {
        eprintln!("scan-g: fitted C = max |<W> - A| g / log g = {c:.4}");
    }
    Ok(rows)
}

fn scan_q_rows(cfg: &RunConfig) -> Result<Vec<ExperimentRecord>> {
    let mut rows = Vec::new();
    for &g in &cfg.g {
        let mc = nlevel_rmt_empirical(&cfg.tf, g, cfg.samples, cfg.seed)?;
        eprintln!("scan-q: USp({}) reference {:.6} ± {:.6} from {} samples", 2 * g, mc.mean, mc.stderr, mc.count);
        for &q in &cfg.q {
            let spec = ensemble_spec(cfg, q, g)?;
            let (r, ms) = timed(|| avg_nlevel(&spec, &cfg.tf, cfg.chunk, cfg.budget))?;
            rows.push(ExperimentRecord {
                estimate: r.mean,
                stderr: Some(r.stderr),
                reference: Some(mc.mean),
                runtime_ms: ms,
                seed: Some(cfg.seed),
                ..base(cfg, Some(q), Some(g))
            });
        }
    }
    Ok(rows)
}

/// L*-coefficients, either for `poly` over each q or for all of H(2g+1, q).
fn lpoly(cfg: &RunConfig) -> Result<String> {
    let mut lines = Vec::new();
    for &q in &cfg.q {
        let f = field(q)?;
        if let Some(p) = &cfg.poly {
            let d = MonicPoly::parse(f, p)?;
            lines.push(star_reduce(&l_coeffs(&d, cfg.budget)?)?.record());
            continue;
        }
        for &g in &cfg.g {
            let n = 2 * g + 1;
            let rows = l_coeffs_all(f, n, cfg.budget)?;
            for (i, row) in rows.chunks(n).enumerate() {
                let d = MonicPoly::from_index(f, n, i as u64);
                if is_squarefree(&d) {
                    lines.push(star_reduce(&LPolynomial::from_parts(d, row.to_vec())?)?.record());
                }
            }
        }
    }
    Ok(render(STAR_RECORD_HEADER, lines))
}
