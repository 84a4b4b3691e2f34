//! One function per subcommand, each producing a [`Rendered`] result and
//! whether every verification it ran passed.

use mtcircle::eisen::{i2_equals_i3_check, merel_sum};
use mtcircle::gfield::PrimeContext;
use mtcircle::modsym::genus_x0;
use mtcircle::ssgraph::{brandt_matrix, build_l_matrix};
use mtcircle::theorems::{
    run_theorem, verify_tree_formula, ContextData, SupersingularData, TheoremId, VerificationReport,
    VerifyOptions,
};
use mtcircle::Result;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::TheoremArg;
use crate::cache::Cache;
use crate::output::{diagnostic, Rendered, Table};

pub struct Outcome {
    pub rendered: Rendered,
    pub passed: bool,
}

impl From<Rendered> for Outcome {
    fn from(rendered: Rendered) -> Self {
        Outcome {
            rendered,
            passed: true,
        }
    }
}

/// `(p, ℓ, s)` with the full theorem set, or the tree formula alone.
const BATTERY: [(u64, u64, u32, bool); 13] = [
    (11, 5, 1, true),
    (31, 5, 1, true),
    (41, 5, 1, true),
    (61, 5, 1, true),
    (71, 5, 1, true),
    (101, 5, 2, true),
    (29, 7, 1, true),
    (43, 7, 1, true),
    (23, 11, 1, true),
    (181, 5, 1, true),
    (241, 5, 1, false),
    (337, 7, 1, false),
    (421, 5, 1, false),
];

fn context_data(ctx: &PrimeContext, cache: &Cache, opts: &VerifyOptions) -> Result<ContextData> {
    let ss = SupersingularData::from_set(ctx, cache.supersingular(ctx))?;
    ContextData::from_parts(ctx, ss, cache.presentation(ctx)?, opts)
}

pub fn supersingular(ctx: &PrimeContext, cache: &Cache) -> Result<Outcome> {
    let set = cache.supersingular(ctx);
    let mut t = Table::new(&["index", "c0", "c1", "weight"]);
    for (i, (j, w)) in set.js.iter().zip(&set.weights).enumerate() {
        t.push(&[i as u64, j.c0, j.c1, u64::from(*w)]);
    }
    let mut r = Rendered::new(t);
    r.record(&set);
    Ok(r.into())
}

fn square_table(rows: &[Vec<u64>]) -> Table {
    let mut headers = vec!["row".to_string()];
    headers.extend((0..rows.len()).map(|j| j.to_string()));
    let mut t = Table::new(&headers);
    for (i, row) in rows.iter().enumerate() {
        let mut cells = vec![i as u64];
        cells.extend(row);
        t.push(&cells);
    }
    t
}

pub fn lmatrix(ctx: &PrimeContext, cache: &Cache) -> Result<Outcome> {
    let set = cache.supersingular(ctx);
    let l = build_l_matrix(ctx, &set);
    let mut r = Rendered::new(square_table(&l.mat.row_vecs()));
    r.record(&l);
    Ok(r.into())
}

pub fn brandt(ctx: &PrimeContext, q: u64, cache: &Cache) -> Result<Outcome> {
    let set = cache.supersingular(ctx);
    let b = brandt_matrix(ctx, &set, q)?;
    let mut r = Rendered::new(square_table(&b.mat));
    r.record(&b);
    Ok(r.into())
}

#[derive(Serialize)]
struct HomologySummary {
    p: u64,
    ell: u64,
    s: u32,
    modulus: u64,
    genus: u64,
    generators: usize,
    relations: usize,
    dim: usize,
    plus_rank: usize,
    cuspidal_rank: usize,
    plus_cuspidal_rank: usize,
}

pub fn homology(ctx: &PrimeContext, cache: &Cache) -> Result<Outcome> {
    let space = cache.presentation(ctx)?;
    let (plus, cusp, both) = space.plus_subspaces(&space.star_involution())?;
    let h = HomologySummary {
        p: ctx.p,
        ell: ctx.ell,
        s: ctx.s,
        modulus: space.modulus().value(),
        genus: genus_x0(ctx.p),
        generators: space.num_generators(),
        relations: space.relation_count(),
        dim: space.dim(),
        plus_rank: plus.free_rank(),
        cuspidal_rank: cusp.free_rank(),
        plus_cuspidal_rank: both.free_rank(),
    };
    let mut t = Table::new(&["p", "ell", "s", "genus", "dim", "plus", "cuspidal", "plus_cuspidal"]);
    t.push(&[h.p, h.ell, u64::from(h.s), h.genus, h.dim as u64, h.plus_rank as u64,
             h.cuspidal_rank as u64, h.plus_cuspidal_rank as u64]);
    let mut r = Rendered::new(t);
    r.record(&h);
    Ok(r.into())
}

pub fn alpha(ctx: &PrimeContext, cache: &Cache, opts: &VerifyOptions) -> Result<Outcome> {
    let rep = context_data(ctx, cache, opts)?.alpha()?;
    let mut t = Table::new(&["p", "ell", "s", "alpha", "stabilized", "merel_sum", "i2_eq_i3"]);
    t.push(&[
        rep.p.to_string(),
        rep.ell.to_string(),
        rep.s.to_string(),
        rep.alpha.to_string(),
        rep.stabilized.to_string(),
        rep.merel_sum.to_string(),
        rep.i2_eq_i3.to_string(),
    ]);
    let mut r = Rendered::new(t);
    r.record(&rep);
    Ok(r.into())
}

#[derive(Serialize)]
struct MerelReport {
    p: u64,
    ell: u64,
    s: u32,
    merel_sum: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain2_eq_chain3: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    consistent: Option<bool>,
}

/// The sum is defined mod `ℓ` for every `s`; the comparison with the
/// filtration only for `s = 1`.
pub fn merel(ctx: &PrimeContext, cache: &Cache, opts: &VerifyOptions) -> Result<Outcome> {
    let sum = merel_sum(ctx)?;
    let verdict = if ctx.s == 1 {
        let data = context_data(ctx, cache, opts)?;
        Some(i2_equals_i3_check(&data.eisen.filtration, sum, 1)?)
    } else {
        None
    };
    let rep = MerelReport {
        p: ctx.p,
        ell: ctx.ell,
        s: ctx.s,
        merel_sum: sum,
        chain2_eq_chain3: verdict.map(|v| v.chain2_eq_chain3),
        consistent: verdict.map(|v| v.consistent()),
    };
    let show = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
    let mut t = Table::new(&["p", "ell", "s", "merel_sum", "chain2_eq_chain3", "consistent"]);
    t.push(&[
        rep.p.to_string(),
        rep.ell.to_string(),
        rep.s.to_string(),
        rep.merel_sum.to_string(),
        show(rep.chain2_eq_chain3),
        show(rep.consistent),
    ]);
    let mut r = Rendered::new(t);
    r.record(&rep);
    Ok(Outcome {
        rendered: r,
        passed: rep.consistent != Some(false),
    })
}

fn tree_applies(ctx: &PrimeContext) -> bool {
    ctx.p % 12 == 1
}

fn log_timing(rep: &VerificationReport) {
    diagnostic(json!({
        "theorem": rep.theorem,
        "p": rep.p,
        "ell": rep.ell,
        "s": rep.s,
        "seconds": rep.elapsed.as_secs_f64(),
    }));
}

/// Reports for one context. The tree formula alone needs only the
/// supersingular side, and its precondition is a configuration error.
fn context_reports(
    ctx: &PrimeContext,
    theorems: &[TheoremId],
    cache: &Cache,
    opts: &VerifyOptions,
) -> Result<Vec<VerificationReport>> {
    if theorems == [TheoremId::Tree] {
        let ss = SupersingularData::from_set(ctx, cache.supersingular(ctx))?;
        return Ok(vec![verify_tree_formula(ctx, &ss, opts.tree_cap)?]);
    }
    let data = context_data(ctx, cache, opts)?;
    Ok(theorems.iter().map(|&t| run_theorem(&data, t, opts)).collect())
}

fn reports_outcome(reports: &[VerificationReport]) -> Outcome {
    let mut t = Table::new(&["theorem", "p", "ell", "s", "verdict", "checks_passed", "checks"]);
    let mut r = Rendered::new(Table::default());
    for rep in reports {
        log_timing(rep);
        let passed = rep.checks.iter().filter(|c| c.pass).count();
        t.push(&[
            json!(rep.theorem).as_str().unwrap_or_default().to_string(),
            rep.p.to_string(),
            rep.ell.to_string(),
            rep.s.to_string(),
            json!(rep.verdict).as_str().unwrap_or_default().to_string(),
            passed.to_string(),
            rep.checks.len().to_string(),
        ]);
        r.record(rep);
    }
    r.table = t;
    Outcome {
        rendered: r,
        passed: reports.iter().all(VerificationReport::passed),
    }
}

pub fn verify(ctx: &PrimeContext, theorem: TheoremArg, cache: &Cache, opts: &VerifyOptions) -> Result<Outcome> {
    let theorems: Vec<TheoremId> = match theorem {
        TheoremArg::Main => vec![TheoremId::Main],
        TheoremArg::Alpha2 => vec![TheoremId::Alpha2],
        TheoremArg::Alpha3 => vec![TheoremId::Alpha3],
        TheoremArg::Tree => vec![TheoremId::Tree],
        TheoremArg::All => TheoremId::ALL
            .into_iter()
            .filter(|&t| t != TheoremId::Tree || tree_applies(ctx))
            .collect(),
    };
    Ok(reports_outcome(&context_reports(ctx, &theorems, cache, opts)?))
}

pub fn battery(cache: &Cache, opts: &VerifyOptions) -> Result<Outcome> {
    let per_context: Vec<Result<Vec<VerificationReport>>> = BATTERY
        .par_iter()
        .map(|&(p, ell, s, full)| {
            let ctx = PrimeContext::new(p, ell, s)?;
            let theorems: Vec<TheoremId> = TheoremId::ALL
                .into_iter()
                .filter(|&t| if t == TheoremId::Tree { tree_applies(&ctx) } else { full })
                .collect();
            context_reports(&ctx, &theorems, cache, opts)
        })
        .collect();
    let mut reports = Vec::new();
    for r in per_context {
        reports.extend(r?);
    }
    Ok(reports_outcome(&reports))
}
