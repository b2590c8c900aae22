//! permpoly: construct, invert, verify and count permutation polynomials of
//! F_{q^2} of the shape g(s) + L(x).
//!
//! Exit codes: 0 success, 1 a mathematical check failed (first counterexample
//! on stderr), 2 usage or precondition errors.

use clap::{Args, Parser, Subcommand, ValueEnum};
use permpoly::construct;
use permpoly::fields::{build_field, Elt, FieldCtx};
use permpoly::inverse;
use permpoly::json as pj;
use permpoly::spoly::{self, SPoly};
use permpoly::verify;
use permpoly::{BasePoly, PPForm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "permpoly", version, about)]
struct Cli {
    /// Worker threads for census-style commands (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFmt {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct FieldArgs {
    /// Characteristic p (prime)
    #[arg(long)]
    p: u32,
    /// Base extension degree r, q = p^r
    #[arg(long, default_value_t = 1)]
    r: u32,
    /// Base modulus coefficients c0,..,cr over F_p (monic, degree r)
    #[arg(long)]
    base_modulus: Option<String>,
    /// Extension modulus d0,d1,d2 as F_q element indices (monic quadratic)
    #[arg(long)]
    ext_modulus: Option<String>,
}

impl FieldArgs {
    fn build(&self) -> anyhow::Result<FieldCtx> {
        let base = match &self.base_modulus {
            Some(s) => Some(parse_u32_list(s)?),
            None => None,
        };
        let ext = match &self.ext_modulus {
            Some(s) => {
                let v = parse_u32_list(s)?;
                if v.len() != 3 {
                    anyhow::bail!("ext modulus needs exactly 3 coefficients");
                }
                Some([v[0], v[1], v[2]])
            }
            None => None,
        };
        Ok(build_field(self.p, self.r, base, ext)?)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the field tower, moduli and primitive element
    FieldInfo {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = OutFmt::Text)]
        out: OutFmt,
    },
    /// List the q+1 admissible deltas (roots of x^{q+1} = 1)
    ListDelta {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = OutFmt::Text)]
        out: OutFmt,
    },
    /// Emit one, all, or a sample of the certified forms of a family
    Construct {
        #[command(flatten)]
        field: FieldArgs,
        /// Family tag: rank2-kernel-aligned | rank1 | rank2-base-pp |
        /// trace-spoly | transported | rank1-spoly | general-rank1 |
        /// general-rank2
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0)]
        delta_index: usize,
        /// Top index m of the shape
        #[arg(long)]
        m: Option<usize>,
        /// Interior coefficients "i=elt,j=elt" (element indices)
        #[arg(long)]
        g: Option<String>,
        /// Stream the complete family as NDJSON
        #[arg(long)]
        all: bool,
        /// Emit N sampled members instead
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutFmt::Json)]
        out: OutFmt,
    },
    /// Read a form (JSON) and emit its compositional inverse certificate
    Invert {
        /// Path to the form, or - for stdin
        #[arg(long, default_value = "-")]
        input: PathBuf,
    },
    /// Re-run the oracles on a form; optionally check a certificate against it
    Verify {
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// Inverse certificate to check by composition
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Difference sets and the eligible lines of one shape
    Eligible {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 0)]
        delta_index: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        g: Option<String>,
        #[arg(long, value_enum, default_value_t = OutFmt::Text)]
        out: OutFmt,
    },
    /// Exhaustive classification of all q^4 linearized partners of a shape
    Census {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 0)]
        delta_index: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        g: Option<String>,
        /// Rank of L to classify (1 or 2)
        #[arg(long, default_value_t = 2)]
        rank: u8,
        /// Refuse to scan fields with q above this bound
        #[arg(long, default_value_t = 16)]
        cap: u32,
        /// Stream every hit as NDJSON (one certified form per line) instead
        /// of the summary row
        #[arg(long)]
        emit_hits: bool,
        #[arg(long, value_enum, default_value_t = OutFmt::Text)]
        out: OutFmt,
    },
    /// Reproduce the per-field count tables (1, 2 or 3)
    Tables {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        which: u8,
        #[arg(long, default_value_t = 16)]
        cap: u32,
        #[arg(long, value_enum, default_value_t = OutFmt::Text)]
        out: OutFmt,
    },
    /// Normalized permutation polynomials of the base field F_q
    BasePps {
        #[command(flatten)]
        field: FieldArgs,
        /// Only the binomials x^m + γx for this m
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum, default_value_t = OutFmt::Text)]
        out: OutFmt,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn parse_u32_list(s: &str) -> anyhow::Result<Vec<u32>> {
    s.split(',')
        .map(|t| Ok(t.trim().parse::<u32>()?))
        .collect()
}

/// "i=e,j=e" with element indices.
fn parse_coeffs(ctx: &FieldCtx, s: &str) -> anyhow::Result<Vec<(usize, Elt)>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (i, e) = part
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("coefficient must be i=element, got {part}"))?;
        out.push((i.trim().parse()?, ctx.elt(e.trim().parse()?)?));
    }
    Ok(out)
}

fn shape(ctx: &FieldCtx, delta_index: usize, m: usize, g: &Option<String>) -> anyhow::Result<SPoly> {
    let delta = ctx.delta(delta_index)?;
    let coeffs = match g {
        Some(s) => parse_coeffs(ctx, s)?,
        None => Vec::new(),
    };
    Ok(SPoly::new(ctx, delta, m, coeffs)?)
}

/// Base-field polynomial x^m + interior coefficients, used by the lift
/// families.
fn base_shape(ctx: &FieldCtx, m: usize, g: &Option<String>) -> anyhow::Result<BasePoly> {
    let mut coeffs = vec![Elt::ZERO; m + 1];
    coeffs[m] = Elt::ONE;
    if let Some(s) = g {
        for (i, c) in parse_coeffs(ctx, s)? {
            if i >= m {
                anyhow::bail!("interior coefficient index {i} out of range");
            }
            coeffs[i] = c;
        }
    }
    Ok(BasePoly::new(ctx, coeffs)?)
}

fn field_header(ctx: &FieldCtx) -> String {
    serde_json::to_string(&pj::field_spec_json(ctx)).expect("serializable")
}

/// NDJSON line to stdout; a consumer closing the pipe ends the stream
/// without an error.
fn emit_line(out: &mut impl Write, line: &str) -> bool {
    match writeln!(out, "{line}") {
        Ok(()) => true,
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => false,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}

fn read_input(path: &PathBuf) -> anyhow::Result<Value> {
    let mut buf = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut buf)?;
    } else {
        buf = std::fs::read_to_string(path)?;
    }
    Ok(serde_json::from_str(&buf)?)
}

fn run(cmd: Cmd) -> anyhow::Result<ExitCode> {
    match cmd {
        Cmd::FieldInfo { field, out } => {
            let ctx = field.build()?;
            let doc = json!({
                "field": pj::field_spec_json(&ctx),
                "q": ctx.q(),
                "q2": ctx.q2(),
                "group_order": ctx.group_order(),
                "omega": pj::elt_to_json(&ctx, ctx.omega()),
                "delta_count": ctx.deltas().len(),
            });
            match out {
                OutFmt::Json => println!("{}", serde_json::to_string(&doc)?),
                _ => {
                    println!("# field: {}", field_header(&ctx));
                    println!("q = {}, q^2 = {}, |F*| = {}", ctx.q(), ctx.q2(), ctx.group_order());
                    println!("omega = {:?} (coeffs {:?})", ctx.omega(), ctx.elt_coeffs(ctx.omega()));
                    println!("deltas: {}", ctx.deltas().len());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ListDelta { field, out } => {
            let ctx = field.build()?;
            match out {
                OutFmt::Json => {
                    let rows: Vec<Value> = ctx
                        .deltas()
                        .iter()
                        .enumerate()
                        .map(|(i, &d)| json!({"index": i, "delta": pj::elt_to_json(&ctx, d)}))
                        .collect();
                    let doc = json!({"field": pj::field_spec_json(&ctx), "deltas": rows});
                    println!("{}", serde_json::to_string(&doc)?);
                }
                _ => {
                    println!("# field: {}", field_header(&ctx));
                    for (i, &d) in ctx.deltas().iter().enumerate() {
                        println!("{i}: element {} coeffs {:?}", d.index(), ctx.elt_coeffs(d));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Construct {
            field,
            family,
            delta_index,
            m,
            g,
            all,
            sample,
            seed,
            out,
        } => {
            let ctx = field.build()?;
            let forms = construct_cmd(&ctx, &family, delta_index, m, &g, all, sample, seed)?;
            let stdout = std::io::stdout();
            let mut w = std::io::BufWriter::new(stdout.lock());
            if out == OutFmt::Text {
                let _ = emit_line(&mut w, &format!("# field: {}", field_header(&ctx)));
            }
            for pp in &forms {
                let line = if out == OutFmt::Text {
                    render_pp(&ctx, pp)
                } else {
                    serde_json::to_string(&pj::ppform_to_json(&ctx, pp))?
                };
                if !emit_line(&mut w, &line) {
                    break;
                }
            }
            let _ = w.flush();
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Invert { input } => {
            let doc = read_input(&input)?;
            let (ctx, pp) = pj::ppform_from_json(&doc)?;
            let cert = inverse::invert(&ctx, &pp)?;
            println!("{}", serde_json::to_string(&pj::cert_to_json(&ctx, &cert))?);
            if cert.verified {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("inverse failed exhaustive verification");
                Ok(ExitCode::from(1))
            }
        }
        Cmd::Verify { input, against } => {
            let doc = read_input(&input)?;
            let (ctx, pp) = pj::ppform_from_json(&doc)?;
            if !verify::is_permutation(&ctx, |x| pp.eval(&ctx, x)) {
                let mut seen = vec![None; ctx.q2() as usize];
                for x in ctx.elements() {
                    let y = pp.eval(&ctx, x);
                    if let Some(prev) = seen[y.index() as usize] {
                        eprintln!(
                            "not a permutation: f({}) = f({}) = {}",
                            prev,
                            x.index(),
                            y.index()
                        );
                        break;
                    }
                    seen[y.index() as usize] = Some(x.index());
                }
                return Ok(ExitCode::from(1));
            }
            let attributed = construct::attribute(&ctx, &pp.g, &pp.lin);
            if attributed.is_none() {
                eprintln!("permutation verified but no family condition certifies it");
                return Ok(ExitCode::from(1));
            }
            if let Some(path) = against {
                let (cctx, cert) = pj::cert_from_json(&read_input(&path)?)?;
                if pj::field_spec_json(&cctx) != pj::field_spec_json(&ctx) {
                    anyhow::bail!("certificate was issued for a different field");
                }
                if let Some((x, y)) = verify::first_inverse_counterexample(
                    &ctx,
                    |e| pp.eval(&ctx, e),
                    |e| cert.eval(&ctx, e),
                ) {
                    eprintln!(
                        "composition breaks at element {}: got {}",
                        x.index(),
                        y.index()
                    );
                    return Ok(ExitCode::from(1));
                }
            }
            println!(
                "ok: permutation verified, family {}",
                attributed.expect("checked").as_str()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Eligible {
            field,
            delta_index,
            m,
            g,
            out,
        } => {
            let ctx = field.build()?;
            let gp = shape(&ctx, delta_index, m, &g)?;
            let mut gset: Vec<u32> = spoly::g_set(&ctx, &gp).iter().map(|e| e.index()).collect();
            let mut hset: Vec<u32> = spoly::h_set(&ctx, &gp).iter().map(|e| e.index()).collect();
            gset.sort_unstable();
            hset.sort_unstable();
            let lines = spoly::eligible_rank1_lines(&ctx, &gp);
            let affines = spoly::eligible_rank2_affines(&ctx, &gp);
            let per_line = (ctx.q() * (ctx.q() - 1)) as u64;
            match out {
                OutFmt::Json => {
                    let doc = json!({
                        "field": pj::field_spec_json(&ctx),
                        "g": pj::spoly_to_json(&ctx, &gp),
                        "g_set": gset,
                        "h_set": hset,
                        "rank1_lines": lines.iter().map(|l| json!({
                            "direction": pj::elt_to_json(&ctx, l.direction())
                        })).collect::<Vec<_>>(),
                        "rank2_affines": affines.iter().map(|l| json!({
                            "direction": pj::elt_to_json(&ctx, l.direction()),
                            "offset": pj::elt_to_json(&ctx, l.offset()),
                        })).collect::<Vec<_>>(),
                        "rank1_total": lines.len() as u64 * per_line,
                        "rank2_total": affines.len() as u64 * per_line,
                    });
                    println!("{}", serde_json::to_string(&doc)?);
                }
                _ => {
                    println!("# field: {}", field_header(&ctx));
                    println!("g-set ({} elements): {:?}", gset.len(), gset);
                    println!("h-set ({} elements): {:?}", hset.len(), hset);
                    println!(
                        "eligible rank-1 lines: {} (=> {} polynomials)",
                        lines.len(),
                        lines.len() as u64 * per_line
                    );
                    for l in &lines {
                        println!("  span({})", l.direction().index());
                    }
                    println!(
                        "eligible rank-2 affine lines: {} (=> {} polynomials)",
                        affines.len(),
                        affines.len() as u64 * per_line
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Census {
            field,
            delta_index,
            m,
            g,
            rank,
            cap,
            emit_hits,
            out,
        } => {
            let ctx = field.build()?;
            check_census_cap(&ctx, cap)?;
            if rank != 1 && rank != 2 {
                anyhow::bail!("rank must be 1 or 2");
            }
            let gp = shape(&ctx, delta_index, m, &g)?;
            if emit_hits {
                let mut unexplained = 0u64;
                let stdout = std::io::stdout();
                let mut out = std::io::BufWriter::new(stdout.lock());
                for (lin, fam) in verify::census_hits(&ctx, &gp, rank) {
                    let doc = match fam {
                        Some(f) => {
                            let pp = PPForm {
                                g: gp.clone(),
                                lin,
                                family: f,
                                certificate: "census hit".into(),
                            };
                            pj::ppform_to_json(&ctx, &pp)
                        }
                        None => {
                            unexplained += 1;
                            json!({
                                "field": pj::field_spec_json(&ctx),
                                "g": pj::spoly_to_json(&ctx, &gp),
                                "L": pj::linpoly_to_json(&ctx, &lin),
                                "family": Value::Null,
                            })
                        }
                    };
                    if !emit_line(&mut out, &serde_json::to_string(&doc)?) {
                        break;
                    }
                }
                let _ = out.flush();
                if unexplained > 0 {
                    eprintln!("{unexplained} hits outside every family condition");
                    return Ok(ExitCode::from(1));
                }
                return Ok(ExitCode::SUCCESS);
            }
            let row = verify::census(&ctx, &gp, rank);
            match out {
                OutFmt::Json => {
                    let fams: Value = row
                        .families
                        .iter()
                        .map(|(f, c)| (f.as_str().to_string(), json!(c)))
                        .collect::<serde_json::Map<_, _>>()
                        .into();
                    let doc = json!({
                        "field": pj::field_spec_json(&ctx),
                        "delta_index": row.delta_index,
                        "shape": pj::spoly_to_json(&ctx, &row.shape),
                        "rank": row.rank,
                        "count": row.count,
                        "families": fams,
                        "unexplained": row.unexplained,
                    });
                    println!("{}", serde_json::to_string(&doc)?);
                }
                _ => {
                    println!("# field: {}", field_header(&ctx));
                    println!(
                        "census delta#{} m={} rank={}: {} hits, {} unexplained",
                        row.delta_index, m, rank, row.count, row.unexplained
                    );
                    for (f, c) in &row.families {
                        println!("  {}: {}", f.as_str(), c);
                    }
                }
            }
            if row.unexplained > 0 {
                eprintln!("{} hits outside every family condition", row.unexplained);
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Tables { field, which, cap, out } => {
            let ctx = field.build()?;
            check_census_cap(&ctx, cap)?;
            let rows = verify::table(&ctx, which)?;
            match out {
                OutFmt::Json => {
                    let doc = json!({
                        "field": pj::field_spec_json(&ctx),
                        "which": which,
                        "rows": rows.iter().map(|(m, c)| json!({"m": m, "count": c})).collect::<Vec<_>>(),
                    });
                    println!("{}", serde_json::to_string(&doc)?);
                }
                OutFmt::Csv => {
                    println!("# field: {}", field_header(&ctx));
                    print!("{}", verify::table_to_csv(&rows));
                }
                OutFmt::Text => {
                    println!("# field: {}", field_header(&ctx));
                    println!("table {which} for F_{{{}^2}}", ctx.q());
                    for (m, c) in &rows {
                        println!("  m = {m:>2}: {c}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::BasePps { field, m, out } => {
            let ctx = field.build()?;
            match m {
                Some(m) => {
                    let bs = construct::base_binomials(&ctx, m)?;
                    match out {
                        OutFmt::Json => {
                            let doc = json!({
                                "field": pj::field_spec_json(&ctx),
                                "m": m,
                                "gammas": bs.iter().map(|b| pj::elt_to_json(&ctx, b.gamma)).collect::<Vec<_>>(),
                            });
                            println!("{}", serde_json::to_string(&doc)?);
                        }
                        _ => {
                            println!("# field: {}", field_header(&ctx));
                            println!(
                                "binomial witnesses for m={m}: {:?}",
                                bs.iter().map(|b| b.gamma.index()).collect::<Vec<_>>()
                            );
                        }
                    }
                }
                None => {
                    let pps = verify::normalized_base_pps(&ctx)?;
                    let no_linear = pps.iter().filter(|p| p.coeff(1).is_zero()).count();
                    match out {
                        OutFmt::Json => {
                            let doc = json!({
                                "field": pj::field_spec_json(&ctx),
                                "count": pps.len(),
                                "without_linear_term": no_linear,
                                "polys": pps.iter().map(|p| json!(p.coeffs().iter().map(|c| c.index()).collect::<Vec<_>>())).collect::<Vec<_>>(),
                            });
                            println!("{}", serde_json::to_string(&doc)?);
                        }
                        _ => {
                            println!("# field: {}", field_header(&ctx));
                            println!(
                                "normalized permutation polynomials of F_{}: {} ({} without linear term)",
                                ctx.q(),
                                pps.len(),
                                no_linear
                            );
                        }
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn check_census_cap(ctx: &FieldCtx, cap: u32) -> anyhow::Result<()> {
    if ctx.q() > cap {
        let evals = ctx.q2() as u64 * ctx.q2() as u64 * ctx.q2() as u64;
        anyhow::bail!(
            "census over q = {} scans q^4 = {} candidates (~{} evaluations); \
             raise --cap to force it",
            ctx.q(),
            (ctx.q2() as u64) * (ctx.q2() as u64),
            evals
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn construct_cmd(
    ctx: &FieldCtx,
    family: &str,
    delta_index: usize,
    m: Option<usize>,
    g: &Option<String>,
    all: bool,
    sample: Option<u64>,
    seed: u64,
) -> anyhow::Result<Vec<PPForm>> {
    let delta = ctx.delta(delta_index)?;
    let need_m = || m.ok_or_else(|| anyhow::anyhow!("--m is required for this family"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let forms: Vec<PPForm> = match family {
        "rank2-kernel-aligned" => {
            let m = need_m()?;
            if all {
                construct::complete_rank2_kernel_aligned(ctx, delta, m)?
            } else if let Some(n) = sample {
                let gshape = SPoly::monomial(ctx, delta, m)?;
                let z = ctx.pow(gshape.image_point(ctx), m as i64);
                (0..n)
                    .map(|_| {
                        let gamma = ctx.elt(rng.gen_range(1..ctx.q())).expect("in range");
                        let lv = rand_elt(ctx, &mut rng, |e| !ctx.on_line(z, e));
                        Ok(construct::construct_rank2_kernel_aligned(ctx, delta, m, gamma, lv)?)
                    })
                    .collect::<anyhow::Result<_>>()?
            } else {
                let gshape = SPoly::monomial(ctx, delta, m)?;
                let z = ctx.pow(gshape.image_point(ctx), m as i64);
                let lv = ctx
                    .nonzero_elements()
                    .find(|&e| !ctx.on_line(z, e))
                    .expect("off-line element exists");
                vec![construct::construct_rank2_kernel_aligned(ctx, delta, m, ctx.one(), lv)?]
            }
        }
        "rank1" => {
            let m = need_m()?;
            if all {
                construct::complete_rank1(ctx, delta, m)?
            } else {
                let full = construct::complete_rank1(ctx, delta, m)?;
                match sample {
                    Some(n) => (0..n)
                        .map(|_| full[rng.gen_range(0..full.len())].clone())
                        .collect(),
                    None => vec![full.into_iter().next().expect("family nonempty")],
                }
            }
        }
        "rank2-base-pp" => {
            let m = need_m()?;
            let g_base = base_shape(ctx, m, g)?;
            let full = construct::complete_rank2_from_base_pp(ctx, delta, &g_base)?;
            if full.is_empty() {
                anyhow::bail!("no witness gamma makes this base shape a permutation");
            }
            pick(full, all, sample, &mut rng)
        }
        "trace-spoly" => {
            let m = need_m()?;
            let gp = shape(ctx, 0, m, g)?; // delta index 0 is always 1
            let full = construct::complete_trace_spoly(ctx, &gp)?;
            pick(full, all, sample, &mut rng)
        }
        "transported" => {
            let m = need_m()?;
            let g_base = base_shape(ctx, m, g)?;
            let lambda = spoly::canonical_lambda(ctx, delta)?;
            let lambda_m = ctx.pow(lambda, m as i64);
            if all || sample.is_some() {
                let mut out = Vec::new();
                let count = sample.unwrap_or((ctx.q() as u64 - 1) * (ctx.q2() - ctx.q()) as u64);
                if sample.is_some() {
                    for _ in 0..count {
                        let gamma = ctx.elt(rng.gen_range(1..ctx.q())).expect("in range");
                        let lv = rand_elt(ctx, &mut rng, |e| !ctx.on_line(lambda_m, e));
                        out.push(construct::construct_transported_aligned(
                            ctx, &g_base, delta, lambda, gamma, lv,
                        )?);
                    }
                } else {
                    for gi in 1..ctx.q() {
                        for lv in ctx.elements() {
                            if ctx.on_line(lambda_m, lv) {
                                continue;
                            }
                            out.push(construct::construct_transported_aligned(
                                ctx,
                                &g_base,
                                delta,
                                lambda,
                                ctx.elt(gi).expect("in range"),
                                lv,
                            )?);
                        }
                    }
                }
                out
            } else {
                let lv = ctx
                    .nonzero_elements()
                    .find(|&e| !ctx.on_line(lambda_m, e))
                    .expect("off-line element exists");
                vec![construct::construct_transported_aligned(
                    ctx,
                    &g_base,
                    delta,
                    lambda,
                    ctx.one(),
                    lv,
                )?]
            }
        }
        "rank1-spoly" => {
            let m = need_m()?;
            let g_base = base_shape(ctx, m, g)?;
            let full = construct::complete_rank1_spoly(ctx, &g_base, delta)?;
            pick(full, all, sample, &mut rng)
        }
        "general-rank1" | "general-rank2" => {
            let m = need_m()?;
            let gp = shape(ctx, delta_index, m, g)?;
            let lines = if family == "general-rank1" {
                spoly::eligible_rank1_lines(ctx, &gp)
            } else {
                spoly::eligible_rank2_affines(ctx, &gp)
            };
            if lines.is_empty() {
                anyhow::bail!("no eligible lines for this shape");
            }
            let mut full = Vec::new();
            for line in &lines {
                full.extend(construct::complete_general(ctx, &gp, line)?);
            }
            pick(full, all, sample, &mut rng)
        }
        other => anyhow::bail!("unknown family {other}"),
    };
    Ok(forms)
}

/// Human-oriented rendering: elements by canonical index.
fn render_pp(ctx: &FieldCtx, pp: &PPForm) -> String {
    let mut g_part = String::new();
    g_part.push_str(&format!("s^{}", pp.g.m()));
    for (&i, &c) in pp.g.coeffs().iter().rev() {
        g_part.push_str(&format!(" + e{}*s^{}", c.index(), i));
    }
    format!(
        "f(x) = {} + e{}*x^{} + e{}*x   where s = x^{} + e{}*x   [{}]",
        g_part,
        pp.lin.a1().index(),
        ctx.q(),
        pp.lin.a0().index(),
        ctx.q(),
        pp.g.delta().index(),
        pp.family.as_str()
    )
}

fn rand_elt(ctx: &FieldCtx, rng: &mut ChaCha8Rng, pred: impl Fn(Elt) -> bool) -> Elt {
    loop {
        let e = ctx.elt(rng.gen_range(0..ctx.q2())).expect("in range");
        if pred(e) {
            return e;
        }
    }
}

fn pick(full: Vec<PPForm>, all: bool, sample: Option<u64>, rng: &mut ChaCha8Rng) -> Vec<PPForm> {
    if all {
        full
    } else if let Some(n) = sample {
        (0..n)
            .map(|_| full[rng.gen_range(0..full.len())].clone())
            .collect()
    } else {
        vec![full.into_iter().next().expect("family nonempty")]
    }
}
