//! Batch front end for the exact complexity-one pipelines.
//!
//! One command per process: parse a divisor (or supplied-embedding)
//! document, run the requested pipeline, and print a canonical JSON report.
//! Object keys are sorted and every set-valued array is deterministically
//! ordered, so identical inputs produce byte-identical output.
//!
//! Exit codes: `0` success; `1` input error (unreadable file, schema
//! violation — messages carry a `/pointer/to/the/field` when the parser can
//! name one — or bad flags); `2` verification failure (the computation
//! finished and the claimed property does not hold, e.g. `well-poised`
//! found a tropical cone whose initial ideal is not a degenerated line).
//!
//! All weight computations use the min convention: the initial form of a
//! polynomial keeps the terms of minimal weight. Tools using the max
//! convention differ by a global sign on weights.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use poised_core::exactla::{parse_rat, Int, Rat};
use poised_core::idealkit::{ideal_presentation, XPolynomial};
use poised_core::projkit::{nok_body, test_config_fibers, PolarizedInput};
use poised_core::tgeom::{build_embedding, line_from_divisor, Line, PolyhedralDivisor};
use poised_core::tropkit::{
    initial_form, phi, rat_weights, trop_line, trop_x, verify_well_poised,
    verify_well_poised_supplied, SuppliedEmbedding,
};
use poised_core::valkit::{value_semigroup, HomogeneousValuation};

#[derive(Parser)]
#[command(
    name = "poised",
    version,
    about = "Exact pipelines for complexity-one T-varieties given by polyhedral divisors on the projective line",
    after_help = "Exit codes: 0 success, 1 input error, 2 verification failure.\n\
                  Initial forms use the min convention (terms of minimal weight survive);\n\
                  max-convention tools differ by a global sign on weights.\n\
                  Input formats are documented under schemas/ (divisor.v1, valuation.v1, embedding.v1)."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Degree bound for ideal generation and bounded certifications (>= 2)
    #[arg(long, global = true, default_value_t = 6, value_name = "K")]
    degree_bound: u32,

    /// Emit compact single-line JSON instead of pretty-printed JSON
    #[arg(long, global = true)]
    json: bool,

    /// Write the report to this file instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the embedding: cone, dual cone, Hilbert-basis columns, variables
    Embed {
        /// Divisor document (divisor.v1)
        input: PathBuf,
    },
    /// Print the defining ideal: toric binomials plus lifted linear relations
    Ideal {
        /// Divisor document (divisor.v1)
        input: PathBuf,
    },
    /// Print the tropicalizations of the line and of the embedded variety
    Trop {
        /// Divisor document (divisor.v1)
        input: PathBuf,
    },
    /// Print one initial ideal, chosen by tropical cone index or by an explicit weight
    Initial {
        /// Divisor document (divisor.v1)
        input: PathBuf,
        /// Index into the tropical rays, in the order `trop` lists them
        #[arg(long, conflicts_with = "weight", value_name = "INDEX")]
        cone: Option<usize>,
        /// Comma-separated weight on the ambient torus: rank_N lattice entries,
        /// then one entry per boundary form past the zeroth
        #[arg(long, allow_hyphen_values = true, value_name = "W1,W2,...")]
        weight: Option<String>,
    },
    /// Check that every tropical initial ideal is again the ideal of a
    /// degenerated line; exit 2 with a witness when one is not
    WellPoised {
        /// Divisor document (divisor.v1) or supplied embedding (embedding.v1)
        input: PathBuf,
    },
    /// Print the value semigroup of a homogeneous valuation; optionally scan
    /// a rectangular membership grid (target rank 2 only)
    ValueSemigroup {
        /// Divisor document (divisor.v1)
        input: PathBuf,
        /// Valuation document (valuation.v1); overrides --psi/--gamma and the
        /// divisor document's own "valuation" field
        #[arg(long, value_name = "FILE")]
        valuation: Option<PathBuf>,
        /// Valuation matrix rows, semicolon-separated: "1,0;0,1"
        #[arg(long, allow_hyphen_values = true, value_name = "ROWS")]
        psi: Option<String>,
        /// Value of the local parameter, comma-separated: "0,1"
        #[arg(long, allow_hyphen_values = true, value_name = "INTS")]
        gamma: Option<String>,
        /// Boundary-point index used with --psi/--gamma (ignored when the
        /// valuation comes from a file or from the document)
        #[arg(long, default_value_t = 0, value_name = "J")]
        point_index: usize,
        /// Scan the window [UMIN, UMAX] x [VMIN, VMAX] for semigroup members
        #[arg(long, num_args = 4, value_names = ["UMIN", "UMAX", "VMIN", "VMAX"], allow_negative_numbers = true)]
        grid: Option<Vec<i64>>,
    },
    /// Print the Newton-Okounkov body of a polarized divisor under a
    /// full-rank value map (the document must carry a "grading" array)
    NokBody {
        /// Divisor document (divisor.v1) with a "grading" field
        input: PathBuf,
        /// Boundary index of the degeneration (0-based; the interior region
        /// is not a boundary choice and is not offered here)
        #[arg(long, default_value_t = 0, value_name = "J")]
        point_index: usize,
        /// Value-map matrix rows, semicolon-separated; defaults to the
        /// identity map on the slab coordinates
        #[arg(long, allow_hyphen_values = true, requires = "gamma", value_name = "ROWS")]
        psi: Option<String>,
        /// Local-parameter value, comma-separated; defaults with --psi absent
        #[arg(long, allow_hyphen_values = true, requires = "psi", value_name = "INTS")]
        gamma: Option<String>,
    },
    /// Print the special fibers of the equivariant degenerations,
    /// deduplicated up to lattice equivalence (requires a "grading" array)
    TestConfigs {
        /// Divisor document (divisor.v1) with a "grading" field
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, String> {
    if cli.degree_bound < 2 {
        return Err("--degree-bound must be at least 2".into());
    }
    match &cli.command {
        Cmd::Embed { input } => {
            let p = load_pipeline(input)?;
            finish(cli, p.embedding_json(), 0)
        }
        Cmd::Ideal { input } => {
            let p = load_pipeline(input)?;
            let pres = ideal_presentation(&p.embedding, &p.line, &p.divisor, cli.degree_bound)
                .map_err(|e| e.to_string())?;
            finish(cli, pres.to_json(), 0)
        }
        Cmd::Trop { input } => {
            let p = load_pipeline(input)?;
            let report = serde_json::json!({
                "line": trop_line(&p.line).to_json(),
                "variety": trop_x(&p.embedding, &p.line).to_json(),
            });
            finish(cli, report, 0)
        }
        Cmd::Initial { input, cone, weight } => {
            let p = load_pipeline(input)?;
            match (cone, weight) {
                (Some(j), None) => {
                    let report =
                        verify_well_poised(&p.embedding, &p.line, &p.divisor, cli.degree_bound)
                            .map_err(|e| e.to_string())?;
                    let n = report.cones.len();
                    if *j >= n {
                        return Err(format!(
                            "--cone {j} is out of range: the tropical line has {n} rays"
                        ));
                    }
                    let mut v = report.to_json()["cones"][*j].clone();
                    v["degree_bound"] = serde_json::json!(report.degree_bound);
                    finish(cli, v, 0)
                }
                (None, Some(wtext)) => {
                    let r = p.divisor.lattice_rank();
                    let m = p.line.ambient();
                    let v = parse_int_list(wtext, "--weight")?;
                    if v.len() != r + m {
                        return Err(format!(
                            "--weight needs {} comma-separated integers \
                             ({r} lattice entries, then {m} line entries), got {}",
                            r + m,
                            v.len()
                        ));
                    }
                    let pres =
                        ideal_presentation(&p.embedding, &p.line, &p.divisor, cli.degree_bound)
                            .map_err(|e| e.to_string())?;
                    let wvars = phi(&p.embedding, &v);
                    let wr = rat_weights(&wvars);
                    let gens: Vec<String> = pres
                        .all_generators()
                        .iter()
                        .map(|g| initial_form(g, &wr).to_string())
                        .collect();
                    let report = serde_json::json!({
                        "weight": ints_to_i64(&v, "--weight")?,
                        "variable_weights": ints_to_i64(&wvars, "variable weight")?,
                        "initial_gens": gens,
                        "degree_bound": cli.degree_bound,
                    });
                    finish(cli, report, 0)
                }
                (None, None) => Err("pass exactly one of --cone INDEX or --weight W".into()),
                (Some(_), Some(_)) => unreachable!("clap rejects --cone with --weight"),
            }
        }
        Cmd::WellPoised { input } => {
            let doc = load_json(input)?;
            let report = if doc.get("columns").is_some() {
                let (emb, gens, line) = parse_embedding_doc(&doc)?;
                verify_well_poised_supplied(&emb, &gens, &line, cli.degree_bound)
                    .map_err(|e| e.to_string())?
            } else {
                let d = PolyhedralDivisor::from_json(&doc).map_err(|e| e.to_string())?;
                let line = line_from_divisor(&d);
                let e = build_embedding(&d).map_err(|e| e.to_string())?;
                verify_well_poised(&e, &line, &d, cli.degree_bound).map_err(|e| e.to_string())?
            };
            let code = if report.well_poised { 0 } else { 2 };
            finish(cli, report.to_json(), code)
        }
        Cmd::ValueSemigroup {
            input,
            valuation,
            psi,
            gamma,
            point_index,
            grid,
        } => {
            let p = load_pipeline(input)?;
            let val = resolve_valuation(
                valuation.as_ref(),
                psi.as_deref(),
                gamma.as_deref(),
                *point_index,
                &p.doc,
            )?;
            let sg = value_semigroup(&p.embedding, &p.line, &p.divisor, &val)
                .map_err(|e| e.to_string())?;
            let report = match grid {
                None => sg.to_json(),
                Some(w) => {
                    let (umin, umax, vmin, vmax) = (w[0], w[1], w[2], w[3]);
                    if umin > umax || vmin > vmax {
                        return Err(
                            "--grid window is empty: need UMIN <= UMAX and VMIN <= VMAX".into()
                        );
                    }
                    let mut members = Vec::new();
                    let mut non_members = Vec::new();
                    for u in umin..=umax {
                        for v in vmin..=vmax {
                            let q = vec![Int::from(u), Int::from(v)];
                            if sg.contains(&q).map_err(|e| e.to_string())? {
                                members.push(serde_json::json!([u, v]));
                            } else {
                                non_members.push(serde_json::json!([u, v]));
                            }
                        }
                    }
                    serde_json::json!({
                        "semigroup": sg.to_json(),
                        "grid": {
                            "window": [umin, umax, vmin, vmax],
                            "members": members,
                            "non_members": non_members,
                        },
                    })
                }
            };
            finish(cli, report, 0)
        }
        Cmd::NokBody {
            input,
            point_index,
            psi,
            gamma,
        } => {
            let p = load_pipeline(input)?;
            let grading = read_grading(&p.doc)?;
            let pol =
                PolarizedInput::new(p.divisor.clone(), grading).map_err(|e| e.to_string())?;
            let (psi_m, gamma_v) = match (psi, gamma) {
                (Some(ps), Some(gs)) => {
                    (parse_int_rows(ps, "--psi")?, parse_int_list(gs, "--gamma")?)
                }
                (None, None) => pol.identity_value_map(),
                _ => return Err("--psi and --gamma must be given together".into()),
            };
            let body = nok_body(&pol, &p.line, *point_index, &psi_m, &gamma_v)
                .map_err(|e| e.to_string())?;
            let report = serde_json::json!({
                "point_index": point_index,
                "body": body.to_json(),
            });
            finish(cli, report, 0)
        }
        Cmd::TestConfigs { input } => {
            let p = load_pipeline(input)?;
            let grading = read_grading(&p.doc)?;
            let pol =
                PolarizedInput::new(p.divisor.clone(), grading).map_err(|e| e.to_string())?;
            let fibers = test_config_fibers(&pol, &p.line, cli.degree_bound)
                .map_err(|e| e.to_string())?;
            let report = serde_json::json!({
                "degree_bound": cli.degree_bound,
                "fibers": fibers.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
            });
            finish(cli, report, 0)
        }
    }
}

/// Divisor document plus everything downstream commands derive from it.
struct Pipeline {
    divisor: PolyhedralDivisor,
    line: Line,
    embedding: poised_core::tgeom::SemiCanonicalEmbedding,
    doc: serde_json::Value,
}

impl Pipeline {
    fn embedding_json(&self) -> serde_json::Value {
        self.embedding.to_json()
    }
}

fn load_pipeline(path: &PathBuf) -> Result<Pipeline, String> {
    let doc = load_json(path)?;
    if doc.get("columns").is_some() {
        return Err(format!(
            "{}: this looks like a supplied embedding (embedding.v1); \
             this command needs a divisor document (divisor.v1)",
            path.display()
        ));
    }
    let divisor = PolyhedralDivisor::from_json(&doc).map_err(|e| e.to_string())?;
    let line = line_from_divisor(&divisor);
    let embedding = build_embedding(&divisor).map_err(|e| e.to_string())?;
    Ok(Pipeline {
        divisor,
        line,
        embedding,
        doc,
    })
}

fn load_json(path: &PathBuf) -> Result<serde_json::Value, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: not valid JSON: {e}", path.display()))
}

fn finish(cli: &Cli, v: serde_json::Value, code: u8) -> Result<u8, String> {
    let mut text = if cli.json {
        serde_json::to_string(&v)
    } else {
        serde_json::to_string_pretty(&v)
    }
    .map_err(|e| format!("cannot serialize report: {e}"))?;
    text.push('\n');
    match &cli.output {
        Some(path) => fs::write(path, &text)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn resolve_valuation(
    file: Option<&PathBuf>,
    psi: Option<&str>,
    gamma: Option<&str>,
    point_index: usize,
    doc: &serde_json::Value,
) -> Result<HomogeneousValuation, String> {
    if let Some(path) = file {
        let v = load_json(path)?;
        return HomogeneousValuation::from_json(&v).map_err(|e| e.to_string());
    }
    match (psi, gamma) {
        (Some(ps), Some(gs)) => {
            let rows = parse_int_rows(ps, "--psi")?;
            let g = parse_int_list(gs, "--gamma")?;
            return HomogeneousValuation::new(rows, point_index, g).map_err(|e| e.to_string());
        }
        (Some(_), None) => return Err("--psi needs --gamma".into()),
        (None, Some(_)) => return Err("--gamma needs --psi".into()),
        (None, None) => {}
    }
    if let Some(v) = doc.get("valuation") {
        return HomogeneousValuation::from_json(v).map_err(|e| e.to_string());
    }
    Err("no valuation given: pass --valuation FILE or --psi/--gamma, \
         or add a \"valuation\" object to the divisor document"
        .into())
}

fn read_grading(doc: &serde_json::Value) -> Result<Vec<Int>, String> {
    let arr = doc.get("grading").and_then(|g| g.as_array()).ok_or_else(|| {
        "/grading: this command treats the divisor as polarized; \
         add a \"grading\" array of integers to the document"
            .to_string()
    })?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| j_int(v, &format!("/grading/{i}")))
        .collect()
}

fn parse_embedding_doc(
    doc: &serde_json::Value,
) -> Result<(SuppliedEmbedding, Vec<XPolynomial>, Line), String> {
    let rank = doc
        .get("rank_N")
        .and_then(|v| v.as_u64())
        .filter(|&r| r > 0)
        .ok_or("/rank_N: expected a positive integer")? as usize;
    let m = doc
        .get("m")
        .and_then(|v| v.as_u64())
        .filter(|&m| m > 0)
        .ok_or("/m: expected a positive integer")? as usize;
    let cols_v = doc
        .get("columns")
        .and_then(|v| v.as_array())
        .ok_or("/columns: expected an array")?;
    let mut columns = Vec::with_capacity(cols_v.len());
    for (i, cv) in cols_v.iter().enumerate() {
        let row = cv
            .as_array()
            .ok_or_else(|| format!("/columns/{i}: expected an array"))?;
        if row.len() != rank + m {
            return Err(format!(
                "/columns/{i}: expected {} entries (rank_N + m)",
                rank + m
            ));
        }
        let mut out = Vec::with_capacity(row.len());
        for (k, e) in row.iter().enumerate() {
            out.push(j_int(e, &format!("/columns/{i}/{k}"))?);
        }
        columns.push(out);
    }
    let n = columns.len();
    let emb = SuppliedEmbedding::new(rank, m, columns).map_err(|e| e.to_string())?;
    let gens_v = doc
        .get("generators")
        .and_then(|v| v.as_array())
        .ok_or("/generators: expected an array")?;
    let mut gens = Vec::with_capacity(gens_v.len());
    for (i, gv) in gens_v.iter().enumerate() {
        gens.push(parse_xpoly(gv, &format!("/generators/{i}"), n)?);
    }
    let forms_v = doc
        .get("line_forms")
        .and_then(|v| v.as_array())
        .ok_or("/line_forms: expected an array")?;
    if forms_v.len() != m + 1 {
        return Err(format!("/line_forms: expected {} forms (m + 1)", m + 1));
    }
    let mut forms = Vec::with_capacity(forms_v.len());
    for (i, fv) in forms_v.iter().enumerate() {
        let pair = fv
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| format!("/line_forms/{i}: expected a pair [c0, c1]"))?;
        let c0 = j_rat(&pair[0], &format!("/line_forms/{i}/0"))?;
        let c1 = j_rat(&pair[1], &format!("/line_forms/{i}/1"))?;
        forms.push((c0, c1));
    }
    let line = Line::from_forms(&forms).map_err(|e| e.to_string())?;
    Ok((emb, gens, line))
}

fn parse_xpoly(v: &serde_json::Value, ptr: &str, nvars: usize) -> Result<XPolynomial, String> {
    let terms_v = v
        .get("terms")
        .and_then(|t| t.as_array())
        .ok_or_else(|| format!("{ptr}/terms: expected an array"))?;
    if terms_v.is_empty() {
        return Err(format!("{ptr}/terms: a generator needs at least one term"));
    }
    let mut terms = Vec::with_capacity(terms_v.len());
    for (i, tv) in terms_v.iter().enumerate() {
        let ev = tv
            .get("exp")
            .and_then(|e| e.as_array())
            .ok_or_else(|| format!("{ptr}/terms/{i}/exp: expected an array"))?;
        if ev.len() != nvars {
            return Err(format!(
                "{ptr}/terms/{i}/exp: expected {nvars} entries (one per column)"
            ));
        }
        let mut exp = Vec::with_capacity(ev.len());
        for (k, x) in ev.iter().enumerate() {
            let e = x
                .as_u64()
                .ok_or_else(|| format!("{ptr}/terms/{i}/exp/{k}: expected a nonnegative integer"))?;
            exp.push(
                u32::try_from(e)
                    .map_err(|_| format!("{ptr}/terms/{i}/exp/{k}: exponent too large"))?,
            );
        }
        let coeff = j_rat(
            tv.get("coeff").unwrap_or(&serde_json::Value::Null),
            &format!("{ptr}/terms/{i}/coeff"),
        )?;
        terms.push((exp, coeff));
    }
    Ok(XPolynomial::from_terms(terms))
}

fn parse_int_list(s: &str, flag: &str) -> Result<Vec<Int>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<i64>()
                .map(Int::from)
                .map_err(|_| format!("{flag}: cannot parse {t:?} as an integer"))
        })
        .collect()
}

fn parse_int_rows(s: &str, flag: &str) -> Result<Vec<Vec<Int>>, String> {
    s.split(';').map(|row| parse_int_list(row, flag)).collect()
}

fn ints_to_i64(v: &[Int], what: &str) -> Result<Vec<i64>, String> {
    v.iter()
        .map(|x| i64::try_from(x).map_err(|_| format!("{what}: entry exceeds the 64-bit range")))
        .collect()
}

fn j_int(v: &serde_json::Value, ptr: &str) -> Result<Int, String> {
    if let Some(n) = v.as_i64() {
        return Ok(Int::from(n));
    }
    if let Some(s) = v.as_str() {
        if let Ok(x) = s.trim().parse::<Int>() {
            return Ok(x);
        }
    }
    Err(format!("{ptr}: expected an integer (number or decimal string)"))
}

fn j_rat(v: &serde_json::Value, ptr: &str) -> Result<Rat, String> {
    if let Some(n) = v.as_i64() {
        return Ok(Rat::from_integer(Int::from(n)));
    }
    if let Some(s) = v.as_str() {
        return parse_rat(s).map_err(|e| format!("{ptr}: {e}"));
    }
    Err(format!("{ptr}: expected a rational (number or \"p/q\" string)"))
}
