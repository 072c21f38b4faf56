use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use qalpha_core::corpus::{converged_corpus, default_corpus, generate_at, load_corpus, CorpusSpec};
use qalpha_core::filterbank::{build_profiles, decompose_with, BandDecomposition, ProfileShape};
use qalpha_core::grid::{enumerate_cubes, validate_shape, Cube, GridFunction};
use qalpha_core::norms::{campanato, dyadic_lp_norm, lp_morrey, morrey_besov, q_alpha, NormReport};
use qalpha_core::verify::{
    embedding_check, equivalence_report, fubini_sweep, kernel_decay_check, lemma23_sweep, write_json, DecayReport,
};
use qalpha_core::{Error, Result};
use serde_json::json;

use crate::args::*;

pub const OUT_DIR_VAR: &str = "QALPHA_OUT_DIR";

/// Where a report goes. Summary lines go to stdout when the report is in a
/// file and to stderr when the report itself occupies stdout.
struct Sink {
    path: Option<PathBuf>,
    format: Format,
}

impl Sink {
    fn new(args: &OutputArgs, default_stem: &str) -> Self {
        let by_extension = |p: &Path| match p.extension().and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            _ => Format::Json,
        };
        let format = args.format.or_else(|| args.out.as_deref().map(by_extension)).unwrap_or(Format::Json);
        let path = args.out.clone().or_else(|| {
            std::env::var_os(OUT_DIR_VAR).map(|dir| {
                let ext = if format == Format::Csv { "csv" } else { "json" };
                PathBuf::from(dir).join(format!("{default_stem}.{ext}"))
            })
        });
        Self { path, format }
    }

    fn write(&self, body: impl FnOnce(&mut dyn Write, Format) -> Result<()>) -> Result<()> {
        match &self.path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                let mut w = BufWriter::new(File::create(p)?);
                body(&mut w, self.format)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                body(&mut w, self.format)?;
                if self.format == Format::Json {
                    writeln!(w)?;
                }
            }
        }
        Ok(())
    }

    fn summary(&self, line: &str) {
        if self.path.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}

fn shape_of(profile: Profile) -> ProfileShape {
    match profile {
        Profile::Linear => ProfileShape::Linear,
        Profile::Logarithmic => ProfileShape::Logarithmic,
    }
}

fn specs_or(path: Option<&Path>, fallback: impl FnOnce() -> Vec<CorpusSpec>) -> Result<Vec<CorpusSpec>> {
    match path {
        Some(p) if !p.exists() => Err(Error::config(format!("corpus file {} not found", p.display()))),
        Some(p) => load_corpus(p),
        None => Ok(fallback()),
    }
}

/// Input functions with their ids: one grid file, or every corpus member.
fn load_functions(source: &SourceArgs, shape: &ShapeArgs) -> Result<Vec<(String, GridFunction)>> {
    if let Some(path) = &source.input {
        let file = File::open(path).map_err(|e| Error::config(format!("cannot open {}: {e}", path.display())))?;
        let f = GridFunction::read_text(BufReader::new(file))?;
        if shape.dim.is_some_and(|n| n != f.dim()) || shape.size.is_some_and(|s| s != f.size()) {
            return Err(Error::config(format!(
                "{} holds an n = {}, N = {} grid, which contradicts --n/--size",
                path.display(),
                f.dim(),
                f.size()
            )));
        }
        let id = path.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned());
        return Ok(vec![(id, f)]);
    }
    let specs = specs_or(source.corpus.as_deref(), default_corpus)?;
    specs
        .iter()
        .map(|spec| {
            let dim = shape.dim.or(spec.dim).unwrap_or(1);
            let size = shape
                .size
                .or(spec.size)
                .ok_or_else(|| Error::config(format!("{}: no grid size; pass --size", spec.label())))?;
            Ok((spec.label(), generate_at(spec, dim, size)?))
        })
        .collect()
}

fn sanitize(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || ".-".contains(c) { c } else { '_' }).collect()
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let specs = specs_or(args.corpus.as_deref(), default_corpus)?;
    let dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let shape = &args.shape;
    // generate everything before writing anything
    let mut generated = Vec::with_capacity(specs.len());
    for spec in &specs {
        let dim = shape.dim.or(spec.dim).unwrap_or(1);
        let size = shape
            .size
            .or(spec.size)
            .ok_or_else(|| Error::config(format!("{}: no grid size; pass --size", spec.label())))?;
        generated.push((spec.label(), generate_at(spec, dim, size)?));
    }
    std::fs::create_dir_all(&dir)?;
    for (i, (label, f)) in generated.iter().enumerate() {
        let path = dir.join(format!("{i:02}_{}.grid", sanitize(label)));
        let mut w = BufWriter::new(File::create(&path)?);
        f.write_text(&mut w)?;
        w.flush()?;
        println!("{}", path.display());
    }
    Ok(())
}

fn cube_family(f: &GridFunction, level_max: Option<u32>, shifted: bool) -> Result<Vec<Cube>> {
    let l = validate_shape(f.dim(), f.size())?;
    let deepest = l - qalpha_core::grid::MIN_LOG2_SIZE;
    enumerate_cubes(f.dim(), l, level_max.unwrap_or(deepest), shifted)
}

fn decomposition(f: &GridFunction, j_min: i64, profile: Profile) -> Result<BandDecomposition> {
    let bank = build_profiles(f.dim(), f.log2_size(), j_min, shape_of(profile))?;
    decompose_with(f, &bank)
}

pub fn norm(args: &NormArgs) -> Result<()> {
    let sink = Sink::new(&args.output, &format!("norm_{}", format!("{:?}", args.kind).to_lowercase()));
    let functions = load_functions(&args.source, &args.shape)?;
    let mut entries = Vec::with_capacity(functions.len());
    for (id, f) in &functions {
        let cubes = cube_family(f, args.level_max, args.shifted)?;
        let n = f.dim() as f64;
        let entry = match args.kind {
            NormName::Qalpha => Entry::Norm(q_alpha(f, args.alpha, &cubes)?),
            NormName::Campanato => {
                Entry::Norm(campanato(f, args.lambda.unwrap_or(n - 2.0 * args.alpha), &cubes)?)
            }
            NormName::Lpmorrey => {
                Entry::Norm(lp_morrey(f, args.alpha, &cubes, &decomposition(f, args.j_min, args.profile)?)?)
            }
            NormName::Dyadiclp => Entry::Norm(dyadic_lp_norm(
                f,
                args.alpha,
                &cubes,
                args.k_max,
                &decomposition(f, args.j_min, args.profile)?,
            )?),
            NormName::Mb => {
                let d = decomposition(f, args.j_min, args.profile)?;
                Entry::Mb(morrey_besov(f, args.alpha, n - 2.0 * args.alpha, 2.0, 2.0, &cubes, &d)?)
            }
        };
        entries.push((id.clone(), entry));
    }
    sink.write(|w, format| match format {
        Format::Json => {
            let list: Vec<_> = entries.iter().map(|(id, e)| json!({ "id": id, "report": e.to_json() })).collect();
            write_json(&list, w)
        }
        Format::Csv => write_norm_csv(&entries, w),
    })?;
    let label = format!("{:?}", args.kind).to_lowercase();
    for (id, e) in &entries {
        sink.summary(&format!("{id}: {label} = {:e}", e.value()));
    }
    Ok(())
}

enum Entry {
    Norm(NormReport),
    Mb(qalpha_core::norms::MorreyBesovReport),
}

impl Entry {
    fn value(&self) -> f64 {
        match self {
            Entry::Norm(r) => r.value,
            Entry::Mb(r) => r.value,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Entry::Norm(r) => serde_json::to_value(r),
            Entry::Mb(r) => serde_json::to_value(r),
        }
        .expect("reports serialize")
    }
}

fn write_norm_csv(entries: &[(String, Entry)], w: &mut dyn Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let Some((_, first)) = entries.first() else {
        return Ok(());
    };
    match first {
        Entry::Norm(r) => {
            let dim = r.table.first().map_or(1, |c| c.cube.dim());
            let mut header = vec!["id".to_string(), "kind".into(), "exponent".into()];
            header.extend((0..dim).map(|a| format!("corner_{a}")));
            header.extend(["edge".into(), "value".into()]);
            out.write_record(&header)?;
        }
        Entry::Mb(_) => out.write_record(["id", "band", "sup"])?,
    }
    for (id, e) in entries {
        match e {
            Entry::Norm(r) => {
                for cv in &r.table {
                    let mut row = vec![id.clone(), r.kind.name().to_string(), r.exponent.to_string()];
                    row.extend(cv.cube.corner.iter().map(|c| c.to_string()));
                    row.extend([cv.cube.edge.to_string(), cv.value.to_string()]);
                    out.write_record(&row)?;
                }
            }
            Entry::Mb(r) => {
                for b in &r.bands {
                    out.write_record([id.clone(), b.band.to_string(), b.sup.to_string()])?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn decompose(args: &DecomposeArgs) -> Result<()> {
    let sink = Sink::new(&args.output, "decompose");
    let functions = load_functions(&args.source, &args.shape)?;
    let mut rows = Vec::new();
    for (id, f) in &functions {
        let d = decomposition(f, args.j_min, args.profile)?;
        let rebuilt = d.reconstruct();
        let error = rebuilt.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let bands: Vec<_> = (d.j_min..=d.j_max)
            .map(|j| {
                let b = d.band(j).expect("in range");
                json!({ "j": j, "energy": b.l2_squared(), "max_abs": b.max_abs() })
            })
            .collect();
        rows.push(json!({
            "id": id,
            "j_min": d.j_min,
            "j_max": d.j_max,
            "lowpass_energy": d.lowpass.l2_squared(),
            "lowpass_max_abs": d.lowpass.max_abs(),
            "reconstruction_error": error,
            "bands": bands,
        }));
    }
    sink.write(|w, format| match format {
        Format::Json => write_json(&rows, w),
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["id", "band", "energy", "max_abs"])?;
            for (row, (id, _)) in rows.iter().zip(&functions) {
                out.write_record([id.clone(), "low".into(), row["lowpass_energy"].to_string(), row["lowpass_max_abs"].to_string()])?;
                for b in row["bands"].as_array().expect("array") {
                    out.write_record([id.clone(), b["j"].to_string(), b["energy"].to_string(), b["max_abs"].to_string()])?;
                }
            }
            out.flush()?;
            Ok(())
        }
    })?;
    for row in &rows {
        sink.summary(&format!("{}: reconstruction error {:e}", row["id"].as_str().unwrap_or(""), row["reconstruction_error"].as_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

fn check_kernel_order(report: &DecayReport) -> Result<()> {
    match report.samples.iter().find(|s| s.k_full < s.k_allowed) {
        Some(s) => Err(Error::Invariant(format!("k_full < k_allowed at x = {:?}, y = {:?}", s.x, s.y))),
        None => Ok(()),
    }
}

pub fn kernel(args: &KernelArgs) -> Result<()> {
    let sink = Sink::new(&args.output, "kernel");
    let p = &args.pairs;
    let report = kernel_decay_check(p.alpha, p.m, p.dim, p.pairs, p.seed)?;
    sink.write(|w, format| match format {
        Format::Json => write_json(&report, w),
        Format::Csv => report.write_csv(w),
    })?;
    sink.summary(&format!(
        "{} pairs: max k_full/k_allowed = {:.6}, max #ring-1/m^n = {:.4}, max #ring-2 = {}",
        report.samples.len(),
        report.equivalence_constant,
        report.max_first_normalized,
        report.max_second
    ));
    check_kernel_order(&report)
}

pub fn verify(cmd: &VerifyCommand) -> Result<()> {
    match cmd {
        VerifyCommand::Equivalence(a) => {
            let sink = Sink::new(&a.output, "equivalence");
            let specs = specs_or(a.corpus.corpus.as_deref(), || converged_corpus(a.alpha))?;
            let report = equivalence_report(&specs, a.alpha, a.corpus.dim, &a.sizes)?;
            sink.write(|w, format| match format {
                Format::Json => write_json(&report, w),
                Format::Csv => report.write_csv(w),
            })?;
            for t in report.trends.iter().filter(|t| t.flagged) {
                sink.summary(&format!("{}: ratio drifts {:.1}% per doubling", t.id, 100.0 * t.max_drift));
            }
            match (report.c_low, report.c_high) {
                (Some(lo), Some(hi)) => sink.summary(&format!("c_low = {lo:.6}, c_high = {hi:.6}, spread = {:.6}", hi / lo)),
                _ => sink.summary("no non-constant members"),
            }
            if let Some(row) = report.rows.iter().find(|r| r.status == "one side zero") {
                return Err(Error::Invariant(format!("{} at N = {}: exactly one norm vanishes", row.id, row.size)));
            }
            Ok(())
        }
        VerifyCommand::Fubini(a) => {
            let sink = Sink::new(&a.output, "fubini");
            let specs = specs_or(a.corpus.corpus.as_deref(), default_corpus)?;
            let report = fubini_sweep(&specs, &a.alphas, a.corpus.dim, a.size, a.level_max, a.k_max)?;
            sink.write(|w, format| match format {
                Format::Json => write_json(&report, w),
                Format::Csv => report.write_csv(w),
            })?;
            sink.summary(&format!(
                "max discrepancy {:e} over {} checks ({} level/K combinations too deep, skipped)",
                report.max_discrepancy,
                report.records.len(),
                report.skipped
            ));
            if !(report.max_discrepancy < 1e-12) {
                return Err(Error::Invariant(format!("rearrangement discrepancy {:e}", report.max_discrepancy)));
            }
            Ok(())
        }
        VerifyCommand::Lemma23(a) => {
            let sink = Sink::new(&a.output, "lemma23");
            let specs = specs_or(a.corpus.corpus.as_deref(), || converged_corpus(a.alpha))?;
            let report = lemma23_sweep(&specs, a.alpha, a.corpus.dim, a.size, &a.ms, &a.ks)?;
            sink.write(|w, format| match format {
                Format::Json => write_json(&report, w),
                Format::Csv => report.write_csv(w),
            })?;
            sink.summary(&format!("max ratio {:.6} over {} records", report.max_ratio, report.records.len()));
            Ok(())
        }
        VerifyCommand::Decay(a) => {
            let sink = Sink::new(&a.output, "decay");
            let p = &a.pairs;
            let report = kernel_decay_check(p.alpha, p.m, p.dim, p.pairs, p.seed)?;
            sink.write(|w, format| match format {
                Format::Json => write_json(
                    &json!({
                        "alpha": report.alpha,
                        "m": report.m,
                        "n": report.dim,
                        "pairs": report.samples.len(),
                        "seed": report.seed,
                        "slope": report.slope,
                        "expected_slope": report.expected_slope,
                        "max_scaled_full": report.max_scaled_full,
                        "max_scaled_allowed": report.max_scaled_allowed,
                        "equivalence_constant": report.equivalence_constant,
                        "max_first_normalized": report.max_first_normalized,
                        "max_second": report.max_second,
                    }),
                    w,
                ),
                Format::Csv => {
                    let mut out = csv::Writer::from_writer(w);
                    out.write_record(["log_distance", "log_k_full", "log_k_allowed"])?;
                    for s in &report.samples {
                        out.write_record([s.distance.ln(), s.k_full.ln(), s.k_allowed.ln()].map(|v| v.to_string()))?;
                    }
                    out.flush()?;
                    Ok(())
                }
            })?;
            sink.summary(&format!("slope {:.4} (expected {:.4})", report.slope, report.expected_slope));
            check_kernel_order(&report)
        }
        VerifyCommand::Embedding(a) => {
            let sink = Sink::new(&a.output, "embedding");
            let specs = specs_or(a.corpus.corpus.as_deref(), || converged_corpus(a.alpha))?;
            let report = embedding_check(&specs, a.alpha, a.corpus.dim, a.size)?;
            sink.write(|w, format| match format {
                Format::Json => write_json(&report, w),
                Format::Csv => report.write_csv(w),
            })?;
            if let Some(r) = report.max_ratio {
                sink.summary(&format!("max q_alpha / morrey_besov = {r:.6}"));
            }
            if !report.violations.is_empty() {
                return Err(Error::Invariant(format!(
                    "Morrey-Besov norm vanishes while Q_alpha does not: {}",
                    report.violations.join(", ")
                )));
            }
            Ok(())
        }
    }
}
