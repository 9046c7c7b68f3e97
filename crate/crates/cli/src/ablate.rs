use std::fmt::Write as _;
use std::path::Path;

use fairdiff::data::Split;
use fairdiff::metrics::{tradeoff, Direction, MetricsReport};
use fairdiff::trainer::{evaluate_checkpoint, train_joint, TrainConfig};
use fairdiff::{Error, Result};

use crate::manifest::{dataset_hash, write_file, Manifest};
use crate::table::{fmt_value, render_tsv};
use crate::train::{load_data, run_diffrec, steps_tsv};

pub const VARIANTS: [&str; 6] = ["no_d1", "no_d2", "no_d3", "no_tail_bonus", "no_ag", "no_pop"];

/// The base config with the single knob of `variant` changed.
pub fn variant_config(base: &TrainConfig, variant: &str) -> Result<TrainConfig> {
    let mut c = base.clone();
    match variant {
        "no_d1" => c.use_d1 = false,
        "no_d2" => c.use_d2 = false,
        "no_d3" => c.use_d3 = false,
        "no_tail_bonus" => c.eta = 0.0,
        "no_ag" => c.constant_w = Some(1.0),
        "no_pop" => c.lambda_pop = 0.0,
        _ => {
            return Err(Error::Config {
                key: "variants".into(),
                line: 0,
                message: format!("unknown variant `{variant}` (valid: {})", VARIANTS.join(", ")),
            })
        }
    }
    Ok(c)
}

/// Config key each variant is allowed to change.
pub fn variant_knob(variant: &str) -> Option<&'static str> {
    Some(match variant {
        "no_d1" => "use_d1",
        "no_d2" => "use_d2",
        "no_d3" => "use_d3",
        "no_tail_bonus" => "eta",
        "no_ag" => "constant_w",
        "no_pop" => "lambda_pop",
        _ => return None,
    })
}

pub fn resolve_variants(requested: Option<&[String]>) -> Result<Vec<String>> {
    let list: Vec<String> = match requested {
        Some(v) => v.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None => VARIANTS.iter().map(|s| s.to_string()).collect(),
    };
    for v in &list {
        if !VARIANTS.contains(&v.as_str()) {
            return Err(Error::Config {
                key: "variants".into(),
                line: 0,
                message: format!("unknown variant `{v}` (valid: {})", VARIANTS.join(", ")),
            });
        }
    }
    Ok(list)
}

fn tradeoff_cell(dir: Direction, base: &MetricsReport, m: &MetricsReport, metric: &str, k: usize) -> String {
    let (Some(b), Some(c)) = (base.cutoff(k), m.cutoff(k)) else { return "NA".into() };
    let (bm, mm) = (b.get(metric).unwrap_or(f64::NAN), c.get(metric).unwrap_or(f64::NAN));
    match tradeoff(dir, bm, mm, b.ndcg, c.ndcg) {
        Ok(t) => fmt_value(t.value),
        Err(_) => "NA".into(),
    }
}

/// `variant, NDCG, Gini, T_Gini, APLT, T_APLT` with the baseline first.
pub fn ablation_tsv(base: &MetricsReport, rows: &[MetricsReport], k: usize) -> String {
    let mut s = String::from("variant\tNDCG\tGini\tT_Gini\tAPLT\tT_APLT\n");
    let b = base.cutoff(k).expect("report covers the ablation cutoff");
    let _ = writeln!(s, "{}\t{:.6}\t{:.6}\tNA\t{:.6}\tNA", base.model, b.ndcg, b.gini, b.aplt);
    for r in rows {
        let c = r.cutoff(k).expect("report covers the ablation cutoff");
        let _ = writeln!(
            s,
            "{}\t{:.6}\t{:.6}\t{}\t{:.6}\t{}",
            r.model,
            c.ndcg,
            c.gini,
            tradeoff_cell(Direction::LowerIsBetter, base, r, "Gini", k),
            c.aplt,
            tradeoff_cell(Direction::HigherIsBetter, base, r, "APLT", k)
        );
    }
    s
}

pub fn run(
    base: &TrainConfig,
    data: &Path,
    variants: &[String],
    k: usize,
    out: &Path,
    pretty: bool,
    mut manifest: Manifest,
) -> Result<()> {
    let configs: Vec<(String, TrainConfig)> =
        variants.iter().map(|v| Ok((v.clone(), variant_config(base, v)?))).collect::<Result<_>>()?;
    for (v, c) in &configs {
        c.validate(true)?;
        let diff = base.diff(c);
        if diff != [variant_knob(v).expect("variant was resolved")] {
            return Err(Error::Config {
                key: "variants".into(),
                line: 0,
                message: format!("variant `{v}` changes {diff:?} rather than its single knob"),
            });
        }
    }

    manifest.push("input.data", data.display());
    manifest.push("input.dataset_sha256", dataset_hash(data)?);
    manifest.push("output", out.display());
    manifest.push("variants", variants.join(","));
    manifest.push("k", k);
    manifest.push_config("config", &base.to_kv());
    manifest.write(out)?;

    let (ds, profile) = load_data(data, base.prior())?;
    let diffrec = run_diffrec(&ds, &profile, base, &out.join("diffrec"))?;
    let weak = diffrec.weak_checkpoint(base.e_weak)?;
    let seed = base.seed;
    let baseline = evaluate_checkpoint("diffrec", &ds, &diffrec.best, &profile.tail, Split::Test, &[k], seed)?;

    let mut rows = Vec::new();
    for (v, c) in &configs {
        write_file(&out.join("configs"), &format!("{v}.cfg"), &c.to_kv())?;
        let outcome = train_joint(&ds, &profile, c, weak, &mut |e| {
            eprintln!("[{v}] epoch {:>3}  L_base {:.4}  Recall@20 {:.4}", e.epoch, e.l_base, e.recall20)
        })?;
        write_file(&out.join("steps"), &format!("{v}.tsv"), &steps_tsv(&outcome.steps))?;
        if let Some(e) = outcome.aborted {
            return Err(e);
        }
        outcome.best.save(&out.join("checkpoints").join(format!("{v}.ckpt")))?;
        rows.push(evaluate_checkpoint(v, &ds, &outcome.best, &profile.tail, Split::Test, &[k], seed)?);
    }
    let table = ablation_tsv(&baseline, &rows, k);
    write_file(out, "ablation.tsv", &table)?;
    if pretty {
        print!("{}", render_tsv(&table));
    }
    Ok(())
}
