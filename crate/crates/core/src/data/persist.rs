use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::dataset::{dataset_stats, InteractionDataset};
use super::popularity::{popularity_bins, tail_mask, PopBin};
use crate::error::{Error, Result};

pub const DATASET_FILES: [&str; 6] = ["mapping.tsv", "train.tsv", "val.tsv", "test.tsv", "popularity.tsv", "stats.tsv"];

fn write(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn split_body(split: &[Vec<usize>]) -> String {
    let mut s = String::new();
    for (u, items) in split.iter().enumerate() {
        for i in items {
            writeln!(s, "{u}\t{i}").unwrap();
        }
    }
    s
}

/// Writes the prepared dataset directory. Output is a pure function of the
/// dataset, so re-running on the same input reproduces every byte.
pub fn write_dataset(ds: &InteractionDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;

    let mut mapping = String::from("kind\toriginal\tdense\n");
    for (d, orig) in ds.users.iter().enumerate() {
        writeln!(mapping, "user\t{orig}\t{d}").unwrap();
    }
    for (d, orig) in ds.items.iter().enumerate() {
        writeln!(mapping, "item\t{orig}\t{d}").unwrap();
    }
    write(dir, "mapping.tsv", &mapping)?;
    write(dir, "train.tsv", &split_body(&ds.train))?;
    write(dir, "val.tsv", &split_body(&ds.val))?;
    write(dir, "test.tsv", &split_body(&ds.test))?;

    let counts = ds.train_counts();
    let bins = popularity_bins(&counts)?;
    let tail = tail_mask(&counts)?;
    let mut pop = String::from("item\tcount\tbin\ttail\n");
    for i in 0..counts.len() {
        writeln!(pop, "{i}\t{}\t{}\t{}", counts[i], bins[i].name(), u8::from(tail[i])).unwrap();
    }
    write(dir, "popularity.tsv", &pop)?;

    let st = dataset_stats(ds);
    let stats = format!(
        "users\titems\tinteractions\tsparsity_pct\n{}\t{}\t{}\t{:.4}\n",
        st.users, st.items, st.interactions, st.sparsity_pct
    );
    write(dir, "stats.tsv", &stats)
}

fn read(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn parse_usize(field: &str, line: usize, file: &str) -> Result<usize> {
    field.parse().map_err(|_| Error::Parse { line, message: format!("{file}: `{field}` is not a dense id") })
}

fn read_split(dir: &Path, name: &str, n_users: usize, n_items: usize) -> Result<Vec<Vec<usize>>> {
    let mut split = vec![Vec::new(); n_users];
    for (idx, line) in read(dir, name)?.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut f = line.split('\t');
        let (u, i) = match (f.next(), f.next(), f.next()) {
            (Some(u), Some(i), None) => (parse_usize(u, idx + 1, name)?, parse_usize(i, idx + 1, name)?),
            _ => return Err(Error::Parse { line: idx + 1, message: format!("{name}: expected user<TAB>item") }),
        };
        if u >= n_users || i >= n_items {
            return Err(Error::Parse { line: idx + 1, message: format!("{name}: id out of range") });
        }
        split[u].push(i);
    }
    Ok(split)
}

pub fn read_dataset(dir: &Path) -> Result<InteractionDataset> {
    let mut users = Vec::new();
    let mut items = Vec::new();
    for (idx, line) in read(dir, "mapping.tsv")?.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(Error::Parse { line: idx + 1, message: "mapping.tsv: expected 3 fields".into() });
        }
        let dense = parse_usize(f[2], idx + 1, "mapping.tsv")?;
        let target = match f[0] {
            "user" => &mut users,
            "item" => &mut items,
            other => {
                return Err(Error::Parse { line: idx + 1, message: format!("mapping.tsv: unknown kind `{other}`") })
            }
        };
        if dense != target.len() {
            return Err(Error::Parse { line: idx + 1, message: "mapping.tsv: dense ids out of order".into() });
        }
        target.push(f[1].to_string());
    }
    let (nu, ni) = (users.len(), items.len());
    if nu == 0 || ni == 0 {
        return Err(Error::EmptyDataset(format!("{} lists no users or items", dir.display())));
    }
    Ok(InteractionDataset {
        train: read_split(dir, "train.tsv", nu, ni)?,
        val: read_split(dir, "val.tsv", nu, ni)?,
        test: read_split(dir, "test.tsv", nu, ni)?,
        users,
        items,
    })
}

/// Parses `popularity.tsv` back into per-item (count, bin, tail) rows.
pub fn read_popularity(dir: &Path) -> Result<Vec<(u64, PopBin, bool)>> {
    let mut rows = Vec::new();
    for (idx, line) in read(dir, "popularity.tsv")?.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split('\t').collect();
        let bad = || Error::Parse { line: idx + 1, message: "popularity.tsv: malformed row".into() };
        if f.len() != 4 {
            return Err(bad());
        }
        let count = f[1].parse().map_err(|_| bad())?;
        let bin = PopBin::from_name(f[2]).ok_or_else(bad)?;
        let tail = match f[3] {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        };
        rows.push((count, bin, tail));
    }
    Ok(rows)
}
