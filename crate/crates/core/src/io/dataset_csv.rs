use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::data::{Dataset, Label, LabeledPoint, Metadata, Provenance};
use crate::error::{Error, Result};

/// Path of the metadata sidecar next to a dataset CSV.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta")
}

/// Writes `label,sp0..,inv0..` rows. Values use the shortest decimal text
/// that parses back to the same `f64`.
pub fn write_dataset_csv<W: Write>(d: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string()];
    header.extend((0..d.sp_dim()).map(|k| format!("sp{k}")));
    header.extend((0..d.inv_dim()).map(|k| format!("inv{k}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for p in d.points() {
        row.clear();
        row.push(if p.y == Label::Pos {
            "1".to_string()
        } else {
            "-1".to_string()
        });
        row.extend(p.x_sp.iter().map(f64::to_string));
        row.extend(p.x_inv.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_meta<W: Write>(d: &Dataset, mut out: W) -> Result<()> {
    let m = d.meta();
    let p = m.provenance;
    writeln!(out, "generator={}", m.generator)?;
    writeln!(out, "seed={}", m.seed.map(|s| s.to_string()).unwrap_or_default())?;
    writeln!(out, "sp_scale={}", d.sp_scale())?;
    writeln!(out, "sp_two_valued={}", d.is_two_valued())?;
    writeln!(out, "predictive_inv={}", p.predictive_inv)?;
    writeln!(out, "stable_inv_marginal={}", p.stable_inv_marginal)?;
    writeln!(out, "cond_independent={}", p.cond_independent)?;
    writeln!(out, "two_valued_sp={}", p.two_valued_sp)?;
    writeln!(out, "identity_mapping={}", p.identity_mapping)?;
    for (k, v) in &m.extra {
        writeln!(out, "extra.{k}={v}")?;
    }
    Ok(())
}

/// Writes the dataset CSV and its `.meta` sidecar.
pub fn save_dataset(d: &Dataset, csv_path: &Path) -> Result<()> {
    write_dataset_csv(d, fs::File::create(csv_path)?)?;
    write_meta(d, fs::File::create(meta_path(csv_path))?)?;
    Ok(())
}

/// Reads a dataset CSV; the sidecar is optional (defaults: `B` = largest
/// `|sp0|`, not two-valued, unknown provenance).
pub fn load_dataset(csv_path: &Path) -> Result<Dataset> {
    let meta = meta_path(csv_path);
    let meta_text = if meta.exists() {
        Some(fs::read_to_string(meta)?)
    } else {
        None
    };
    read_dataset(fs::File::open(csv_path)?, meta_text.as_deref())
}

pub fn read_dataset<R: Read>(csv_in: R, meta_text: Option<&str>) -> Result<Dataset> {
    let mut r = csv::Reader::from_reader(csv_in);
    let header = r.headers()?.clone();
    if header.get(0) != Some("label") {
        return Err(Error::Parse("first column must be `label`".into()));
    }
    let mut sp_cols = Vec::new();
    let mut inv_cols = Vec::new();
    for (i, h) in header.iter().enumerate().skip(1) {
        if let Some(k) = h.strip_prefix("sp") {
            sp_cols.push((parse_index(k, h)?, i));
        } else if let Some(k) = h.strip_prefix("inv") {
            inv_cols.push((parse_index(k, h)?, i));
        } else {
            return Err(Error::Parse(format!("unexpected column `{h}`")));
        }
    }
    sp_cols.sort();
    inv_cols.sort();
    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let cell = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: `{s}` is not a number", line + 1)))
        };
        let y = Label::from_sign(cell(0)?)
            .ok_or_else(|| Error::Parse(format!("row {}: label must be 1 or -1", line + 1)))?;
        let x_sp = sp_cols.iter().map(|&(_, i)| cell(i)).collect::<Result<Vec<_>>>()?;
        let x_inv = inv_cols.iter().map(|&(_, i)| cell(i)).collect::<Result<Vec<_>>>()?;
        points.push(LabeledPoint::new(x_inv, x_sp, y));
    }

    let kv = parse_kv(meta_text.unwrap_or(""))?;
    let flag = |k: &str| -> Result<bool> {
        match kv.get(k).map(String::as_str) {
            None => Ok(false),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(Error::Parse(format!("meta `{k}`: expected true/false, got `{v}`"))),
        }
    };
    let sp_scale = match kv.get("sp_scale") {
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("meta sp_scale `{v}`")))?,
        None => points
            .iter()
            .flat_map(|p| p.x_sp.first())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE),
    };
    let seed = match kv.get("seed").map(String::as_str) {
        None | Some("") => None,
        Some(v) => Some(v.parse::<u64>().map_err(|_| Error::Parse(format!("meta seed `{v}`")))?),
    };
    let provenance = Provenance {
        predictive_inv: flag("predictive_inv")?,
        stable_inv_marginal: flag("stable_inv_marginal")?,
        cond_independent: flag("cond_independent")?,
        two_valued_sp: flag("two_valued_sp")?,
        identity_mapping: flag("identity_mapping")?,
    };
    let mut meta = Metadata::new(kv.get("generator").cloned().unwrap_or_default(), seed, provenance);
    for (k, v) in &kv {
        if let Some(key) = k.strip_prefix("extra.") {
            meta.extra.insert(key.to_string(), v.clone());
        }
    }
    Dataset::new(points, sp_scale, flag("sp_two_valued")?, meta)
}

fn parse_index(k: &str, h: &str) -> Result<usize> {
    k.parse::<usize>()
        .map_err(|_| Error::Parse(format!("bad column name `{h}`")))
}

/// `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("meta line {}: missing `=`", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}
