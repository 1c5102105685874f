use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Grid, IndexBox, SampledField, TensorRank};
use crate::error::{Error, Result};

const MAGIC: &str = "LLFIELD1";

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Writes a field as one ASCII header line followed by little-endian f64s.
///
/// Header keys: `dim`, `bounds` (lo:hi per axis), `resolution`,
/// `homogeneous` (0/1 per axis), `rank` (upper,lower), `symmetric`,
/// `valid` (lo:hi lattice indices per axis).
pub fn write_field(path: &Path, field: &SampledField) -> Result<()> {
    let grid = field.grid();
    let mut nominal = grid.resolution().to_vec();
    for (a, n) in nominal.iter_mut().enumerate() {
        if grid.is_homogeneous(a) {
            *n = 2;
        }
    }
    let header = format!(
        "{MAGIC} dim={} bounds={} resolution={} homogeneous={} rank={},{} symmetric={} valid={}\n",
        grid.dim(),
        join(grid.bounds().iter().map(|(l, h)| format!("{l:e}:{h:e}"))),
        join(nominal),
        join(grid.homogeneous().iter().map(|&b| b as u8)),
        field.rank().upper,
        field.rank().lower,
        field.is_symmetric() as u8,
        join(field.valid().lo.iter().zip(&field.valid().hi).map(|(l, h)| format!("{l}:{h}"))),
    );
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(header.as_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<SampledField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::Format("missing field magic".into()));
    }
    let mut kv = std::collections::BTreeMap::new();
    for p in parts {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header token `{p}`")))?;
        kv.insert(k, v);
    }
    let get = |k: &str| kv.get(k).copied().ok_or_else(|| Error::Format(format!("missing `{k}`")));
    let bad = |k: &str| Error::Format(format!("cannot parse `{k}`"));
    let pair = |s: &str, k: &str| -> Result<(String, String)> {
        let (a, b) = s.split_once(':').ok_or_else(|| bad(k))?;
        Ok((a.to_string(), b.to_string()))
    };

    let bounds: Vec<(f64, f64)> = get("bounds")?
        .split(',')
        .map(|s| {
            let (a, b) = pair(s, "bounds")?;
            Ok((a.parse().map_err(|_| bad("bounds"))?, b.parse().map_err(|_| bad("bounds"))?))
        })
        .collect::<Result<_>>()?;
    let resolution: Vec<usize> = get("resolution")?
        .split(',')
        .map(|s| s.parse().map_err(|_| bad("resolution")))
        .collect::<Result<_>>()?;
    let homogeneous: Vec<usize> = get("homogeneous")?
        .split(',')
        .enumerate()
        .filter(|(_, s)| *s == "1")
        .map(|(a, _)| a)
        .collect();
    let (ru, rl) = get("rank")?.split_once(',').ok_or_else(|| bad("rank"))?;
    let rank = TensorRank {
        upper: ru.parse().map_err(|_| bad("rank"))?,
        lower: rl.parse().map_err(|_| bad("rank"))?,
    };
    let symmetric = get("symmetric")? == "1";
    let (mut vlo, mut vhi) = (Vec::new(), Vec::new());
    for s in get("valid")?.split(',') {
        let (a, b) = pair(s, "valid")?;
        vlo.push(a.parse().map_err(|_| bad("valid"))?);
        vhi.push(b.parse().map_err(|_| bad("valid"))?);
    }

    let grid = Grid::new(&bounds, &resolution)?.with_homogeneous_axes(&homogeneous)?;
    let count = grid.len() * rank.components(grid.dim());
    let mut bytes = Vec::with_capacity(count * 8);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Format(format!("expected {} bytes of data, got {}", count * 8, bytes.len())));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(SampledField::new(grid, rank, symmetric, values)?.with_valid(IndexBox { lo: vlo, hi: vhi }))
}

/// CSV export of a 1D or 2D slice. `free` lists the one or two axes that
/// vary; all other axes are pinned at `pinned[a]`. Columns are the free
/// coordinates `x<axis>` followed by one column `c<k>` per component.
pub fn write_slice_csv(path: &Path, field: &SampledField, free: &[usize], pinned: &[usize]) -> Result<()> {
    let grid = field.grid();
    if free.is_empty() || free.len() > 2 {
        return Err(Error::InvalidParam("slices must have one or two free axes".into()));
    }
    for &a in free {
        if a >= grid.dim() {
            return Err(Error::AxisOutOfRange { axis: a, dim: grid.dim() });
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut head: Vec<String> = free.iter().map(|a| format!("x{a}")).collect();
    head.extend((0..field.ncomp()).map(|k| format!("c{k}")));
    w.write_record(&head)?;
    let mut b = IndexBox { lo: pinned.to_vec(), hi: pinned.to_vec() };
    for &a in free {
        b.lo[a] = 0;
        b.hi[a] = grid.resolution()[a] - 1;
    }
    for idx in b.indices() {
        let mut rec: Vec<String> = free.iter().map(|&a| format!("{:e}", grid.coord(a, idx[a]))).collect();
        rec.extend(field.at_index(&idx).iter().map(|v| format!("{v:e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
