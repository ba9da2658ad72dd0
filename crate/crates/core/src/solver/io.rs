use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::{ExperimentRow, RecoveryRow};
use super::field::{DiscreteField, NodeLabel};
use super::grid::Grid;
use super::minimize::IterationRecord;
use crate::error::{Error, Result};
use crate::qtensor::QTensor;

/// JSON header of a field snapshot; values live in a sibling CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub grid: Grid,
    pub nodes: [usize; 3],
    pub spacing: [f64; 3],
    /// Node order of the CSV rows.
    pub order: String,
    /// Run-length encoding of the node labels in CSV order.
    pub mask: Vec<(NodeLabel, usize)>,
}

pub fn encode_labels(labels: &[NodeLabel]) -> Vec<(NodeLabel, usize)> {
    let mut out: Vec<(NodeLabel, usize)> = Vec::new();
    for &l in labels {
        match out.last_mut() {
            Some((last, n)) if *last == l => *n += 1,
            _ => out.push((l, 1)),
        }
    }
    out
}

pub fn decode_labels(rle: &[(NodeLabel, usize)]) -> Vec<NodeLabel> {
    rle.iter().flat_map(|&(l, n)| std::iter::repeat_n(l, n)).collect()
}

/// Writes `<stem>.json` and `<stem>.csv` (columns `q0..q4`, x fastest).
pub fn write_snapshot(field: &DiscreteField, dir: &Path, stem: &str) -> Result<()> {
    let header = SnapshotHeader {
        grid: field.grid,
        nodes: field.grid.dims(),
        spacing: field.grid.h(),
        order: "x fastest, then y, then z".into(),
        mask: encode_labels(&field.labels),
    };
    let json = serde_json::to_string_pretty(&header).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join(format!("{stem}.json")), json)?;
    let mut w = BufWriter::new(fs::File::create(dir.join(format!("{stem}.csv")))?);
    writeln!(w, "q0,q1,q2,q3,q4")?;
    for q in &field.values {
        let [a, b, c, d, e] = q.0;
        writeln!(w, "{a},{b},{c},{d},{e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(dir: &Path, stem: &str) -> Result<DiscreteField> {
    let header: SnapshotHeader = serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)
        .map_err(|e| Error::Io(e.to_string()))?;
    let labels = decode_labels(&header.mask);
    let r = BufReader::new(fs::File::open(dir.join(format!("{stem}.csv")))?);
    let mut values = Vec::with_capacity(labels.len());
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            continue;
        }
        let parts: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Io(format!("snapshot row {i}: {e}")))?;
        if parts.len() != 5 {
            return Err(Error::Io(format!("snapshot row {i} has {} columns", parts.len())));
        }
        values.push(QTensor([parts[0], parts[1], parts[2], parts[3], parts[4]]));
    }
    if values.len() != header.grid.n_nodes() || labels.len() != values.len() {
        return Err(Error::Io("snapshot size does not match its header".into()));
    }
    Ok(DiscreteField { grid: header.grid, values, labels })
}

pub fn write_iterations_csv<W: Write>(log: &[IterationRecord], mut w: W) -> Result<()> {
    writeln!(w, "iter,elastic,bulk,surface,total,grad_norm,step,backtracks")?;
    for r in log {
        let e = r.energy;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.iter, e.elastic, e.bulk, e.surface, e.total, r.grad_norm, r.step, r.backtracks
        )?;
    }
    Ok(())
}

pub fn write_experiment_csv<W: Write>(rows: &[ExperimentRow], mut w: W) -> Result<()> {
    writeln!(
        w,
        "eps,n_inclusions,cells,h,distance,f_eps,f_zero,f_recovery,grad_sq,min_second_difference,iterations,flag"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.eps,
            r.n_inclusions,
            r.cells,
            r.h,
            r.distance,
            r.f_eps.total,
            r.f_zero.total,
            r.f_recovery,
            r.grad_sq,
            r.min_second_difference,
            r.iterations,
            r.flag.as_deref().unwrap_or("").replace(',', ";")
        )?;
    }
    Ok(())
}

pub fn write_recovery_csv<W: Write>(rows: &[RecoveryRow], mut w: W) -> Result<()> {
    writeln!(w, "eps,n_inclusions,cells,j_eps,j_zero,j_gap,f_eps,f_zero,f_gap")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.eps,
            r.n_inclusions,
            r.cells,
            r.f_eps.surface,
            r.f_zero.surface,
            r.j_gap(),
            r.f_eps.total,
            r.f_zero.total,
            r.f_gap()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogenization::{ParticleShape, RotationField};
    use crate::lattice::{BoxDomain, InclusionConfig};
    use nalgebra::Vector3;

    #[test]
    fn snapshot_roundtrip_is_exact() {
        let grid = Grid::new(BoxDomain::unit_cube(), [9, 8, 7]).unwrap();
        let mut f = DiscreteField::from_fn(grid, |x| QTensor::new([x.x, x.y / 3.0, x.z.sin(), 1e-17, -0.1]));
        let cfg = InclusionConfig::from_centers(
            vec![Vector3::new(0.5, 0.5, 0.5)],
            0.5,
            1.1,
            ParticleShape::Sphere,
            &RotationField::Identity,
        )
        .unwrap();
        f.mask_inclusions(&cfg);
        let dir = tempfile::tempdir().unwrap();
        write_snapshot(&f, dir.path(), "field").unwrap();
        let g = read_snapshot(dir.path(), "field").unwrap();
        assert_eq!(f, g);
        assert!(encode_labels(&f.labels).len() < f.labels.len());
    }
}
