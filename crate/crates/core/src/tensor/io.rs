//! Binary tensor files and partition-norm CSV export.
//!
//! Binary layout: three little-endian `u64` header fields (order, n,
//! channels) followed by the entries as little-endian `f64`, in storage order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{KTensor, PartitionNormValue};
use crate::error::{bail, Result};
use crate::partitions::enumerate_partitions;
use crate::scalar::Scalar;

/// Upper bound on the number of stored values accepted by the reader.
const MAX_VALUES: u64 = 1 << 31;

pub fn write_binary<T: Scalar>(x: &KTensor<T>, path: impl AsRef<Path>) -> Result<()> {
    write_binary_to(x, BufWriter::new(File::create(path)?))
}

pub fn write_binary_to<T: Scalar>(x: &KTensor<T>, mut w: impl Write) -> Result<()> {
    for h in [x.order(), x.n(), x.channels()] {
        w.write_all(&(h as u64).to_le_bytes())?;
    }
    for v in x.data() {
        w.write_all(&v.as_f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<T: Scalar>(path: impl AsRef<Path>) -> Result<KTensor<T>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut word = [0u8; 8];
    let mut header = [0u64; 3];
    for h in &mut header {
        r.read_exact(&mut word)?;
        *h = u64::from_le_bytes(word);
    }
    let [order, n, channels] = header;
    let count = (n as u128).pow(order.min(64) as u32) * channels as u128;
    if order > 16 || channels == 0 || count > MAX_VALUES as u128 {
        bail!(Parse, "implausible tensor header: order {order}, n {n}, channels {channels}");
    }
    let mut data = Vec::with_capacity(count as usize);
    for _ in 0..count {
        r.read_exact(&mut word)?;
        data.push(T::of(f64::from_le_bytes(word)));
    }
    if r.read(&mut word)? != 0 {
        bail!(Parse, "trailing bytes after {count} values");
    }
    KTensor::from_vec(order as usize, n as usize, channels as usize, data)
}

/// Writes one row per value with partition-notation column headers.
pub fn write_partition_norm_csv<T: Scalar>(
    rows: &[PartitionNormValue<T>],
    order: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let parts = enumerate_partitions(order)?;
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["kind".to_string()];
    header.extend(parts.iter().map(|p| p.to_string()));
    w.write_record(&header)?;
    for row in rows {
        if row.components.len() != parts.len() {
            bail!(Shape, "{} components for order {order}", row.components.len());
        }
        let mut rec = vec![row.kind.to_string()];
        rec.extend(row.components.iter().map(|c| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
