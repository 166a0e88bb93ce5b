//! Binary container for [`SampleBatch`].
//!
//! Layout, all integers and floats little-endian:
//!
//! | offset | size | field                                   |
//! |-------:|-----:|-----------------------------------------|
//! | 0      | 8    | magic `MLBATCH\0`                        |
//! | 8      | 4    | layout version (`u32`, currently 1)      |
//! | 12     | 1    | problem tag (`u8`)                       |
//! | 13     | 1    | flags (`u8`, bit 0 = labels present)     |
//! | 14     | 2    | reserved, zero                           |
//! | 16     | 4    | k (`u32`)                                |
//! | 20     | 4    | d (`u32`)                                |
//! | 24     | 8    | n, number of records (`u64`)             |
//! | 32     | 8    | record length in floats (`u64`)          |
//! | 40     | 8    | λ (`f64`)                                |
//! | 48     | 8    | seed (`u64`)                             |
//! | 56     | 8·n·len | records, row-major `f64`              |
//! | …      | n    | labels, one byte each, if flagged        |

use std::io::{Read, Write};

use super::problem::Problem;
use super::sample::SampleBatch;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 8] = *b"MLBATCH\0";
pub const LAYOUT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 56;

pub fn write_batch(mut w: impl Write, batch: &SampleBatch) -> Result<()> {
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(&MAGIC);
    header.extend_from_slice(&LAYOUT_VERSION.to_le_bytes());
    header.push(batch.problem.tag());
    header.push(u8::from(batch.labels().is_some()));
    header.extend_from_slice(&[0, 0]);
    header.extend_from_slice(&(batch.k as u32).to_le_bytes());
    header.extend_from_slice(&(batch.d as u32).to_le_bytes());
    header.extend_from_slice(&(batch.len() as u64).to_le_bytes());
    header.extend_from_slice(&(batch.record_len() as u64).to_le_bytes());
    header.extend_from_slice(&batch.snr.to_le_bytes());
    header.extend_from_slice(&batch.seed.to_le_bytes());
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(8 * batch.data().len());
    batch.data().iter().for_each(|x| body.extend_from_slice(&x.to_le_bytes()));
    w.write_all(&body)?;
    if let Some(labels) = batch.labels() {
        w.write_all(labels)?;
    }
    Ok(())
}

fn take<const N: usize>(buf: &[u8], at: usize) -> [u8; N] {
    buf[at..at + N].try_into().expect("slice has length N")
}

pub fn read_batch(mut r: impl Read) -> Result<SampleBatch> {
    let mut h = [0u8; HEADER_LEN];
    r.read_exact(&mut h)?;
    if h[..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&h, 8));
    if version != LAYOUT_VERSION {
        return Err(Error::Format(format!("unsupported layout version {version}")));
    }
    let problem = Problem::from_tag(h[12]).ok_or_else(|| Error::Format(format!("unknown problem tag {}", h[12])))?;
    let labelled = h[13] & 1 == 1;
    let k = u32::from_le_bytes(take(&h, 16)) as usize;
    let d = u32::from_le_bytes(take(&h, 20)) as usize;
    let n = u64::from_le_bytes(take(&h, 24)) as usize;
    let len = u64::from_le_bytes(take(&h, 32)) as usize;
    let snr = f64::from_le_bytes(take(&h, 40));
    let seed = u64::from_le_bytes(take(&h, 48));
    let count = n.checked_mul(len).ok_or_else(|| Error::Format("record count overflows".into()))?;
    let mut raw = vec![0u8; count * 8];
    r.read_exact(&mut raw)?;
    let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let labels = if labelled {
        let mut l = vec![0u8; n];
        r.read_exact(&mut l)?;
        Some(l)
    } else {
        None
    };
    SampleBatch::from_parts(problem, k, d, snr, seed, len, data, labels)
}
