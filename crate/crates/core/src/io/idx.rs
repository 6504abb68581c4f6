//! IDX image/label files (big-endian 32-bit header, unsigned-byte payload).

use std::fs;
use std::io::Cursor;
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};

use crate::data::Label;
use crate::error::{Error, Result};
use crate::taskgen::InvPoint;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImageSet {
    pub rows: usize,
    pub cols: usize,
    /// One row-major `rows * cols` byte buffer per image.
    pub images: Vec<Vec<u8>>,
    pub labels: Vec<u8>,
}

pub fn parse_idx(images_path: &Path, labels_path: &Path) -> Result<RawImageSet> {
    parse_idx_bytes(&fs::read(images_path)?, &fs::read(labels_path)?)
}

pub fn parse_idx_bytes(images: &[u8], labels: &[u8]) -> Result<RawImageSet> {
    let mut img = Cursor::new(images);
    expect_magic(&mut img, IMAGES_MAGIC, "images")?;
    let count = read_u32(&mut img, "images header")? as usize;
    let rows = read_u32(&mut img, "images header")? as usize;
    let cols = read_u32(&mut img, "images header")? as usize;
    let payload = &images[16..];
    let need = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::TruncatedFile("image dimensions overflow".into()))?;
    if payload.len() < need {
        return Err(Error::TruncatedFile(format!(
            "images: header claims {need} payload bytes, found {}",
            payload.len()
        )));
    }

    let mut lab = Cursor::new(labels);
    expect_magic(&mut lab, LABELS_MAGIC, "labels")?;
    let n_labels = read_u32(&mut lab, "labels header")? as usize;
    let lab_payload = &labels[8..];
    if lab_payload.len() < n_labels {
        return Err(Error::TruncatedFile(format!(
            "labels: header claims {n_labels} bytes, found {}",
            lab_payload.len()
        )));
    }
    if n_labels != count {
        return Err(Error::CountMismatch(format!("{count} images but {n_labels} labels")));
    }
    let size = rows * cols;
    let images = if size == 0 {
        vec![Vec::new(); count]
    } else {
        payload[..need].chunks_exact(size).map(<[u8]>::to_vec).collect()
    };
    Ok(RawImageSet {
        rows,
        cols,
        images,
        labels: lab_payload[..n_labels].to_vec(),
    })
}

fn read_u32(c: &mut Cursor<&[u8]>, what: &str) -> Result<u32> {
    c.read_u32::<BigEndian>()
        .map_err(|_| Error::TruncatedFile(format!("{what} too short")))
}

fn expect_magic(c: &mut Cursor<&[u8]>, expected: u32, what: &str) -> Result<()> {
    let found = read_u32(c, what)?;
    if found != expected {
        return Err(Error::BadMagic { expected, found });
    }
    Ok(())
}

/// Digits 0-4 become `+1`, 5-9 become `-1`; pixels are scaled to `[0, 1]`.
pub fn binarize_labels(raw: &RawImageSet) -> Result<Vec<InvPoint>> {
    raw.images
        .iter()
        .zip(&raw.labels)
        .enumerate()
        .map(|(i, (img, &l))| {
            let y = match l {
                0..=4 => Label::Pos,
                5..=9 => Label::Neg,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "image {i} has label {l}, expected 0-9"
                    )))
                }
            };
            Ok((img.iter().map(|&b| f64::from(b) / 255.0).collect(), y))
        })
        .collect()
}

/// Serializes an image set back to IDX bytes.
pub fn encode_idx(set: &RawImageSet) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::with_capacity(16 + set.images.len() * set.rows * set.cols);
    for v in [IMAGES_MAGIC, set.images.len() as u32, set.rows as u32, set.cols as u32] {
        img.extend_from_slice(&v.to_be_bytes());
    }
    for im in &set.images {
        img.extend_from_slice(im);
    }
    let mut lab = Vec::with_capacity(8 + set.labels.len());
    lab.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(set.labels.len() as u32).to_be_bytes());
    lab.extend_from_slice(&set.labels);
    (img, lab)
}
