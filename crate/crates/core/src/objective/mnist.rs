//! IDX binary image/label files (big-endian headers, u8 payload), plus a
//! deterministic synthetic class-cluster generator that emits the same
//! format for environments without the real dataset on disk.

use std::io::Read;
use std::path::Path;

use byteorder::{BigEndian, ByteOrder};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{global_rng, Purpose};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    Ok(buf)
}

fn header_u32(buf: &[u8], offset: usize, path: &Path) -> Result<u32> {
    if buf.len() < offset + 4 {
        return Err(Error::TruncatedFile {
            path: path.display().to_string(),
            expected: offset + 4,
            found: buf.len(),
        });
    }
    Ok(BigEndian::read_u32(&buf[offset..offset + 4]))
}

/// Load an IDX image file as flattened vectors with pixels scaled to [0, 1].
pub fn load_idx_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    let buf = read_all(path)?;
    let magic = header_u32(&buf, 0, path)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            path: path.display().to_string(),
            found: magic,
            expected: IDX_IMAGES_MAGIC,
        });
    }
    let count = header_u32(&buf, 4, path)? as usize;
    let rows = header_u32(&buf, 8, path)? as usize;
    let cols = header_u32(&buf, 12, path)? as usize;
    let dim = rows * cols;
    let payload = &buf[16..];
    if payload.len() < count * dim {
        return Err(Error::TruncatedFile {
            path: path.display().to_string(),
            expected: count * dim,
            found: payload.len(),
        });
    }
    Ok(payload[..count * dim]
        .chunks_exact(dim)
        .map(|img| img.iter().map(|&p| p as f64 / 255.0).collect())
        .collect())
}

/// Load an IDX label file.
pub fn load_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let buf = read_all(path)?;
    let magic = header_u32(&buf, 0, path)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic {
            path: path.display().to_string(),
            found: magic,
            expected: IDX_LABELS_MAGIC,
        });
    }
    let count = header_u32(&buf, 4, path)? as usize;
    let payload = &buf[8..];
    if payload.len() < count {
        return Err(Error::TruncatedFile {
            path: path.display().to_string(),
            expected: count,
            found: payload.len(),
        });
    }
    Ok(payload[..count].to_vec())
}

/// Load a paired image/label IDX set; counts must agree.
pub fn load_mnist_idx(images_path: &Path, labels_path: &Path) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
    let images = load_idx_vectors(images_path)?;
    let labels = load_idx_labels(labels_path)?;
    if images.len() != labels.len() {
        return Err(Error::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    Ok((images, labels))
}

/// Serialize images (raw u8 pixels) back into IDX form.
pub fn write_idx_images(path: &Path, images: &[Vec<u8>], rows: u32, cols: u32) -> Result<()> {
    let dim = (rows * cols) as usize;
    let mut buf = Vec::with_capacity(16 + images.len() * dim);
    let mut word = [0u8; 4];
    for v in [IDX_IMAGES_MAGIC, images.len() as u32, rows, cols] {
        BigEndian::write_u32(&mut word, v);
        buf.extend_from_slice(&word);
    }
    for img in images {
        assert_eq!(img.len(), dim, "image payload size");
        buf.extend_from_slice(img);
    }
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut buf = Vec::with_capacity(8 + labels.len());
    let mut word = [0u8; 4];
    BigEndian::write_u32(&mut word, IDX_LABELS_MAGIC);
    buf.extend_from_slice(&word);
    BigEndian::write_u32(&mut word, labels.len() as u32);
    buf.extend_from_slice(&word);
    buf.extend_from_slice(labels);
    std::fs::write(path, buf)?;
    Ok(())
}

/// Deterministic class-cluster images: each class gets a Gaussian prototype
/// pattern; samples are the prototype plus pixel noise, quantized to u8.
/// `signal` and `noise` are in pixel units (0..255 scale); a smaller
/// signal-to-noise ratio makes the classes harder to separate from few
/// samples.
pub fn synth_class_images(
    classes: usize,
    rows: u32,
    cols: u32,
    count: usize,
    signal: f64,
    noise: f64,
    seed: u64,
) -> (Vec<Vec<u8>>, Vec<u8>) {
    let dim = (rows * cols) as usize;
    let mut proto_rng = global_rng(seed, Purpose::Data);
    let prototypes: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            (0..dim)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut proto_rng))
                .collect()
        })
        .collect();
    let mut sample_rng = global_rng(seed.wrapping_add(1), Purpose::Data);
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let class = i % classes;
        let img: Vec<u8> = prototypes[class]
            .iter()
            .map(|&p| {
                let eps: f64 = sample_rng.sample(StandardNormal);
                (128.0 + signal * p + noise * eps).clamp(0.0, 255.0) as u8
            })
            .collect();
        images.push(img);
        labels.push(class as u8);
    }
    // Shuffle so node partitions are not class-striped in a fixed pattern.
    let mut order: Vec<usize> = (0..count).collect();
    for i in (1..count).rev() {
        let j = sample_rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let images = order.iter().map(|&i| images[i].clone()).collect();
    let labels = order.iter().map(|&i| labels[i]).collect();
    (images, labels)
}
