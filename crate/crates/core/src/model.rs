//! Versioned binary persistence for fitted bases and trained models.
//!
//! All numbers are little-endian; `f64` values are stored as raw IEEE-754
//! bits, so a write-then-read round trip reproduces every value exactly.

use std::path::Path;

use crate::classifier::{FeatureKind, FittedBasis, TrainedModel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pca::PcaBasis;
use crate::twodpca::EigenBasis2D;
use crate::vibration::{FaultClass, FaultKind, FaultSize};

const MAGIC: &[u8; 4] = b"VSPC";
const VERSION: u16 = 1;

const REC_BASIS_2DPCA: u8 = 1;
const REC_BASIS_PCA: u8 = 2;
const REC_MODEL: u8 = 3;

// ---- encoding ----

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new(record: u8) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.push(record);
        Writer { buf }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_bits().to_le_bytes());
    }

    fn f64s(&mut self, vs: &[f64]) {
        self.buf.reserve(vs.len() * 8);
        for &v in vs {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], record: u8) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(Error::ModelFormat("bad magic, not a model file".into()));
        }
        let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported version {version}, expected {VERSION}"
            )));
        }
        let rec = r.u8()?;
        if rec != record {
            return Err(Error::ModelFormat(format!(
                "record type {rec} where {record} was expected"
            )));
        }
        Ok(r)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::ModelFormat(format!(
                "truncated at byte {} (need {n} more)",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(u64::from_le_bytes(
            self.take(8)?.try_into().unwrap(),
        )))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n * 8)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().unwrap())))
            .collect())
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::ModelFormat(format!(
                "{} trailing bytes after record",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn encode_basis_2dpca(w: &mut Writer, b: &EigenBasis2D) {
    w.u32(b.image_rows() as u32);
    w.u32(b.image_cols() as u32);
    w.u32(b.d() as u32);
    w.f64s(b.mean_image().data());
    w.f64s(b.eigenvalues());
    w.f64s(b.basis().data());
}

fn decode_basis_2dpca(r: &mut Reader) -> Result<EigenBasis2D> {
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let d = r.u32()? as usize;
    if d == 0 || d >= cols.max(1) {
        return Err(Error::ModelFormat(format!("invalid d={d} for h={cols}")));
    }
    let mean = Matrix::from_vec(rows, cols, r.f64s(rows * cols)?)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    let eigenvalues = r.f64s(cols)?;
    let basis = Matrix::from_vec(cols, d, r.f64s(cols * d)?)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    Ok(EigenBasis2D::from_parts(mean, eigenvalues, basis))
}

fn encode_basis_pca(w: &mut Writer, b: &PcaBasis) {
    w.u32(b.dim() as u32);
    w.u32(b.k() as u32);
    w.u32(b.eigenvalues().len() as u32);
    w.f64(b.contribution());
    w.f64s(b.mean());
    w.f64s(b.eigenvalues());
    w.f64s(b.components().data());
}

fn decode_basis_pca(r: &mut Reader) -> Result<PcaBasis> {
    let p = r.u32()? as usize;
    let k = r.u32()? as usize;
    let n_eig = r.u32()? as usize;
    let contribution = r.f64()?;
    let mean = r.f64s(p)?;
    let eigenvalues = r.f64s(n_eig)?;
    let components = Matrix::from_vec(k, p, r.f64s(k * p)?)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    Ok(PcaBasis::from_parts(mean, components, eigenvalues, contribution))
}

fn encode_class(w: &mut Writer, c: FaultClass) {
    let kind = match c.kind() {
        FaultKind::No => 0,
        FaultKind::If => 1,
        FaultKind::Bf => 2,
        FaultKind::Of => 3,
    };
    let size = match c.fault_size() {
        None => 0,
        Some(FaultSize::In014) => 1,
        Some(FaultSize::In021) => 2,
    };
    w.u8(kind);
    w.u8(size);
}

fn decode_class(r: &mut Reader) -> Result<FaultClass> {
    let kind = match r.u8()? {
        0 => FaultKind::No,
        1 => FaultKind::If,
        2 => FaultKind::Bf,
        3 => FaultKind::Of,
        other => return Err(Error::ModelFormat(format!("bad class tag {other}"))),
    };
    let size = match r.u8()? {
        0 => None,
        1 => Some(FaultSize::In014),
        2 => Some(FaultSize::In021),
        other => return Err(Error::ModelFormat(format!("bad size tag {other}"))),
    };
    FaultClass::new(kind, size).map_err(|e| Error::ModelFormat(e.to_string()))
}

/// Saves a 2DPCA basis.
pub fn save_basis_2dpca(path: &Path, basis: &EigenBasis2D) -> Result<()> {
    let mut w = Writer::new(REC_BASIS_2DPCA);
    encode_basis_2dpca(&mut w, basis);
    std::fs::write(path, w.buf)?;
    Ok(())
}

/// Loads a 2DPCA basis.
pub fn load_basis_2dpca(path: &Path) -> Result<EigenBasis2D> {
    let bytes = std::fs::read(path)?;
    let mut r = Reader::new(&bytes, REC_BASIS_2DPCA)?;
    let b = decode_basis_2dpca(&mut r)?;
    r.finish()?;
    Ok(b)
}

/// Saves a PCA basis.
pub fn save_basis_pca(path: &Path, basis: &PcaBasis) -> Result<()> {
    let mut w = Writer::new(REC_BASIS_PCA);
    encode_basis_pca(&mut w, basis);
    std::fs::write(path, w.buf)?;
    Ok(())
}

/// Loads a PCA basis.
pub fn load_basis_pca(path: &Path) -> Result<PcaBasis> {
    let bytes = std::fs::read(path)?;
    let mut r = Reader::new(&bytes, REC_BASIS_PCA)?;
    let b = decode_basis_pca(&mut r)?;
    r.finish()?;
    Ok(b)
}

/// Saves a trained model (basis plus labeled training features).
pub fn save_model(path: &Path, model: &TrainedModel) -> Result<()> {
    let mut w = Writer::new(REC_MODEL);
    w.u8(match model.kind() {
        FeatureKind::EigenImage => 0,
        FeatureKind::PcaVector => 1,
        FeatureKind::FftAmplitude => 2,
    });
    let (img_rows, img_cols) = model.image_dims().unwrap_or((0, 0));
    w.u32(img_rows as u32);
    w.u32(img_cols as u32);
    match model.basis() {
        FittedBasis::TwoDpca(b) => {
            w.u8(REC_BASIS_2DPCA);
            encode_basis_2dpca(&mut w, b);
        }
        FittedBasis::Pca(b) => {
            w.u8(REC_BASIS_PCA);
            encode_basis_pca(&mut w, b);
        }
    }
    w.u32(model.len() as u32);
    let f0 = &model.features()[0];
    w.u32(f0.rows() as u32);
    w.u32(f0.cols() as u32);
    for (feat, &label) in model.features().iter().zip(model.labels()) {
        encode_class(&mut w, label);
        w.f64s(feat.data());
    }
    std::fs::write(path, w.buf)?;
    Ok(())
}

/// Loads a trained model.
pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let bytes = std::fs::read(path)?;
    let mut r = Reader::new(&bytes, REC_MODEL)?;
    let kind = match r.u8()? {
        0 => FeatureKind::EigenImage,
        1 => FeatureKind::PcaVector,
        2 => FeatureKind::FftAmplitude,
        other => return Err(Error::ModelFormat(format!("bad feature kind {other}"))),
    };
    let img_rows = r.u32()? as usize;
    let img_cols = r.u32()? as usize;
    let basis = match r.u8()? {
        REC_BASIS_2DPCA => FittedBasis::TwoDpca(decode_basis_2dpca(&mut r)?),
        REC_BASIS_PCA => FittedBasis::Pca(decode_basis_pca(&mut r)?),
        other => return Err(Error::ModelFormat(format!("bad basis tag {other}"))),
    };
    let m = r.u32()? as usize;
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let mut features = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        labels.push(decode_class(&mut r)?);
        let feat = Matrix::from_vec(rows, cols, r.f64s(rows * cols)?)
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        features.push(feat);
    }
    r.finish()?;
    let model = TrainedModel::new(kind, features, labels, basis)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    Ok(if img_rows > 0 && img_cols > 0 {
        model.with_image_dims(img_rows, img_cols)
    } else {
        model
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectrumImage;
    use crate::{pca, twodpca};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("vibspec-test-model");
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn random_images(seed: u64, m: usize, rows: usize, cols: usize) -> Vec<SpectrumImage> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| {
                let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(0.0..1.0)).collect();
                SpectrumImage::new(Matrix::from_vec(rows, cols, data).unwrap()).unwrap()
            })
            .collect()
    }

    #[test]
    fn basis_2dpca_round_trip_exact() {
        let imgs = random_images(40, 4, 5, 7);
        let refs: Vec<&SpectrumImage> = imgs.iter().collect();
        let basis = twodpca::fit_2dpca(&refs, 3).unwrap();
        let path = tmpdir().join("basis2d.vspc");
        save_basis_2dpca(&path, &basis).unwrap();
        let back = load_basis_2dpca(&path).unwrap();
        assert_eq!(basis.mean_image().data(), back.mean_image().data());
        assert_eq!(basis.eigenvalues(), back.eigenvalues());
        assert_eq!(basis.basis().data(), back.basis().data());
    }

    #[test]
    fn basis_pca_round_trip_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let samples: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let basis = pca::fit_pca(&refs, 0.9).unwrap();
        let path = tmpdir().join("basispca.vspc");
        save_basis_pca(&path, &basis).unwrap();
        let back = load_basis_pca(&path).unwrap();
        assert_eq!(basis.mean(), back.mean());
        assert_eq!(basis.eigenvalues(), back.eigenvalues());
        assert_eq!(basis.k(), back.k());
        assert_eq!(basis.components().data(), back.components().data());
        assert_eq!(basis.contribution(), back.contribution());
    }

    #[test]
    fn model_round_trip_exact() {
        let imgs = random_images(42, 6, 5, 7);
        let refs: Vec<&SpectrumImage> = imgs.iter().collect();
        let basis = twodpca::fit_2dpca(&refs, 2).unwrap();
        let feats: Vec<Matrix> = imgs
            .iter()
            .map(|i| twodpca::project(i, &basis).unwrap().features)
            .collect();
        let labels = vec![
            FaultClass::InnerRace(FaultSize::In014),
            FaultClass::Ball(FaultSize::In014),
            FaultClass::OuterRace(FaultSize::In014),
            FaultClass::Normal,
            FaultClass::InnerRace(FaultSize::In014),
            FaultClass::Ball(FaultSize::In014),
        ];
        let model = TrainedModel::new(
            FeatureKind::EigenImage,
            feats.clone(),
            labels.clone(),
            FittedBasis::TwoDpca(basis),
        )
        .unwrap();
        let path = tmpdir().join("model.vspc");
        save_model(&path, &model).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back.kind(), FeatureKind::EigenImage);
        assert_eq!(back.len(), 6);
        assert_eq!(back.labels(), &labels[..]);
        for (a, b) in feats.iter().zip(back.features()) {
            assert_eq!(a.data(), b.data());
        }
    }

    #[test]
    fn corrupt_files_rejected() {
        let path = tmpdir().join("junk.vspc");
        std::fs::write(&path, b"not a model").unwrap();
        assert!(load_model(&path).is_err());
        std::fs::write(&path, b"VSPC\x01\x00\x03").unwrap();
        assert!(matches!(load_model(&path), Err(Error::ModelFormat(_))));
    }
}
