//! Raw-data container for covariant ensembles: a small binary format with
//! a self-describing header (magic, version, geometry, dtype tag, seed
//! table) holding complex128 little-endian matrices bit-exactly, plus a
//! trailing sentinel so truncation is always detected.

use std::io::{Read, Write};
use std::path::Path;

use crate::covariant::CovariantEnsemble;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryMode, LatticeGeometry};
use crate::linalg::{CMatrix, C64};

const MAGIC: &[u8; 8] = b"ERGOLAB\0";
const TRAILER: &[u8; 8] = b"ERGOEND\0";
const VERSION: u32 = 1;
const ENDIAN_LE: u8 = 1;
const DTYPE_C128: u8 = 1;

pub fn save_ensemble(path: &Path, ensemble: &CovariantEnsemble) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let geometry = ensemble.geometry();
    f.write_all(MAGIC)?;
    f.write_all(&VERSION.to_le_bytes())?;
    f.write_all(&[ENDIAN_LE, DTYPE_C128])?;
    f.write_all(&[
        match geometry.boundary() {
            BoundaryMode::Open => 0u8,
            BoundaryMode::Periodic => 1u8,
        },
        geometry.dimension() as u8,
    ])?;
    for &l in geometry.extents() {
        f.write_all(&(l as u32).to_le_bytes())?;
    }
    f.write_all(&geometry.spacing().to_le_bytes())?;
    f.write_all(&(ensemble.len() as u32).to_le_bytes())?;
    f.write_all(&(geometry.num_sites() as u32).to_le_bytes())?;
    for (seed, mat) in ensemble.seeds().iter().zip(ensemble.matrices()) {
        f.write_all(&seed.to_le_bytes())?;
        // row-major re/im pairs
        for i in 0..mat.nrows() {
            for j in 0..mat.ncols() {
                let z = mat[(i, j)];
                f.write_all(&z.re.to_le_bytes())?;
                f.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    f.write_all(TRAILER)?;
    f.flush()?;
    Ok(())
}

struct Reader {
    buf: Vec<u8>,
    pos: usize,
}

impl Reader {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Container(format!(
                "unexpected end of file at byte {} (wanted {} more)",
                self.pos, n
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

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn load_ensemble(path: &Path) -> Result<CovariantEnsemble> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    let mut r = Reader { buf, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Container("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            supported: VERSION,
        });
    }
    if r.u8()? != ENDIAN_LE {
        return Err(Error::Container("unsupported endianness tag".into()));
    }
    if r.u8()? != DTYPE_C128 {
        return Err(Error::Container("unsupported dtype tag".into()));
    }
    let boundary = match r.u8()? {
        0 => BoundaryMode::Open,
        1 => BoundaryMode::Periodic,
        other => return Err(Error::Container(format!("unknown boundary tag {other}"))),
    };
    let dimension = r.u8()? as usize;
    let mut extents = Vec::with_capacity(dimension);
    for _ in 0..dimension {
        extents.push(r.u32()? as usize);
    }
    let spacing = r.f64()?;
    let geometry = LatticeGeometry::new(extents, spacing, boundary)?;
    let count = r.u32()? as usize;
    let n = r.u32()? as usize;
    if n != geometry.num_sites() {
        return Err(Error::Container(format!(
            "matrix dimension {n} does not match geometry volume {}",
            geometry.num_sites()
        )));
    }
    let mut seeds = Vec::with_capacity(count);
    let mut mats = Vec::with_capacity(count);
    for _ in 0..count {
        seeds.push(r.u64()?);
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let re = r.f64()?;
                let im = r.f64()?;
                m[(i, j)] = C64::new(re, im);
            }
        }
        mats.push(m);
    }
    if r.take(8)? != TRAILER {
        return Err(Error::Container("missing trailer sentinel".into()));
    }
    if r.pos != r.buf.len() {
        return Err(Error::Container(format!(
            "{} trailing bytes after the sentinel",
            r.buf.len() - r.pos
        )));
    }
    CovariantEnsemble::from_matrices(geometry, seeds, mats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cr;

    fn sample() -> CovariantEnsemble {
        let g = LatticeGeometry::open_unit(vec![3]).unwrap();
        let mats = vec![
            CMatrix::from_fn(3, 3, |i, j| C64::new(i as f64 + 0.25, j as f64 - 1.5)),
            CMatrix::identity(3, 3) * cr(std::f64::consts::PI),
        ];
        CovariantEnsemble::from_matrices(g, vec![11, 22], mats).unwrap()
    }

    #[test]
    fn roundtrip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.ergo");
        let original = sample();
        save_ensemble(&path, &original).unwrap();
        let loaded = load_ensemble(&path).unwrap();
        assert_eq!(original, loaded);
    }

    #[test]
    fn truncation_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.ergo");
        save_ensemble(&path, &sample()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let cut = path.with_extension("cut");
        std::fs::write(&cut, &bytes[..bytes.len() - 13]).unwrap();
        assert!(matches!(
            load_ensemble(&cut),
            Err(Error::Container(_))
        ));
    }

    #[test]
    fn version_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.ergo");
        save_ensemble(&path, &sample()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[8] = 99; // bump version field
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_ensemble(&path),
            Err(Error::VersionMismatch { found: 99, .. })
        ));
    }
}
