//! Binary instance files.
//!
//! Layout (little endian): magic `DPLI`, `u32` version, `u8` type tag, a
//! fixed header for that type, then matrices row-major as `f64`.
//!
//! | tag | header                                                       | body                     |
//! |-----|--------------------------------------------------------------|--------------------------|
//! | 1   | d, n, alpha, c, seed, stream, K, dim V                       | X (K x d), V (d/2 x d)   |
//! | 2   | d, n, alpha, B, L, lambda, seed, stream, N                   | theta (d), data (n x d)  |
//! | 3   | d, n, curvature, radius                                      | targets (n x d)          |
//!
//! Integers are `u64`, reals `f64`. Reading back reproduces every float bit.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, OrthonormalBasis};

use super::{NonsmoothInstance, QuadraticTestLoss, SmoothInstance};

const MAGIC: &[u8; 4] = b"DPLI";
const VERSION: u32 = 1;

/// Any instance that can be stored in a file.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyInstance {
    Nonsmooth(NonsmoothInstance),
    Smooth(SmoothInstance),
    Quadratic(QuadraticTestLoss),
}

impl AnyInstance {
    pub fn objective(&self) -> &dyn super::Objective {
        match self {
            AnyInstance::Nonsmooth(i) => i,
            AnyInstance::Smooth(i) => i,
            AnyInstance::Quadratic(i) => i,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            AnyInstance::Nonsmooth(_) => "nonsmooth",
            AnyInstance::Smooth(_) => "smooth",
            AnyInstance::Quadratic(_) => "quadratic",
        }
    }
}

struct Writer<W> {
    out: W,
}

impl<W: Write> Writer<W> {
    fn u64(&mut self, x: u64) -> Result<()> {
        Ok(self.out.write_all(&x.to_le_bytes())?)
    }
    fn f64(&mut self, x: f64) -> Result<()> {
        Ok(self.out.write_all(&x.to_le_bytes())?)
    }
    fn vector(&mut self, v: &DenseVector) -> Result<()> {
        for &x in v.iter() {
            self.f64(x)?;
        }
        Ok(())
    }
}

struct Reader<R> {
    inp: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inp
            .read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("truncated file: {e}")))?;
        Ok(buf)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("size does not fit in usize".into()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn vector(&mut self, d: usize) -> Result<DenseVector> {
        let v = (0..d).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        DenseVector::new(v).map_err(|_| Error::Format("non-finite entry".into()))
    }
    fn matrix(&mut self, rows: usize, d: usize) -> Result<Vec<DenseVector>> {
        (0..rows).map(|_| self.vector(d)).collect()
    }
}

pub fn write_instance<W: Write>(instance: &AnyInstance, out: W) -> Result<()> {
    let mut w = Writer { out };
    w.out.write_all(MAGIC)?;
    w.out.write_all(&VERSION.to_le_bytes())?;
    match instance {
        AnyInstance::Nonsmooth(p) => {
            w.out.write_all(&[1])?;
            w.u64(p.d as u64)?;
            w.u64(p.n as u64)?;
            w.f64(p.alpha)?;
            w.f64(p.offset)?;
            w.u64(p.seed)?;
            w.u64(p.stream)?;
            w.u64(p.x.count() as u64)?;
            w.u64(p.v.count() as u64)?;
            for v in p.x.vectors().iter().chain(p.v.vectors()) {
                w.vector(v)?;
            }
        }
        AnyInstance::Smooth(p) => {
            w.out.write_all(&[2])?;
            w.u64(p.d as u64)?;
            w.u64(p.n as u64)?;
            w.f64(p.alpha)?;
            w.f64(p.radius)?;
            w.f64(p.lipschitz)?;
            w.f64(p.lambda)?;
            w.u64(p.seed)?;
            w.u64(p.stream)?;
            w.u64(p.nonzero as u64)?;
            w.vector(&p.theta)?;
            for x in &p.data {
                w.vector(x)?;
            }
        }
        AnyInstance::Quadratic(q) => {
            w.out.write_all(&[3])?;
            w.u64(q.mean.len() as u64)?;
            w.u64(q.targets.len() as u64)?;
            w.f64(q.curvature)?;
            w.f64(q.radius)?;
            for t in &q.targets {
                w.vector(t)?;
            }
        }
    }
    w.out.flush()?;
    Ok(())
}

pub fn read_instance<R: Read>(inp: R) -> Result<AnyInstance> {
    let mut r = Reader { inp };
    if &r.bytes::<4>()? != MAGIC {
        return Err(Error::Format("bad magic; not an instance file".into()));
    }
    let version = u32::from_le_bytes(r.bytes()?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let [tag] = r.bytes::<1>()?;
    let instance = match tag {
        1 => {
            let d = r.usize()?;
            let n = r.usize()?;
            let alpha = r.f64()?;
            let offset = r.f64()?;
            let seed = r.u64()?;
            let stream = r.u64()?;
            let k = r.usize()?;
            let vdim = r.usize()?;
            if k + vdim > d {
                return Err(Error::Format(format!("{k} + {vdim} basis vectors exceed d={d}")));
            }
            let x = r.matrix(k, d)?;
            let v = r.matrix(vdim, d)?;
            AnyInstance::Nonsmooth(NonsmoothInstance {
                d,
                n,
                alpha,
                offset,
                x: OrthonormalBasis::from_trusted(d, x),
                v: OrthonormalBasis::from_trusted(d, v),
                seed,
                stream,
            })
        }
        2 => {
            let d = r.usize()?;
            let n = r.usize()?;
            let alpha = r.f64()?;
            let radius = r.f64()?;
            let lipschitz = r.f64()?;
            let lambda = r.f64()?;
            let seed = r.u64()?;
            let stream = r.u64()?;
            let nonzero = r.usize()?;
            let theta = r.vector(d)?;
            let data = r.matrix(n, d)?;
            AnyInstance::Smooth(SmoothInstance::assemble(
                d, n, alpha, radius, lipschitz, lambda, nonzero, theta, data, seed, stream,
            ))
        }
        3 => {
            let d = r.usize()?;
            let n = r.usize()?;
            let curvature = r.f64()?;
            let radius = r.f64()?;
            let targets = r.matrix(n, d)?;
            AnyInstance::Quadratic(QuadraticTestLoss::new(targets, curvature, radius)?)
        }
        other => return Err(Error::Format(format!("unknown instance type tag {other}"))),
    };
    let mut rest = [0u8; 1];
    if r.inp.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after instance".into()));
    }
    Ok(instance)
}
