//! Binary field snapshots.
//!
//! Layout: magic `HNSF`, version u32, dim u32, n u32, L f64, time f64,
//! is_spectral u8, component count u32, then component-major row-major
//! little-endian f64 data (spectral data interleaves re/im).

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use super::field::{PhysicalField, SpectralField};
use super::grid::GridSpec;
use crate::error::{HnsError, Result};

pub const MAGIC: &[u8; 4] = b"HNSF";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Physical { time: f64, field: PhysicalField },
    Spectral { time: f64, field: SpectralField },
}

fn write_header<W: Write>(
    w: &mut W,
    grid: &GridSpec,
    time: f64,
    spectral: bool,
    ncomp: usize,
) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(grid.dim as u32)?;
    w.write_u32::<LittleEndian>(grid.n as u32)?;
    w.write_f64::<LittleEndian>(grid.length)?;
    w.write_f64::<LittleEndian>(time)?;
    w.write_u8(spectral as u8)?;
    w.write_u32::<LittleEndian>(ncomp as u32)?;
    Ok(())
}

pub fn write_spectral<W: Write>(w: &mut W, field: &SpectralField, time: f64) -> Result<()> {
    write_header(w, &field.grid, time, true, field.ncomp())?;
    for comp in &field.components {
        for z in comp {
            w.write_f64::<LittleEndian>(z.re)?;
            w.write_f64::<LittleEndian>(z.im)?;
        }
    }
    Ok(())
}

pub fn write_physical<W: Write>(w: &mut W, field: &PhysicalField, time: f64) -> Result<()> {
    write_header(w, &field.grid, time, false, field.ncomp())?;
    for comp in &field.samples {
        for x in comp {
            w.write_f64::<LittleEndian>(*x)?;
        }
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<Snapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(HnsError::Format(format!("bad magic {magic:?}")));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(HnsError::Format(format!("unsupported version {version}")));
    }
    let dim = r.read_u32::<LittleEndian>()? as usize;
    let n = r.read_u32::<LittleEndian>()? as usize;
    let length = r.read_f64::<LittleEndian>()?;
    let time = r.read_f64::<LittleEndian>()?;
    let spectral = match r.read_u8()? {
        0 => false,
        1 => true,
        x => return Err(HnsError::Format(format!("bad is_spectral flag {x}"))),
    };
    let ncomp = r.read_u32::<LittleEndian>()? as usize;
    let grid = GridSpec::new(dim, n, length)?;
    if ncomp == 0 || ncomp > 3 * dim {
        return Err(HnsError::Format(format!("bad component count {ncomp}")));
    }
    if spectral {
        let mut components = Vec::with_capacity(ncomp);
        for _ in 0..ncomp {
            let mut c = Vec::with_capacity(grid.len());
            for _ in 0..grid.len() {
                let re = r.read_f64::<LittleEndian>()?;
                let im = r.read_f64::<LittleEndian>()?;
                c.push(Complex64::new(re, im));
            }
            components.push(c);
        }
        Ok(Snapshot::Spectral {
            time,
            field: SpectralField { grid, components },
        })
    } else {
        let mut samples = Vec::with_capacity(ncomp);
        for _ in 0..ncomp {
            let mut c = vec![0.0; grid.len()];
            r.read_f64_into::<LittleEndian>(&mut c)?;
            samples.push(c);
        }
        Ok(Snapshot::Physical {
            time,
            field: PhysicalField { grid, samples },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sampling::random_field;

    #[test]
    fn spectral_and_physical_round_trip() {
        let grid = GridSpec::new(2, 8, 1.5).unwrap();
        let f = random_field(grid, 2, 3, 1.0);
        let mut buf = Vec::new();
        write_spectral(&mut buf, &f, 0.25).unwrap();
        assert_eq!(&buf[..4], b"HNSF");
        assert_eq!(
            read_snapshot(&mut buf.as_slice()).unwrap(),
            Snapshot::Spectral {
                time: 0.25,
                field: f.clone()
            }
        );

        let p = f.to_physical();
        let mut buf = Vec::new();
        write_physical(&mut buf, &p, 1.0).unwrap();
        assert_eq!(
            read_snapshot(&mut buf.as_slice()).unwrap(),
            Snapshot::Physical {
                time: 1.0,
                field: p
            }
        );
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let mut buf = b"XXXX".to_vec();
        buf.extend_from_slice(&[0; 40]);
        assert!(matches!(
            read_snapshot(&mut buf.as_slice()),
            Err(HnsError::Format(_))
        ));
        let grid = GridSpec::periodic(2, 8).unwrap();
        let mut buf = Vec::new();
        write_spectral(&mut buf, &SpectralField::zeros(grid, 2), 0.0).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(
            read_snapshot(&mut buf.as_slice()),
            Err(HnsError::Io(_))
        ));
    }
}
