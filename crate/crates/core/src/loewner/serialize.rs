//! Trace persistence: a little-endian binary record and a CSV alternative.
//!
//! Binary layout: header `kappa: f64, dt: f64, horizon: f64, seed: u64,
//! count: u64`, then `count` pairs of f64 (re, im). The binary form
//! round-trips exactly; times are reconstructed from the uniform grid.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{EngineError, Trace};

impl Trace {
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<(), EngineError> {
        w.write_all(&self.kappa.to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&self.horizon.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.points.len() as u64).to_le_bytes())?;
        for p in &self.points {
            w.write_all(&p.re.to_le_bytes())?;
            w.write_all(&p.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self, EngineError> {
        let mut f = [0u8; 8];
        let mut next_f64 = |r: &mut R| -> Result<f64, EngineError> {
            r.read_exact(&mut f)?;
            Ok(f64::from_le_bytes(f))
        };
        let kappa = next_f64(r)?;
        let dt = next_f64(r)?;
        let horizon = next_f64(r)?;
        let mut u = [0u8; 8];
        r.read_exact(&mut u)?;
        let seed = u64::from_le_bytes(u);
        r.read_exact(&mut u)?;
        let count = u64::from_le_bytes(u) as usize;
        if count == 0 {
            return Err(EngineError::MalformedTrace("empty trace".into()));
        }
        let mut points = Vec::with_capacity(count);
        let mut buf = [0u8; 16];
        for _ in 0..count {
            r.read_exact(&mut buf)?;
            points.push(Complex64::new(
                f64::from_le_bytes(buf[0..8].try_into().unwrap()),
                f64::from_le_bytes(buf[8..16].try_into().unwrap()),
            ));
        }
        let times = (0..count).map(|j| j as f64 * dt).collect();
        Ok(Trace {
            points,
            times,
            kappa,
            dt,
            seed,
            horizon,
        })
    }

    /// CSV text alternative with columns `t,re,im`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<(), EngineError> {
        writeln!(w, "t,re,im")?;
        for (t, p) in self.times.iter().zip(&self.points) {
            writeln!(w, "{},{},{}", t, p.re, p.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: &mut R) -> Result<(Vec<f64>, Vec<Complex64>), EngineError> {
        let mut text = String::new();
        let rd = r;
        rd.read_to_string(&mut text)?;
        let mut times = Vec::new();
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line != "t,re,im" {
                    return Err(EngineError::MalformedTrace(format!(
                        "unexpected header: {line}"
                    )));
                }
                continue;
            }
            let mut fields = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64, EngineError> {
                s.ok_or_else(|| EngineError::MalformedTrace(format!("short row {i}")))?
                    .parse()
                    .map_err(|e| EngineError::MalformedTrace(format!("row {i}: {e}")))
            };
            times.push(parse(fields.next())?);
            let re = parse(fields.next())?;
            let im = parse(fields.next())?;
            points.push(Complex64::new(re, im));
        }
        Ok((times, points))
    }
}
