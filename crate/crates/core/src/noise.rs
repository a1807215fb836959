//! Discrete cylindrical Wiener increments as nodal load vectors, and the
//! coupling of loads across time and space resolutions.
//!
//! The load of step `n` is `√Δt · L ρⁿ` with `L Lᵀ = M` and `ρⁿ ~ N(0, I)`;
//! its covariance is `Δt·M`. Normals are drawn from a counter-based stream
//! keyed by `(seed, realization, step)`, so any increment can be regenerated
//! independently of all others.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::factor::EnvelopeCholesky;
use crate::mesh::CouplingOperator;
use crate::sparse::CsrMatrix;

/// Cholesky factor `L` of the mass matrix (fill-reducing ordering applied).
pub fn mass_sqrt_factor(mass: &CsrMatrix) -> Result<EnvelopeCholesky> {
    EnvelopeCholesky::new(mass)
}

/// `n` standard normals for `(seed, realization, step)`.
pub fn standard_normals(seed: u64, realization: u64, step: u64, n: usize) -> Vec<f64> {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&realization.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(step);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIncrement {
    pub step: u64,
    pub rho: Vec<f64>,
    pub load: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    dt: f64,
    mesh_id: String,
    factor: EnvelopeCholesky,
}

impl NoiseStream {
    pub fn new(seed: u64, mass: &CsrMatrix, dt: f64, mesh_id: impl Into<String>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::param("dt", format!("time step must be positive, got {dt}")));
        }
        Ok(Self { seed, dt, mesh_id: mesh_id.into(), factor: mass_sqrt_factor(mass)? })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mesh_id(&self) -> &str {
        &self.mesh_id
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn factor(&self) -> &EnvelopeCholesky {
        &self.factor
    }

    pub fn rho(&self, realization: u64, step: u64) -> Vec<f64> {
        standard_normals(self.seed, realization, step, self.dim())
    }

    /// Load vector `√Δt · L ρ` of fine step `step`.
    pub fn load(&self, realization: u64, step: u64) -> Vec<f64> {
        let mut load = self.factor.mul_factor(&self.rho(realization, step));
        let s = self.dt.sqrt();
        load.iter_mut().for_each(|v| *v *= s);
        load
    }

    pub fn sample_increment(&self, realization: u64, step: u64, dt: f64) -> Result<NoiseIncrement> {
        if (dt - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::Precondition(format!("stream time step is {}, requested {dt}", self.dt)));
        }
        let rho = self.rho(realization, step);
        let mut load = self.factor.mul_factor(&rho);
        let s = dt.sqrt();
        load.iter_mut().for_each(|v| *v *= s);
        Ok(NoiseIncrement { step, rho, load })
    }
}

/// Load of a coarse time step: the sum of the `ratio` fine loads it covers.
pub fn coarsen_time(loads: &[Vec<f64>], ratio: usize) -> Result<Vec<f64>> {
    if ratio == 0 || loads.len() != ratio {
        return Err(Error::Dimension { expected: ratio, got: loads.len() });
    }
    let n = loads[0].len();
    let mut sum = vec![0.0; n];
    for load in loads {
        if load.len() != n {
            return Err(Error::Dimension { expected: n, got: load.len() });
        }
        sum.iter_mut().zip(load).for_each(|(s, v)| *s += v);
    }
    Ok(sum)
}

/// Coarse-mesh load `A · fine_load`.
pub fn coarsen_space(coupling: &CouplingOperator, fine_load: &[f64]) -> Result<Vec<f64>> {
    coupling.restrict(fine_load)
}

/// Writes `ρ` records as little-endian doubles after a `(N_h, steps)` header
/// of little-endian `u64`s.
pub fn write_rho_dump<W: Write>(mut w: W, n_h: usize, records: &[Vec<f64>]) -> Result<()> {
    w.write_all(&(n_h as u64).to_le_bytes())?;
    w.write_all(&(records.len() as u64).to_le_bytes())?;
    for rec in records {
        if rec.len() != n_h {
            return Err(Error::Dimension { expected: n_h, got: rec.len() });
        }
        for v in rec {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_rho_dump<R: Read>(mut r: R) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let n_h = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let steps = u64::from_le_bytes(word) as usize;
    let mut records = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut rec = Vec::with_capacity(n_h);
        for _ in 0..n_h {
            r.read_exact(&mut word)?;
            rec.push(f64::from_le_bytes(word));
        }
        records.push(rec);
    }
    Ok((n_h, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_mass;
    use crate::geometry::Surface;
    use crate::mesh::{coarse_to_fine_matrix, generate_mesh};
    use nalgebra::DMatrix;

    #[test]
    fn trivial_factors() {
        let f = mass_sqrt_factor(&CsrMatrix::identity(1).scaled(4.0)).unwrap();
        assert_eq!(f.dense_factor()[(0, 0)], 2.0);
        for (surface, level) in [(Surface::Circle, 5), (Surface::Sphere, 3), (Surface::DeformedSphere, 2)] {
            let m = assemble_mass(&generate_mesh(surface, level)).unwrap();
            let l = mass_sqrt_factor(&m).unwrap().dense_factor();
            let md = m.to_dense();
            assert!((&l * l.transpose() - &md).norm() <= 1e-12 * md.norm());
        }
    }

    #[test]
    fn increments_are_reproducible() {
        let m = assemble_mass(&generate_mesh(Surface::Circle, 1)).unwrap();
        let s = NoiseStream::new(42, &m, 0.25, "c").unwrap();
        assert_eq!(s.sample_increment(3, 17, 0.25).unwrap(), s.sample_increment(3, 17, 0.25).unwrap());
        assert_ne!(s.rho(3, 17), s.rho(3, 18));
        assert_ne!(s.rho(3, 17), s.rho(4, 17));
        assert!(s.sample_increment(0, 0, 0.5).is_err());
        assert_eq!(s.load(3, 17), s.sample_increment(3, 17, 0.25).unwrap().load);
    }

    fn empirical_covariance(samples: &[Vec<f64>]) -> DMatrix<f64> {
        let n = samples[0].len();
        let mut c = DMatrix::zeros(n, n);
        for s in samples {
            let v = nalgebra::DVector::from_column_slice(s);
            c += &v * v.transpose();
        }
        c / samples.len() as f64
    }

    #[test]
    fn time_coarsening() {
        let a = vec![1.0, 2.0];
        let b = vec![0.5, -1.0];
        assert_eq!(coarsen_time(std::slice::from_ref(&a), 1).unwrap(), a);
        assert_eq!(coarsen_time(&[a.clone(), b.clone()], 2).unwrap(), vec![1.5, 1.0]);
        assert!(coarsen_time(&[a], 2).is_err());
    }

    #[test]
    fn time_coarsened_covariance() {
        let mesh = generate_mesh(Surface::Circle, 1);
        let m = assemble_mass(&mesh).unwrap();
        let dt = 0.01;
        let s = NoiseStream::new(5, &m, dt, mesh.id()).unwrap();
        let samples: Vec<Vec<f64>> =
            (0..10_000u64).map(|i| coarsen_time(&[s.load(0, 2 * i), s.load(0, 2 * i + 1)], 2).unwrap()).collect();
        let target = m.to_dense() * (2.0 * dt);
        let err = (empirical_covariance(&samples) - &target).norm() / target.norm();
        assert!(err <= 0.05, "{err}");
    }

    #[test]
    fn space_coarsening_identity_and_constants() {
        let c = generate_mesh(Surface::Circle, 1);
        let f = generate_mesh(Surface::Circle, 2);
        let same = coarse_to_fine_matrix(&f, &f, Surface::Circle).unwrap();
        let v: Vec<f64> = (0..f.num_vertices()).map(|i| i as f64).collect();
        assert_eq!(coarsen_space(&same, &v).unwrap(), v);
        let a = coarse_to_fine_matrix(&c, &f, Surface::Circle).unwrap();
        let coarse = coarsen_space(&a, &vec![2.0; f.num_vertices()]).unwrap();
        let row_sums = a.matrix.row_sums();
        for (x, r) in coarse.iter().zip(row_sums) {
            assert!((x - 2.0 * r).abs() < 1e-14);
        }
        assert!(coarsen_space(&a, &[1.0]).is_err());
    }

    #[test]
    fn rho_dump_round_trip() {
        let recs = vec![vec![1.0, -2.5], vec![3.25, 0.0]];
        let mut buf = Vec::new();
        write_rho_dump(&mut buf, 2, &recs).unwrap();
        assert_eq!(buf.len(), 16 + 4 * 8);
        assert_eq!(&buf[..8], &2u64.to_le_bytes());
        let (n, back) = read_rho_dump(&buf[..]).unwrap();
        assert_eq!((n, back), (2, recs));
    }

    #[test]
    fn steps_are_uncorrelated() {
        let n = 10_000u64;
        let xs: Vec<f64> = (0..n).map(|i| standard_normals(9, 0, i, 3)[1]).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        for lag in 1..5 {
            let c: f64 =
                (0..(n as usize - lag)).map(|i| (xs[i] - mean) * (xs[i + lag] - mean)).sum::<f64>() / (n as f64 * var);
            assert!(c.abs() <= 4.0 / (n as f64).sqrt(), "lag {lag}: {c}");
        }
    }
}
