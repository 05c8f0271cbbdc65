//! Directionally selective filtering and motion energy.
//!
//! Each bipolar channel is filtered by a quadrature Gabor pair (even and odd
//! phase) at every orientation. Opponent energy
//! `E = SA1·SB2 - SA2·SB1` combines the slow/even, slow/odd, fast/even and
//! fast/odd responses; it is positive for motion along `+θ` and negative
//! against it.
//!
//! The even kernel at `θ + π` equals the one at `θ` and the odd kernel
//! changes sign, so `E(θ + π) = -E(θ)`. [`DirectionalBank`] filters only the
//! first half of the orientation circle and fills the rest by negation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::kernels::{correlate, make_gabor, BorderPolicy, Kernel};
use crate::retina::BipolarBundle;

/// Slow/even, slow/odd, fast/even, fast/odd responses of one channel at one
/// orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct SacQuad {
    pub sa1: Field,
    pub sb1: Field,
    pub sa2: Field,
    pub sb2: Field,
}

#[derive(Debug, Clone)]
pub struct GaborPair {
    pub theta: f64,
    pub even: Kernel,
    pub odd: Kernel,
}

impl GaborPair {
    pub fn new(theta: f64, lambda: f64, sigma: f64, size: usize) -> Result<Self> {
        Ok(Self {
            theta,
            even: make_gabor(theta, 0.0, lambda, sigma, size)?,
            odd: make_gabor(theta, PI / 2.0, lambda, sigma, size)?,
        })
    }
}

fn quad(slow: &Field, fast: &Field, pair: &GaborPair, border: BorderPolicy) -> Result<SacQuad> {
    Ok(SacQuad {
        sa1: correlate(slow, &pair.even, border)?,
        sb1: correlate(slow, &pair.odd, border)?,
        sa2: correlate(fast, &pair.even, border)?,
        sb2: correlate(fast, &pair.odd, border)?,
    })
}

/// ON and OFF quads for one orientation.
pub fn sac_directional(
    bundle: &BipolarBundle,
    pair: &GaborPair,
    border: BorderPolicy,
) -> Result<(SacQuad, SacQuad)> {
    Ok((
        quad(&bundle.plus_slow, &bundle.plus_fast, pair, border)?,
        quad(&bundle.minus_slow, &bundle.minus_fast, pair, border)?,
    ))
}

pub fn motion_energy(q: &SacQuad) -> Field {
    let (w, h) = q.sa1.dims();
    let data = q
        .sa1
        .as_slice()
        .iter()
        .zip(q.sb1.as_slice())
        .zip(q.sa2.as_slice().iter().zip(q.sb2.as_slice()))
        .map(|((&sa1, &sb1), (&sa2, &sb2))| sa1 * sb2 - sa2 * sb1)
        .collect();
    Field::from_vec(w, h, data).expect("quad fields share a shape")
}

/// `R = v+ E+ + v- E-`.
pub fn combine_on_off(e_plus: &Field, e_minus: &Field, v_plus: f64, v_minus: f64) -> Field {
    e_plus.zip_map(e_minus, |p, m| v_plus * p + v_minus * m)
}

/// Per-orientation energies with their pixelwise maximum, the direction
/// estimate, and per-orientation totals.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionField {
    pub orientations: Vec<f64>,
    pub r_theta: Vec<Field>,
    /// Pixelwise maximum of `r_theta`.
    pub v: Field,
    /// `atan2(R^{π/2}, R^0)`, in `(-π, π]`.
    pub phi_hat: Field,
    pub r_sums: Vec<f64>,
}

fn orientation_index(orientations: &[f64], target: f64) -> Option<usize> {
    orientations
        .iter()
        .position(|&th| (th - target).abs() < 1e-9)
}

pub fn direction_field(orientations: &[f64], r_theta: Vec<Field>) -> Result<DirectionField> {
    assert_eq!(
        orientations.len(),
        r_theta.len(),
        "one energy map per orientation"
    );
    let i0 = orientation_index(orientations, 0.0).ok_or(Error::MissingOrientation("0"))?;
    let i90 = orientation_index(orientations, PI / 2.0).ok_or(Error::MissingOrientation("pi/2"))?;
    let first = &r_theta[0];
    let (w, h) = first.dims();

    let mut v = first.clone();
    for r in &r_theta[1..] {
        for (m, &x) in v.as_mut_slice().iter_mut().zip(r.as_slice()) {
            if x > *m {
                *m = x;
            }
        }
    }
    let phi_hat = r_theta[i90].zip_map(&r_theta[i0], f64::atan2);
    let r_sums = r_theta.iter().map(Field::sum).collect();
    debug_assert_eq!(v.dims(), (w, h));
    Ok(DirectionField {
        orientations: orientations.to_vec(),
        r_theta,
        v,
        phi_hat,
        r_sums,
    })
}

/// Gabor quadrature pairs over the half circle `[0, π)`.
#[derive(Debug, Clone)]
pub struct DirectionalBank {
    pairs: Vec<GaborPair>,
    orientations: Vec<f64>,
    border: BorderPolicy,
}

impl DirectionalBank {
    /// `orientation_count` must be even; orientations are `2πj / count`.
    pub fn new(
        orientation_count: usize,
        lambda: f64,
        sigma: f64,
        size: usize,
        border: BorderPolicy,
    ) -> Result<Self> {
        if orientation_count == 0 || orientation_count % 2 != 0 {
            return Err(Error::InvalidKernel(format!(
                "orientation count {orientation_count} must be even and positive"
            )));
        }
        let orientations: Vec<f64> = (0..orientation_count)
            .map(|j| 2.0 * PI * j as f64 / orientation_count as f64)
            .collect();
        let pairs = orientations[..orientation_count / 2]
            .iter()
            .map(|&th| GaborPair::new(th, lambda, sigma, size))
            .collect::<Result<_>>()?;
        Ok(Self {
            pairs,
            orientations,
            border,
        })
    }

    pub fn orientations(&self) -> &[f64] {
        &self.orientations
    }

    pub fn pairs(&self) -> &[GaborPair] {
        &self.pairs
    }

    /// `R^θ` at every orientation. The second half is the negated first half.
    pub fn energies(
        &self,
        bundle: &BipolarBundle,
        v_plus: f64,
        v_minus: f64,
    ) -> Result<Vec<Field>> {
        let half: Vec<Field> = self
            .pairs
            .iter()
            .map(|pair| {
                let (on, off) = sac_directional(bundle, pair, self.border)?;
                Ok(combine_on_off(
                    &motion_energy(&on),
                    &motion_energy(&off),
                    v_plus,
                    v_minus,
                ))
            })
            .collect::<Result<_>>()?;
        let mut all = half.clone();
        all.extend(half.iter().map(|r| r.map(|v| -v)));
        Ok(all)
    }

    pub fn direction_field(
        &self,
        bundle: &BipolarBundle,
        v_plus: f64,
        v_minus: f64,
    ) -> Result<DirectionField> {
        direction_field(&self.orientations, self.energies(bundle, v_plus, v_minus)?)
    }
}
