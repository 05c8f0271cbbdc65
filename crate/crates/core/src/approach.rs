//! Approach-sensitive pathway: center-surround inhibition, push-pull
//! ganglion fusion, the two attention masks, and the membrane sum.

use crate::direction::DirectionField;
use crate::error::Result;
use crate::field::Field;
use crate::kernels::{correlate, BorderPolicy, Kernel};
use crate::params::ChannelWeights;
use crate::retina::BipolarBundle;

#[inline]
fn relu(v: f64) -> f64 {
    v.max(0.0)
}

/// Rectified center-surround responses. Index 1 reads the fast bipolar
/// output, index 2 the slow one.
#[derive(Debug, Clone, PartialEq)]
pub struct SurroundMaps {
    pub s1_plus: Field,
    pub s1_minus: Field,
    pub s2_plus: Field,
    pub s2_minus: Field,
}

pub fn sac_center_surround(
    bundle: &BipolarBundle,
    g_cs: &Kernel,
    border: BorderPolicy,
) -> Result<SurroundMaps> {
    let f = |b: &Field| correlate(b, g_cs, border).map(|s| s.map(relu));
    Ok(SurroundMaps {
        s1_plus: f(&bundle.plus_fast)?,
        s1_minus: f(&bundle.minus_fast)?,
        s2_plus: f(&bundle.plus_slow)?,
        s2_minus: f(&bundle.minus_slow)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanglionMaps {
    pub g1_plus: Field,
    pub g2_plus: Field,
    pub g1_minus: Field,
    pub g2_minus: Field,
}

/// Each excitatory bipolar signal is suppressed by the opposite channel's
/// surround: slow excitation by the fast surround, fast by the slow.
pub fn ganglion_push_pull(bundle: &BipolarBundle, s: &SurroundMaps) -> GanglionMaps {
    let g = |excite: &Field, inhibit: &Field| excite.zip_map(inhibit, |e, i| relu(relu(e) - i));
    GanglionMaps {
        g1_plus: g(&bundle.plus_slow, &s.s1_minus),
        g2_plus: g(&bundle.plus_fast, &s.s2_minus),
        g1_minus: g(&bundle.minus_slow, &s.s1_plus),
        g2_minus: g(&bundle.minus_fast, &s.s2_plus),
    }
}

/// `G = w1+ G1+ - w2- G2- + w1- G1- - w2+ G2+`.
pub fn fuse_channels(g: &GanglionMaps, w: &ChannelWeights) -> Field {
    let (width, height) = g.g1_plus.dims();
    let data = (0..width * height)
        .map(|i| {
            w.w1_plus * g.g1_plus.as_slice()[i] - w.w2_minus * g.g2_minus.as_slice()[i]
                + w.w1_minus * g.g1_minus.as_slice()[i]
                - w.w2_plus * g.g2_plus.as_slice()[i]
        })
        .collect();
    Field::from_vec(width, height, data).expect("ganglion maps share a shape")
}

/// 1 where `field > threshold`, else 0.
pub fn binarize(field: &Field, threshold: f64) -> Field {
    field.map(|v| if v > threshold { 1.0 } else { 0.0 })
}

/// Blurred approach map and its binarized mask.
pub fn approach_attention(
    g: &Field,
    g_sigma: &Kernel,
    gamma_a: f64,
    border: BorderPolicy,
) -> Result<(Field, Field)> {
    let blurred = correlate(g, g_sigma, border)?;
    let mask = binarize(&blurred, gamma_a);
    Ok((blurred, mask))
}

/// The `k` orientations with the largest energy totals, largest first.
/// Ties go to the smaller orientation index.
pub fn top_k_orientations(r_sums: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..r_sums.len()).collect();
    idx.sort_by(|&a, &b| r_sums[b].total_cmp(&r_sums[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalAttention {
    /// Indices into the orientation list.
    pub inhibited: Vec<usize>,
    /// `V - max over inhibited θ of R^θ`, left signed.
    pub v_prime: Field,
    pub mask: Field,
}

pub fn inhibited_energy(df: &DirectionField, inhibited: &[usize]) -> Field {
    let mut v_prime = df.v.clone();
    let (w, h) = df.v.dims();
    for i in 0..w * h {
        let strongest = inhibited
            .iter()
            .map(|&j| df.r_theta[j].as_slice()[i])
            .fold(f64::NEG_INFINITY, f64::max);
        v_prime.as_mut_slice()[i] -= strongest;
    }
    v_prime
}

pub fn directional_attention(
    df: &DirectionField,
    k: usize,
    g_sigma: &Kernel,
    gamma_d: f64,
    border: BorderPolicy,
) -> Result<DirectionalAttention> {
    let inhibited = top_k_orientations(&df.r_sums, k);
    let v_prime = inhibited_energy(df, &inhibited);
    let mask = binarize(&correlate(&v_prime, g_sigma, border)?, gamma_d);
    Ok(DirectionalAttention {
        inhibited,
        v_prime,
        mask,
    })
}

/// `G' = G · M_a · M_d` and its total `u`.
pub fn masked_output(g: &Field, m_a: &Field, m_d: &Field) -> (Field, f64) {
    let gated = g.zip_map(m_a, |a, b| a * b).zip_map(m_d, |a, b| a * b);
    let u = gated.sum();
    (gated, u)
}

/// Every intermediate map of one approach-pathway evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachMaps {
    pub surround: SurroundMaps,
    pub ganglion: GanglionMaps,
    pub g: Field,
    pub g_sigma: Field,
    pub m_a: Field,
    pub m_d: Field,
    pub v_prime: Field,
    pub inhibited: Vec<usize>,
    pub g_prime: Field,
    pub u: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::direction_field;
    use crate::kernels::{make_center_surround, make_gaussian};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cs() -> Kernel {
        make_center_surround(4.0, 0.3, 0.0, 5).unwrap()
    }

    #[test]
    fn surround_of_zero_and_negative_fields() {
        let s = sac_center_surround(&BipolarBundle::zeros(6, 6), &cs(), BorderPolicy::Replicate)
            .unwrap();
        assert!(s.s1_plus.as_slice().iter().all(|&v| v == 0.0));
        let mut b = BipolarBundle::zeros(6, 6);
        b.plus_fast = Field::filled(6, 6, -1.0);
        let s = sac_center_surround(&b, &cs(), BorderPolicy::Replicate).unwrap();
        assert!(s.s1_plus.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn surround_of_impulse_is_a_ring() {
        let mut b = BipolarBundle::zeros(9, 9);
        b.plus_fast.set(4, 4, 1.0);
        let k = cs();
        let s = sac_center_surround(&b, &k, BorderPolicy::Replicate).unwrap();
        assert_eq!(s.s1_plus.get(4, 4), 0.0);
        for dy in -2isize..=2 {
            for dx in -2isize..=2 {
                let v = s.s1_plus.get((4 + dx) as usize, (4 + dy) as usize);
                assert_eq!(v, k.at(dx, dy).max(0.0));
                if dx != 0 || dy != 0 {
                    assert!((v - 1.0).abs() < 1e-4);
                }
            }
        }
        assert_eq!(s.s1_plus.get(0, 0), 0.0);
    }

    #[test]
    fn push_pull_examples() {
        let mut b = BipolarBundle::zeros(2, 1);
        b.plus_slow = Field::from_vec(2, 1, vec![0.8, -0.3]).unwrap();
        b.minus_slow = Field::from_vec(2, 1, vec![0.5, 0.5]).unwrap();
        let none = SurroundMaps {
            s1_plus: Field::zeros(2, 1),
            s1_minus: Field::zeros(2, 1),
            s2_plus: Field::zeros(2, 1),
            s2_minus: Field::zeros(2, 1),
        };
        let g = ganglion_push_pull(&b, &none);
        assert_eq!(g.g1_plus.as_slice(), &[0.8, 0.0]);

        let full = SurroundMaps {
            s1_plus: Field::filled(2, 1, 1.0),
            ..none.clone()
        };
        let g = ganglion_push_pull(&b, &full);
        assert!(g.g1_minus.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fuse_examples() {
        let g = GanglionMaps {
            g1_plus: Field::filled(1, 1, 2.0),
            g2_plus: Field::filled(1, 1, 3.0),
            g1_minus: Field::filled(1, 1, 4.0),
            g2_minus: Field::filled(1, 1, 5.0),
        };
        assert_eq!(
            fuse_channels(&g, &ChannelWeights::LOOMING).get(0, 0),
            2.0 + 0.5 * 4.0
        );
        let zero = ChannelWeights::from_array([0.0; 6]);
        assert_eq!(fuse_channels(&g, &zero).get(0, 0), 0.0);
        let all = ChannelWeights::from_array([1.0; 6]);
        assert_eq!(fuse_channels(&g, &all).get(0, 0), 2.0 - 5.0 + 4.0 - 3.0);
    }

    #[test]
    fn attention_boundary_is_strict() {
        let gauss = make_gaussian(8.0, 31).unwrap();
        let (_, m) = approach_attention(
            &Field::zeros(40, 40),
            &gauss,
            0.005,
            BorderPolicy::Replicate,
        )
        .unwrap();
        assert!(m.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(binarize(&Field::filled(1, 1, 0.005), 0.005).get(0, 0), 0.0);
        assert_eq!(
            binarize(&Field::filled(1, 1, 0.0050001), 0.005).get(0, 0),
            1.0
        );
    }

    #[test]
    fn single_spike_survives_above_center_weight_ratio() {
        let gauss = make_gaussian(8.0, 31).unwrap();
        let cutoff = 0.005 / gauss.center();
        assert!((cutoff - 2.011).abs() < 1e-3);
        for (amp, survives) in [(cutoff * 0.999, false), (cutoff * 1.001, true)] {
            let mut g = Field::zeros(64, 64);
            g.set(32, 32, amp);
            let (_, m) = approach_attention(&g, &gauss, 0.005, BorderPolicy::Replicate).unwrap();
            assert_eq!(m.get(32, 32) == 1.0, survives);
        }
    }

    #[test]
    fn top_k_ties_prefer_smaller_orientation() {
        assert_eq!(top_k_orientations(&[1.0, 3.0, 3.0, 0.5], 2), vec![1, 2]);
        assert_eq!(top_k_orientations(&[2.0, 2.0, 2.0], 1), vec![0]);
    }

    fn orients() -> Vec<f64> {
        (0..8).map(|j| j as f64 * PI / 4.0).collect()
    }

    #[test]
    fn uniform_rightward_energy_is_cancelled() {
        // Coherent +x motion everywhere: R^0 dominates every pixel.
        let mut r = Vec::new();
        for j in 0..8 {
            let c = (j as f64 * PI / 4.0).cos();
            r.push(Field::filled(40, 40, 0.2 * c));
        }
        let df = direction_field(&orients(), r).unwrap();
        let gauss = make_gaussian(8.0, 31).unwrap();
        let att = directional_attention(&df, 1, &gauss, 0.005, BorderPolicy::Replicate).unwrap();
        assert_eq!(att.inhibited, vec![0]);
        assert!(att.v_prime.as_slice().iter().all(|&v| v == 0.0));
        assert!(att.mask.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn isotropic_energy_suppressed_by_large_k() {
        // A radial pattern: each pixel's strongest orientation points away
        // from the center, all orientations equally represented.
        let (w, h) = (41, 41);
        let r: Vec<Field> = orients()
            .iter()
            .map(|&th| {
                Field::from_fn(w, h, |x, y| {
                    let (dx, dy) = (x as f64 - 20.0, y as f64 - 20.0);
                    let phi = dy.atan2(dx);
                    (phi - th).cos()
                })
            })
            .collect();
        let df = direction_field(&orients(), r).unwrap();
        let gauss = make_gaussian(8.0, 31).unwrap();
        let one = directional_attention(&df, 1, &gauss, 0.005, BorderPolicy::Replicate).unwrap();
        let seven = directional_attention(&df, 7, &gauss, 0.005, BorderPolicy::Replicate).unwrap();
        let pos = |f: &Field| f.as_slice().iter().filter(|&&v| v > 1e-12).count();
        // Only pixels whose strongest orientation escapes inhibition stay positive.
        assert!(pos(&one.v_prime) > w * h * 3 / 4);
        assert!(pos(&seven.v_prime) < w * h / 5);
    }

    #[test]
    fn mask_examples() {
        let g = Field::from_fn(4, 4, |x, y| x as f64 - y as f64 * 0.5);
        let (_, u) = masked_output(&g, &Field::zeros(4, 4), &Field::filled(4, 4, 1.0));
        assert_eq!(u, 0.0);
        let (gp, u) = masked_output(&g, &Field::filled(4, 4, 1.0), &Field::filled(4, 4, 1.0));
        assert_eq!(gp, g);
        assert_eq!(u, g.sum());
    }

    proptest! {
        #[test]
        fn mask_algebra(
            g in prop::collection::vec(-10.0f64..10.0, 16),
            ma in prop::collection::vec(prop::bool::ANY, 16),
            md in prop::collection::vec(prop::bool::ANY, 16),
        ) {
            let g = Field::from_vec(4, 4, g).unwrap();
            let to_mask = |b: &[bool]| Field::from_vec(4, 4, b.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()).unwrap();
            let (ma, md) = (to_mask(&ma), to_mask(&md));
            let (gp, u) = masked_output(&g, &ma, &md);
            for i in 0..16 {
                if ma.as_slice()[i] == 0.0 || md.as_slice()[i] == 0.0 {
                    prop_assert_eq!(gp.as_slice()[i], 0.0);
                } else {
                    prop_assert_eq!(gp.as_slice()[i], g.as_slice()[i]);
                }
            }
            prop_assert!(u.abs() <= g.as_slice().iter().map(|v| v.abs()).sum::<f64>() + 1e-12);
            prop_assert_eq!(binarize(&ma, 0.5), ma);
        }

        #[test]
        fn larger_k_never_raises_v_prime(
            vals in prop::collection::vec(-5.0f64..5.0, 8 * 9),
            k in 1usize..7,
        ) {
            let r: Vec<Field> = vals.chunks(9).map(|c| Field::from_vec(3, 3, c.to_vec()).unwrap()).collect();
            let df = direction_field(&orients(), r).unwrap();
            let small = inhibited_energy(&df, &top_k_orientations(&df.r_sums, k));
            let large = inhibited_energy(&df, &top_k_orientations(&df.r_sums, k + 1));
            for (a, b) in small.as_slice().iter().zip(large.as_slice()) {
                prop_assert!(b <= a);
            }
        }
    }
}
