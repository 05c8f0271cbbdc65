//! Frame-by-frame driver holding every piece of temporal state.

use crate::approach::{
    approach_attention, directional_attention, fuse_channels, ganglion_push_pull, masked_output,
    sac_center_surround, ApproachMaps,
};
use crate::detection::{
    cluster_targets, mask_pixels, membrane_to_output, output_to_spikes, population_code,
    SpikeState, TargetEstimate,
};
use crate::direction::{DirectionField, DirectionalBank};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::kernels::{make_center_surround, make_dog, make_gaussian, Kernel};
use crate::params::ModelParams;
use crate::retina::{
    bipolar_bandpass, bipolar_temporal, half_wave_split, BipolarBundle, PhotoreceptorState,
    TemporalReads,
};
use crate::temporal::{CascadeCoefficients, CascadeState};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Report targets only on frames that raise a collision warning.
    pub gate_targets: bool,
    /// Keep every intermediate map in the report.
    pub debug_maps: bool,
    /// Replace the directional attention mask by all ones.
    pub ablate_directional_mask: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DebugMaps {
    pub photoreceptor: Field,
    pub bipolar_plus: Field,
    pub bipolar_minus: Field,
    pub bundle: BipolarBundle,
    pub direction: DirectionField,
    pub approach: ApproachMaps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    /// 1-based frame number; the priming frame is 1.
    pub t: u64,
    pub u: f64,
    pub out: f64,
    pub spike: u64,
    pub collision: bool,
    pub targets: Vec<TargetEstimate>,
    pub maps: Option<Box<DebugMaps>>,
}

/// Scales raw 8-bit gray levels to `[0, 1]`.
pub fn normalize(raw: &Field) -> Field {
    raw.map(|v| v / 255.0)
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    params: ModelParams,
    options: PipelineOptions,
    dog: Kernel,
    surround: Kernel,
    blur: Kernel,
    bank: DirectionalBank,
    photoreceptor: PhotoreceptorState,
    on: CascadeState,
    off: CascadeState,
    spikes: SpikeState,
    t: u64,
}

impl Pipeline {
    pub fn new(params: ModelParams, options: PipelineOptions) -> Result<Self> {
        let p = params.validated()?;
        let (w, h) = (p.frame_width, p.frame_height);
        let coeffs = CascadeCoefficients {
            decay: p.cascade_decay,
            transmission: p.cascade_transmission,
            tau: p.cascade_tau,
            dt: p.dt,
        };
        Ok(Self {
            dog: make_dog(p.dog_gain, p.dog_sigma1, p.dog_sigma2, p.kernel_size_small)?,
            surround: make_center_surround(p.cs_lambda, p.cs_sigma, p.cs_psi, p.kernel_size_small)?,
            blur: make_gaussian(p.attention_sigma, p.kernel_size_blur)?,
            bank: DirectionalBank::new(
                p.orientation_count,
                p.gabor_lambda,
                p.gabor_sigma,
                p.kernel_size_small,
                p.border_policy,
            )?,
            photoreceptor: PhotoreceptorState::new(p.persistence_depth, p.persistence_u),
            on: CascadeState::new(p.cascade_depth(), w, h, coeffs),
            off: CascadeState::new(p.cascade_depth(), w, h, coeffs),
            spikes: SpikeState::new(p.spike, p.dt),
            t: 0,
            params: p,
            options,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn options(&self) -> PipelineOptions {
        self.options
    }

    /// Number of frames consumed so far.
    pub fn frame_index(&self) -> u64 {
        self.t
    }

    fn scaled(&self, frame: &Field) -> Field {
        let s = self.params.intensity_scale;
        if s == 1.0 {
            frame.clone()
        } else {
            frame.map(|v| v * s)
        }
    }

    pub fn prime(&mut self, frame: &Field) -> Result<()> {
        if self.photoreceptor.is_primed() {
            return Err(Error::AlreadyPrimed);
        }
        frame.ensure_dims(self.params.frame_width, self.params.frame_height)?;
        self.photoreceptor.prime(&self.scaled(frame))?;
        self.t = 1;
        Ok(())
    }

    pub fn step(&mut self, frame: &Field) -> Result<FrameReport> {
        let p = &self.params;
        let border = p.border_policy;
        let w = p.weights;

        let scaled = self.scaled(frame);
        let photo = self.photoreceptor.step(&scaled)?;
        let (plus, minus) = half_wave_split(&photo);
        let plus0 = bipolar_bandpass(&plus, &self.dog, border)?;
        let minus0 = bipolar_bandpass(&minus, &self.dog, border)?;
        let reads = TemporalReads {
            n_fast: p.n_fast,
            n_slow: p.n_slow,
            gain: p.cascade_gain,
        };
        let bundle = bipolar_temporal(&plus0, &minus0, &mut self.on, &mut self.off, reads)?;

        let df = self.bank.direction_field(&bundle, w.v_plus, w.v_minus)?;

        let surround = sac_center_surround(&bundle, &self.surround, border)?;
        let ganglion = ganglion_push_pull(&bundle, &surround);
        let g = fuse_channels(&ganglion, &w);
        let (g_sigma, m_a) = approach_attention(&g, &self.blur, p.gamma_a, border)?;
        let att = directional_attention(&df, p.top_k, &self.blur, p.gamma_d, border)?;
        let m_d = if self.options.ablate_directional_mask {
            Field::filled(g.width(), g.height(), 1.0)
        } else {
            att.mask
        };
        let (g_prime, u) = masked_output(&g, &m_a, &m_d);

        let out = membrane_to_output(u, p.neuron_count());
        let spike = output_to_spikes(out, p.spike.scale, p.spike.threshold);
        let collision = self.spikes.collision_warning(spike);

        let attended = m_a.zip_map(&m_d, |a, b| a * b);
        let targets = if self.options.gate_targets && !collision {
            Vec::new()
        } else {
            cluster_targets(&mask_pixels(&attended), p.cluster_eps, p.cluster_min_pts)
                .iter()
                .map(|c| population_code(c, &df.v, &df.phi_hat))
                .collect::<Result<_>>()?
        };

        self.t += 1;
        let maps = self.options.debug_maps.then(|| {
            Box::new(DebugMaps {
                photoreceptor: photo,
                bipolar_plus: plus0,
                bipolar_minus: minus0,
                bundle: bundle.clone(),
                approach: ApproachMaps {
                    surround,
                    ganglion,
                    g,
                    g_sigma,
                    m_a,
                    m_d,
                    v_prime: att.v_prime,
                    inhibited: att.inhibited,
                    g_prime,
                    u,
                },
                direction: df,
            })
        });
        Ok(FrameReport {
            t: self.t,
            u,
            out,
            spike,
            collision,
            targets,
            maps,
        })
    }

    /// Primes on the first frame and steps through the rest.
    pub fn run<'a>(
        &mut self,
        frames: impl IntoIterator<Item = &'a Field>,
    ) -> Result<Vec<FrameReport>> {
        let mut it = frames.into_iter();
        let Some(first) = it.next() else {
            return Ok(Vec::new());
        };
        self.prime(first)?;
        it.map(|f| self.step(f)).collect()
    }
}
