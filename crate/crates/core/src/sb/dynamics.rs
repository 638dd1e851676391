//! Ballistic simulated bifurcation: symplectic Euler updates with a
//! perfectly inelastic wall at `|x| = 1`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexed::{EncodedJ, FixedPointFormat, IndexedMac};
use crate::ising::SpinConfig;
use crate::rng::stream_rng;

/// Control parameters. `c` serves as both the coupling gain and the bias gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbParams {
    pub c: f64,
    pub dt: f64,
    pub step: usize,
    #[serde(default = "default_a0")]
    pub a0: f64,
}

fn default_a0() -> f64 {
    1.0
}

impl SbParams {
    pub fn new(c: f64, dt: f64, step: usize) -> Result<Self> {
        let p = Self { c, dt, step, a0: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.c > 0.0
            && self.c.is_finite()
            && self.dt > 0.0
            && self.dt.is_finite()
            && self.step >= 1
            && self.a0 > 0.0
            && self.a0.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("SB parameters need c > 0, dt > 0, step >= 1, a0 > 0 (got {self:?})")))
        }
    }

    /// Pump amplitude at iteration `k`: linear ramp `a0 * k / step`.
    pub fn pump(&self, k: usize) -> f64 {
        self.a0 * k as f64 / self.step as f64
    }
}

/// Oscillator positions and momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct SbState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub k: usize,
}

/// Amplitude of the uniform initial momenta.
pub const INIT_MOMENTUM: f64 = 0.1;

impl SbState {
    pub fn zeros(n: usize) -> Self {
        Self { x: vec![0.0; n], y: vec![0.0; n], k: 0 }
    }

    /// `x = 0`, `y ~ U(-0.1, 0.1)` drawn from the shot's own stream.
    pub fn initial(n: usize, seed: u64, shot: u64) -> Self {
        let mut s = Self::zeros(n);
        s.randomize_momenta(0, n, seed, shot);
        s
    }

    /// Fills `y[offset..offset + n]` exactly as [`SbState::initial`] would for an `n`-spin shot.
    pub(crate) fn randomize_momenta(&mut self, offset: usize, n: usize, seed: u64, shot: u64) {
        let mut rng = stream_rng(seed, shot);
        for y in &mut self.y[offset..offset + n] {
            *y = rng.gen_range(-INIT_MOMENTUM..INIT_MOMENTUM);
        }
    }

    pub fn spins(&self) -> SpinConfig {
        SpinConfig::from_signs(&self.x)
    }
}

/// Source of the coupling term `sum_j J_ij x_j`.
pub trait Coupling {
    fn n(&self) -> usize;
    fn apply(&mut self, x: &[f64], out: &mut [f64]);
}

/// Direct float MAC over a dense row-major matrix.
#[derive(Debug, Clone)]
pub struct DenseCoupling<'a> {
    j: &'a [f64],
    n: usize,
    /// When set, positions pass through the fixed-point format before the MAC.
    shim: Option<FixedPointFormat>,
    xbuf: Vec<f64>,
}

impl<'a> DenseCoupling<'a> {
    pub fn new(j: &'a [f64], n: usize) -> Self {
        Self { j, n, shim: None, xbuf: Vec::new() }
    }

    pub fn with_quantization(mut self, format: FixedPointFormat) -> Self {
        self.shim = Some(format);
        self
    }
}

impl Coupling for DenseCoupling<'_> {
    fn n(&self) -> usize {
        self.n
    }

    fn apply(&mut self, x: &[f64], out: &mut [f64]) {
        let xs: &[f64] = match self.shim {
            Some(f) => {
                self.xbuf.clear();
                self.xbuf.extend(x.iter().map(|&v| f.round_trip(v)));
                &self.xbuf
            }
            None => x,
        };
        for (row, o) in self.j.chunks_exact(self.n).zip(out.iter_mut()) {
            let mut acc = 0.0;
            for (&jv, &xv) in row.iter().zip(xs) {
                acc += jv * xv;
            }
            *o = acc;
        }
    }
}

/// Indexed MAC over an encoded matrix with fixed-point positions.
#[derive(Debug, Clone)]
pub struct EncodedCoupling<'a> {
    mac: IndexedMac<'a>,
    format: FixedPointFormat,
    xq: Vec<i32>,
}

impl<'a> EncodedCoupling<'a> {
    pub fn new(enc: &'a EncodedJ, format: FixedPointFormat) -> Self {
        Self { mac: IndexedMac::new(enc, format), format, xq: Vec::with_capacity(enc.n()) }
    }
}

impl Coupling for EncodedCoupling<'_> {
    fn n(&self) -> usize {
        self.mac.n()
    }

    fn apply(&mut self, x: &[f64], out: &mut [f64]) {
        self.format.quantize_all(x, &mut self.xq);
        self.mac.full_into(&self.xq, out).expect("coupling dimensions fixed at construction");
    }
}

/// One bSB iteration given the coupling term already evaluated at `state.x`.
#[inline]
fn update(state: &mut SbState, mac: &[f64], h: &[f64], params: &SbParams, a_k: f64) {
    let SbParams { c, dt, a0, .. } = *params;
    for i in 0..state.x.len() {
        let force = -(a0 - a_k) * state.x[i] - c * h[i] + c * mac[i];
        let y = state.y[i] + force * dt;
        let x = state.x[i] + a0 * y * dt;
        if x.abs() > 1.0 {
            state.x[i] = x.signum();
            state.y[i] = 0.0;
        } else {
            state.x[i] = x;
            state.y[i] = y;
        }
    }
    state.k += 1;
}

/// Advances `state` by one step at pump amplitude `a_k`.
pub fn sb_step(state: &mut SbState, coupling: &mut dyn Coupling, h: &[f64], params: &SbParams, a_k: f64) {
    let mut mac = vec![0.0; state.x.len()];
    coupling.apply(&state.x, &mut mac);
    update(state, &mac, h, params, a_k);
}

/// Runs the full pump schedule from `state`.
pub fn evolve(state: &mut SbState, coupling: &mut dyn Coupling, h: &[f64], params: &SbParams) {
    let mut mac = vec![0.0; state.x.len()];
    for k in 0..params.step {
        coupling.apply(&state.x, &mut mac);
        update(state, &mac, h, params, params.pump(k));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(c: f64, dt: f64) -> SbParams {
        SbParams { c, dt, step: 1, a0: 1.0 }
    }

    #[test]
    fn free_motion_at_full_pump() {
        let j = [0.0; 4];
        let mut s = SbState { x: vec![0.1, -0.2], y: vec![0.3, 0.05], k: 0 };
        sb_step(&mut s, &mut DenseCoupling::new(&j, 2), &[0.0, 0.0], &params(0.7, 0.5), 1.0);
        assert_eq!(s.y, vec![0.3, 0.05]);
        assert_eq!(s.x, vec![0.1 + 0.3 * 0.5, -0.2 + 0.05 * 0.5]);
        assert_eq!(s.k, 1);
    }

    #[test]
    fn wall_clips_and_stops() {
        let j = [0.0];
        let mut s = SbState { x: vec![0.9], y: vec![0.6], k: 0 };
        // x -> 0.9 + 0.6 * 0.5 = 1.2
        sb_step(&mut s, &mut DenseCoupling::new(&j, 1), &[0.0], &params(1.0, 0.5), 1.0);
        assert_eq!((s.x[0], s.y[0]), (1.0, 0.0));

        let mut s = SbState { x: vec![-0.9], y: vec![-0.6], k: 0 };
        sb_step(&mut s, &mut DenseCoupling::new(&j, 1), &[0.0], &params(1.0, 0.5), 1.0);
        assert_eq!((s.x[0], s.y[0]), (-1.0, 0.0));
    }

    #[test]
    fn bias_only_step() {
        let j = [0.0; 4];
        let mut s = SbState::zeros(2);
        sb_step(&mut s, &mut DenseCoupling::new(&j, 2), &[1.0, 0.0], &params(1.0, 0.5), 0.0);
        assert_eq!(s.y, vec![-0.5, 0.0]);
        // x += a0 * y * dt with the already-updated y
        assert_eq!(s.x, vec![-0.25, 0.0]);
    }

    #[test]
    fn linear_pump() {
        let p = SbParams::new(0.5, 0.5, 4).unwrap();
        let a: Vec<f64> = (0..4).map(|k| p.pump(k)).collect();
        assert_eq!(a, vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn invalid_params() {
        assert!(SbParams::new(0.0, 0.5, 10).is_err());
        assert!(SbParams::new(0.5, -0.1, 10).is_err());
        assert!(SbParams::new(0.5, 0.5, 0).is_err());
        assert!(SbParams::new(f64::NAN, 0.5, 10).is_err());
    }

    #[test]
    fn initial_momenta_in_range() {
        let s = SbState::initial(1000, 3, 0);
        assert!(s.x.iter().all(|&x| x == 0.0));
        assert!(s.y.iter().all(|&y| y.abs() < INIT_MOMENTUM));
        assert_ne!(s.y, SbState::initial(1000, 3, 1).y);
    }
}
