//! Random sensor fields in the unit square.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::topology::{build_tree, build_unit_graph};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Rng};

/// Field density class, defined by the target mean neighbour count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterferenceClass {
    #[serde(rename = "lif", alias = "LIF")]
    Lif,
    #[serde(rename = "hif", alias = "HIF")]
    Hif,
}

impl InterferenceClass {
    pub fn target_degree(&self) -> f64 {
        match self {
            InterferenceClass::Lif => 8.0,
            InterferenceClass::Hif => 50.0,
        }
    }
}

impl fmt::Display for InterferenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InterferenceClass::Lif => "lif",
            InterferenceClass::Hif => "hif",
        })
    }
}

impl FromStr for InterferenceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lif" => Ok(InterferenceClass::Lif),
            "hif" => Ok(InterferenceClass::Hif),
            _ => Err(Error::InvalidParameter(format!("unknown interference class {s:?}"))),
        }
    }
}

/// Sensors plus a base station. Node 0 is the base station; sensor `i`
/// (1-based) sits at `positions[i - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldFile", into = "FieldFile")]
pub struct Field {
    pub positions: Vec<[f64; 2]>,
    pub bs: [f64; 2],
    pub radius: f64,
}

#[derive(Serialize, Deserialize)]
struct FieldFile {
    n_s: usize,
    radius: f64,
    positions: Vec<[f64; 2]>,
    bs: [f64; 2],
}

impl From<Field> for FieldFile {
    fn from(f: Field) -> Self {
        FieldFile { n_s: f.positions.len(), radius: f.radius, positions: f.positions, bs: f.bs }
    }
}

impl TryFrom<FieldFile> for Field {
    type Error = Error;

    fn try_from(f: FieldFile) -> Result<Self> {
        if f.n_s != f.positions.len() {
            return Err(Error::Format(format!("n_s = {} but {} positions", f.n_s, f.positions.len())));
        }
        Field::new(f.positions, f.bs, f.radius)
    }
}

pub const CENTER: [f64; 2] = [0.5, 0.5];

/// Placement attempts before giving up on a connected field.
const MAX_ATTEMPTS: usize = 1000;

fn in_unit_square(p: &[f64; 2]) -> bool {
    p.iter().all(|c| (0.0..=1.0).contains(c))
}

impl Field {
    pub fn new(positions: Vec<[f64; 2]>, bs: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        if !in_unit_square(&bs) || !positions.iter().all(in_unit_square) {
            return Err(Error::InvalidParameter("coordinates must lie in the unit square".into()));
        }
        Ok(Self { positions, bs, radius })
    }

    pub fn n_s(&self) -> usize {
        self.positions.len()
    }

    /// Position of node `i` (0 is the base station).
    pub fn pos(&self, i: usize) -> [f64; 2] {
        if i == 0 {
            self.bs
        } else {
            self.positions[i - 1]
        }
    }

    pub fn dist(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.pos(a), self.pos(b));
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    pub fn within(&self, a: usize, b: usize) -> bool {
        self.dist(a, b) <= self.radius
    }

    /// Mean over sensors of the number of other sensors within the radius.
    pub fn mean_neighbors(&self) -> f64 {
        let n = self.n_s();
        if n == 0 {
            return 0.0;
        }
        let mut pairs = 0usize;
        for a in 1..=n {
            for b in a + 1..=n {
                if self.within(a, b) {
                    pairs += 1;
                }
            }
        }
        2.0 * pairs as f64 / n as f64
    }

    /// True when every sensor has a multi-hop route to the base station.
    pub fn is_connected(&self) -> bool {
        build_tree(self, &build_unit_graph(self)).is_ok()
    }
}

fn place(rng: &mut Rng, n_s: usize) -> Vec<[f64; 2]> {
    (0..n_s).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect()
}

/// Smallest radius giving a mean sensor neighbour count of at least `target`
/// (pairs counted with the closed-disk rule).
pub fn calibrate_radius(positions: &[[f64; 2]], target: f64) -> Result<f64> {
    let n = positions.len();
    if target <= 0.0 || target >= n as f64 {
        return Err(Error::InvalidParameter(format!("target mean degree {target} needs 0 < target < n_s = {n}")));
    }
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            let (p, q) = (positions[a], positions[b]);
            d.push((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    // mean degree = 2 * pairs / n, so the radius is an order statistic
    let k = ((target * n as f64 / 2.0).ceil() as usize).clamp(1, d.len());
    let (_, r, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*r)
}

/// Uniform sensors, base station at the centre, radius calibrated to the
/// class's mean neighbour count. Placements whose unit graph leaves some
/// sensor unreachable are redrawn.
pub fn gen_field(n_s: usize, class: InterferenceClass, seed: u64) -> Result<Field> {
    if n_s == 0 {
        return Err(Error::InvalidParameter("field needs at least one sensor".into()));
    }
    let target = class.target_degree();
    if target >= n_s as f64 {
        return Err(Error::InvalidParameter(format!("{class} needs more than {target} sensors, got {n_s}")));
    }
    let mut rng = stream_rng(seed, 0);
    for _ in 0..MAX_ATTEMPTS {
        let positions = place(&mut rng, n_s);
        let radius = calibrate_radius(&positions, target)?;
        let f = Field::new(positions, CENTER, radius)?;
        if f.is_connected() {
            return Ok(f);
        }
    }
    Err(Error::InvalidParameter(format!("no connected {class} field with {n_s} sensors after {MAX_ATTEMPTS} draws")))
}

/// Uniform sensors with a fixed radius, redrawn until connected.
pub fn gen_field_with_radius(n_s: usize, radius: f64, seed: u64) -> Result<Field> {
    let mut rng = stream_rng(seed, 1);
    for _ in 0..MAX_ATTEMPTS {
        let f = Field::new(place(&mut rng, n_s), CENTER, radius)?;
        if f.is_connected() {
            return Ok(f);
        }
    }
    Err(Error::InvalidParameter(format!(
        "no connected field with {n_s} sensors at r = {radius} after {MAX_ATTEMPTS} draws"
    )))
}
