//! Exact distances between piecewise-uniform densities.
//!
//! Every construction density in this crate is a finite union of uniform
//! blocks, so total variation and KL reduce to finite sums over a common
//! refinement. Blocks whose width underflows `f64` (spike widths like
//! `exp(-2e4)`) are carried as point masses with their width kept in log
//! space; distances then stay exact instead of degenerating to `0·inf`.

use crate::constructions::{
    SpikeMixtureFamily, SpikeMixtureParams, TailChainFamily, TailChainParams,
};
use thiserror::Error;

/// Tolerance for the unit-mass check on a piecewise density.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("segment masses sum to {total}, expected 1 within {MASS_TOL}")]
    Unnormalized { total: f64 },
    #[error("segments overlap near {at}")]
    Overlap { at: f64 },
    #[error("segment at {left} has invalid mass {mass}")]
    InvalidMass { left: f64, mass: f64 },
}

/// One uniform block: mass `mass` spread over `[left, left + width]`.
///
/// `log_width` is authoritative for near-degenerate blocks; `width` is its
/// linear image and may underflow to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub left: f64,
    pub width: f64,
    pub log_width: f64,
    pub mass: f64,
}

impl Segment {
    pub fn from_width(left: f64, width: f64, mass: f64) -> Self {
        Segment {
            left,
            width,
            log_width: width.ln(),
            mass,
        }
    }

    pub fn from_log_width(left: f64, log_width: f64, mass: f64) -> Self {
        Segment {
            left,
            width: log_width.exp(),
            log_width,
            mass,
        }
    }

    /// Whether the block must be treated as a point mass: its width
    /// underflows linear arithmetic either absolutely (below the smallest
    /// positive normal) or relative to its position on the axis.
    pub fn atom_like(&self) -> bool {
        self.log_width < f64::MIN_POSITIVE.ln() || self.left + self.width == self.left
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    /// Linear density height; only meaningful for non-atom blocks.
    pub fn height(&self) -> f64 {
        self.mass / self.width
    }

    pub fn log_height(&self) -> f64 {
        self.mass.ln() - self.log_width
    }
}

/// A validated piecewise-uniform probability density: disjoint blocks with
/// positive masses summing to 1. Zero-mass blocks are dropped on entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDensity {
    segments: Vec<Segment>,
}

impl PiecewiseDensity {
    pub fn new(mut segments: Vec<Segment>) -> Result<Self, MetricsError> {
        segments.retain(|s| s.mass != 0.0);
        for s in &segments {
            if !s.mass.is_finite() || s.mass < 0.0 {
                return Err(MetricsError::InvalidMass {
                    left: s.left,
                    mass: s.mass,
                });
            }
        }
        segments.sort_by(|a, b| a.left.total_cmp(&b.left).then(a.width.total_cmp(&b.width)));
        for pair in segments.windows(2) {
            if pair[1].left + MASS_TOL < pair[0].right() {
                return Err(MetricsError::Overlap { at: pair[1].left });
            }
        }
        let total: f64 = segments.iter().map(|s| s.mass).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(MetricsError::Unnormalized { total });
        }
        Ok(PiecewiseDensity { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn atoms(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.atom_like())
    }

    fn atom_at(&self, left: f64) -> Option<&Segment> {
        self.atoms().find(|s| s.left == left)
    }

    fn regular_at(&self, x: f64) -> Option<&Segment> {
        self.segments
            .iter()
            .find(|s| !s.atom_like() && s.left <= x && x <= s.right())
    }
}

/// Exact total variation distance `½ ∫ |p − q|`.
///
/// Point masses compare directly against a coinciding point mass of the
/// other density, or against the other density's local height; the
/// remaining blocks integrate over the union refinement of both edge
/// sets. The overlap a point mass steals from a covering block is below
/// the width resolution of the block itself, so it is ignored.
pub fn tv_exact(p: &PiecewiseDensity, q: &PiecewiseDensity) -> f64 {
    let mut total = 0.0;
    for a in p.atoms() {
        total += match q.atom_at(a.left) {
            Some(b) => (a.mass - b.mass).abs(),
            None => {
                let covering = q.regular_at(a.left).map_or(0.0, |s| s.height());
                (a.mass - covering * a.width).abs()
            }
        };
    }
    for b in q.atoms() {
        if p.atom_at(b.left).is_none() {
            let covering = p.regular_at(b.left).map_or(0.0, |s| s.height());
            total += (b.mass - covering * b.width).abs();
        }
    }
    let mut cuts: Vec<f64> = Vec::new();
    for s in p.segments().iter().chain(q.segments()) {
        if !s.atom_like() {
            cuts.push(s.left);
            cuts.push(s.right());
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    for cell in cuts.windows(2) {
        let (lo, hi) = (cell[0], cell[1]);
        if lo == hi {
            continue;
        }
        let mid = lo + (hi - lo) / 2.0;
        let ph = p.regular_at(mid).map_or(0.0, |s| s.height());
        let qh = q.regular_at(mid).map_or(0.0, |s| s.height());
        total += (ph - qh).abs() * (hi - lo);
    }
    (0.5 * total).clamp(0.0, 1.0)
}

/// Exact KL divergence `∫ p log(p/q)`, computed in log space so
/// underflowed block widths contribute their true (huge but finite)
/// log-height gaps. Returns `+∞` as soon as any piece of `p`'s mass falls
/// where `q` has no coverage of the same kind.
pub fn kl_piecewise(p: &PiecewiseDensity, q: &PiecewiseDensity) -> f64 {
    let mut total = 0.0;
    for a in p.atoms() {
        let log_q = match q.atom_at(a.left) {
            Some(b) => b.log_height(),
            None => match q.regular_at(a.left) {
                Some(s) => s.log_height(),
                None => return f64::INFINITY,
            },
        };
        total += a.mass * (a.log_height() - log_q);
    }
    let mut cuts: Vec<f64> = Vec::new();
    for s in p.segments().iter().chain(q.segments()) {
        if !s.atom_like() {
            cuts.push(s.left);
            cuts.push(s.right());
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    for cell in cuts.windows(2) {
        let (lo, hi) = (cell[0], cell[1]);
        if lo == hi {
            continue;
        }
        let mid = lo + (hi - lo) / 2.0;
        let Some(sp) = p.regular_at(mid) else { continue };
        let Some(sq) = q.regular_at(mid) else {
            return f64::INFINITY;
        };
        let cell_mass = sp.height() * (hi - lo);
        total += cell_mass * (sp.log_height() - sq.log_height());
    }
    total
}

/// Whether `tv <= sqrt(kl / 2) + slack` for precomputed distances; a
/// divergent `kl` makes the bound vacuously true.
pub fn pinsker_inequality(tv: f64, kl: f64, slack: f64) -> bool {
    tv <= (kl.max(0.0) / 2.0).sqrt() + slack
}

/// [`pinsker_inequality`] evaluated with this module's exact distances.
pub fn pinsker_holds(p: &PiecewiseDensity, q: &PiecewiseDensity, slack: f64) -> bool {
    pinsker_inequality(tv_exact(p, q), kl_piecewise(p, q), slack)
}

/// Exact block decomposition of a spike-mixture density.
pub fn spike_piecewise(
    family: &SpikeMixtureFamily,
    params: &SpikeMixtureParams,
) -> PiecewiseDensity {
    let alpha = params.alpha;
    if alpha == 0.0 {
        let unit = vec![Segment::from_width(0.0, 1.0, 1.0)];
        return PiecewiseDensity::new(unit).expect("standard uniform block is normalized");
    }
    let mu = params.mu;
    let cut = 1.0 - 2.0 * alpha;
    let log_f = family.log_f(alpha);
    let f_lin = log_f.exp();
    let quarter = alpha / 4.0;
    // When the spike sits flush against 3, 3 - mu - f_lin can round to a
    // negative ulp; the trailing block is then empty.
    let trailing = (3.0 - mu - f_lin).max(0.0);
    let segments = vec![
        Segment::from_width(0.0, cut, 0.5 * cut + 0.5 * (1.0 - alpha)),
        Segment::from_width(cut, 2.0 * alpha, alpha),
        Segment::from_width(2.0, mu - 2.0, quarter * (mu - 2.0)),
        Segment::from_log_width(mu, log_f, quarter * (1.0 + f_lin)),
        Segment::from_width(mu + f_lin, trailing, quarter * trailing),
    ];
    PiecewiseDensity::new(segments).expect("spike mixture masses telescope to 1")
}

/// Exact block decomposition of a tail-chain density (either route).
pub fn tail_piecewise(family: &TailChainFamily, params: &TailChainParams) -> PiecewiseDensity {
    let segments = match params {
        TailChainParams::Chain { alphas } => {
            let mut segments = Vec::with_capacity(alphas.len() + 1);
            let mut carry = 1.0;
            for (level, &a) in alphas.iter().enumerate() {
                segments.push(Segment::from_width(
                    level as f64,
                    1.0 - 2.0 * a,
                    carry * (1.0 - a),
                ));
                carry *= a;
                if carry == 0.0 {
                    break;
                }
            }
            if carry > 0.0 {
                segments.push(Segment::from_width(alphas.len() as f64, 1.0, carry));
            }
            segments
        }
        TailChainParams::Spiked { beta, span } => {
            let j = f64::from(*span);
            let log_f = family.log_f(*span);
            let f_lin = log_f.exp();
            let left = (j - beta).min(j - f_lin);
            // When the spike sits flush against j, j - left - f_lin can
            // round to a negative ulp; the trailing block is then empty.
            let trailing = (j - left - f_lin).max(0.0);
            vec![
                Segment::from_width(0.0, left, left / (2.0 * j)),
                Segment::from_log_width(left, log_f, 0.5 + f_lin / (2.0 * j)),
                Segment::from_width(left + f_lin, trailing, trailing / (2.0 * j)),
            ]
        }
    };
    PiecewiseDensity::new(segments).expect("chain and spiked masses telescope to 1")
}
