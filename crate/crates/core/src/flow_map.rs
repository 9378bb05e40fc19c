//! The label-to-position map `M(z) = x_r[z](t)` and its generalized inverse.
//!
//! `M` is nondecreasing and made of three kinds of pieces: affine images of
//! alive cells, flats where a cell has collapsed to a point, and jumps where
//! a fan has opened. Rightmost characteristics are used at branch points, so
//! at a jump `M` takes the top of the fan.

use std::fmt::Write as _;

use crate::dissipative::fmt17;
use crate::error::{HsError, Result};
use crate::frame::CellKind;
use crate::profile::InitialProfile;
use crate::solution::Solution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Affine {
        cell: usize,
        z_lo: f64,
        z_hi: f64,
        x_lo: f64,
        x_hi: f64,
        slope: f64,
    },
    Flat {
        z_lo: f64,
        z_hi: f64,
        x: f64,
    },
    Jump {
        z: f64,
        x_lo: f64,
        x_hi: f64,
    },
}

impl Segment {
    fn z_range(&self) -> (f64, f64) {
        match *self {
            Segment::Affine { z_lo, z_hi, .. } | Segment::Flat { z_lo, z_hi, .. } => (z_lo, z_hi),
            Segment::Jump { z, .. } => (z, z),
        }
    }

    fn x_range(&self) -> (f64, f64) {
        match *self {
            Segment::Affine { x_lo, x_hi, .. } | Segment::Jump { x_lo, x_hi, .. } => (x_lo, x_hi),
            Segment::Flat { x, .. } => (x, x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneFlowMap {
    pub t: f64,
    pub segments: Vec<Segment>,
}

pub fn build_flow_map(solution: &Solution, t: f64) -> MonotoneFlowMap {
    let frame = solution.frame(t);
    let bp = solution.profile().breakpoints();
    let mut segments = Vec::with_capacity(bp.len());
    for (i, c) in frame.cells.iter().enumerate() {
        let (z_lo, z_hi) = (bp[i], bp[i + 1]);
        let (x_lo, x_hi) = (frame.positions[i], frame.positions[i + 1]);
        match c.kind {
            CellKind::Alive => segments.push(Segment::Affine {
                cell: i,
                z_lo,
                z_hi,
                x_lo,
                x_hi,
                slope: c.width / (z_hi - z_lo),
            }),
            CellKind::Collapsed => segments.push(Segment::Flat {
                z_lo,
                z_hi,
                x: x_lo,
            }),
            CellKind::Resurrected { .. } => {
                segments.push(Segment::Jump {
                    z: z_lo,
                    x_lo,
                    x_hi,
                });
                segments.push(Segment::Flat {
                    z_lo,
                    z_hi,
                    x: x_hi,
                });
            }
        }
    }
    MonotoneFlowMap { t, segments }
}

impl MonotoneFlowMap {
    pub fn domain(&self) -> (f64, f64) {
        (
            self.segments[0].z_range().0,
            self.segments.last().unwrap().z_range().1,
        )
    }

    pub fn image(&self) -> (f64, f64) {
        (
            self.segments[0].x_range().0,
            self.segments.last().unwrap().x_range().1,
        )
    }

    fn value_on(seg: &Segment, z: f64) -> f64 {
        match *seg {
            Segment::Affine {
                z_lo,
                z_hi,
                x_lo,
                x_hi,
                slope,
                ..
            } => {
                if z >= z_hi {
                    x_hi
                } else {
                    x_lo + slope * (z - z_lo)
                }
            }
            Segment::Flat { x, .. } => x,
            Segment::Jump { x_hi, .. } => x_hi,
        }
    }

    /// `M(z)`; the tails outside the support translate rigidly.
    pub fn eval(&self, z: f64) -> f64 {
        let (lo, hi) = self.domain();
        if z < lo {
            return self.image().0 + (z - lo);
        }
        if z > hi {
            return self.image().1 + (z - hi);
        }
        self.segments
            .iter()
            .rev()
            .find(|s| {
                let (a, b) = s.z_range();
                a <= z && z <= b
            })
            .map(|s| Self::value_on(s, z))
            .unwrap()
    }

    /// `M(z-)`.
    pub fn eval_left(&self, z: f64) -> f64 {
        let (lo, hi) = self.domain();
        if z < lo || z > hi {
            return self.eval(z);
        }
        let seg = self
            .segments
            .iter()
            .find(|s| {
                let (a, b) = s.z_range();
                a <= z && z <= b
            })
            .unwrap();
        match *seg {
            Segment::Jump { x_lo, .. } => x_lo,
            s => Self::value_on(&s, z),
        }
    }

    /// `W(y) = inf { z : M(z) >= y }`.
    pub fn inverse(&self, y: f64) -> f64 {
        let (lo, hi) = self.domain();
        let (y_lo, y_hi) = self.image();
        if y < y_lo {
            return lo + (y - y_lo);
        }
        if y > y_hi {
            return hi + (y - y_hi);
        }
        for s in &self.segments {
            match *s {
                Segment::Affine {
                    z_lo,
                    z_hi,
                    x_lo,
                    x_hi,
                    slope,
                    ..
                } => {
                    if x_hi >= y {
                        if y <= x_lo || slope <= 0.0 {
                            return z_lo;
                        }
                        return (z_lo + (y - x_lo) / slope).min(z_hi);
                    }
                }
                Segment::Flat { z_lo, x, .. } => {
                    if x >= y {
                        return z_lo;
                    }
                }
                Segment::Jump { z, x_hi, .. } => {
                    if x_hi >= y {
                        return z;
                    }
                }
            }
        }
        hi
    }

    /// Map dump `segment_type,zeta_lo,zeta_hi,x_lo,x_hi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("segment_type,zeta_lo,zeta_hi,x_lo,x_hi\n");
        for s in &self.segments {
            let kind = match s {
                Segment::Affine { .. } => "affine",
                Segment::Flat { .. } => "flat",
                Segment::Jump { .. } => "jump",
            };
            let (za, zb) = s.z_range();
            let (xa, xb) = s.x_range();
            let _ = writeln!(
                out,
                "{kind},{},{},{},{}",
                fmt17(za),
                fmt17(zb),
                fmt17(xa),
                fmt17(xb)
            );
        }
        out
    }
}

/// Right-continuous piecewise-constant function: `values[k]` on
/// `[knots[k], knots[k + 1])`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() + 1 || knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(HsError::Invalid(
                "step function needs increasing knots and one value per interval".into(),
            ));
        }
        Ok(Self { knots, values })
    }

    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self {
            knots: vec![lo, hi],
            values: vec![1.0],
        }
    }

    pub fn constant_on(lo: f64, hi: f64, v: f64) -> Self {
        Self {
            knots: vec![lo, hi],
            values: vec![v],
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        if x < self.knots[0] || x >= self.knots[n] {
            return 0.0;
        }
        self.values[self.knots.partition_point(|&k| k <= x) - 1]
    }

    /// Exact `int_a^b f`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let lo = self.knots[k].max(a);
                let hi = self.knots[k + 1].min(b);
                if hi > lo {
                    v * (hi - lo)
                } else {
                    0.0
                }
            })
            .fold(0.0, |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeOfVariables {
    /// `int_(a,b] f dM`, summed over segments.
    pub stieltjes: f64,
    /// `int_{M(a)}^{M(b)} f(W(y)) dy`, summed over pieces of the image.
    pub pulled_back: f64,
    pub mismatch: f64,
}

pub fn stieltjes_change_of_variables_check(
    f: &StepFunction,
    map: &MonotoneFlowMap,
    a: f64,
    b: f64,
) -> ChangeOfVariables {
    let (lo, hi) = map.domain();
    // unit-slope tails
    let mut lhs = f.integral(a, b.min(lo)) + f.integral(a.max(hi), b);
    for s in &map.segments {
        match *s {
            Segment::Affine {
                z_lo, z_hi, slope, ..
            } => {
                let lo = z_lo.max(a);
                let hi = z_hi.min(b);
                if hi > lo {
                    lhs += slope * f.integral(lo, hi);
                }
            }
            Segment::Flat { .. } => {}
            Segment::Jump { z, x_lo, x_hi } => {
                if a < z && z <= b {
                    lhs += (x_hi - x_lo) * f.eval(z);
                }
            }
        }
    }

    let y_lo = map.eval(a);
    let y_hi = map.eval(b);
    let mut cuts = vec![y_lo, y_hi];
    let (x0, xn) = map.image();
    cuts.extend(
        f.knots()
            .iter()
            .filter(|&&k| k < lo)
            .map(|&k| x0 + (k - lo)),
    );
    cuts.extend(
        f.knots()
            .iter()
            .filter(|&&k| k > hi)
            .map(|&k| xn + (k - hi)),
    );
    for s in &map.segments {
        let (xa, xb) = s.x_range();
        cuts.push(xa);
        cuts.push(xb);
        if let Segment::Affine {
            z_lo,
            z_hi,
            x_lo,
            slope,
            ..
        } = *s
        {
            cuts.extend(
                f.knots()
                    .iter()
                    .filter(|&&k| k > z_lo && k < z_hi)
                    .map(|&k| x_lo + slope * (k - z_lo)),
            );
        }
    }
    cuts.retain(|&y| y >= y_lo && y <= y_hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let rhs: f64 = cuts
        .windows(2)
        .map(|w| f.eval(map.inverse(0.5 * (w[0] + w[1]))) * (w[1] - w[0]))
        .fold(0.0, |a, b| a + b);
    ChangeOfVariables {
        stieltjes: lhs,
        pulled_back: rhs,
        mismatch: (lhs - rhs).abs(),
    }
}

/// `min over affine pieces of M' - (2 + t w0)^2 / 4`; `+inf` with no affine piece.
pub fn derivative_bound_check(map: &MonotoneFlowMap, profile: &InitialProfile, t: f64) -> f64 {
    map.segments
        .iter()
        .filter_map(|s| match *s {
            Segment::Affine { cell, slope, .. } => {
                let g = 2.0 + t * profile.slopes()[cell];
                Some(slope - 0.25 * g * g)
            }
            _ => None,
        })
        .fold(f64::INFINITY, f64::min)
}

/// `E+ = int max(w,0)^2` between the leftmost characteristic of `a` and the
/// rightmost characteristic of `b`.
pub fn positive_energy(solution: &Solution, a: f64, b: f64, t: f64) -> f64 {
    use crate::solution::Side;
    solution.positive_energy_between((a, Side::Leftmost), (b, Side::Rightmost), t)
}

/// `int |g(x + y) - g(x)| dx`, exact for step functions.
fn translation_distance(g: &StepFunction, y: f64) -> f64 {
    let mut pts: Vec<f64> = g.knots().iter().flat_map(|&k| [k, k - y]).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (g.eval(mid + y) - g.eval(mid)).abs() * (w[1] - w[0])
        })
        .fold(0.0, |a, b| a + b)
}

/// `int (1/eps) int_0^eps |g(x + y) - g(x)| dy dx`, exact: the inner
/// distance is piecewise linear in `y` with kinks at knot differences.
pub fn l1_translation_modulus(g: &StepFunction, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(HsError::NonPositiveWidth(eps));
    }
    let k = g.knots();
    let mut ys = vec![0.0, eps];
    for a in k {
        for b in k {
            let d = b - a;
            if d > 0.0 && d < eps {
                ys.push(d);
            }
        }
    }
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let integral: f64 = ys
        .windows(2)
        .map(|w| {
            0.5 * (w[1] - w[0]) * (translation_distance(g, w[0]) + translation_distance(g, w[1]))
        })
        .fold(0.0, |a, b| a + b);
    Ok(integral / eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::ContinuationPolicy;
    use crate::solution::Side;

    fn cusp() -> InitialProfile {
        InitialProfile::new(vec![0.0, 1.0], vec![-2.0], 0.0).unwrap()
    }

    fn two_cell() -> InitialProfile {
        InitialProfile::new(vec![-1.0, 0.0, 1.0], vec![1.0, -1.0], 0.0).unwrap()
    }

    #[test]
    fn two_cell_map_at_t2() {
        let s = Solution::dissipative(two_cell());
        let m = build_flow_map(&s, 2.0);
        match m.segments[0] {
            Segment::Affine {
                slope, x_lo, x_hi, ..
            } => {
                assert_eq!(slope, 4.0);
                assert_eq!((x_lo, x_hi), (-1.0, 3.0));
            }
            s => panic!("{s:?}"),
        }
        assert_eq!(
            m.segments[1],
            Segment::Flat {
                z_lo: 0.0,
                z_hi: 1.0,
                x: 3.0
            }
        );
        // agrees with characteristic sampling
        for k in 0..=20 {
            let z = -1.0 + 0.1 * k as f64;
            let x = s.characteristic_state(z, 2.0, Side::Rightmost).x;
            assert!((m.eval(z) - x).abs() < 1e-14, "z={z}");
        }
    }

    #[test]
    fn identity_at_time_zero() {
        let s = Solution::dissipative(two_cell());
        let m = build_flow_map(&s, 0.0);
        for &z in &[-1.0, -0.25, 0.0, 0.5, 1.0] {
            assert_eq!(m.eval(z), z);
            assert_eq!(m.inverse(z), z);
        }
    }

    #[test]
    fn cusp_continuation_jump() {
        let k = 1.0;
        let s = Solution::new(cusp(), &ContinuationPolicy::uniform(&cusp(), k)).unwrap();
        let m = build_flow_map(&s, 2.0);
        assert_eq!(
            m.segments[0],
            Segment::Jump {
                z: 0.0,
                x_lo: 0.0,
                x_hi: k
            }
        );
        assert_eq!(m.eval(0.0), k);
        assert_eq!(m.eval_left(0.0), 0.0);
        assert_eq!(m.inverse(0.5), 0.0);
        assert_eq!(m.inverse(k), 0.0);
        assert_eq!(m.inverse(k + 1.0), 2.0);
        assert!(m
            .to_csv()
            .contains("jump,0.0000000000000000e0,0.0000000000000000e0"));
    }

    #[test]
    fn change_of_variables_examples() {
        let s = Solution::dissipative(two_cell());
        let m = build_flow_map(&s, 2.0);
        let c = stieltjes_change_of_variables_check(
            &StepFunction::constant_on(-5.0, 5.0, 1.0),
            &m,
            -1.0,
            1.0,
        );
        assert_eq!((c.stieltjes, c.pulled_back), (4.0, 4.0));
        let c = stieltjes_change_of_variables_check(
            &StepFunction::constant_on(-5.0, 5.0, 0.0),
            &m,
            -1.0,
            1.0,
        );
        assert_eq!((c.stieltjes, c.pulled_back), (0.0, 0.0));
        let f = StepFunction::new(vec![-1.0, 0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let c = stieltjes_change_of_variables_check(&f, &m, -1.0, 1.0);
        assert_eq!((c.stieltjes, c.pulled_back), (4.0, 4.0));
        // Riemann-Stieltjes sums with f evaluated at the left tag
        let n = 100_000;
        let rs: f64 = (0..n)
            .map(|k| {
                let z0 = -1.0 + 2.0 * k as f64 / n as f64;
                let z1 = -1.0 + 2.0 * (k + 1) as f64 / n as f64;
                f.eval(z0) * (m.eval(z1) - m.eval(z0))
            })
            .sum();
        assert!((rs - 4.0).abs() < 1e-9);
    }

    #[test]
    fn jump_mass_is_fan_width() {
        let k = 0.5;
        let s = Solution::new(cusp(), &ContinuationPolicy::uniform(&cusp(), k)).unwrap();
        let m = build_flow_map(&s, 3.0);
        let f = StepFunction::indicator(0.0, 1.0);
        let c = stieltjes_change_of_variables_check(&f, &m, -1.0, 2.0);
        assert_eq!(c.stieltjes, k * 4.0);
        assert!(c.mismatch < 1e-15);
        let f = StepFunction::constant_on(-3.0, 3.0, 1.0);
        let c = stieltjes_change_of_variables_check(&f, &m, -1.0, 2.0);
        assert_eq!(c.stieltjes, 4.0);
        assert!(c.mismatch < 1e-15);
        assert_eq!(m.inverse(m.eval(-0.5)), -0.5);
        assert_eq!(m.inverse(m.eval(1.5)), 1.5);
        assert!(c.mismatch < 1e-15);
    }

    #[test]
    fn derivative_bound_examples() {
        let p = two_cell();
        let s = Solution::dissipative(p.clone());
        let m = build_flow_map(&s, 1.0);
        assert_eq!(derivative_bound_check(&m, &p, 1.0), 0.0);
        match (m.segments[0], m.segments[1]) {
            (Segment::Affine { slope: a, .. }, Segment::Affine { slope: b, .. }) => {
                assert_eq!((a, b), (2.25, 0.25));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            derivative_bound_check(&build_flow_map(&s, 0.0), &p, 0.0),
            0.0
        );
    }

    #[test]
    fn positive_energy_examples() {
        let p = two_cell();
        let s = Solution::dissipative(p);
        for &t in &[0.0, 1.0, 2.5, 4.0] {
            assert_eq!(positive_energy(&s, -1.0, 1.0, t), 1.0);
            assert!((s.frame(t).integral_w2_positive() - 1.0).abs() < 1e-14);
        }
        let c = Solution::new(cusp(), &ContinuationPolicy::uniform(&cusp(), 0.5)).unwrap();
        assert_eq!(positive_energy(&c, -1.0, 2.0, 0.5), 0.0);
        assert_eq!(positive_energy(&c, -1.0, 2.0, 1.0), 0.0);
        assert_eq!(positive_energy(&c, -1.0, 2.0, 1.5), 2.0);
        let flat = Solution::dissipative(InitialProfile::flat(0.0, 1.0, 0.0).unwrap());
        assert_eq!(positive_energy(&flat, -1.0, 2.0, 1.0), 0.0);
    }

    #[test]
    fn translation_modulus_examples() {
        let g = StepFunction::indicator(0.0, 1.0);
        assert!((l1_translation_modulus(&g, 0.1).unwrap() - 0.1).abs() < 1e-15);
        assert!((l1_translation_modulus(&g, 0.5).unwrap() - 0.5).abs() < 1e-15);
        let zero = StepFunction::constant_on(0.0, 1.0, 0.0);
        assert_eq!(l1_translation_modulus(&zero, 0.3).unwrap(), 0.0);
        assert!(l1_translation_modulus(&g, 0.0).is_err());
    }

    #[test]
    fn translation_modulus_matches_midpoint_quadrature() {
        let g = StepFunction::new(vec![-0.5, 0.0, 0.7, 1.0], vec![2.0, -1.0, 3.0]).unwrap();
        let eps = 0.3;
        let (nx, ny) = (4000, 400);
        let (xa, xb) = (-1.0, 1.5);
        let hx = (xb - xa) / nx as f64;
        let hy = eps / ny as f64;
        let mut q = 0.0;
        for i in 0..nx {
            let x = xa + (i as f64 + 0.5) * hx;
            for j in 0..ny {
                let y = (j as f64 + 0.5) * hy;
                q += (g.eval(x + y) - g.eval(x)).abs() * hx * hy;
            }
        }
        let exact = l1_translation_modulus(&g, eps).unwrap();
        assert!(
            (q / eps - exact).abs() < 1e-2,
            "q={} exact={exact}",
            q / eps
        );
    }
}
