//! The direction sextic `q`, the determinant `D`, evolute directions and
//! centers at a point, regularity diagnostics, and branch tracing over a
//! chart grid.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, Schur};
use num_traits::float::Float;

use crate::frames::{normalize_at, rotate_frame, BlaschkeFrame, FrameError, Rotation, SurfaceModel};
use crate::invariants::{
    affine_curvature_derivative, angle_gap, moutard_center, reduce_angle, Center, InvariantError, SectionJet,
    TangentDirection,
};
use crate::linalg::{self, Vec3};
use crate::midplanes::{transon_form, HForms, Row};
use crate::scalar::{Mode, Scalar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvoluteError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error("direction is not a root of q (|q| = {0:e})")]
    NoSolution(f64),
    #[error("the limit system has rank below 3")]
    RankDeficient,
    #[error("step direction is zero")]
    ZeroDirection,
    #[error("the cubic form vanishes; no cubic-killing frame")]
    VanishingCubic,
}

impl From<crate::jets::JetError> for EvoluteError {
    fn from(e: crate::jets::JetError) -> Self {
        EvoluteError::Frame(FrameError::Jet(e))
    }
}

/// `q = 12 q₃ + q₄`; entry `k` multiplies `ξ^(6−k) η^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSextic {
    pub q3: [Scalar; 7],
    pub q4: [Scalar; 7],
}

impl DirectionSextic {
    pub fn mode(&self) -> Mode {
        self.q3[0].mode()
    }

    pub fn coeffs(&self) -> [Scalar; 7] {
        let twelve = Scalar::from_int(self.mode(), 12);
        core::array::from_fn(|k| &(&twelve * &self.q3[k]) + &self.q4[k])
    }

    pub fn coeffs_f64(&self) -> [f64; 7] {
        let c = self.coeffs();
        core::array::from_fn(|k| c[k].to_f64())
    }

    pub fn eval(&self, d: &[Scalar; 2]) -> Scalar {
        let mut acc = Scalar::zero(self.mode());
        for (k, c) in self.coeffs().iter().enumerate() {
            acc = &acc + &(&(c * &d[0].pow(6 - k as u32)) * &d[1].pow(k as u32));
        }
        acc
    }

    pub fn eval_angle(&self, theta: f64) -> f64 {
        eval_trig(&self.coeffs_f64(), theta).0
    }
}

/// `Q(θ) = q(cos θ, sin θ)` and `Q′(θ)`.
fn eval_trig(c: &[f64; 7], theta: f64) -> (f64, f64) {
    let (s, co) = Float::sin_cos(theta);
    let mut q = 0.0;
    let mut dq = 0.0;
    for k in 0..7 {
        let j = 6 - k;
        q += c[k] * Float::powi(co, j as i32) * Float::powi(s, k as i32);
        if j > 0 {
            dq -= c[k] * j as f64 * Float::powi(co, j as i32 - 1) * Float::powi(s, k as i32 + 1);
        }
        if k > 0 {
            dq += c[k] * k as f64 * Float::powi(co, j as i32 + 1) * Float::powi(s, k as i32 - 1);
        }
    }
    (q, dq)
}

pub fn direction_sextic(frame: &BlaschkeFrame) -> DirectionSextic {
    let mode = frame.mode();
    let n = |k| Scalar::from_int(mode, k);
    let a = frame.a();
    let b = frame.b();
    let ab = &a * &b;
    let d = &(&a * &a) - &(&b * &b);
    let [f40, f31, f22, f13, f04] = frame.f4();
    DirectionSextic {
        q3: [
            ab.clone(),
            &n(3) * &d,
            &n(-15) * &ab,
            &n(-10) * &d,
            &n(15) * &ab,
            &n(3) * &d,
            -&ab,
        ],
        q4: [
            -&f31,
            &(&n(4) * &f40) - &(&n(2) * &f22),
            &(&n(2) * &f31) - &(&n(3) * &f13),
            &n(4) * &(&f40 - &f04),
            &(&n(3) * &f31) - &(&n(2) * &f13),
            &(&n(2) * &f22) - &(&n(4) * &f04),
            f13,
        ],
    }
}

/// Rows `G_ξ, G_η, H₁, H₂` at `(ξ, η)` as `(x, y, z, constant)` equations.
pub fn limit_rows(frame: &BlaschkeFrame, d: &[Scalar; 2]) -> Result<[Row; 4], EvoluteError> {
    let g = transon_form(frame);
    let h = HForms::from_frame(frame);
    Ok([g.partial(0)?.eval(d)?, g.partial(1)?.eval(d)?, h.h1.eval(d)?, h.h2.eval(d)?])
}

/// Determinant of the 4×4 matrix with rows `G_ξ, G_η, H₁, H₂` and columns
/// `(x, y, z, constant)`. It equals `−(3/32)(ξ² + η²)² q(ξ, η)`.
pub fn discriminant_d(frame: &BlaschkeFrame, d: &[Scalar; 2]) -> Result<Scalar, EvoluteError> {
    let rows = limit_rows(frame, d)?;
    let m: Vec<Vec<Scalar>> = rows
        .iter()
        .map(|r| vec![r.covector[0].clone(), r.covector[1].clone(), r.covector[2].clone(), r.constant.clone()])
        .collect();
    Ok(linalg::det(&m))
}

/// Tolerances of the root finder, relative to the coefficient scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootOptions {
    pub residual_tol: f64,
    pub multiplicity_tol: f64,
    pub zero_tol: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            residual_tol: 1e-9,
            multiplicity_tol: 1e-6,
            zero_tol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionRoot {
    /// Local angle in `[0, π)`.
    pub theta: f64,
    pub simple: bool,
    pub q_value: f64,
    pub dq: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DirectionSet {
    /// `q ≡ 0`: every direction solves.
    IdenticallyZero,
    Roots(Vec<DirectionRoot>),
}

impl DirectionSet {
    pub fn roots(&self) -> &[DirectionRoot] {
        match self {
            DirectionSet::IdenticallyZero => &[],
            DirectionSet::Roots(r) => r,
        }
    }
}

/// Scale used for the `q ≡ 0` test: `max(1, 12(a² + b²), max |f₄|)`.
pub fn sextic_scale(frame: &BlaschkeFrame) -> f64 {
    let a = frame.a().to_f64();
    let b = frame.b().to_f64();
    let f4 = frame.f4().iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max);
    1f64.max(12.0 * (a * a + b * b)).max(f4)
}

/// Real roots of `p(s) = Σ c_k s^k` via companion-matrix eigenvalues.
fn real_poly_roots(c: &[f64]) -> Vec<f64> {
    let scale = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut deg = c.len() - 1;
    while deg > 0 && c[deg].abs() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let mut m = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -c[i] / lead;
    }
    // the unshifted QR iteration can stall on ±-symmetric spectra (even
    // polynomials), so cap it and retry on shifted copies
    let norm = m.iter().map(|x| x.abs()).fold(1.0, f64::max);
    for shift in [0.0, 0.29, -0.61, 1.37] {
        let sigma = shift * norm;
        let shifted = &m + DMatrix::<f64>::identity(deg, deg) * sigma;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 10_000) {
            return schur
                .complex_eigenvalues()
                .iter()
                .map(|z| (z.re - sigma, z.im))
                .filter(|(re, im)| im.abs() <= 1e-5 * (1.0 + re.abs()))
                .map(|(re, _)| re)
                .collect();
        }
    }
    Vec::new()
}

/// Real roots of `θ ↦ q(cos θ, sin θ)` on `[0, π)`.
pub fn evolute_directions(frame: &BlaschkeFrame, opts: &RootOptions) -> DirectionSet {
    let sextic = direction_sextic(frame);
    let c = sextic.coeffs_f64();
    let cmax = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if cmax <= opts.zero_tol * sextic_scale(frame) {
        return DirectionSet::IdenticallyZero;
    }
    // s = tan θ covers |θ| ≤ π/4; s = cot θ covers the rest
    let mut cands: Vec<f64> = Vec::new();
    for s in real_poly_roots(&c) {
        if s.abs() <= 1.05 {
            cands.push(Float::atan(s));
        }
    }
    let rev: Vec<f64> = c.iter().rev().cloned().collect();
    for s in real_poly_roots(&rev) {
        if s.abs() <= 1.05 {
            cands.push(Float::atan2(1.0, s));
        }
    }
    let mut roots: Vec<DirectionRoot> = Vec::new();
    for t0 in cands {
        let mut t = t0;
        for _ in 0..8 {
            let (q, dq) = eval_trig(&c, t);
            if dq.abs() <= 1e-14 * cmax {
                break;
            }
            let step = q / dq;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        // keep the polish only if it did not wander off or worsen
        if (t - t0).abs() > 1e-3 || eval_trig(&c, t).0.abs() > eval_trig(&c, t0).0.abs() {
            t = t0;
        }
        let (q, dq) = eval_trig(&c, t);
        if q.abs() > opts.residual_tol * cmax {
            continue;
        }
        let theta = reduce_angle(t);
        let root = DirectionRoot {
            theta,
            simple: dq.abs() > opts.multiplicity_tol * cmax,
            q_value: q,
            dq,
        };
        match roots.iter_mut().find(|r| angle_gap(r.theta, theta) < 1e-7) {
            Some(r) if r.q_value.abs() <= q.abs() => {}
            Some(r) => *r = root,
            None => roots.push(root),
        }
    }
    roots.sort_by(|a, b| a.theta.partial_cmp(&b.theta).unwrap_or(core::cmp::Ordering::Equal));
    DirectionSet::Roots(roots)
}

/// A solution of the limit system at one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct EvoluteSolution {
    /// Local angle in `[0, π)`.
    pub theta: f64,
    pub direction: TangentDirection,
    pub center_local: Center,
    pub center_world: Center,
    /// Residuals of `G_ξ, G_η, H₁, H₂` at the center (zero for the solved rows
    /// up to rounding).
    pub residuals: [f64; 4],
    /// Index of the row left out of the 3×3 solve.
    pub dropped: usize,
    pub q_value: f64,
    pub d_value: f64,
    /// `|X − Moutard center| / |Moutard center|` (max norms), when both are
    /// finite.
    pub moutard_gap: Option<f64>,
}

impl EvoluteSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

fn det3_rows(rows: &[&Row; 3]) -> Scalar {
    let m: linalg::Mat3 = core::array::from_fn(|i| rows[i].covector.clone());
    linalg::det3(&m)
}

/// Solves `G_ξ = G_η = H₁ = H₂ = 0` at `dir` (which must be a root of `q` up
/// to `tol` relative to [`sextic_scale`]). Three of the four rows are solved,
/// picking the triple with the largest determinant; the fourth residual is
/// reported. A consistent system of rank two has its center at infinity.
pub fn solve_evolute_point(
    frame: &BlaschkeFrame,
    dir: &TangentDirection,
    tol: f64,
) -> Result<EvoluteSolution, EvoluteError> {
    let mode = frame.mode();
    if dir.mode() != mode {
        return Err(FrameError::ModeMismatch.into());
    }
    let d = dir.pair();
    let sextic = direction_sextic(frame);
    let qv = sextic.eval(&d);
    let scale = sextic_scale(frame);
    let off_root = match mode {
        Mode::Rational => qv.to_f64().abs() > tol * scale,
        Mode::Float => qv.to_f64().abs() > tol * scale,
    };
    if off_root {
        return Err(EvoluteError::NoSolution(qv.to_f64()));
    }
    let rows = limit_rows(frame, &d)?;
    let d_value = discriminant_d(frame, &d)?.to_f64();

    let triples = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    let mut best: Option<(usize, Scalar)> = None;
    for (k, t) in triples.iter().enumerate() {
        let det = det3_rows(&[&rows[t[0]], &rows[t[1]], &rows[t[2]]]).abs();
        let better = match &best {
            None => true,
            Some((_, b)) => det.cmp_value(b) == core::cmp::Ordering::Greater,
        };
        if better {
            best = Some((k, det));
        }
    }
    let (k, det) = best.expect("four triples");
    let row_scale = rows.iter().map(Row::max_abs).fold(0.0, f64::max);
    let singular = match mode {
        Mode::Rational => det.is_zero(),
        Mode::Float => det.to_f64() <= 1e-12 * Float::powi(row_scale.max(1e-300), 3),
    };
    let center_local = if singular {
        let a: Vec<Vec<Scalar>> = rows.iter().map(|r| r.covector.to_vec()).collect();
        let aug: Vec<Vec<Scalar>> = rows
            .iter()
            .map(|r| {
                let mut v = r.covector.to_vec();
                v.push(r.constant.clone());
                v
            })
            .collect();
        let ra = linalg::rank(&a, 1e-10);
        let raug = linalg::rank(&aug, 1e-10);
        if ra == 2 && raug > ra {
            // null direction of the covectors
            let mut dirv = None;
            'outer: for i in 0..4 {
                for j in (i + 1)..4 {
                    let c = linalg::cross3(&rows[i].covector, &rows[j].covector);
                    if linalg::max_abs(&c) > 1e-10 * row_scale * row_scale || c.iter().any(|x| !x.is_zero()) && mode == Mode::Rational {
                        dirv = Some(c);
                        break 'outer;
                    }
                }
            }
            Center::AtInfinity(dirv.ok_or(EvoluteError::RankDeficient)?)
        } else {
            return Err(EvoluteError::RankDeficient);
        }
    } else {
        let t = triples[k];
        let a: linalg::Mat3 = core::array::from_fn(|i| rows[t[i]].covector.clone());
        let rhs: Vec3 = core::array::from_fn(|i| -&rows[t[i]].constant);
        let inv = linalg::inv3(&a).ok_or(EvoluteError::RankDeficient)?;
        Center::Finite(linalg::mat_vec(&inv, &rhs))
    };
    let dropped = (0..4).find(|i| !triples[k].contains(i)).expect("one row left");
    let residuals = match &center_local {
        Center::Finite(x) => core::array::from_fn(|i| rows[i].eval(x).to_f64().abs()),
        Center::AtInfinity(v) => core::array::from_fn(|i| linalg::dot3(&rows[i].covector, v).to_f64().abs()),
    };
    let moutard = moutard_center(frame, dir)?;
    let moutard_gap = match (&center_local, &moutard) {
        (Center::Finite(x), Center::Finite(m)) => {
            let diff = linalg::max_abs(&linalg::sub3(x, m));
            let norm = linalg::max_abs(m);
            Some(if norm > 0.0 { diff / norm } else { diff })
        }
        _ => None,
    };
    let center_world = frame.pull_back(&center_local);
    Ok(EvoluteSolution {
        theta: dir.angle(),
        direction: dir.clone(),
        center_local,
        center_world,
        residuals,
        dropped,
        q_value: qv.to_f64(),
        d_value,
        moutard_gap,
    })
}

/// `a² + b²`.
pub fn pick_invariant(frame: &BlaschkeFrame) -> Scalar {
    let a = frame.a();
    let b = frame.b();
    &(&a * &a) + &(&b * &b)
}

/// Rotation angle `θ₀` with `3θ₀ = atan2(a, b)`: in the rotated frame the
/// cubic form vanishes on `e₁` and `b̄ = +sqrt(a² + b²)`.
pub fn cubic_killing_angle(frame: &BlaschkeFrame) -> Result<f64, EvoluteError> {
    let a = frame.a().to_f64();
    let b = frame.b().to_f64();
    if a == 0.0 && b == 0.0 {
        return Err(EvoluteError::VanishingCubic);
    }
    Ok(Float::atan2(a, b) / 3.0)
}

/// The frame rotated by [`cubic_killing_angle`].
pub fn cubic_killing_frame(frame: &BlaschkeFrame) -> Result<BlaschkeFrame, EvoluteError> {
    let theta = cubic_killing_angle(frame)?;
    let ff = frame.to_mode(Mode::Float)?;
    Ok(rotate_frame(&ff, &Rotation::from_angle(theta))?)
}

fn cubic_killing_b(surface: &SurfaceModel, p: [f64; 2]) -> Result<f64, EvoluteError> {
    let q = surface.chart_point(p)?;
    let frame = normalize_at(surface, &q)?;
    Ok(Float::sqrt(pick_invariant(&frame).to_f64()))
}

/// Central difference of `b̄ = sqrt(a² + b²)` along the chart line
/// `p0 + sW` with step `h`. Using the nonnegative root keeps the two side
/// evaluations on the same branch of the cubic-killing frame.
pub fn pick_derivative(surface: &SurfaceModel, p0: [f64; 2], w: [f64; 2], h: f64) -> Result<f64, EvoluteError> {
    if w[0] == 0.0 && w[1] == 0.0 {
        return Err(EvoluteError::ZeroDirection);
    }
    let fs = surface.to_mode(Mode::Float)?;
    let plus = [p0[0] + h * w[0], p0[1] + h * w[1]];
    let minus = [p0[0] - h * w[0], p0[1] - h * w[1]];
    if !fs.patch().contains(plus) || !fs.patch().contains(minus) {
        return Err(FrameError::PatchBounds.into());
    }
    Ok((cubic_killing_b(&fs, plus)? - cubic_killing_b(&fs, minus)?) / (2.0 * h))
}

/// Richardson combination of steps `h` and `h/2`.
pub fn pick_derivative_richardson(
    surface: &SurfaceModel,
    p0: [f64; 2],
    w: [f64; 2],
    h: f64,
) -> Result<f64, EvoluteError> {
    let d1 = pick_derivative(surface, p0, w, h)?;
    let d2 = pick_derivative(surface, p0, w, 0.5 * h)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Chart gradient of `b̄`.
pub fn pick_gradient(surface: &SurfaceModel, p0: [f64; 2], h: f64) -> Result<[f64; 2], EvoluteError> {
    Ok([
        pick_derivative(surface, p0, [1.0, 0.0], h)?,
        pick_derivative(surface, p0, [0.0, 1.0], h)?,
    ])
}

/// Section data of the curve cut by the plane through `e₁` and `s(e₁)`,
/// with `a3 = 6a`, `a4 = 24(f40 − 9b²/2)`, `a5 = 120(−27ab² + 3b f31 + f50)`.
pub fn cone_section(frame: &BlaschkeFrame) -> SectionJet {
    let mode = frame.mode();
    let n = |k| Scalar::from_int(mode, k);
    let a = frame.a();
    let b = frame.b();
    let a4 = &n(24) * &(&frame.f(4, 0) - &(&Scalar::ratio(mode, 9, 2) * &(&b * &b)));
    let a5 = &n(120)
        * &(&(&(&n(-27) * &(&a * &(&b * &b))) + &(&(&n(3) * &b) * &frame.f31())) + &frame.f50());
    SectionJet {
        a3: &n(6) * &a,
        a4,
        a5,
    }
}

/// `μ′_γ(0)` for `T = e₁` (the frame already rotated).
pub fn mu_gamma_prime(frame: &BlaschkeFrame) -> Scalar {
    affine_curvature_derivative(&cone_section(frame))
}

/// `μ′_γ(0)` for a general direction.
pub fn mu_gamma_prime_at(frame: &BlaschkeFrame, t: &TangentDirection) -> Result<Scalar, EvoluteError> {
    if t.mode() != frame.mode() {
        return Err(FrameError::ModeMismatch.into());
    }
    Ok(mu_gamma_prime(&rotate_frame(frame, &t.rotation())?))
}

/// Thresholds for the regularity test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityOptions {
    pub fd_step: f64,
    pub pick_tol: f64,
    pub mu_tol: f64,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        RegularityOptions {
            fd_step: 1e-4,
            pick_tol: 1e-7,
            mu_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub simple_root: bool,
    pub pick_gradient: [f64; 2],
    /// `max |b̄′(W)|` over eight unit chart directions.
    pub max_pick_derivative: f64,
    pub mu_gamma_prime: f64,
    /// The sufficient condition: Pick not critical and `μ′_γ ≠ 0`.
    pub regular: bool,
}

fn regularity_from(simple_root: bool, grad: [f64; 2], mu: f64, opts: &RegularityOptions) -> RegularityReport {
    let max_pick_derivative = (0..8)
        .map(|k| {
            let t = k as f64 * core::f64::consts::PI / 4.0;
            (grad[0] * Float::cos(t) + grad[1] * Float::sin(t)).abs()
        })
        .fold(0.0, f64::max);
    let pick_ok = max_pick_derivative > opts.pick_tol;
    let mu_ok = mu.abs() > opts.mu_tol;
    RegularityReport {
        simple_root,
        pick_gradient: grad,
        max_pick_derivative,
        mu_gamma_prime: mu,
        regular: pick_ok && mu_ok,
    }
}

/// Diagnostics for the branch through local direction `theta` at chart
/// point `p0`.
pub fn regularity_report(
    surface: &SurfaceModel,
    p0: [f64; 2],
    theta: f64,
    opts: &RegularityOptions,
) -> Result<RegularityReport, EvoluteError> {
    let fs = surface.to_mode(Mode::Float)?;
    let frame = normalize_at(&fs, &fs.chart_point(p0)?)?;
    let c = direction_sextic(&frame).coeffs_f64();
    let cmax = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let (_, dq) = eval_trig(&c, theta);
    let ro = RootOptions::default();
    let simple = cmax > ro.zero_tol * sextic_scale(&frame) && dq.abs() > ro.multiplicity_tol * cmax;
    let grad = pick_gradient(&fs, p0, opts.fd_step)?;
    let mu = mu_gamma_prime_at(&frame, &TangentDirection::from_angle(theta))?.to_f64();
    Ok(regularity_from(simple, grad, mu, opts))
}

/// World center of the root nearest (in chart angle) to `chart_angle` at
/// chart point `p`.
pub fn branch_center_near(surface: &SurfaceModel, p: [f64; 2], chart_angle: f64) -> Result<Center, EvoluteError> {
    let frame = normalize_at(surface, &surface.chart_point(p)?)?;
    let mut best: Option<(f64, f64)> = None;
    for root in evolute_directions(&frame, &RootOptions::default()).roots() {
        let dir = TangentDirection::from_angle(root.theta);
        let Some(c) = frame.chart_direction(&dir.xi, &dir.eta) else { continue };
        let gap = angle_gap(reduce_angle(Float::atan2(c[1].to_f64(), c[0].to_f64())), chart_angle);
        if best.is_none_or(|(g, _)| gap < g) {
            best = Some((gap, root.theta));
        }
    }
    let (_, theta) = best.ok_or(EvoluteError::NoSolution(f64::NAN))?;
    Ok(solve_evolute_point(&frame, &TangentDirection::from_angle(theta), 1e-8)?.center_world)
}

/// Central-difference velocity `X′` of the branch through chart direction
/// `chart_angle` at `p0`, stepping along the chart vector `w`.
pub fn branch_velocity(
    surface: &SurfaceModel,
    p0: [f64; 2],
    chart_angle: f64,
    w: [f64; 2],
    h: f64,
) -> Result<[f64; 3], EvoluteError> {
    if w[0] == 0.0 && w[1] == 0.0 {
        return Err(EvoluteError::ZeroDirection);
    }
    let fs = surface.to_mode(Mode::Float)?;
    let at = |s: f64| -> Result<[f64; 3], EvoluteError> {
        match branch_center_near(&fs, [p0[0] + s * w[0], p0[1] + s * w[1]], chart_angle)? {
            Center::Finite(x) => Ok(linalg::to_f64_3(&x)),
            Center::AtInfinity(_) => Err(EvoluteError::RankDeficient),
        }
    };
    let (xp, xm) = (at(h)?, at(-h)?);
    Ok(core::array::from_fn(|i| (xp[i] - xm[i]) / (2.0 * h)))
}

/// Settings for [`trace_evolute`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub nu: usize,
    pub nv: usize,
    pub match_threshold: f64,
    pub roots: RootOptions,
    /// Tolerance on `|q|` accepted by the solver, relative to the sextic scale.
    pub solve_tol: f64,
    /// Compute regularity diagnostics (four extra normalizations per sample).
    pub regularity: Option<RegularityOptions>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            nu: 41,
            nv: 41,
            match_threshold: 0.2,
            roots: RootOptions::default(),
            solve_tol: 1e-8,
            regularity: Some(RegularityOptions::default()),
        }
    }
}

impl TraceOptions {
    pub fn grid(n: usize) -> Self {
        TraceOptions {
            nu: n,
            nv: n,
            ..Default::default()
        }
    }
}

/// One root at one grid sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub root: DirectionRoot,
    /// Angle of the root direction in the chart, in `[0, π)`.
    pub chart_angle: f64,
    pub solution: Result<EvoluteSolution, EvoluteError>,
    pub regularity: Option<RegularityReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleData {
    pub identically_zero: bool,
    pub pick: f64,
    pub points: Vec<SamplePoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleResult {
    /// `(i, j)`: column along `u`, row along `v`.
    pub index: (usize, usize),
    pub chart: [f64; 2],
    pub outcome: Result<SampleData, EvoluteError>,
}

/// Everything computed at one grid point. `surface` must be in float mode.
pub fn evolute_sample(
    surface: &SurfaceModel,
    index: (usize, usize),
    chart: [f64; 2],
    opts: &TraceOptions,
) -> SampleResult {
    let outcome = sample_data(surface, chart, opts);
    SampleResult { index, chart, outcome }
}

fn sample_data(surface: &SurfaceModel, chart: [f64; 2], opts: &TraceOptions) -> Result<SampleData, EvoluteError> {
    let frame = normalize_at(surface, &surface.chart_point(chart)?)?;
    let pick = pick_invariant(&frame).to_f64();
    let set = evolute_directions(&frame, &opts.roots);
    let identically_zero = matches!(set, DirectionSet::IdenticallyZero);
    let roots: Vec<DirectionRoot> = match set {
        DirectionSet::IdenticallyZero => vec![DirectionRoot {
            theta: 0.0,
            simple: false,
            q_value: 0.0,
            dq: 0.0,
        }],
        DirectionSet::Roots(r) => r,
    };
    let grad = match (&opts.regularity, identically_zero || roots.is_empty()) {
        (Some(r), false) => Some(pick_gradient(surface, chart, r.fd_step)),
        _ => None,
    };
    let mut points = Vec::with_capacity(roots.len());
    for root in roots {
        let dir = TangentDirection::from_angle(root.theta);
        let chart_dir = frame
            .chart_direction(&dir.xi, &dir.eta)
            .map(|c| [c[0].to_f64(), c[1].to_f64()])
            .unwrap_or([dir.xi.to_f64(), dir.eta.to_f64()]);
        let chart_angle = reduce_angle(Float::atan2(chart_dir[1], chart_dir[0]));
        let solution = solve_evolute_point(&frame, &dir, opts.solve_tol);
        let regularity = match (&opts.regularity, &grad) {
            (Some(r), Some(Ok(g))) => {
                let mu = mu_gamma_prime_at(&frame, &dir)?.to_f64();
                Some(regularity_from(root.simple, *g, mu, r))
            }
            _ => None,
        };
        points.push(SamplePoint {
            root,
            chart_angle,
            solution,
            regularity,
        });
    }
    Ok(SampleData {
        identically_zero,
        pick,
        points,
    })
}

/// One sample of a branch.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSample {
    /// Position in [`TraceResult::samples`].
    pub sample: usize,
    pub index: (usize, usize),
    pub chart: [f64; 2],
    /// Position in the sample's point list.
    pub point: usize,
    pub chart_angle: f64,
    pub theta: f64,
    pub center_world: Center,
    pub d_value: f64,
    pub regular: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvoluteBranch {
    pub id: usize,
    /// The branch collecting samples where `q ≡ 0`.
    pub degenerate: bool,
    pub samples: Vec<BranchSample>,
    /// Largest chart-angle gap across a matched grid edge.
    pub max_angle_jump: f64,
    pub events: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceResult {
    pub nu: usize,
    pub nv: usize,
    pub samples: Vec<SampleResult>,
    pub branches: Vec<EvoluteBranch>,
}

impl TraceResult {
    pub fn successes(&self) -> usize {
        self.samples.iter().filter(|s| s.outcome.is_ok()).count()
    }

    /// Branch id of every solved point, keyed by `(sample, point)`.
    pub fn branch_of(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for b in &self.branches {
            for s in &b.samples {
                m.insert((s.sample, s.point), b.id);
            }
        }
        m
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn solved(s: &SampleResult) -> Option<&SampleData> {
    s.outcome.as_ref().ok()
}

/// Links roots of grid neighbours whose chart angles are mutually nearest
/// and closer than `threshold`; multiple roots are not linked.
pub fn assemble_branches(samples: &[SampleResult], nu: usize, nv: usize, threshold: f64) -> Vec<EvoluteBranch> {
    // node numbering
    let mut node_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    let mut degenerate: Vec<(usize, usize)> = Vec::new();
    for (si, s) in samples.iter().enumerate() {
        let Some(data) = solved(s) else { continue };
        for (pi, p) in data.points.iter().enumerate() {
            if p.solution.is_err() {
                continue;
            }
            if data.identically_zero {
                degenerate.push((si, pi));
            } else {
                node_of.insert((si, pi), nodes.len());
                nodes.push((si, pi));
            }
        }
    }
    let mut uf = UnionFind::new(nodes.len());
    let mut jumps: Vec<(usize, f64)> = Vec::new();
    let mut events: Vec<(usize, String)> = Vec::new();
    let at = |i: usize, j: usize| j * nu + i;
    let live = |si: usize| -> Option<&SampleData> {
        samples.get(si).and_then(solved).filter(|d| !d.identically_zero)
    };
    for j in 0..nv {
        for i in 0..nu {
            let si = at(i, j);
            let Some(a) = live(si) else { continue };
            for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                if ni >= nu || nj >= nv {
                    continue;
                }
                let sn = at(ni, nj);
                let Some(b) = live(sn) else { continue };
                let nearest = |from: &SampleData, to: &SampleData, k: usize| -> Option<(usize, f64)> {
                    to.points
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| p.solution.is_ok())
                        .map(|(m, p)| (m, angle_gap(from.points[k].chart_angle, p.chart_angle)))
                        .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(core::cmp::Ordering::Equal))
                };
                for (k, p) in a.points.iter().enumerate() {
                    if p.solution.is_err() {
                        continue;
                    }
                    let Some((m, gap)) = nearest(a, b, k) else { continue };
                    let Some((back, _)) = nearest(b, a, m) else { continue };
                    if back != k || gap >= threshold {
                        continue;
                    }
                    let (na, nb) = (node_of[&(si, k)], node_of[&(sn, m)]);
                    if !p.root.simple || !b.points[m].root.simple {
                        events.push((
                            na,
                            format!(
                                "multiple root between samples ({},{}) and ({},{}); branch broken",
                                i, j, ni, nj
                            ),
                        ));
                        continue;
                    }
                    uf.union(na, nb);
                    jumps.push((na, gap));
                }
            }
        }
    }
    let mut comp_id: BTreeMap<usize, usize> = BTreeMap::new();
    let mut branches: Vec<EvoluteBranch> = Vec::new();
    let make_sample = |si: usize, pi: usize| -> BranchSample {
        let s = &samples[si];
        let data = solved(s).expect("solved sample");
        let p = &data.points[pi];
        let sol = p.solution.as_ref().expect("solved point");
        BranchSample {
            sample: si,
            index: s.index,
            chart: s.chart,
            point: pi,
            chart_angle: p.chart_angle,
            theta: p.root.theta,
            center_world: sol.center_world.clone(),
            d_value: sol.d_value,
            regular: p.regularity.as_ref().map(|r| r.regular),
        }
    };
    for (n, &(si, pi)) in nodes.iter().enumerate() {
        let root = uf.find(n);
        let id = *comp_id.entry(root).or_insert_with(|| {
            branches.push(EvoluteBranch {
                id: branches.len(),
                degenerate: false,
                samples: Vec::new(),
                max_angle_jump: 0.0,
                events: Vec::new(),
            });
            branches.len() - 1
        });
        branches[id].samples.push(make_sample(si, pi));
    }
    for (n, gap) in jumps {
        let id = comp_id[&uf.find(n)];
        let b = &mut branches[id];
        b.max_angle_jump = b.max_angle_jump.max(gap);
    }
    for (n, e) in events {
        let id = comp_id[&uf.find(n)];
        branches[id].events.push(e);
    }
    if !degenerate.is_empty() {
        let id = branches.len();
        branches.push(EvoluteBranch {
            id,
            degenerate: true,
            samples: degenerate.iter().map(|&(si, pi)| make_sample(si, pi)).collect(),
            max_angle_jump: 0.0,
            events: vec![String::from("q vanishes identically; every direction solves")],
        });
    }
    branches
}

/// The chart grid of `opts` over the surface's patch, row-major in `v`.
pub fn trace_grid(surface: &SurfaceModel, opts: &TraceOptions) -> Vec<((usize, usize), [f64; 2])> {
    let pts = surface.patch().grid(opts.nu, opts.nv);
    pts.into_iter()
        .enumerate()
        .map(|(k, p)| ((k % opts.nu.max(1), k / opts.nu.max(1)), p))
        .collect()
}

/// Samples every grid point (sequentially) and assembles branches. Runs in
/// float mode whatever the surface's mode.
pub fn trace_evolute(surface: &SurfaceModel, opts: &TraceOptions) -> Result<TraceResult, EvoluteError> {
    let fs = surface.to_mode(Mode::Float)?;
    let samples: Vec<SampleResult> = trace_grid(&fs, opts)
        .into_iter()
        .map(|(idx, p)| evolute_sample(&fs, idx, p, opts))
        .collect();
    Ok(finish_trace(samples, opts))
}

/// Branch assembly over finished samples (in grid order).
pub fn finish_trace(samples: Vec<SampleResult>, opts: &TraceOptions) -> TraceResult {
    let branches = assemble_branches(&samples, opts.nu, opts.nv, opts.match_threshold);
    TraceResult {
        nu: opts.nu,
        nv: opts.nv,
        samples,
        branches,
    }
}
