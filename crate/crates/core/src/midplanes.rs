//! Mid-planes of point pairs, the envelope system, and the expansion of the
//! mid-plane function around a normalized point.
//!
//! For a pair `p₁, p₂` with conormals `N₁, N₂` (here `N = r_u × r_v`, which is
//! `(−f_x, −f_y, 1)` for a graph), midpoint `M` and half-chord `C`, the
//! mid-plane is `V · (X − M) = 0` with `V = (N₁·C)N₂ + (N₂·C)N₁`. The
//! function used throughout is `F = −2 V · (X − M)`, scaled so that
//! `F = G(Δu, Δv, X) + H₁σu + H₂σv + O(5)` with `Δ = p₁ − p₂`, `σ = p₁ + p₂`.

use alloc::vec::Vec;

use num_traits::float::Float;

use crate::frames::{BlaschkeFrame, FrameError, SurfaceModel};
use crate::invariants::{cubic_form, transon_plane, InvariantError, Plane3, TangentDirection};
use crate::jets::{Jet2, Jet4, JetError, LinearFormJet};
use crate::linalg::{self, Vec3};
use crate::scalar::{Mode, Scalar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MidplaneError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error("tangent data of the pair do not determine a plane")]
    DegeneratePair,
}

impl From<JetError> for MidplaneError {
    fn from(e: JetError) -> Self {
        MidplaneError::Frame(FrameError::Jet(e))
    }
}

/// Two chart points.
#[derive(Clone, Debug, PartialEq)]
pub struct PointPair {
    pub p1: [Scalar; 2],
    pub p2: [Scalar; 2],
}

impl PointPair {
    pub fn new(p1: [Scalar; 2], p2: [Scalar; 2]) -> Self {
        PointPair { p1, p2 }
    }

    pub fn swapped(&self) -> Self {
        PointPair {
            p1: self.p2.clone(),
            p2: self.p1.clone(),
        }
    }

    /// `p₁ = c + (t/2)d`, `p₂ = c − (t/2)d`.
    pub fn symmetric(center: [f64; 2], d: [f64; 2], t: f64) -> Self {
        let h = 0.5 * t;
        let f = Scalar::Float;
        PointPair {
            p1: [f(center[0] + h * d[0]), f(center[1] + h * d[1])],
            p2: [f(center[0] - h * d[0]), f(center[1] - h * d[1])],
        }
    }
}

/// Anything that can produce position jets at chart points.
pub trait PatchSource {
    fn mode(&self) -> Mode;
    fn position_jet(&self, p: &[Scalar; 2], order: usize) -> Result<[Jet2; 3], MidplaneError>;
}

impl PatchSource for SurfaceModel {
    fn mode(&self) -> Mode {
        SurfaceModel::mode(self)
    }

    fn position_jet(&self, p: &[Scalar; 2], order: usize) -> Result<[Jet2; 3], MidplaneError> {
        Ok(SurfaceModel::position_jet(self, p, order)?)
    }
}

/// The normalized jet read as an exact polynomial graph, in local
/// coordinates.
impl PatchSource for BlaschkeFrame {
    fn mode(&self) -> Mode {
        BlaschkeFrame::mode(self)
    }

    fn position_jet(&self, p: &[Scalar; 2], order: usize) -> Result<[Jet2; 3], MidplaneError> {
        let mode = self.mode();
        let f = self.normalized();
        let h = f.with_order(f.order().max(order)).taylor_shift(p)?.with_order(order);
        Ok([
            Jet2::variable(0, order, mode)?.add_constant(&p[0])?,
            Jet2::variable(1, order, mode)?.add_constant(&p[1])?,
            h,
        ])
    }
}

type JetVec4 = [Jet4; 3];

/// Position and conormal at `p` as jets of `order` in the variables
/// `slot, slot + 1`.
fn point_data<S: PatchSource + ?Sized>(
    source: &S,
    p: &[Scalar; 2],
    order: usize,
    slot: usize,
) -> Result<(JetVec4, JetVec4), MidplaneError> {
    let pos = source.position_jet(p, order + 1)?;
    let ru: Vec<Jet2> = pos.iter().map(|c| c.partial(0)).collect::<Result<_, _>>()?;
    let rv: Vec<Jet2> = pos.iter().map(|c| c.partial(1)).collect::<Result<_, _>>()?;
    let cross = |i: usize, j: usize| -> Result<Jet2, JetError> { ru[i].mul(&rv[j])?.sub(&ru[j].mul(&rv[i])?) };
    let n = [cross(1, 2)?, cross(2, 0)?, cross(0, 1)?];
    let lift = |j: &Jet2| j.with_order(order).embed4(slot, order);
    Ok((
        [lift(&pos[0])?, lift(&pos[1])?, lift(&pos[2])?],
        [lift(&n[0])?, lift(&n[1])?, lift(&n[2])?],
    ))
}

fn dot4(a: &JetVec4, b: &JetVec4) -> Result<Jet4, JetError> {
    a[0].mul(&b[0])?.add(&a[1].mul(&b[1])?)?.add(&a[2].mul(&b[2])?)
}

/// `F = −2 V · (X − M)` as a linear form in `X`.
fn midplane_form(r1: &JetVec4, n1: &JetVec4, r2: &JetVec4, n2: &JetVec4) -> Result<LinearFormJet, JetError> {
    let mode = r1[0].mode();
    let half = Scalar::ratio(mode, 1, 2);
    let mut c: JetVec4 = r1.clone();
    let mut m: JetVec4 = r1.clone();
    for i in 0..3 {
        c[i] = r1[i].sub(&r2[i])?.scale(&half)?;
        m[i] = r1[i].add(&r2[i])?.scale(&half)?;
    }
    let k1 = dot4(n1, &c)?;
    let k2 = dot4(n2, &c)?;
    let mut v: JetVec4 = c.clone();
    for i in 0..3 {
        v[i] = k1.mul(&n2[i])?.add(&k2.mul(&n1[i])?)?;
    }
    let m2 = Scalar::from_int(mode, -2);
    Ok(LinearFormJet {
        cx: v[0].scale(&m2)?,
        cy: v[1].scale(&m2)?,
        cz: v[2].scale(&m2)?,
        c1: dot4(&v, &m)?.scale(&Scalar::from_int(mode, 2))?,
    })
}

fn pair_form<S: PatchSource + ?Sized>(
    source: &S,
    pair: &PointPair,
    order: usize,
) -> Result<LinearFormJet, MidplaneError> {
    let (r1, n1) = point_data(source, &pair.p1, order, 0)?;
    let (r2, n2) = point_data(source, &pair.p2, order, 2)?;
    Ok(midplane_form(&r1, &n1, &r2, &n2)?)
}

fn row_of(form: &LinearFormJet) -> Row {
    let (cov, c) = form.value();
    Row { covector: cov, constant: c }
}

/// An equation `covector · X + constant = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub covector: Vec3,
    pub constant: Scalar,
}

impl Row {
    pub fn eval(&self, x: &Vec3) -> Scalar {
        &linalg::dot3(&self.covector, x) + &self.constant
    }

    pub fn scale(&self, k: &Scalar) -> Row {
        Row {
            covector: linalg::scale3(&self.covector, k),
            constant: &self.constant * k,
        }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.covector).max(self.constant.to_f64().abs())
    }

    /// `max |self − other|` over the four coefficients.
    pub fn gap(&self, other: &Row) -> f64 {
        let mut g = (self.constant.to_f64() - other.constant.to_f64()).abs();
        for i in 0..3 {
            g = g.max((self.covector[i].to_f64() - other.covector[i].to_f64()).abs());
        }
        g
    }

    pub fn to_plane(&self) -> Option<Plane3> {
        Plane3::new(self.covector.clone(), -&self.constant)
    }
}

fn check_nondegenerate(row: &Row, pair_scale: f64) -> Result<(), MidplaneError> {
    let degenerate = match row.constant {
        Scalar::Rational(_) => row.covector.iter().all(Scalar::is_zero),
        Scalar::Float(_) => linalg::max_abs(&row.covector) <= 1e-14 * pair_scale,
    };
    if degenerate {
        Err(MidplaneError::DegeneratePair)
    } else {
        Ok(())
    }
}

fn pair_scale<S: PatchSource + ?Sized>(source: &S, pair: &PointPair) -> Result<f64, MidplaneError> {
    // |N₁| |N₂| |C| with unit-free magnitudes
    let (r1, n1) = point_data(source, &pair.p1, 0, 0)?;
    let (r2, n2) = point_data(source, &pair.p2, 0, 2)?;
    let v = |j: &JetVec4| -> [Scalar; 3] { core::array::from_fn(|i| j[i].constant_term().clone()) };
    let c = linalg::sub3(&v(&r1), &v(&r2));
    Ok(linalg::max_abs(&v(&n1)) * linalg::max_abs(&v(&n2)) * linalg::max_abs(&c))
}

/// The mid-plane of the pair.
pub fn mid_plane<S: PatchSource + ?Sized>(source: &S, pair: &PointPair) -> Result<Plane3, MidplaneError> {
    let row = row_of(&pair_form(source, pair, 0)?);
    check_nondegenerate(&row, pair_scale(source, pair)?)?;
    row.to_plane().ok_or(MidplaneError::DegeneratePair)
}

/// `F`, `F_u1 − F_u2`, `F_v1 − F_v2`, `F_u1 + F_u2`, `F_v1 + F_v2` at a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeSystem {
    pub rows: [Row; 5],
}

pub fn envelope_system<S: PatchSource + ?Sized>(
    source: &S,
    pair: &PointPair,
) -> Result<EnvelopeSystem, MidplaneError> {
    let form = pair_form(source, pair, 1)?;
    let f = row_of(&form);
    check_nondegenerate(&f, pair_scale(source, pair)?)?;
    let d: Vec<Row> = (0..4)
        .map(|k| Ok(row_of(&form.partial(k)?)))
        .collect::<Result<_, JetError>>()?;
    let comb = |a: &Row, b: &Row, sign: i64| -> Row {
        let s = Scalar::from_int(f.constant.mode(), sign);
        Row {
            covector: core::array::from_fn(|i| &a.covector[i] + &(&s * &b.covector[i])),
            constant: &a.constant + &(&s * &b.constant),
        }
    };
    Ok(EnvelopeSystem {
        rows: [
            f.clone(),
            comb(&d[0], &d[2], -1),
            comb(&d[1], &d[3], -1),
            comb(&d[0], &d[2], 1),
            comb(&d[1], &d[3], 1),
        ],
    })
}

/// Expansion of `F` for pairs near the frame's base point, in the variables
/// `(u₁, v₁, u₂, v₂)`, truncated at `order`.
pub fn expand_f(frame: &BlaschkeFrame, order: usize) -> Result<LinearFormJet, MidplaneError> {
    let origin = [Scalar::zero(frame.mode()), Scalar::zero(frame.mode())];
    pair_form(frame, &PointPair::new(origin.clone(), origin), order)
}

/// A linear form in `X` whose coefficients are polynomials in `(ξ, η)`:
/// `cx x + cy y + cz z + c1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionForm {
    pub cx: Jet2,
    pub cy: Jet2,
    pub cz: Jet2,
    pub c1: Jet2,
}

impl DirectionForm {
    fn map(&self, f: impl Fn(&Jet2) -> Result<Jet2, JetError>) -> Result<Self, JetError> {
        Ok(DirectionForm {
            cx: f(&self.cx)?,
            cy: f(&self.cy)?,
            cz: f(&self.cz)?,
            c1: f(&self.c1)?,
        })
    }

    pub fn parts(&self) -> [&Jet2; 4] {
        [&self.cx, &self.cy, &self.cz, &self.c1]
    }

    pub fn partial(&self, var: usize) -> Result<Self, JetError> {
        self.map(|j| j.partial(var))
    }

    pub fn eval(&self, d: &[Scalar; 2]) -> Result<Row, JetError> {
        Ok(Row {
            covector: [self.cx.eval(d)?, self.cy.eval(d)?, self.cz.eval(d)?],
            constant: self.c1.eval(d)?,
        })
    }

    /// Substitutes `ξ = u₁ − u₂`, `η = v₁ − v₂` and multiplies by `factor`.
    pub fn in_pair_variables(&self, order: usize, factor: &Jet4) -> Result<LinearFormJet, JetError> {
        let mode = self.cx.mode();
        let var = |k| Jet4::variable(k, order, mode);
        let du = var(0)?.sub(&var(2)?)?;
        let dv = var(1)?.sub(&var(3)?)?;
        let sub = |j: &Jet2| -> Result<Jet4, JetError> {
            j.with_order(j.order().max(order)).compose(&[du.clone(), dv.clone()])?.with_order(order).mul(factor)
        };
        Ok(LinearFormJet {
            cx: sub(&self.cx)?,
            cy: sub(&self.cy)?,
            cz: sub(&self.cz)?,
            c1: sub(&self.c1)?,
        })
    }
}

fn poly(mode: Mode, terms: &[([u8; 2], Scalar)]) -> Jet2 {
    Jet2::from_terms(3, mode, terms.iter().cloned()).expect("cubic terms fit order 3")
}

/// `G(ξ, η, X) = (ξ/2)(ξ²+η²)x + (η/2)(ξ²+η²)y + f₃(ξ,η)z`.
pub fn transon_form(frame: &BlaschkeFrame) -> DirectionForm {
    let mode = frame.mode();
    let h = Scalar::ratio(mode, 1, 2);
    DirectionForm {
        cx: poly(mode, &[([3, 0], h.clone()), ([1, 2], h.clone())]),
        cy: poly(mode, &[([2, 1], h.clone()), ([0, 3], h)]),
        cz: cubic_form(frame),
        c1: Jet2::zero(3, mode),
    }
}

/// The order-four forms `H₁ = H₁₁x + H₁₂y + H₁₃z − H₁₄` and `H₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct HForms {
    pub h1: DirectionForm,
    pub h2: DirectionForm,
}

impl HForms {
    pub fn from_frame(frame: &BlaschkeFrame) -> Self {
        let mode = frame.mode();
        let q = |n, d| Scalar::ratio(mode, n, d);
        let a = frame.a();
        let b = frame.b();
        let [f40, f31, f22, f13, f04] = frame.f4();
        let h11 = poly(
            mode,
            &[
                ([3, 0], &q(5, 2) * &a),
                ([1, 2], &q(3, 2) * &a),
                ([2, 1], &q(-3, 1) * &b),
                ([0, 3], &q(-2, 1) * &b),
            ],
        );
        let h12 = poly(
            mode,
            &[
                ([0, 3], &q(-3, 1) * &a),
                ([3, 0], &q(-3, 2) * &b),
                ([1, 2], &q(-9, 2) * &b),
            ],
        );
        let h13 = poly(
            mode,
            &[
                ([3, 0], &q(2, 1) * &f40),
                ([2, 1], &q(3, 2) * &f31),
                ([1, 2], f22.clone()),
                ([0, 3], &q(1, 2) * &f13),
            ],
        );
        let h14 = poly(mode, &[([3, 0], q(-1, 4)), ([1, 2], q(-1, 4))]);
        let h21 = poly(
            mode,
            &[
                ([2, 1], &q(-9, 2) * &a),
                ([0, 3], &q(-3, 2) * &a),
                ([3, 0], &q(-3, 1) * &b),
            ],
        );
        let h22 = poly(
            mode,
            &[
                ([3, 0], &q(-2, 1) * &a),
                ([1, 2], &q(-3, 1) * &a),
                ([2, 1], &q(3, 2) * &b),
                ([0, 3], &q(5, 2) * &b),
            ],
        );
        let h23 = poly(
            mode,
            &[
                ([3, 0], &q(1, 2) * &f31),
                ([2, 1], f22),
                ([1, 2], &q(3, 2) * &f13),
                ([0, 3], &q(2, 1) * &f04),
            ],
        );
        let h24 = poly(mode, &[([2, 1], q(-1, 4)), ([0, 3], q(-1, 4))]);
        HForms {
            h1: DirectionForm { cx: h11, cy: h12, cz: h13, c1: h14 },
            h2: DirectionForm { cx: h21, cy: h22, cz: h23, c1: h24 },
        }
    }

    /// A copy with `eps·η³` added to `H₁₂` (fault injection for checks).
    pub fn with_h12_perturbed(&self, eps: &Scalar) -> Self {
        let mut out = self.clone();
        let c = &out.h1.cy.c(0, 3) + eps;
        out.h1.cy.set_coeff([0, 3], c).expect("η³ fits order 3");
        out
    }
}

/// Outcome of an expansion identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    /// Largest |coefficient| of the residual.
    pub max_residual: f64,
    /// Number of nonzero residual coefficients.
    pub nonzero_terms: usize,
    pub mode: Mode,
}

impl LemmaReport {
    fn from_residual(res: &LinearFormJet, mode: Mode) -> Self {
        let mut max_residual = 0.0f64;
        let mut nonzero_terms = 0;
        for part in res.parts() {
            for c in part.coeffs() {
                if !c.is_zero() {
                    nonzero_terms += 1;
                    max_residual = max_residual.max(c.to_f64().abs());
                }
            }
        }
        LemmaReport { max_residual, nonzero_terms, mode }
    }

    /// Exact zero in rational mode; `max_residual < tol` in float mode.
    pub fn passes(&self, tol: f64) -> bool {
        match self.mode {
            Mode::Rational => self.nonzero_terms == 0,
            Mode::Float => self.max_residual < tol,
        }
    }
}

fn truncate_to(form: &LinearFormJet, max_degree: usize, min_degree: usize) -> LinearFormJet {
    let mode = form.cx.mode();
    let order = form.cx.order();
    let mut acc = LinearFormJet {
        cx: Jet4::zero(order, mode),
        cy: Jet4::zero(order, mode),
        cz: Jet4::zero(order, mode),
        c1: Jet4::zero(order, mode),
    };
    for d in min_degree..=max_degree {
        acc = acc.add(&form.homogeneous_part(d)).expect("same shape");
    }
    acc
}

/// `F − G(Δu, Δv, X)` through order three.
pub fn verify_lemma_main3(frame: &BlaschkeFrame) -> Result<LemmaReport, MidplaneError> {
    let order = 4;
    let mode = frame.mode();
    let f = expand_f(frame, order)?;
    let one = Jet4::constant(order, Scalar::one(mode));
    let g = transon_form(frame).in_pair_variables(order, &one)?;
    let res = truncate_to(&f.sub(&g)?, 3, 0);
    Ok(LemmaReport::from_residual(&res, mode))
}

/// Order-four part of `F` minus `H₁(Δ)σu + H₂(Δ)σv`, using the displayed
/// forms.
pub fn verify_lemma_main4(frame: &BlaschkeFrame) -> Result<LemmaReport, MidplaneError> {
    verify_lemma_main4_with(frame, &HForms::from_frame(frame))
}

/// As [`verify_lemma_main4`] with caller-supplied forms.
pub fn verify_lemma_main4_with(frame: &BlaschkeFrame, h: &HForms) -> Result<LemmaReport, MidplaneError> {
    let order = 4;
    let mode = frame.mode();
    let f = expand_f(frame, order)?;
    let var = |k| Jet4::variable(k, order, mode);
    let su = var(0)?.add(&var(2)?)?;
    let sv = var(1)?.add(&var(3)?)?;
    let target = h
        .h1
        .in_pair_variables(order, &su)?
        .add(&h.h2.in_pair_variables(order, &sv)?)?;
    let res = f.homogeneous_part(4).sub(&target)?;
    Ok(LemmaReport::from_residual(&res, mode))
}

/// Least-squares slope of `log d` against `log t`, over positive entries.
pub fn fitted_order(ts: &[f64], ds: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ds)
        .filter(|(_, d)| **d > 0.0 && d.is_finite())
        .map(|(t, d)| (Float::ln(*t), Float::ln(*d)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Plane distance between the mid-plane of a collapsing symmetric pair and
/// the Transon plane.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitProbe {
    pub ts: Vec<f64>,
    pub distances: Vec<f64>,
    /// `None` when every distance is zero.
    pub order: Option<f64>,
}

impl LimitProbe {
    pub fn decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] <= w[0])
    }

    /// Distances all zero (to `tol`) or decreasing with fitted order `>= min`.
    pub fn converges(&self, min_order: f64, tol: f64) -> bool {
        if self.distances.iter().all(|d| *d <= tol) {
            return true;
        }
        self.decreasing() && self.order.is_some_and(|o| o >= min_order)
    }
}

/// Runs the pair `±(t/2)T` (in the frame's local chart) through the given
/// `t` values in float mode.
pub fn midplane_limit_probe(
    frame: &BlaschkeFrame,
    t: &TangentDirection,
    ts: &[f64],
) -> Result<LimitProbe, MidplaneError> {
    let ff = frame.to_mode(Mode::Float)?;
    let tf = t.to_mode(Mode::Float)?;
    let target = transon_plane(&ff, &tf)?;
    let d = [tf.xi.to_f64(), tf.eta.to_f64()];
    let mut distances = Vec::with_capacity(ts.len());
    for &s in ts {
        let plane = mid_plane(&ff, &PointPair::symmetric([0.0, 0.0], d, s))?;
        distances.push(plane.distance(&target));
    }
    Ok(LimitProbe {
        ts: ts.to_vec(),
        order: fitted_order(ts, &distances),
        distances,
    })
}

/// Gaps of envelope rows 2–5, scaled by `t⁻²` (rows 2, 3) and `t⁻³`
/// (rows 4, 5), to `2G_ξ, 2G_η, 2H₁, 2H₂` at `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeProbe {
    pub ts: Vec<f64>,
    pub gaps: [Vec<f64>; 4],
    pub orders: [Option<f64>; 4],
}

/// Pairs `c ± (t/2)T` with `c = t·shift`; `shift = 0` gives symmetric pairs.
pub fn envelope_limit_probe(
    frame: &BlaschkeFrame,
    t: &TangentDirection,
    ts: &[f64],
    shift: [f64; 2],
) -> Result<EnvelopeProbe, MidplaneError> {
    let ff = frame.to_mode(Mode::Float)?;
    let tf = t.to_mode(Mode::Float)?;
    let dir = tf.pair();
    let g = transon_form(&ff);
    let h = HForms::from_frame(&ff);
    let two = Scalar::Float(2.0);
    let targets = [
        g.partial(0)?.eval(&dir)?.scale(&two),
        g.partial(1)?.eval(&dir)?.scale(&two),
        h.h1.eval(&dir)?.scale(&two),
        h.h2.eval(&dir)?.scale(&two),
    ];
    let d = [tf.xi.to_f64(), tf.eta.to_f64()];
    let mut gaps: [Vec<f64>; 4] = Default::default();
    for &s in ts {
        let pair = PointPair::symmetric([s * shift[0], s * shift[1]], d, s);
        let sys = envelope_system(&ff, &pair)?;
        for k in 0..4 {
            let p = if k < 2 { 2 } else { 3 };
            let row = sys.rows[k + 1].scale(&Scalar::Float(Float::powi(s, -p)));
            gaps[k].push(row.gap(&targets[k]));
        }
    }
    let orders = core::array::from_fn(|k| fitted_order(ts, &gaps[k]));
    Ok(EnvelopeProbe {
        ts: ts.to_vec(),
        gaps,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{Height, Patch};

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::ratio(Mode::Rational, n, d)
    }

    fn generic() -> BlaschkeFrame {
        BlaschkeFrame::from_coefficients(
            r(1, 3),
            r(-1, 5),
            [r(1, 2), r(1, 7), r(-2, 3), r(1, 4), r(3, 5)],
            [r(1, 9), r(2, 3), r(0, 1), r(1, 1), r(-1, 2), r(1, 3)],
        )
        .unwrap()
    }

    fn paraboloid(mode: Mode) -> BlaschkeFrame {
        let z = || Scalar::zero(mode);
        BlaschkeFrame::from_coefficients(z(), z(), core::array::from_fn(|_| z()), core::array::from_fn(|_| z())).unwrap()
    }

    #[test]
    fn paraboloid_symmetric_pair_gives_x_equals_zero() {
        let f = paraboloid(Mode::Rational);
        let pair = PointPair::new([r(1, 3), r(0, 1)], [r(-1, 3), r(0, 1)]);
        let p = mid_plane(&f, &pair).unwrap();
        assert_eq!(p, Plane3::new([r(1, 1), r(0, 1), r(0, 1)], r(0, 1)).unwrap());
        assert_eq!(mid_plane(&f, &pair.swapped()).unwrap(), p);
        // rows 4, 5 keep only the constant column, 2H(Δ) = −½|Δ|²Δ
        let sys = envelope_system(&f, &pair).unwrap();
        for k in [3, 4] {
            assert!(sys.rows[k].covector.iter().all(Scalar::is_zero));
        }
        assert_eq!(sys.rows[3].constant, r(-4, 27));
        assert!(sys.rows[4].constant.is_zero());
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let f = generic();
        let pair = PointPair::new([r(1, 5), r(0, 1)], [r(1, 5), r(0, 1)]);
        assert_eq!(mid_plane(&f, &pair), Err(MidplaneError::DegeneratePair));
    }

    #[test]
    fn envelope_first_row_is_the_mid_plane() {
        let f = generic();
        let pair = PointPair::new([r(1, 5), r(1, 7)], [r(-1, 4), r(1, 3)]);
        let sys = envelope_system(&f, &pair).unwrap();
        assert_eq!(sys.rows[0].to_plane().unwrap(), mid_plane(&f, &pair).unwrap());
    }

    #[test]
    fn sphere_mid_plane_contains_center() {
        let sphere = SurfaceModel::new(
            Height::SphereCap {
                center: [r(0, 1), r(0, 1), r(1, 1)],
                radius: r(1, 1),
            },
            Patch::new((-0.5, 0.5), (-0.5, 0.5)),
        )
        .unwrap();
        // 5² + 12² = 13² keeps the heights rational
        let pair = PointPair::new([r(0, 1), r(0, 1)], [r(3, 13), r(4, 13)]);
        let p = mid_plane(&sphere, &pair).unwrap();
        assert!(p.eval(&[r(0, 1), r(0, 1), r(1, 1)]).is_zero());
    }

    #[test]
    fn lemma_checks_pass_on_a_rational_frame() {
        let f = generic();
        assert!(verify_lemma_main3(&f).unwrap().passes(0.0));
        assert!(verify_lemma_main4(&f).unwrap().passes(0.0));
        let bad = HForms::from_frame(&f).with_h12_perturbed(&r(1, 100));
        let rep = verify_lemma_main4_with(&f, &bad).unwrap();
        assert!(!rep.passes(0.0));
        assert!(rep.nonzero_terms > 0);
    }

    #[test]
    fn low_orders_vanish_and_cubic_matches_the_appendix_display() {
        let f = generic();
        let e = expand_f(&f, 4).unwrap();
        assert_eq!(e.max_abs_up_to(2), 0.0);
        // appendix convention is −F: x-coefficient −½Δu³ − ½Δv²Δu
        let mode = Mode::Rational;
        let var = |k| Jet4::variable(k, 4, mode).unwrap();
        let du = var(0).sub(&var(2)).unwrap();
        let dv = var(1).sub(&var(3)).unwrap();
        let want = du
            .powi(3)
            .unwrap()
            .add(&dv.powi(2).unwrap().mul(&du).unwrap())
            .unwrap()
            .scale(&r(-1, 2))
            .unwrap();
        assert_eq!(e.cx.homogeneous_part(3).neg(), want);
    }

    #[test]
    fn limit_probe_on_paraboloid_is_exact() {
        let f = paraboloid(Mode::Float);
        let t = TangentDirection::e1(Mode::Float);
        let probe = midplane_limit_probe(&f, &t, &[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
        assert!(probe.distances.iter().all(|d| *d < 1e-15));
    }

    #[test]
    fn limit_probe_converges_on_generic_frame() {
        let f = generic();
        let t = TangentDirection::new(r(3, 5), r(4, 5)).unwrap();
        let probe = midplane_limit_probe(&f, &t, &[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
        assert!(probe.converges(1.0, 0.0), "{probe:?}");
        let env = envelope_limit_probe(&f, &t, &[1e-1, 1e-2, 1e-3, 1e-4], [0.0, 0.0]).unwrap();
        for k in 0..4 {
            assert!(env.orders[k].unwrap() >= 0.9, "{env:?}");
        }
    }

    #[test]
    fn fitted_order_of_a_power_law() {
        let ts = [1e-1, 1e-2, 1e-3];
        let ds: Vec<f64> = ts.iter().map(|t| 3.0 * t * t).collect();
        assert!((fitted_order(&ts, &ds).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fitted_order(&ts, &[0.0; 3]), None);
    }
}
