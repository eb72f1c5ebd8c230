//! Classical invariants at a normalized point: sections, the Transon plane,
//! the cone of B.Su, Moutard quadrics and centers, and the affine curvature
//! of planar graphs.

use num_traits::float::Float;

use crate::frames::{rotate_frame, BlaschkeFrame, FrameError, Rotation};
use crate::jets::Jet2;
use crate::linalg::{self, Vec3};
use crate::scalar::{Mode, Scalar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum InvariantError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("the two cone gradients are parallel")]
    DegenerateCone,
    #[error("direction is not a unit vector")]
    NotUnit,
}

/// A unit tangent direction `(ξ, η)`, identified with its antipode.
#[derive(Clone, Debug)]
pub struct TangentDirection {
    pub xi: Scalar,
    pub eta: Scalar,
}

impl TangentDirection {
    pub fn new(xi: Scalar, eta: Scalar) -> Result<Self, InvariantError> {
        if xi.mode() != eta.mode() {
            return Err(FrameError::ModeMismatch.into());
        }
        let n = &(&xi * &xi) + &(&eta * &eta);
        let unit = match n {
            Scalar::Rational(_) => n == Scalar::one(Mode::Rational),
            Scalar::Float(v) => (v - 1.0).abs() < 1e-12,
        };
        if !unit {
            return Err(InvariantError::NotUnit);
        }
        Ok(TangentDirection { xi, eta })
    }

    pub fn from_angle(theta: f64) -> Self {
        TangentDirection {
            xi: Scalar::Float(Float::cos(theta)),
            eta: Scalar::Float(Float::sin(theta)),
        }
    }

    pub fn e1(mode: Mode) -> Self {
        TangentDirection {
            xi: Scalar::one(mode),
            eta: Scalar::zero(mode),
        }
    }

    pub fn mode(&self) -> Mode {
        self.xi.mode()
    }

    /// Angle in `[0, π)`.
    pub fn angle(&self) -> f64 {
        let t = Float::atan2(self.eta.to_f64(), self.xi.to_f64());
        reduce_angle(t)
    }

    pub fn pair(&self) -> [Scalar; 2] {
        [self.xi.clone(), self.eta.clone()]
    }

    /// The rotation taking `e₁` to this direction.
    pub fn rotation(&self) -> Rotation {
        Rotation {
            cos: self.xi.clone(),
            sin: self.eta.clone(),
        }
    }

    pub fn to_mode(&self, mode: Mode) -> Result<Self, InvariantError> {
        Ok(TangentDirection {
            xi: self.xi.to_mode(mode).map_err(FrameError::from)?,
            eta: self.eta.to_mode(mode).map_err(FrameError::from)?,
        })
    }
}

impl PartialEq for TangentDirection {
    fn eq(&self, other: &Self) -> bool {
        let same = |s: i64| match (&self.xi, &other.xi) {
            (Scalar::Float(_), _) | (_, Scalar::Float(_)) => {
                (self.xi.to_f64() - s as f64 * other.xi.to_f64()).abs() < 1e-12
                    && (self.eta.to_f64() - s as f64 * other.eta.to_f64()).abs() < 1e-12
            }
            _ => {
                let k = Scalar::from_int(Mode::Rational, s);
                self.xi == &k * &other.xi && self.eta == &k * &other.eta
            }
        };
        same(1) || same(-1)
    }
}

/// Reduces an angle to `[0, π)`.
pub fn reduce_angle(t: f64) -> f64 {
    let pi = core::f64::consts::PI;
    let mut r = t % pi;
    if r < 0.0 {
        r += pi;
    }
    if r >= pi {
        r -= pi;
    }
    r
}

/// Distance between two angles modulo `π`.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = reduce_angle(a - b);
    d.min(core::f64::consts::PI - d)
}

/// The plane `n · X = d`, stored with `max |nᵢ| = 1` attained by a positive
/// component (the first such one).
#[derive(Clone, Debug, PartialEq)]
pub struct Plane3 {
    normal: Vec3,
    offset: Scalar,
}

impl Plane3 {
    pub fn new(normal: Vec3, offset: Scalar) -> Option<Self> {
        let mut best = 0;
        for i in 1..3 {
            if normal[i].abs().cmp_value(&normal[best].abs()) == core::cmp::Ordering::Greater {
                best = i;
            }
        }
        if normal[best].is_zero() {
            return None;
        }
        let k = normal[best].recip().ok()?;
        Some(Plane3 {
            normal: linalg::scale3(&normal, &k),
            offset: &offset * &k,
        })
    }

    pub fn normal(&self) -> &Vec3 {
        &self.normal
    }

    pub fn offset(&self) -> &Scalar {
        &self.offset
    }

    pub fn mode(&self) -> Mode {
        self.offset.mode()
    }

    /// `n · X − d`.
    pub fn eval(&self, x: &Vec3) -> Scalar {
        &linalg::dot3(&self.normal, x) - &self.offset
    }

    /// Angle between the normal lines plus the gap between offsets, both
    /// after max-normalization.
    pub fn distance(&self, other: &Plane3) -> f64 {
        let a = linalg::to_f64_3(&self.normal);
        let mut b = linalg::to_f64_3(&other.normal);
        let mut db = other.offset.to_f64();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        if dot < 0.0 {
            b = [-b[0], -b[1], -b[2]];
            db = -db;
        }
        let cr = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let sin = Float::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
        let angle = Float::atan2(sin, dot.abs());
        angle + (self.offset.to_f64() - db).abs()
    }
}

/// A quadric `X̂ᵀ Q X̂ = 0` with `X̂ = (x, y, z, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadric3 {
    m: [[Scalar; 4]; 4],
}

impl Quadric3 {
    /// Symmetrizes the input.
    pub fn from_matrix(m: [[Scalar; 4]; 4]) -> Self {
        let half = Scalar::ratio(m[0][0].mode(), 1, 2);
        let s = core::array::from_fn(|i| {
            core::array::from_fn(|j| &(&m[i][j] + &m[j][i]) * &half)
        });
        Quadric3 { m: s }
    }

    pub fn matrix(&self) -> &[[Scalar; 4]; 4] {
        &self.m
    }

    pub fn mode(&self) -> Mode {
        self.m[0][0].mode()
    }

    pub fn eval(&self, x: &Vec3) -> Scalar {
        let mode = self.mode();
        let h = [x[0].clone(), x[1].clone(), x[2].clone(), Scalar::one(mode)];
        let mut acc = Scalar::zero(mode);
        for i in 0..4 {
            for j in 0..4 {
                acc = &acc + &(&(&h[i] * &self.m[i][j]) * &h[j]);
            }
        }
        acc
    }

    /// The center, when the quadratic part is nondegenerate.
    pub fn center(&self) -> Option<Vec3> {
        let a: linalg::Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| self.m[i][j].clone()));
        let rhs: Vec3 = core::array::from_fn(|i| -&self.m[i][3]);
        let inv = linalg::inv3(&a)?;
        Some(linalg::mat_vec(&inv, &rhs))
    }
}

/// A point, or a direction when the point has gone to infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum Center {
    Finite(Vec3),
    AtInfinity(Vec3),
}

impl Center {
    pub fn finite(&self) -> Option<&Vec3> {
        match self {
            Center::Finite(p) => Some(p),
            Center::AtInfinity(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Center::Finite(_))
    }
}

/// Coefficients of the planar graph
/// `z = ½x² + (a3/6)x³ + (a4/24)x⁴ + (a5/120)x⁵ + O(6)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionJet {
    pub a3: Scalar,
    pub a4: Scalar,
    pub a5: Scalar,
}

impl SectionJet {
    /// From the Taylor coefficients `c3, c4, c5` of `x³, x⁴, x⁵`.
    pub fn from_taylor(c3: &Scalar, c4: &Scalar, c5: &Scalar) -> Self {
        let mode = c3.mode();
        SectionJet {
            a3: c3 * &Scalar::from_int(mode, 6),
            a4: c4 * &Scalar::from_int(mode, 24),
            a5: c5 * &Scalar::from_int(mode, 120),
        }
    }
}

/// The cubic part `f₃` of the frame as a polynomial in `(ξ, η)`.
pub fn cubic_form(frame: &BlaschkeFrame) -> Jet2 {
    frame.normalized().homogeneous_part(3).with_order(3)
}

/// Projection onto the `xz` plane of the section by `y = λz`
/// (the direction is assumed already rotated to `(1, 0)`).
pub fn section_projection(frame: &BlaschkeFrame, lambda: &Scalar) -> Result<SectionJet, InvariantError> {
    let mode = frame.mode();
    let f = frame.normalized();
    let order = f.order();
    let x = Jet2::variable(0, order, mode).map_err(FrameError::from)?;
    // z = f(x, λz) by fixed-point iteration; each pass fixes one more order
    let mut z = Jet2::zero(order, mode);
    for _ in 0..order {
        let y = z.scale(lambda).map_err(FrameError::from)?;
        z = f.compose(&[x.clone(), y]).map_err(FrameError::from)?;
    }
    Ok(SectionJet::from_taylor(&z.c(3, 0), &z.c(4, 0), &z.c(5, 0)))
}

/// `G(ξ, η, ·)`: `(ξ/2)(ξ²+η²)x + (η/2)(ξ²+η²)y + f₃(ξ,η)z = 0`.
pub fn transon_plane(frame: &BlaschkeFrame, t: &TangentDirection) -> Result<Plane3, InvariantError> {
    let mode = frame.mode();
    let g = transon_covector(frame, &t.pair())?;
    Ok(Plane3::new(g, Scalar::zero(mode)).expect("ξ and η do not both vanish"))
}

/// The covector of `G(ξ, η, ·)`; no normalization, `(ξ, η)` need not be unit.
pub fn transon_covector(frame: &BlaschkeFrame, d: &[Scalar; 2]) -> Result<Vec3, InvariantError> {
    let mode = frame.mode();
    let half = Scalar::ratio(mode, 1, 2);
    let r2 = &(&d[0] * &d[0]) + &(&d[1] * &d[1]);
    let f3 = cubic_form(frame).eval(d).map_err(FrameError::from)?;
    Ok([&(&half * &d[0]) * &r2, &(&half * &d[1]) * &r2, f3])
}

/// Covectors of `G_ξ` and `G_η` at `(ξ, η)`.
pub fn transon_gradients(frame: &BlaschkeFrame, d: &[Scalar; 2]) -> Result<[Vec3; 2], InvariantError> {
    let mode = frame.mode();
    let half = Scalar::ratio(mode, 1, 2);
    let three = Scalar::from_int(mode, 3);
    let (xi, eta) = (&d[0], &d[1]);
    let f3 = cubic_form(frame);
    let f3x = f3.partial(0).map_err(FrameError::from)?.eval(d).map_err(FrameError::from)?;
    let f3y = f3.partial(1).map_err(FrameError::from)?.eval(d).map_err(FrameError::from)?;
    let xx = xi * xi;
    let yy = eta * eta;
    Ok([
        [&half * &(&(&three * &xx) + &yy), xi * eta, f3x],
        [xi * eta, &half * &(&xx + &(&three * &yy)), f3y],
    ])
}

/// Direction of the line `G_ξ = G_η = 0`, scaled so its `z` component is 1
/// when that component is nonzero.
pub fn su_cone_direction(frame: &BlaschkeFrame, t: &TangentDirection) -> Result<Vec3, InvariantError> {
    let [gx, gy] = transon_gradients(frame, &t.pair())?;
    let s = linalg::cross3(&gx, &gy);
    if s.iter().all(Scalar::is_zero) {
        return Err(InvariantError::DegenerateCone);
    }
    if s[2].is_zero() {
        return Ok(s);
    }
    let k = s[2].recip().map_err(FrameError::from)?;
    Ok(linalg::scale3(&s, &k))
}

fn rotated(frame: &BlaschkeFrame, t: &TangentDirection) -> Result<BlaschkeFrame, InvariantError> {
    if t.mode() != frame.mode() {
        return Err(FrameError::ModeMismatch.into());
    }
    Ok(rotate_frame(frame, &t.rotation())?)
}

/// Moutard quadric for `T = (1, 0)`:
/// `z = ½(x²+y²) + 2f21 yz + 2f30 xz + 4(f40 − 2f30²)z²`.
fn moutard_quadric_e1(frame: &BlaschkeFrame) -> Quadric3 {
    let mode = frame.mode();
    let z = || Scalar::zero(mode);
    let half = Scalar::ratio(mode, 1, 2);
    let two = Scalar::from_int(mode, 2);
    let f30 = frame.f(3, 0);
    let f21 = frame.f(2, 1);
    let zz = &Scalar::from_int(mode, 4) * &(&frame.f(4, 0) - &(&two * &(&f30 * &f30)));
    // ½x² + ½y² + 2f30 xz + 2f21 yz + zz z² − z = 0
    let m = [
        [half.clone(), z(), f30.clone(), z()],
        [z(), half.clone(), f21.clone(), z()],
        [f30, f21, zz, -&half],
        [z(), z(), -&half, z()],
    ];
    Quadric3::from_matrix(m)
}

/// Moutard quadric of `T`, in the frame's local coordinates.
pub fn moutard_quadric(frame: &BlaschkeFrame, t: &TangentDirection) -> Result<Quadric3, InvariantError> {
    let r = rotated(frame, t)?;
    let q = moutard_quadric_e1(&r);
    // local = R · rotated-local; a rotation about z is linear, so the
    // quadric transforms by congruence with R⁻¹
    let mode = frame.mode();
    let (c, s) = (t.xi.clone(), t.eta.clone());
    let z = || Scalar::zero(mode);
    let rinv = [
        [c.clone(), s.clone(), z(), z()],
        [-&s, c, z(), z()],
        [z(), z(), Scalar::one(mode), z()],
        [z(), z(), z(), Scalar::one(mode)],
    ];
    let m = q.matrix();
    let mut out: [[Scalar; 4]; 4] = core::array::from_fn(|_| core::array::from_fn(|_| z()));
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = z();
            for k in 0..4 {
                for l in 0..4 {
                    if rinv[k][i].is_zero() || rinv[l][j].is_zero() {
                        continue;
                    }
                    acc = &acc + &(&(&rinv[k][i] * &m[k][l]) * &rinv[l][j]);
                }
            }
            out[i][j] = acc;
        }
    }
    Ok(Quadric3::from_matrix(out))
}

/// Center `(−2f30, −2f21, 1) / (4(2f40 − 5f30² − f21²))` for `T = (1, 0)`.
fn moutard_center_e1(frame: &BlaschkeFrame) -> Center {
    let mode = frame.mode();
    let two = Scalar::from_int(mode, 2);
    let f30 = frame.f(3, 0);
    let f21 = frame.f(2, 1);
    let dir = [-&(&two * &f30), -&(&two * &f21), Scalar::one(mode)];
    let denom = &Scalar::from_int(mode, 4)
        * &(&(&(&two * &frame.f(4, 0)) - &(&Scalar::from_int(mode, 5) * &(&f30 * &f30))) - &(&f21 * &f21));
    match denom.recip() {
        Ok(k) if !is_negligible(&denom, &dir) => Center::Finite(linalg::scale3(&dir, &k)),
        _ => Center::AtInfinity(dir),
    }
}

fn is_negligible(denom: &Scalar, dir: &Vec3) -> bool {
    match denom {
        Scalar::Rational(_) => denom.is_zero(),
        Scalar::Float(d) => d.abs() <= 1e-14 * (1.0 + linalg::max_abs(dir)),
    }
}

fn rotate_center(t: &TangentDirection, c: Center) -> Center {
    let r = t.rotation();
    match c {
        Center::Finite(p) => Center::Finite(r.apply(&p)),
        Center::AtInfinity(d) => Center::AtInfinity(r.apply(&d)),
    }
}

/// Center of the Moutard quadric of `T` in local coordinates.
pub fn moutard_center(frame: &BlaschkeFrame, t: &TangentDirection) -> Result<Center, InvariantError> {
    let r = rotated(frame, t)?;
    Ok(rotate_center(t, moutard_center_e1(&r)))
}

/// `μ = (3a4 − 5a3²)/9`.
pub fn affine_curvature(s: &SectionJet) -> Scalar {
    let mode = s.a3.mode();
    let v = &(&Scalar::from_int(mode, 3) * &s.a4) - &(&Scalar::from_int(mode, 5) * &(&s.a3 * &s.a3));
    &v * &Scalar::ratio(mode, 1, 9)
}

/// `μ′ = (9a5 + 40a3³ − 45a3a4)/27`, derivative in affine arc length.
pub fn affine_curvature_derivative(s: &SectionJet) -> Scalar {
    let mode = s.a3.mode();
    let n = |k| Scalar::from_int(mode, k);
    let v = &(&(&n(9) * &s.a5) + &(&n(40) * &s.a3.pow(3))) - &(&(&n(45) * &s.a3) * &s.a4);
    &v * &Scalar::ratio(mode, 1, 27)
}

/// Center of affine curvature of the section of the surface by the plane
/// spanned by `T` and `s(T)`.
pub fn center_of_affine_curvature(
    frame: &BlaschkeFrame,
    t: &TangentDirection,
) -> Result<Center, InvariantError> {
    let r = rotated(frame, t)?;
    let e1 = TangentDirection::e1(frame.mode());
    let s = su_cone_direction(&r, &e1)?;
    if s[2].is_zero() {
        return Err(InvariantError::DegenerateCone);
    }
    // the plane through e₁ and s is y = λz
    let lambda = s[1].clone();
    let sec = section_projection(&r, &lambda)?;
    let mu = affine_curvature(&sec);
    // affine normal (−a3/3, 1) of the projection, lifted to the plane
    let normal = [
        &sec.a3 * &Scalar::ratio(frame.mode(), -1, 3),
        lambda,
        Scalar::one(frame.mode()),
    ];
    let c = match mu.recip() {
        Ok(k) if !is_negligible(&mu, &normal) => Center::Finite(linalg::scale3(&normal, &k)),
        _ => Center::AtInfinity(normal),
    };
    Ok(rotate_center(t, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::ratio(Mode::Rational, n, d)
    }

    fn frame(a: (i64, i64), b: (i64, i64), f4: [(i64, i64); 5], f5: [(i64, i64); 6]) -> BlaschkeFrame {
        BlaschkeFrame::from_coefficients(
            r(a.0, a.1),
            r(b.0, b.1),
            f4.map(|(n, d)| r(n, d)),
            f5.map(|(n, d)| r(n, d)),
        )
        .unwrap()
    }

    fn sphere() -> BlaschkeFrame {
        frame((0, 1), (0, 1), [(1, 8), (0, 1), (1, 4), (0, 1), (1, 8)], [(0, 1); 6])
    }

    fn paraboloid() -> BlaschkeFrame {
        frame((0, 1), (0, 1), [(0, 1); 5], [(0, 1); 6])
    }

    fn generic() -> BlaschkeFrame {
        frame(
            (1, 3),
            (-1, 5),
            [(1, 2), (1, 7), (-2, 3), (1, 4), (3, 5)],
            [(1, 9), (2, 3), (0, 1), (1, 1), (-1, 2), (1, 3)],
        )
    }

    fn e1() -> TangentDirection {
        TangentDirection::e1(Mode::Rational)
    }

    #[test]
    fn section_coefficients() {
        let f = generic();
        let s = section_projection(&f, &r(0, 1)).unwrap();
        assert_eq!(s.a3, &r(6, 1) * &f.a());
        assert_eq!(s.a4, &r(24, 1) * &f.f(4, 0));
        let lam = &r(-2, 1) * &f.f(2, 1);
        let s = section_projection(&f, &lam).unwrap();
        let f21 = f.f(2, 1);
        assert_eq!(s.a4, &r(24, 1) * &(&f.f(4, 0) - &(&(&f21 * &f21) * &r(1, 2))));
        let p = section_projection(&paraboloid(), &r(0, 1)).unwrap();
        assert!(p.a3.is_zero() && p.a4.is_zero());
    }

    #[test]
    fn transon_examples() {
        let f = generic();
        let p = transon_plane(&f, &e1()).unwrap();
        let want = Plane3::new([r(1, 1), r(0, 1), &r(2, 1) * &f.a()], r(0, 1)).unwrap();
        assert_eq!(p, want);
        let t = TangentDirection::new(r(0, 1), r(1, 1)).unwrap();
        let p = transon_plane(&f, &t).unwrap();
        let want = Plane3::new([r(0, 1), r(1, 1), &r(2, 1) * &f.b()], r(0, 1)).unwrap();
        assert_eq!(p, want);
        let t = TangentDirection::new(r(3, 5), r(4, 5)).unwrap();
        let p = transon_plane(&sphere(), &t).unwrap();
        assert_eq!(p, Plane3::new([r(3, 1), r(4, 1), r(0, 1)], r(0, 1)).unwrap());
    }

    #[test]
    fn su_cone_examples() {
        let f = generic();
        let s = su_cone_direction(&f, &e1()).unwrap();
        assert_eq!(s, [&r(-2, 1) * &f.f(3, 0), &r(-2, 1) * &f.f(2, 1), r(1, 1)]);
        let t = TangentDirection::new(r(5, 13), r(12, 13)).unwrap();
        assert_eq!(su_cone_direction(&sphere(), &t).unwrap(), [r(0, 1), r(0, 1), r(1, 1)]);
    }

    #[test]
    fn moutard_examples() {
        let q = moutard_quadric(&sphere(), &e1()).unwrap();
        // x² + y² + (z − 1)² − 1 scaled by ½
        for p in [[r(1, 1), r(0, 1), r(1, 1)], [r(0, 1), r(3, 5), r(1, 5)]] {
            assert!(q.eval(&p).is_zero());
        }
        assert_eq!(q.center().unwrap(), [r(0, 1), r(0, 1), r(1, 1)]);
        let t = TangentDirection::new(r(-3, 5), r(4, 5)).unwrap();
        assert_eq!(
            moutard_center(&sphere(), &t).unwrap(),
            Center::Finite([r(0, 1), r(0, 1), r(1, 1)])
        );
        assert!(matches!(moutard_center(&paraboloid(), &t).unwrap(), Center::AtInfinity(_)));
        let pq = moutard_quadric(&paraboloid(), &e1()).unwrap();
        assert!(pq.center().is_none());

        let f = generic();
        let m = moutard_quadric(&f, &e1()).unwrap();
        assert_eq!(m.matrix()[0][2], f.a());
        assert_eq!(m.matrix()[1][2], &r(-3, 1) * &f.b());
        let c = moutard_center(&f, &e1()).unwrap();
        assert_eq!(Center::Finite(m.center().unwrap()), c);
        let (a, b) = (f.a(), f.b());
        let den = &r(4, 1) * &(&(&(&r(2, 1) * &f.f(4, 0)) - &(&r(5, 1) * &(&a * &a))) - &(&r(9, 1) * &(&b * &b)));
        let k = den.recip().unwrap();
        assert_eq!(c, Center::Finite([&(&r(-2, 1) * &a) * &k, &(&r(6, 1) * &b) * &k, k.clone()]));
    }

    #[test]
    fn moutard_center_matches_quadric_center_in_any_direction() {
        let f = generic();
        let t = TangentDirection::new(r(8, 17), r(-15, 17)).unwrap();
        let q = moutard_quadric(&f, &t).unwrap();
        assert_eq!(Center::Finite(q.center().unwrap()), moutard_center(&f, &t).unwrap());
        assert!(q.eval(&linalg::zero3(Mode::Rational)).is_zero());
        assert_eq!(center_of_affine_curvature(&f, &t).unwrap(), moutard_center(&f, &t).unwrap());
    }

    #[test]
    fn curvature_formulas() {
        let circle = SectionJet { a3: r(0, 1), a4: r(3, 1), a5: r(0, 1) };
        assert_eq!(affine_curvature(&circle), r(1, 1));
        assert!(affine_curvature_derivative(&circle).is_zero());
        let parabola = SectionJet { a3: r(0, 1), a4: r(0, 1), a5: r(0, 1) };
        assert!(affine_curvature(&parabola).is_zero());
        let f = generic();
        let f21 = f.f(2, 1);
        let s = section_projection(&f, &(&r(-2, 1) * &f21)).unwrap();
        let want = &r(-4, 1)
            * &(&(&(&r(5, 1) * &f.a().pow(2)) - &(&r(2, 1) * &f.f(4, 0))) + &f21.pow(2));
        assert_eq!(affine_curvature(&s), want);
    }

    #[test]
    fn center_of_affine_curvature_examples() {
        assert_eq!(
            center_of_affine_curvature(&sphere(), &e1()).unwrap(),
            Center::Finite([r(0, 1), r(0, 1), r(1, 1)])
        );
        assert!(matches!(
            center_of_affine_curvature(&paraboloid(), &e1()).unwrap(),
            Center::AtInfinity(_)
        ));
    }

    #[test]
    fn plane_normalization_and_distance() {
        let p = Plane3::new([r(0, 1), r(-4, 1), r(2, 1)], r(8, 1)).unwrap();
        assert_eq!(p.normal(), &[r(0, 1), r(1, 1), r(-1, 2)]);
        assert_eq!(p.offset(), &r(-2, 1));
        assert!(Plane3::new([r(0, 1), r(0, 1), r(0, 1)], r(1, 1)).is_none());
        let q = Plane3::new([Scalar::Float(1.0), Scalar::Float(0.0), Scalar::Float(0.0)], Scalar::Float(0.0)).unwrap();
        let q2 = Plane3::new([Scalar::Float(-1.0), Scalar::Float(1e-3), Scalar::Float(0.0)], Scalar::Float(0.0)).unwrap();
        assert!((q.distance(&q2) - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn antipodal_directions_compare_equal() {
        let t = TangentDirection::new(r(3, 5), r(4, 5)).unwrap();
        let u = TangentDirection::new(r(-3, 5), r(-4, 5)).unwrap();
        assert_eq!(t, u);
        assert!(TangentDirection::new(r(1, 1), r(1, 1)).is_err());
        assert!((TangentDirection::from_angle(-0.5).angle() - (core::f64::consts::PI - 0.5)).abs() < 1e-15);
    }
}
