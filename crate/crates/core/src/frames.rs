//! Surface patches and their reduction to the normal form
//! `z = ½(x² + y²) + a(x³ − 3xy²) + b(y³ − 3yx²) + f₄ + f₅ + …`
//! at a chosen point, together with the affine bookkeeping back to world
//! coordinates.

use alloc::vec::Vec;

use num_traits::float::Float;

use crate::invariants::{Center, Plane3, Quadric3};
use crate::jets::{Jet2, JetError};
use crate::linalg::{self, AffineMap3, Mat3, Vec3};
use crate::scalar::{Mode, Scalar, ScalarError};

/// Jet order kept by every frame.
pub const FRAME_ORDER: usize = 5;

/// Float-mode tolerance on the two apolarity combinations.
pub const APOLARITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FrameError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("Hessian is not positive definite at the requested point")]
    NonConvexPoint,
    #[error("point lies outside the patch")]
    PatchBounds,
    #[error("normalization needs an irrational root; use float mode")]
    Irrational,
    #[error("tangent vectors are linearly dependent")]
    Degenerate,
    #[error("rotation is not orthonormal")]
    InvalidRotation,
    #[error("scalar modes differ")]
    ModeMismatch,
}

impl From<ScalarError> for FrameError {
    fn from(e: ScalarError) -> Self {
        match e {
            ScalarError::Irrational => FrameError::Irrational,
            ScalarError::ModeMismatch(..) => FrameError::ModeMismatch,
            other => FrameError::Jet(JetError::Scalar(other)),
        }
    }
}

/// Closed rectangle in chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Patch {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl Patch {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Self {
        Patch { u, v }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.u.0 && p[0] <= self.u.1 && p[1] >= self.v.0 && p[1] <= self.v.1
    }

    /// `n × n` grid including the corners, row-major in `v` then `u`.
    pub fn grid(&self, nu: usize, nv: usize) -> Vec<[f64; 2]> {
        let lerp = |(lo, hi): (f64, f64), i: usize, n: usize| {
            if n <= 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(nu * nv);
        for j in 0..nv {
            for i in 0..nu {
                out.push([lerp(self.u, i, nu), lerp(self.v, j, nv)]);
            }
        }
        out
    }
}

/// Height function `z = φ(u, v)` of the chart.
#[derive(Clone, Debug, PartialEq)]
pub enum Height {
    /// A polynomial; the jet order is its degree so nothing is truncated.
    Polynomial(Jet2),
    /// Lower cap `z = c_z − sqrt(r² − (u − c_u)² − (v − c_v)²)` of a sphere.
    SphereCap { center: Vec3, radius: Scalar },
}

/// A locally convex surface: the graph of `height` over `patch`, placed in
/// space by an affine map.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceModel {
    height: Height,
    patch: Patch,
    placement: AffineMap3,
}

impl SurfaceModel {
    /// Builds a surface and checks convexity on a 5×5 sample grid.
    pub fn new(height: Height, patch: Patch) -> Result<Self, FrameError> {
        let s = Self::new_unchecked(height, patch);
        if let Some(err) = s.convexity_failures(5).into_iter().next() {
            return Err(err.1);
        }
        Ok(s)
    }

    /// Builds a surface without the convexity check, for patches that are
    /// allowed to contain non-convex samples.
    pub fn new_unchecked(height: Height, patch: Patch) -> Self {
        let mode = height.mode();
        SurfaceModel {
            height,
            patch,
            placement: AffineMap3::identity(mode),
        }
    }

    pub fn polynomial(poly: Jet2, patch: Patch) -> Result<Self, FrameError> {
        Self::new(Height::Polynomial(poly), patch)
    }

    /// The image of this surface under `map` (composed after any existing
    /// placement).
    pub fn transformed(&self, map: &AffineMap3) -> Result<Self, FrameError> {
        if map.mode() != self.mode() {
            return Err(FrameError::ModeMismatch);
        }
        Ok(SurfaceModel {
            height: self.height.clone(),
            patch: self.patch,
            placement: map.compose(&self.placement),
        })
    }

    pub fn to_mode(&self, mode: Mode) -> Result<Self, FrameError> {
        Ok(SurfaceModel {
            height: self.height.to_mode(mode)?,
            patch: self.patch,
            placement: self.placement.to_mode(mode).ok_or(FrameError::ModeMismatch)?,
        })
    }

    pub fn height(&self) -> &Height {
        &self.height
    }

    pub fn patch(&self) -> &Patch {
        &self.patch
    }

    pub fn placement(&self) -> &AffineMap3 {
        &self.placement
    }

    pub fn mode(&self) -> Mode {
        self.height.mode()
    }

    /// Samples of the `n × n` grid whose Hessian is not positive definite.
    /// The check runs in float mode, so exact square roots are not needed.
    pub fn convexity_failures(&self, n: usize) -> Vec<([f64; 2], FrameError)> {
        let probe = match self.height.to_mode(Mode::Float) {
            Ok(h) => SurfaceModel::new_unchecked(h, self.patch),
            Err(e) => return alloc::vec![([0.0, 0.0], e)],
        };
        let mut out = Vec::new();
        for p in self.patch.grid(n, n) {
            let res = probe
                .chart_point(p)
                .and_then(|q| probe.height_jet(&q, 2))
                .and_then(|h| check_positive_hessian(&h));
            if let Err(e) = res {
                out.push((p, e));
            }
        }
        out
    }

    pub fn chart_point(&self, p: [f64; 2]) -> Result<[Scalar; 2], FrameError> {
        let mode = self.mode();
        Ok([Scalar::from_f64(mode, p[0])?, Scalar::from_f64(mode, p[1])?])
    }

    /// Taylor jet of the height function around `p`.
    pub fn height_jet(&self, p: &[Scalar; 2], order: usize) -> Result<Jet2, FrameError> {
        let mode = self.mode();
        if p[0].mode() != mode || p[1].mode() != mode {
            return Err(FrameError::ModeMismatch);
        }
        match &self.height {
            Height::Polynomial(poly) => Ok(poly.taylor_shift(p)?.with_order(order)),
            Height::SphereCap { center, radius } => {
                let du = Jet2::variable(0, order, mode)?.add_constant(&(&p[0] - &center[0]))?;
                let dv = Jet2::variable(1, order, mode)?.add_constant(&(&p[1] - &center[1]))?;
                let r2 = Jet2::constant(order, radius * radius);
                let inside = r2.sub(&du.mul(&du)?)?.sub(&dv.mul(&dv)?)?;
                if !inside.constant_term().is_positive() {
                    return Err(FrameError::PatchBounds);
                }
                let root = inside.sqrt()?;
                Ok(root.neg().add_constant(&center[2])?)
            }
        }
    }

    /// World position `r(p + d)` as three jets in the displacement `d`.
    pub fn position_jet(&self, p: &[Scalar; 2], order: usize) -> Result<[Jet2; 3], FrameError> {
        let mode = self.mode();
        let chart = [
            Jet2::variable(0, order, mode)?.add_constant(&p[0])?,
            Jet2::variable(1, order, mode)?.add_constant(&p[1])?,
            self.height_jet(p, order)?,
        ];
        apply_affine_to_jets(&self.placement, &chart)
    }
}

impl Height {
    pub fn mode(&self) -> Mode {
        match self {
            Height::Polynomial(p) => p.mode(),
            Height::SphereCap { radius, .. } => radius.mode(),
        }
    }

    pub fn to_mode(&self, mode: Mode) -> Result<Height, FrameError> {
        Ok(match self {
            Height::Polynomial(p) => Height::Polynomial(p.to_mode(mode)?),
            Height::SphereCap { center, radius } => Height::SphereCap {
                center: [center[0].to_mode(mode)?, center[1].to_mode(mode)?, center[2].to_mode(mode)?],
                radius: radius.to_mode(mode)?,
            },
        })
    }
}

fn apply_affine_to_jets(map: &AffineMap3, v: &[Jet2; 3]) -> Result<[Jet2; 3], FrameError> {
    let l = map.linear();
    let t = map.translation();
    let mut out: [Jet2; 3] = core::array::from_fn(|_| Jet2::zero(v[0].order(), v[0].mode()));
    for i in 0..3 {
        let mut acc = Jet2::constant(v[0].order(), t[i].clone());
        for j in 0..3 {
            acc = acc.add(&v[j].scale(&l[i][j])?)?;
        }
        out[i] = acc;
    }
    Ok(out)
}

fn check_positive_hessian(h: &Jet2) -> Result<(), FrameError> {
    let two = Scalar::from_int(h.mode(), 2);
    let huu = &two * &h.c(2, 0);
    let hvv = &two * &h.c(0, 2);
    let huv = h.c(1, 1);
    let det = &(&huu * &hvv) - &(&huv * &huv);
    if huu.is_positive() && det.is_positive() {
        Ok(())
    } else {
        Err(FrameError::NonConvexPoint)
    }
}

type Mat2 = [[Scalar; 2]; 2];

fn det2(m: &Mat2) -> Scalar {
    &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0])
}

fn inv2(m: &Mat2) -> Option<Mat2> {
    let d = det2(m);
    let inv = d.recip().ok()?;
    Some([
        [&m[1][1] * &inv, -(&m[0][1] * &inv)],
        [-(&m[1][0] * &inv), &m[0][0] * &inv],
    ])
}

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]))
    })
}

/// Applies a 2×2 linear map to the coordinate functions `(x, y)`.
fn linear_subs(m: &Mat2, order: usize, mode: Mode) -> Result<[Jet2; 2], FrameError> {
    let x = Jet2::variable(0, order, mode)?;
    let y = Jet2::variable(1, order, mode)?;
    Ok([
        x.scale(&m[0][0])?.add(&y.scale(&m[0][1])?)?,
        x.scale(&m[1][0])?.add(&y.scale(&m[1][1])?)?,
    ])
}

/// Inverse of the symmetric positive square root of a 2×2 SPD matrix:
/// `sqrt(H) = (H + s I) / t` with `s = sqrt(det H)`, `t = sqrt(tr H + 2 s)`.
fn inv_sqrt_spd(h: &Mat2) -> Result<Mat2, FrameError> {
    let s = det2(h).sqrt()?;
    let t = (&(&h[0][0] + &h[1][1]) + &(&s + &s)).sqrt()?;
    let inv_t = t.recip()?;
    let root = [
        [&(&h[0][0] + &s) * &inv_t, &h[0][1] * &inv_t],
        [&h[1][0] * &inv_t, &(&h[1][1] + &s) * &inv_t],
    ];
    inv2(&root).ok_or(FrameError::Degenerate)
}

/// A rotation of the local `(x, y)` plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    pub cos: Scalar,
    pub sin: Scalar,
}

impl Rotation {
    pub fn from_angle(theta: f64) -> Self {
        Rotation {
            cos: Scalar::Float(Float::cos(theta)),
            sin: Scalar::Float(Float::sin(theta)),
        }
    }

    /// A rotation from a unit vector (exactly unit in rational mode).
    pub fn from_unit(cos: Scalar, sin: Scalar) -> Result<Self, FrameError> {
        if cos.mode() != sin.mode() {
            return Err(FrameError::ModeMismatch);
        }
        let n = &(&cos * &cos) + &(&sin * &sin);
        let ok = match n {
            Scalar::Rational(_) => n == Scalar::one(Mode::Rational),
            Scalar::Float(x) => (x - 1.0).abs() < 1e-12,
        };
        if !ok {
            return Err(FrameError::InvalidRotation);
        }
        Ok(Rotation { cos, sin })
    }

    pub fn identity(mode: Mode) -> Self {
        Rotation {
            cos: Scalar::one(mode),
            sin: Scalar::zero(mode),
        }
    }

    pub fn mode(&self) -> Mode {
        self.cos.mode()
    }

    /// `[[c, −s], [s, c]]`: maps the new `e₁` to `(c, s)`.
    pub fn matrix(&self) -> Mat2 {
        [
            [self.cos.clone(), -&self.sin],
            [self.sin.clone(), self.cos.clone()],
        ]
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        [
            &(&self.cos * &v[0]) - &(&self.sin * &v[1]),
            &(&self.sin * &v[0]) + &(&self.cos * &v[1]),
            v[2].clone(),
        ]
    }

    pub fn apply_inverse(&self, v: &Vec3) -> Vec3 {
        [
            &(&self.cos * &v[0]) + &(&self.sin * &v[1]),
            &(&self.cos * &v[1]) - &(&self.sin * &v[0]),
            v[2].clone(),
        ]
    }

    fn as_affine(&self) -> AffineMap3 {
        let mode = self.mode();
        let z = || Scalar::zero(mode);
        let m: Mat3 = [
            [self.cos.clone(), -&self.sin, z()],
            [self.sin.clone(), self.cos.clone(), z()],
            [z(), z(), Scalar::one(mode)],
        ];
        AffineMap3::new(m, linalg::zero3(mode)).expect("rotation is invertible")
    }
}

/// The normalized jet at a point plus the map from local to world coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeFrame {
    normalized: Jet2,
    world_from_local: AffineMap3,
    /// First-order chart displacement per unit local `(x, y)`.
    chart_from_local: Option<Mat2>,
    base_chart: Option<[Scalar; 2]>,
}

impl BlaschkeFrame {
    /// A frame given directly by its normal-form coefficients, with the
    /// identity as world map. `f4 = [f40, f31, f22, f13, f04]`,
    /// `f5 = [f50, f41, f32, f23, f14, f05]`.
    pub fn from_coefficients(
        a: Scalar,
        b: Scalar,
        f4: [Scalar; 5],
        f5: [Scalar; 6],
    ) -> Result<Self, FrameError> {
        let mode = a.mode();
        let half = Scalar::ratio(mode, 1, 2);
        let three = Scalar::from_int(mode, 3);
        let mut terms: Vec<([u8; 2], Scalar)> = Vec::new();
        terms.push(([2, 0], half.clone()));
        terms.push(([0, 2], half));
        terms.push(([3, 0], a.clone()));
        terms.push(([1, 2], -(&three * &a)));
        terms.push(([0, 3], b.clone()));
        terms.push(([2, 1], -(&three * &b)));
        for (i, c) in f4.into_iter().enumerate() {
            terms.push(([4 - i as u8, i as u8], c));
        }
        for (i, c) in f5.into_iter().enumerate() {
            terms.push(([5 - i as u8, i as u8], c));
        }
        let normalized = Jet2::from_terms(FRAME_ORDER, mode, terms)?;
        Ok(BlaschkeFrame {
            normalized,
            world_from_local: AffineMap3::identity(mode),
            chart_from_local: None,
            base_chart: None,
        })
    }

    /// Wraps an already normalized jet (no checks beyond order).
    pub fn from_jet(normalized: Jet2, world_from_local: AffineMap3) -> Self {
        BlaschkeFrame {
            normalized: normalized.with_order(FRAME_ORDER),
            world_from_local,
            chart_from_local: None,
            base_chart: None,
        }
    }

    pub fn normalized(&self) -> &Jet2 {
        &self.normalized
    }

    pub fn world_from_local(&self) -> &AffineMap3 {
        &self.world_from_local
    }

    pub fn chart_from_local(&self) -> Option<&Mat2> {
        self.chart_from_local.as_ref()
    }

    pub fn base_chart(&self) -> Option<&[Scalar; 2]> {
        self.base_chart.as_ref()
    }

    pub fn mode(&self) -> Mode {
        self.normalized.mode()
    }

    /// Coefficient `f_{i,j}` of `x^i y^j`.
    pub fn f(&self, i: u8, j: u8) -> Scalar {
        self.normalized.c(i, j)
    }

    pub fn a(&self) -> Scalar {
        self.f(3, 0)
    }

    pub fn b(&self) -> Scalar {
        self.f(0, 3)
    }

    /// `[f40, f31, f22, f13, f04]`.
    pub fn f4(&self) -> [Scalar; 5] {
        core::array::from_fn(|i| self.f(4 - i as u8, i as u8))
    }

    pub fn f50(&self) -> Scalar {
        self.f(5, 0)
    }

    pub fn f31(&self) -> Scalar {
        self.f(3, 1)
    }

    /// `det` of the world-from-local linear part (±1 for frames built by
    /// [`normalize_at`]).
    pub fn volume_factor(&self) -> Scalar {
        self.world_from_local.det()
    }

    /// `(3f30 + f12, 3f03 + f21)`.
    pub fn apolarity_residuals(&self) -> [Scalar; 2] {
        let three = Scalar::from_int(self.mode(), 3);
        [
            &(&three * &self.f(3, 0)) + &self.f(1, 2),
            &(&three * &self.f(0, 3)) + &self.f(2, 1),
        ]
    }

    /// Checks the normal-form invariants: no constant or linear part,
    /// quadratic part `½(x² + y²)`, and apolarity.
    pub fn satisfies_normal_form(&self) -> bool {
        let mode = self.mode();
        let half = Scalar::ratio(mode, 1, 2);
        let zero = Scalar::zero(mode);
        let close = |a: &Scalar, b: &Scalar| match mode {
            Mode::Rational => a == b,
            Mode::Float => (a.to_f64() - b.to_f64()).abs() < APOLARITY_TOL,
        };
        close(&self.f(0, 0), &zero)
            && close(&self.f(1, 0), &zero)
            && close(&self.f(0, 1), &zero)
            && close(&self.f(2, 0), &half)
            && close(&self.f(0, 2), &half)
            && close(&self.f(1, 1), &zero)
            && self.apolarity_residuals().iter().all(|r| close(r, &zero))
    }

    pub fn to_mode(&self, mode: Mode) -> Result<Self, FrameError> {
        let conv2 = |m: &Mat2| -> Result<Mat2, FrameError> {
            Ok([
                [m[0][0].to_mode(mode)?, m[0][1].to_mode(mode)?],
                [m[1][0].to_mode(mode)?, m[1][1].to_mode(mode)?],
            ])
        };
        Ok(BlaschkeFrame {
            normalized: self.normalized.to_mode(mode)?,
            world_from_local: self
                .world_from_local
                .to_mode(mode)
                .ok_or(FrameError::ModeMismatch)?,
            chart_from_local: self.chart_from_local.as_ref().map(conv2).transpose()?,
            base_chart: match &self.base_chart {
                Some(p) => Some([p[0].to_mode(mode)?, p[1].to_mode(mode)?]),
                None => None,
            },
        })
    }

    pub fn pull_back<T: AffineObject>(&self, obj: &T) -> T {
        obj.mapped_by(&self.world_from_local)
    }

    pub fn push_forward<T: AffineObject>(&self, obj: &T) -> T {
        obj.mapped_by(&self.world_from_local.inverse())
    }

    /// Chart direction (first order) of the local tangent vector `(ξ, η)`.
    pub fn chart_direction(&self, xi: &Scalar, eta: &Scalar) -> Option<[Scalar; 2]> {
        let m = self.chart_from_local.as_ref()?;
        Some([
            &(&m[0][0] * xi) + &(&m[0][1] * eta),
            &(&m[1][0] * xi) + &(&m[1][1] * eta),
        ])
    }
}

/// Reduces `surface` at chart point `p0` to the normal form.
///
/// The pipeline re-expresses the surface as a graph over its tangent plane
/// (by series reversion), makes the quadratic part `½(x² + y²)` with the
/// inverse symmetric square root of the Hessian, rescales so the world map is
/// unimodular, then shears `x → x + αz`, `y → y + βz` to make the cubic part
/// apolar. In rational mode every root must be exact.
pub fn normalize_at(surface: &SurfaceModel, p0: &[Scalar; 2]) -> Result<BlaschkeFrame, FrameError> {
    let mode = surface.mode();
    let pf = [p0[0].to_f64(), p0[1].to_f64()];
    if !surface.patch().contains(pf) {
        return Err(FrameError::PatchBounds);
    }
    check_positive_hessian(&surface.height_jet(p0, 2)?)?;

    let order = FRAME_ORDER;
    let pos = surface.position_jet(p0, order)?;
    let base: Vec3 = core::array::from_fn(|i| pos[i].constant_term().clone());
    let ru: Vec3 = core::array::from_fn(|i| pos[i].c(1, 0));
    let rv: Vec3 = core::array::from_fn(|i| pos[i].c(0, 1));
    let mut normal = linalg::cross3(&ru, &rv);

    let columns = |n: &Vec3| -> Mat3 {
        core::array::from_fn(|i| [ru[i].clone(), rv[i].clone(), n[i].clone()])
    };
    let frame_inv = linalg::inv3(&columns(&normal)).ok_or(FrameError::Degenerate)?;

    // local coordinates w = L⁻¹ (r − r₀)
    let mut w: [Jet2; 3] = core::array::from_fn(|_| Jet2::zero(order, mode));
    for k in 0..3 {
        let mut acc = Jet2::zero(order, mode);
        for j in 0..3 {
            let disp = pos[j].add_constant(&-&base[j])?;
            acc = acc.add(&disp.scale(&frame_inv[k][j])?)?;
        }
        w[k] = acc;
    }

    // invert (w0, w1)(d) = (x, y) for d(x, y)
    let jac: Mat2 = [
        [w[0].c(1, 0), w[0].c(0, 1)],
        [w[1].c(1, 0), w[1].c(0, 1)],
    ];
    let jac_inv = inv2(&jac).ok_or(FrameError::Degenerate)?;
    let nonlinear: [Jet2; 2] = [
        w[0].sub(&w[0].homogeneous_part(1))?,
        w[1].sub(&w[1].homogeneous_part(1))?,
    ];
    let x = Jet2::variable(0, order, mode)?;
    let y = Jet2::variable(1, order, mode)?;
    let mut d = linear_subs(&jac_inv, order, mode)?;
    for _ in 0..order {
        let r0 = x.sub(&nonlinear[0].compose(&d)?)?;
        let r1 = y.sub(&nonlinear[1].compose(&d)?)?;
        d = [
            r0.scale(&jac_inv[0][0])?.add(&r1.scale(&jac_inv[0][1])?)?,
            r0.scale(&jac_inv[1][0])?.add(&r1.scale(&jac_inv[1][1])?)?,
        ];
    }
    let mut h = w[2].compose(&d)?;

    let two = Scalar::from_int(mode, 2);
    let mut hess: Mat2 = [
        [&two * &h.c(2, 0), h.c(1, 1)],
        [h.c(1, 1), &two * &h.c(0, 2)],
    ];
    if hess[0][0].signum() < 0 {
        // transversal points to the concave side
        h = h.neg();
        normal = linalg::scale3(&normal, &-Scalar::one(mode));
        for row in hess.iter_mut() {
            for c in row.iter_mut() {
                *c = -&*c;
            }
        }
    }
    if !(hess[0][0].is_positive() && det2(&hess).is_positive()) {
        return Err(FrameError::NonConvexPoint);
    }
    let tangent_frame = columns(&normal);

    // quadratic part -> ½(x² + y²), then unimodular rescale x -> s x, z -> s² z
    let s_inv = inv_sqrt_spd(&hess)?;
    let vol = (&linalg::det3(&tangent_frame) * &det2(&s_inv)).abs();
    let scale = vol.nth_root(4)?.recip()?;
    let lin2: Mat2 = core::array::from_fn(|i| core::array::from_fn(|j| &s_inv[i][j] * &scale));
    let z_scale = &scale * &scale;
    let g = h
        .compose(&linear_subs(&lin2, order, mode)?)?
        .scale(&z_scale.recip()?)?;

    // apolarity shear
    let three = Scalar::from_int(mode, 3);
    let minus_half = Scalar::ratio(mode, -1, 2);
    let alpha = &(&(&three * &g.c(3, 0)) + &g.c(1, 2)) * &minus_half;
    let beta = &(&(&three * &g.c(0, 3)) + &g.c(2, 1)) * &minus_half;
    let mut z = Jet2::zero(order, mode);
    for _ in 0..=order {
        let sx = x.add(&z.scale(&alpha)?)?;
        let sy = y.add(&z.scale(&beta)?)?;
        z = g.compose(&[sx, sy])?;
    }

    let zero = || Scalar::zero(mode);
    let block: Mat3 = [
        [lin2[0][0].clone(), lin2[0][1].clone(), zero()],
        [lin2[1][0].clone(), lin2[1][1].clone(), zero()],
        [zero(), zero(), z_scale],
    ];
    let shear: Mat3 = [
        [Scalar::one(mode), zero(), alpha],
        [zero(), Scalar::one(mode), beta],
        [zero(), zero(), Scalar::one(mode)],
    ];
    let linear = linalg::mat_mul(&linalg::mat_mul(&tangent_frame, &block), &shear);
    let world_from_local = AffineMap3::new(linear, base).ok_or(FrameError::Degenerate)?;

    let frame = BlaschkeFrame {
        normalized: z,
        world_from_local,
        chart_from_local: Some(mul2(&jac_inv, &lin2)),
        base_chart: Some(p0.clone()),
    };
    if mode == Mode::Float && !frame.satisfies_normal_form() {
        return Err(FrameError::Degenerate);
    }
    Ok(frame)
}

/// Rotates the local `(x, y)` axes so that the new `e₁` is the old
/// `(cos, sin)`. The quadratic part and apolarity are preserved.
pub fn rotate_frame(frame: &BlaschkeFrame, rot: &Rotation) -> Result<BlaschkeFrame, FrameError> {
    if rot.mode() != frame.mode() {
        return Err(FrameError::ModeMismatch);
    }
    let m = rot.matrix();
    let subs = linear_subs(&m, FRAME_ORDER, frame.mode())?;
    Ok(BlaschkeFrame {
        normalized: frame.normalized.compose(&subs)?,
        world_from_local: frame.world_from_local.compose(&rot.as_affine()),
        chart_from_local: frame.chart_from_local.as_ref().map(|c| mul2(c, &m)),
        base_chart: frame.base_chart.clone(),
    })
}

/// Objects that transform under affine maps of space.
pub trait AffineObject {
    fn mapped_by(&self, map: &AffineMap3) -> Self;
}

/// A point of space.
#[derive(Clone, Debug, PartialEq)]
pub struct Point3(pub Vec3);

/// A free vector (direction) of space.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction3(pub Vec3);

impl AffineObject for Point3 {
    fn mapped_by(&self, map: &AffineMap3) -> Self {
        Point3(map.apply_point(&self.0))
    }
}

impl AffineObject for Direction3 {
    fn mapped_by(&self, map: &AffineMap3) -> Self {
        Direction3(map.apply_vector(&self.0))
    }
}

impl AffineObject for Plane3 {
    fn mapped_by(&self, map: &AffineMap3) -> Self {
        // n·x = d with x = L⁻¹(X − t)  =>  (L⁻ᵀ n)·X = d + n·L⁻¹t
        let inv_t = linalg::transpose(map.inverse_linear());
        let normal = linalg::mat_vec(&inv_t, self.normal());
        let shift = linalg::dot3(self.normal(), &map.invert_vector(map.translation()));
        Plane3::new(normal, self.offset() + &shift).expect("invertible map keeps the normal nonzero")
    }
}

impl AffineObject for Quadric3 {
    fn mapped_by(&self, map: &AffineMap3) -> Self {
        // X̂_local = H⁻¹ X̂_world  =>  Q_world = H⁻ᵀ Q H⁻¹
        let hinv = map.inverse().homogeneous();
        let q = self.matrix();
        let mode = map.mode();
        let mut tmp: [[Scalar; 4]; 4] = core::array::from_fn(|_| core::array::from_fn(|_| Scalar::zero(mode)));
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = Scalar::zero(mode);
                for k in 0..4 {
                    acc = &acc + &(&q[i][k] * &hinv[k][j]);
                }
                tmp[i][j] = acc;
            }
        }
        let mut out = tmp.clone();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = Scalar::zero(mode);
                for k in 0..4 {
                    acc = &acc + &(&hinv[k][i] * &tmp[k][j]);
                }
                out[i][j] = acc;
            }
        }
        Quadric3::from_matrix(out)
    }
}

impl AffineObject for Center {
    fn mapped_by(&self, map: &AffineMap3) -> Self {
        match self {
            Center::Finite(p) => Center::Finite(map.apply_point(p)),
            Center::AtInfinity(d) => Center::AtInfinity(map.apply_vector(d)),
        }
    }
}
