//! Small dense linear algebra over [`Scalar`]: exact in rational mode.

use alloc::vec::Vec;

use crate::scalar::{Mode, Scalar};

pub type Vec3 = [Scalar; 3];
pub type Mat3 = [[Scalar; 3]; 3];

pub fn zero3(mode: Mode) -> Vec3 {
    core::array::from_fn(|_| Scalar::zero(mode))
}

pub fn identity3(mode: Mode) -> Mat3 {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            if i == j {
                Scalar::one(mode)
            } else {
                Scalar::zero(mode)
            }
        })
    })
}

pub fn dot3(a: &Vec3, b: &Vec3) -> Scalar {
    &(&(&a[0] * &b[0]) + &(&a[1] * &b[1])) + &(&a[2] * &b[2])
}

pub fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
        &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
        &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
    ]
}

pub fn add3(a: &Vec3, b: &Vec3) -> Vec3 {
    core::array::from_fn(|i| &a[i] + &b[i])
}

pub fn sub3(a: &Vec3, b: &Vec3) -> Vec3 {
    core::array::from_fn(|i| &a[i] - &b[i])
}

pub fn scale3(a: &Vec3, s: &Scalar) -> Vec3 {
    core::array::from_fn(|i| &a[i] * s)
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    core::array::from_fn(|i| dot3(&m[i], v))
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let mut acc = Scalar::zero(a[0][0].mode());
            for k in 0..3 {
                acc = &acc + &(&a[i][k] * &b[k][j]);
            }
            acc
        })
    })
}

pub fn transpose(m: &Mat3) -> Mat3 {
    core::array::from_fn(|i| core::array::from_fn(|j| m[j][i].clone()))
}

pub fn det3(m: &Mat3) -> Scalar {
    dot3(&m[0], &cross3(&m[1], &m[2]))
}

/// Inverse via the adjugate; `None` when singular.
pub fn inv3(m: &Mat3) -> Option<Mat3> {
    let d = det3(m);
    if d.is_zero() {
        return None;
    }
    let inv_d = d.recip().ok()?;
    // rows of the inverse are the cross products of columns
    let c0: Vec3 = core::array::from_fn(|i| m[i][0].clone());
    let c1: Vec3 = core::array::from_fn(|i| m[i][1].clone());
    let c2: Vec3 = core::array::from_fn(|i| m[i][2].clone());
    let r0 = scale3(&cross3(&c1, &c2), &inv_d);
    let r1 = scale3(&cross3(&c2, &c0), &inv_d);
    let r2 = scale3(&cross3(&c0, &c1), &inv_d);
    Some([r0, r1, r2])
}

pub fn max_abs(v: &[Scalar]) -> f64 {
    v.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}

pub fn to_f64_3(v: &Vec3) -> [f64; 3] {
    core::array::from_fn(|i| v[i].to_f64())
}

/// Determinant of a square matrix by Gaussian elimination. Rational mode
/// pivots on the first nonzero entry; float mode uses partial pivoting.
pub fn det(rows: &[Vec<Scalar>]) -> Scalar {
    let n = rows.len();
    let mode = rows[0][0].mode();
    let mut a: Vec<Vec<Scalar>> = rows.to_vec();
    let mut det = Scalar::one(mode);
    for col in 0..n {
        let pivot = match mode {
            Mode::Rational => (col..n).find(|&r| !a[r][col].is_zero()),
            Mode::Float => (col..n)
                .filter(|&r| !a[r][col].is_zero())
                .max_by(|&r, &s| {
                    a[r][col]
                        .to_f64()
                        .abs()
                        .partial_cmp(&a[s][col].to_f64().abs())
                        .unwrap_or(core::cmp::Ordering::Equal)
                }),
        };
        let Some(p) = pivot else {
            return Scalar::zero(mode);
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let piv = a[col][col].clone();
        det = &det * &piv;
        let inv = piv.recip().expect("nonzero pivot");
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            for c in col..n {
                let t = &factor * &a[col][c];
                a[r][c] = &a[r][c] - &t;
            }
        }
    }
    det
}

/// Rank by elimination: exact in rational mode, pivots below
/// `tol · max|entry|` count as zero in float mode.
pub fn rank(rows: &[Vec<Scalar>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mode = rows[0][0].mode();
    let scale = rows.iter().flat_map(|r| r.iter()).map(|x| x.to_f64().abs()).fold(0.0, f64::max);
    let mut a: Vec<Vec<Scalar>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == a.len() {
            break;
        }
        let pivot = (rank..a.len())
            .filter(|&r| match mode {
                Mode::Rational => !a[r][col].is_zero(),
                Mode::Float => a[r][col].to_f64().abs() > tol * scale,
            })
            .max_by(|&r, &s| {
                a[r][col]
                    .to_f64()
                    .abs()
                    .partial_cmp(&a[s][col].to_f64().abs())
                    .unwrap_or(core::cmp::Ordering::Equal)
            });
        let Some(p) = pivot else { continue };
        a.swap(p, rank);
        let inv = a[rank][col].recip().expect("nonzero pivot");
        for r in (rank + 1)..a.len() {
            let factor = &a[r][col] * &inv;
            for c in col..ncols {
                let t = &factor * &a[rank][c];
                a[r][c] = &a[r][c] - &t;
            }
        }
        rank += 1;
    }
    rank
}

/// An invertible affine map `X -> linear * X + translation` with its inverse
/// cached.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap3 {
    linear: Mat3,
    translation: Vec3,
    inverse: Mat3,
}

impl AffineMap3 {
    pub fn new(linear: Mat3, translation: Vec3) -> Option<Self> {
        let inverse = inv3(&linear)?;
        Some(AffineMap3 {
            linear,
            translation,
            inverse,
        })
    }

    pub fn identity(mode: Mode) -> Self {
        AffineMap3 {
            linear: identity3(mode),
            translation: zero3(mode),
            inverse: identity3(mode),
        }
    }

    pub fn linear(&self) -> &Mat3 {
        &self.linear
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn inverse_linear(&self) -> &Mat3 {
        &self.inverse
    }

    pub fn mode(&self) -> Mode {
        self.linear[0][0].mode()
    }

    pub fn det(&self) -> Scalar {
        det3(&self.linear)
    }

    pub fn apply_point(&self, p: &Vec3) -> Vec3 {
        add3(&mat_vec(&self.linear, p), &self.translation)
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        mat_vec(&self.linear, v)
    }

    pub fn invert_point(&self, p: &Vec3) -> Vec3 {
        mat_vec(&self.inverse, &sub3(p, &self.translation))
    }

    pub fn invert_vector(&self, v: &Vec3) -> Vec3 {
        mat_vec(&self.inverse, v)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap3) -> AffineMap3 {
        AffineMap3 {
            linear: mat_mul(&self.linear, &other.linear),
            translation: self.apply_point(&other.translation),
            inverse: mat_mul(&other.inverse, &self.inverse),
        }
    }

    pub fn inverse(&self) -> AffineMap3 {
        AffineMap3 {
            linear: self.inverse.clone(),
            translation: scale3(
                &mat_vec(&self.inverse, &self.translation),
                &-Scalar::one(self.mode()),
            ),
            inverse: self.linear.clone(),
        }
    }

    /// Homogeneous 4x4 matrix `[[L, t], [0, 1]]`.
    pub fn homogeneous(&self) -> [[Scalar; 4]; 4] {
        let mode = self.mode();
        core::array::from_fn(|i| {
            core::array::from_fn(|j| match (i, j) {
                (3, 3) => Scalar::one(mode),
                (3, _) => Scalar::zero(mode),
                (_, 3) => self.translation[i].clone(),
                _ => self.linear[i][j].clone(),
            })
        })
    }

    pub fn to_mode(&self, mode: Mode) -> Option<AffineMap3> {
        let conv = |m: &Mat3| -> Option<Mat3> {
            let mut out = identity3(mode);
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] = m[i][j].to_mode(mode).ok()?;
                }
            }
            Some(out)
        };
        let mut t = zero3(mode);
        for i in 0..3 {
            t[i] = self.translation[i].to_mode(mode).ok()?;
        }
        Some(AffineMap3 {
            linear: conv(&self.linear)?,
            translation: t,
            inverse: conv(&self.inverse)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn r(n: i64) -> Scalar {
        Scalar::from_int(Mode::Rational, n)
    }

    #[test]
    fn inverse_and_det() {
        let m = [[r(2), r(1), r(0)], [r(0), r(1), r(3)], [r(1), r(0), r(1)]];
        let inv = inv3(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity3(Mode::Rational));
        assert_eq!(det3(&m), r(5));
        let rows: Vec<Vec<Scalar>> = m.iter().map(|row| row.to_vec()).collect();
        assert_eq!(det(&rows), r(5));
        let singular = vec![vec![r(1), r(2)], vec![r(2), r(4)]];
        assert!(det(&singular).is_zero());
        assert_eq!(rank(&singular, 0.0), 1);
        assert_eq!(rank(&rows, 0.0), 3);
    }

    #[test]
    fn affine_round_trip() {
        let m = [[r(2), r(1), r(0)], [r(0), r(1), r(3)], [r(1), r(0), r(1)]];
        let a = AffineMap3::new(m, [r(1), r(-2), r(5)]).unwrap();
        let p = [r(3), r(7), r(-1)];
        assert_eq!(a.invert_point(&a.apply_point(&p)), p);
        let id = a.compose(&a.inverse());
        assert_eq!(id.apply_point(&p), p);
    }
}
