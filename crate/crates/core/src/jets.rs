//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A [`Jet<NV>`] stores every coefficient of total degree `<= order` in a
//! dense table ordered by total degree, then lexicographically with the
//! first variable's exponent descending. All products are truncated at
//! `order`, so the table never grows.

use alloc::vec;
use alloc::vec::Vec;

use crate::scalar::{Mode, Scalar, ScalarError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("jet orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("jet modes differ: {0:?} vs {1:?}")]
    ModeMismatch(Mode, Mode),
    #[error("substitution has a nonzero constant term")]
    NonzeroConstant,
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
    #[error("series needs a positive constant term")]
    NonPositiveConstant,
}

pub type Exponent<const NV: usize> = [u8; NV];

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Number of monomials in `nv` variables of total degree `<= order`.
pub fn table_len(nv: usize, order: usize) -> usize {
    binom(order + nv, nv)
}

/// Position of `e` in the graded table.
pub fn index_of<const NV: usize>(e: &Exponent<NV>) -> usize {
    let d: usize = e.iter().map(|&x| x as usize).sum();
    if NV == 0 {
        return 0;
    }
    let mut idx = if d == 0 { 0 } else { table_len(NV, d - 1) };
    let mut rem = d;
    for k in 0..NV.saturating_sub(1) {
        let tail = NV - k - 1;
        // monomials with a larger exponent in slot k come first
        for v in (e[k] as usize + 1)..=rem {
            idx += binom(rem - v + tail - 1, tail - 1);
        }
        rem -= e[k] as usize;
    }
    idx
}

/// All exponents of total degree `<= order`, in table order.
pub fn monomials<const NV: usize>(order: usize) -> Vec<Exponent<NV>> {
    let mut out = Vec::with_capacity(table_len(NV, order));
    for d in 0..=order {
        let mut cur = [0u8; NV];
        push_degree(&mut out, &mut cur, 0, d);
    }
    out
}

fn push_degree<const NV: usize>(
    out: &mut Vec<Exponent<NV>>,
    cur: &mut Exponent<NV>,
    slot: usize,
    rem: usize,
) {
    if slot + 1 == NV {
        cur[slot] = rem as u8;
        out.push(*cur);
        return;
    }
    for v in (0..=rem).rev() {
        cur[slot] = v as u8;
        push_degree(out, cur, slot + 1, rem - v);
    }
    cur[slot] = 0;
}

fn degree<const NV: usize>(e: &Exponent<NV>) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<const NV: usize> {
    order: usize,
    mode: Mode,
    coeffs: Vec<Scalar>,
}

/// Bivariate jet of a height function in `(x, y)`.
pub type Jet2 = Jet<2>;
/// Jet in the pair variables `(u1, v1, u2, v2)`.
pub type Jet4 = Jet<4>;

impl<const NV: usize> Jet<NV> {
    pub fn zero(order: usize, mode: Mode) -> Self {
        Jet {
            order,
            mode,
            coeffs: vec![Scalar::zero(mode); table_len(NV, order)],
        }
    }

    pub fn constant(order: usize, c: Scalar) -> Self {
        let mut j = Self::zero(order, c.mode());
        j.coeffs[0] = c;
        j
    }

    /// The coordinate function of variable `k`.
    pub fn variable(k: usize, order: usize, mode: Mode) -> Result<Self, JetError> {
        if k >= NV {
            return Err(JetError::UnknownVariable(k));
        }
        let mut j = Self::zero(order, mode);
        if order >= 1 {
            let mut e = [0u8; NV];
            e[k] = 1;
            j.coeffs[index_of(&e)] = Scalar::one(mode);
        }
        Ok(j)
    }

    /// Builds a jet from `(exponent, coefficient)` pairs; terms above `order`
    /// are dropped and repeated exponents accumulate.
    pub fn from_terms<I>(order: usize, mode: Mode, terms: I) -> Result<Self, JetError>
    where
        I: IntoIterator<Item = (Exponent<NV>, Scalar)>,
    {
        let mut j = Self::zero(order, mode);
        for (e, c) in terms {
            if c.mode() != mode {
                return Err(JetError::ModeMismatch(mode, c.mode()));
            }
            if degree(&e) <= order {
                let i = index_of(&e);
                j.coeffs[i] = &j.coeffs[i] + &c;
            }
        }
        Ok(j)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Coefficient of `e`; zero above the truncation order.
    pub fn coeff(&self, e: Exponent<NV>) -> Scalar {
        if degree(&e) > self.order {
            Scalar::zero(self.mode)
        } else {
            self.coeffs[index_of(&e)].clone()
        }
    }

    pub fn set_coeff(&mut self, e: Exponent<NV>, c: Scalar) -> Result<(), JetError> {
        if c.mode() != self.mode {
            return Err(JetError::ModeMismatch(self.mode, c.mode()));
        }
        if degree(&e) <= self.order {
            self.coeffs[index_of(&e)] = c;
        }
        Ok(())
    }

    pub fn constant_term(&self) -> &Scalar {
        &self.coeffs[0]
    }

    /// Nonzero `(exponent, coefficient)` pairs in table order.
    pub fn terms(&self) -> impl Iterator<Item = (Exponent<NV>, &Scalar)> {
        monomials::<NV>(self.order)
            .into_iter()
            .zip(self.coeffs.iter())
            .filter(|(_, c)| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    fn compatible(&self, other: &Self) -> Result<(), JetError> {
        if self.mode != other.mode {
            return Err(JetError::ModeMismatch(self.mode, other.mode));
        }
        if self.order != other.order {
            return Err(JetError::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, JetError> {
        self.compatible(other)?;
        Ok(Jet {
            order: self.order,
            mode: self.mode,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, JetError> {
        self.compatible(other)?;
        Ok(Jet {
            order: self.order,
            mode: self.mode,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn neg(&self) -> Self {
        Jet {
            order: self.order,
            mode: self.mode,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> Result<Self, JetError> {
        if s.mode() != self.mode {
            return Err(JetError::ModeMismatch(self.mode, s.mode()));
        }
        Ok(Jet {
            order: self.order,
            mode: self.mode,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        })
    }

    pub fn add_constant(&self, s: &Scalar) -> Result<Self, JetError> {
        if s.mode() != self.mode {
            return Err(JetError::ModeMismatch(self.mode, s.mode()));
        }
        let mut out = self.clone();
        out.coeffs[0] = &out.coeffs[0] + s;
        Ok(out)
    }

    /// Truncated product.
    pub fn mul(&self, other: &Self) -> Result<Self, JetError> {
        self.compatible(other)?;
        let mons = monomials::<NV>(self.order);
        let mut out = Self::zero(self.order, self.mode);
        for (i, ei) in mons.iter().enumerate() {
            let a = &self.coeffs[i];
            if a.is_zero() {
                continue;
            }
            let di = degree(ei);
            for (j, ej) in mons.iter().enumerate() {
                if di + degree(ej) > self.order {
                    // table is graded, later entries only get larger
                    break;
                }
                let b = &other.coeffs[j];
                if b.is_zero() {
                    continue;
                }
                let mut e = [0u8; NV];
                for k in 0..NV {
                    e[k] = ei[k] + ej[k];
                }
                let t = index_of(&e);
                out.coeffs[t] = &out.coeffs[t] + &(a * b);
            }
        }
        Ok(out)
    }

    pub fn powi(&self, n: u32) -> Result<Self, JetError> {
        let mut out = Self::constant(self.order, Scalar::one(self.mode));
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Formal partial derivative in variable `var`. The order stays the same;
    /// the top-degree slots become zero.
    pub fn partial(&self, var: usize) -> Result<Self, JetError> {
        if var >= NV {
            return Err(JetError::UnknownVariable(var));
        }
        let mut out = Self::zero(self.order, self.mode);
        for (e, c) in monomials::<NV>(self.order).into_iter().zip(&self.coeffs) {
            if e[var] == 0 || c.is_zero() {
                continue;
            }
            let mut d = e;
            d[var] -= 1;
            let k = Scalar::from_int(self.mode, e[var] as i64);
            out.coeffs[index_of(&d)] = c * &k;
        }
        Ok(out)
    }

    /// Keeps only the homogeneous part of degree `d`.
    pub fn homogeneous_part(&self, d: usize) -> Self {
        let mut out = Self::zero(self.order, self.mode);
        for (i, e) in monomials::<NV>(self.order).iter().enumerate() {
            if degree(e) == d {
                out.coeffs[i] = self.coeffs[i].clone();
            }
        }
        out
    }

    /// Re-tabulates at a new order: drops terms above it, pads with zeros.
    pub fn with_order(&self, order: usize) -> Self {
        let mut out = Self::zero(order, self.mode);
        let keep = order.min(self.order);
        let n = table_len(NV, keep);
        out.coeffs[..n].clone_from_slice(&self.coeffs[..n]);
        out
    }

    /// Largest absolute coefficient among degrees `<= d`, as `f64`.
    pub fn max_abs_up_to(&self, d: usize) -> f64 {
        let n = table_len(NV, d.min(self.order));
        self.coeffs[..n]
            .iter()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn to_mode(&self, mode: Mode) -> Result<Self, JetError> {
        Ok(Jet {
            order: self.order,
            mode,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.to_mode(mode))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Evaluates the truncated polynomial at a point.
    pub fn eval(&self, at: &[Scalar; NV]) -> Result<Scalar, JetError> {
        for a in at {
            if a.mode() != self.mode {
                return Err(JetError::ModeMismatch(self.mode, a.mode()));
            }
        }
        let mut acc = Scalar::zero(self.mode);
        for (e, c) in monomials::<NV>(self.order).into_iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let mut t = c.clone();
            for k in 0..NV {
                t = &t * &at[k].pow(e[k] as u32);
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Polynomial evaluation with jet arguments (constants allowed). The
    /// result carries the arguments' order.
    pub fn substitute<const M: usize>(&self, args: &[Jet<M>; NV]) -> Result<Jet<M>, JetError> {
        let order = args[0].order;
        let mode = args[0].mode;
        for a in args.iter() {
            if a.order != order {
                return Err(JetError::OrderMismatch(order, a.order));
            }
            if a.mode != mode {
                return Err(JetError::ModeMismatch(mode, a.mode));
            }
        }
        if mode != self.mode {
            return Err(JetError::ModeMismatch(self.mode, mode));
        }
        // powers[k][p] = args[k]^p
        let mut powers: Vec<Vec<Jet<M>>> = Vec::with_capacity(NV);
        for a in args.iter() {
            let mut row = Vec::with_capacity(self.order + 1);
            row.push(Jet::constant(order, Scalar::one(mode)));
            for p in 1..=self.order {
                let next = row[p - 1].mul(a)?;
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = Jet::<M>::zero(order, mode);
        for (e, c) in monomials::<NV>(self.order).into_iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let mut term = Jet::constant(order, c.clone());
            for k in 0..NV {
                if e[k] > 0 {
                    term = term.mul(&powers[k][e[k] as usize])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// `self(subs)`, truncated. Every substitution must vanish at the origin
    /// so that truncation commutes with composition.
    pub fn compose<const M: usize>(&self, subs: &[Jet<M>; NV]) -> Result<Jet<M>, JetError> {
        if subs.iter().any(|s| !s.constant_term().is_zero()) {
            return Err(JetError::NonzeroConstant);
        }
        self.substitute(subs)
    }

    /// Re-expands the polynomial around `center`, truncating at `order`.
    pub fn taylor_shift(&self, center: &[Scalar; NV]) -> Result<Self, JetError> {
        let mut args: [Jet<NV>; NV] = core::array::from_fn(|_| Jet::zero(self.order, self.mode));
        for k in 0..NV {
            args[k] = Jet::variable(k, self.order, self.mode)?.add_constant(&center[k])?;
        }
        self.substitute(&args)
    }

    /// Square root as a series around the (positive) constant term.
    pub fn sqrt(&self) -> Result<Self, JetError> {
        let c = self.constant_term().clone();
        if !c.is_positive() {
            return Err(JetError::NonPositiveConstant);
        }
        let root = c.sqrt()?;
        // sqrt(c + s) = root * sum_k binom(1/2, k) (s/c)^k
        let s = self.add_constant(&-&c)?.scale(&c.recip()?)?;
        let mut out = Self::zero(self.order, self.mode);
        let mut pow = Self::constant(self.order, Scalar::one(self.mode));
        let mut coeff = Scalar::one(self.mode);
        let half = Scalar::ratio(self.mode, 1, 2);
        for k in 0..=self.order {
            out = out.add(&pow.scale(&coeff)?)?;
            pow = pow.mul(&s)?;
            // binom(1/2, k+1) = binom(1/2, k) * (1/2 - k) / (k + 1)
            let kk = Scalar::from_int(self.mode, k as i64);
            let next = Scalar::from_int(self.mode, k as i64 + 1);
            coeff = &(&coeff * &(&half - &kk)) / &next;
        }
        out.scale(&root)
    }
}

impl Jet2 {
    /// Coefficient of `x^i y^j`.
    pub fn c(&self, i: u8, j: u8) -> Scalar {
        self.coeff([i, j])
    }

    /// Lifts a jet in `(x, y)` into four variables by sending `x`, `y` to the
    /// variables `slot` and `slot + 1`, at `order`.
    pub fn embed4(&self, slot: usize, order: usize) -> Result<Jet4, JetError> {
        let x = Jet4::variable(slot, order, self.mode)?;
        let y = Jet4::variable(slot + 1, order, self.mode)?;
        self.with_order(self.order.max(order)).compose(&[x, y])
    }
}

/// An expression affine-linear in `X = (x, y, z)` whose coefficients are
/// jets: `cx*x + cy*y + cz*z + c1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFormJet {
    pub cx: Jet4,
    pub cy: Jet4,
    pub cz: Jet4,
    pub c1: Jet4,
}

impl LinearFormJet {
    pub fn parts(&self) -> [&Jet4; 4] {
        [&self.cx, &self.cy, &self.cz, &self.c1]
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&Jet4, &Jet4) -> Result<Jet4, JetError>,
    ) -> Result<Self, JetError> {
        Ok(LinearFormJet {
            cx: f(&self.cx, &other.cx)?,
            cy: f(&self.cy, &other.cy)?,
            cz: f(&self.cz, &other.cz)?,
            c1: f(&self.c1, &other.c1)?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, JetError> {
        self.zip_with(other, Jet4::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, JetError> {
        self.zip_with(other, Jet4::sub)
    }

    pub fn scale(&self, s: &Scalar) -> Result<Self, JetError> {
        Ok(LinearFormJet {
            cx: self.cx.scale(s)?,
            cy: self.cy.scale(s)?,
            cz: self.cz.scale(s)?,
            c1: self.c1.scale(s)?,
        })
    }

    pub fn partial(&self, var: usize) -> Result<Self, JetError> {
        Ok(LinearFormJet {
            cx: self.cx.partial(var)?,
            cy: self.cy.partial(var)?,
            cz: self.cz.partial(var)?,
            c1: self.c1.partial(var)?,
        })
    }

    pub fn homogeneous_part(&self, d: usize) -> Self {
        LinearFormJet {
            cx: self.cx.homogeneous_part(d),
            cy: self.cy.homogeneous_part(d),
            cz: self.cz.homogeneous_part(d),
            c1: self.c1.homogeneous_part(d),
        }
    }

    /// Largest |coefficient| of degree `<= d` across the four parts.
    pub fn max_abs_up_to(&self, d: usize) -> f64 {
        self.parts()
            .iter()
            .map(|j| j.max_abs_up_to(d))
            .fold(0.0, f64::max)
    }

    /// The constant (degree 0) terms: `(covector, constant)`.
    pub fn value(&self) -> ([Scalar; 3], Scalar) {
        (
            [
                self.cx.constant_term().clone(),
                self.cy.constant_term().clone(),
                self.cz.constant_term().clone(),
            ],
            self.c1.constant_term().clone(),
        )
    }
}
