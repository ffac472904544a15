use crate::error::Result;

/// Something a word can be evaluated in: a group, a matrix group, or the
/// unitary group of an algebra.
pub trait Carrier: Sized + Clone {
    /// The unit of the carrier this value lives in.
    fn unit_like(&self) -> Self;

    fn try_mul(&self, rhs: &Self) -> Result<Self>;

    fn try_inverse(&self) -> Result<Self>;

    /// `self^e` by repeated squaring; negative exponents invert first.
    fn try_pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.try_inverse()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc: Option<Self> = None;
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.try_mul(&sq)?,
                });
            }
            k >>= 1;
            if k > 0 {
                sq = sq.try_mul(&sq)?;
            }
        }
        Ok(acc.unwrap_or_else(|| self.unit_like()))
    }
}

/// A carrier with decidable equality to the unit.
pub trait GroupCarrier: Carrier {
    fn is_unit(&self) -> bool;
}
