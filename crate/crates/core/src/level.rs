//! Decibel levels with an explicit "no response" value.
//!
//! Received intensities are carried in dB, but a zero linear intensity has no
//! finite dB value. [`Level::NoResponse`] stands in for it: it absorbs
//! addition (any gain added to nothing is still nothing) and contributes zero
//! power to power sums.

use std::fmt;
use std::ops::Add;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Level {
    Db(f64),
    NoResponse,
}

impl Level {
    pub const ZERO_DB: Level = Level::Db(0.0);

    /// Wraps a dB value; non-finite or NaN values collapse to `NoResponse`.
    pub fn from_db(db: f64) -> Self {
        if db.is_finite() {
            Level::Db(db)
        } else {
            Level::NoResponse
        }
    }

    /// Converts a linear power ratio. Zero (and anything non-positive) is `NoResponse`.
    pub fn from_linear(power: f64) -> Self {
        if power > 0.0 && power.is_finite() {
            Level::Db(10.0 * power.log10())
        } else {
            Level::NoResponse
        }
    }

    pub fn to_linear(self) -> f64 {
        match self {
            Level::Db(db) => 10f64.powf(db / 10.0),
            Level::NoResponse => 0.0,
        }
    }

    pub fn db(self) -> Option<f64> {
        match self {
            Level::Db(db) => Some(db),
            Level::NoResponse => None,
        }
    }

    pub fn is_response(self) -> bool {
        matches!(self, Level::Db(_))
    }

    /// `10 log10(sum 10^(L/10))`, with `NoResponse` terms contributing nothing.
    pub fn power_sum<I: IntoIterator<Item = Level>>(levels: I) -> Level {
        Level::from_linear(levels.into_iter().map(Level::to_linear).sum())
    }

    /// Sortable key treating `NoResponse` as -inf.
    pub fn total_cmp_key(self) -> f64 {
        self.db().unwrap_or(f64::NEG_INFINITY)
    }
}

impl Add for Level {
    type Output = Level;

    fn add(self, rhs: Level) -> Level {
        match (self, rhs) {
            (Level::Db(a), Level::Db(b)) => Level::from_db(a + b),
            _ => Level::NoResponse,
        }
    }
}

impl Add<f64> for Level {
    type Output = Level;

    fn add(self, rhs: f64) -> Level {
        self + Level::from_db(rhs)
    }
}

/// Serialises as the dB value or the literal `null`.
impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match (self, f.precision()) {
            (Level::Db(db), Some(p)) => format!("{db:.p$}"),
            (Level::Db(db), None) => db.to_string(),
            (Level::NoResponse, _) => "null".to_string(),
        };
        match f.width() {
            Some(w) => write!(f, "{s:>w$}"),
            None => f.write_str(&s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_response_absorbs_addition() {
        assert_eq!(Level::NoResponse + 3.0, Level::NoResponse);
        assert_eq!(Level::Db(1.0) + Level::NoResponse, Level::NoResponse);
        assert_eq!(Level::Db(1.0) + 2.0, Level::Db(3.0));
    }

    #[test]
    fn power_sum_of_equal_levels_adds_three_db() {
        let total = Level::power_sum([Level::Db(-50.0), Level::Db(-50.0), Level::NoResponse]);
        let expected = -50.0 + 10.0 * 2f64.log10();
        assert!((total.db().unwrap() - expected).abs() < 1e-12);
        assert!((total.db().unwrap() - (-46.99)).abs() < 5e-3);
    }

    #[test]
    fn power_sum_of_nothing_is_no_response() {
        assert_eq!(Level::power_sum([Level::NoResponse; 3]), Level::NoResponse);
        assert_eq!(Level::power_sum(std::iter::empty()), Level::NoResponse);
    }

    #[test]
    fn linear_round_trip_and_display() {
        assert_eq!(Level::from_linear(0.0), Level::NoResponse);
        assert_eq!(Level::from_db(f64::NEG_INFINITY), Level::NoResponse);
        assert!((Level::from_linear(100.0).db().unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(format!("{}", Level::NoResponse), "null");
        assert_eq!(format!("{:.2}", Level::Db(-2.04167)), "-2.04");
        assert_eq!(
            format!("{:7.1}|{:6}", Level::Db(-2.04167), Level::NoResponse),
            "   -2.0|  null"
        );
    }
}
