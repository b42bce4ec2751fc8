use std::fmt;
use std::io::Write;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    StrongType,
    WeakType,
    StrongPp,
    Wiener,
    Stein,
    NormLower,
    NormUpper,
    Lebesgue,
    Domination,
}

impl TheoremId {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::StrongType => "strong_type",
            TheoremId::WeakType => "weak_type",
            TheoremId::StrongPp => "strong_pp",
            TheoremId::Wiener => "wiener",
            TheoremId::Stein => "stein",
            TheoremId::NormLower => "norm_lower",
            TheoremId::NormUpper => "norm_upper",
            TheoremId::Lebesgue => "lebesgue",
            TheoremId::Domination => "domination",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One inequality trial: `lhs ≤ rhs`, where `rhs` already includes
/// `constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRecord {
    pub theorem: TheoremId,
    pub ifs: String,
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    /// `rhs − lhs`
    pub margin: f64,
    /// Largest `lhs / rhs` among this record and the ones before it in the
    /// same suite.
    pub worst_ratio: f64,
}

/// Relative tolerance applied to every inequality.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

impl VerificationRecord {
    pub fn new(
        theorem: TheoremId,
        ifs: &str,
        rho: Option<f64>,
        p: Option<f64>,
        seed: u64,
        lhs: f64,
        rhs: f64,
        constant: f64,
    ) -> Self {
        VerificationRecord {
            theorem,
            ifs: ifs.to_string(),
            rho,
            p,
            seed,
            lhs,
            rhs,
            constant,
            margin: rhs - lhs,
            worst_ratio: ratio(lhs, rhs),
        }
    }

    pub fn ratio(&self) -> f64 {
        ratio(self.lhs, self.rhs)
    }

    pub fn violates(&self, rel_tol: f64) -> bool {
        self.margin < -rel_tol * self.rhs.abs().max(1.0)
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs <= 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Fills `worst_ratio` as a running maximum in record order.
pub fn accumulate_worst(records: &mut [VerificationRecord]) {
    let mut worst = f64::NEG_INFINITY;
    for r in records.iter_mut() {
        worst = worst.max(r.ratio());
        r.worst_ratio = worst;
    }
}

pub fn violations(records: &[VerificationRecord], rel_tol: f64) -> Vec<&VerificationRecord> {
    records.iter().filter(|r| r.violates(rel_tol)).collect()
}

pub fn worst_ratio(records: &[VerificationRecord]) -> f64 {
    records.iter().map(VerificationRecord::ratio).fold(0.0, f64::max)
}

pub const CSV_HEADER: [&str; 10] = [
    "theorem_id",
    "ifs",
    "rho",
    "p",
    "seed",
    "lhs",
    "rhs",
    "constant",
    "margin",
    "worst_ratio",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(records: &[VerificationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.theorem.as_str().to_string(),
            r.ifs.clone(),
            opt(r.rho),
            opt(r.p),
            r.seed.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.constant.to_string(),
            r.margin.to_string(),
            r.worst_ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_and_violation() {
        let ok = VerificationRecord::new(TheoremId::Wiener, "k", None, None, 1, 1.0, 2.0, 8.0);
        assert_eq!(ok.margin, 1.0);
        assert!(!ok.violates(DEFAULT_REL_TOL));
        let tiny = VerificationRecord::new(TheoremId::Wiener, "k", None, None, 1, 1.0 + 1e-12, 1.0, 8.0);
        assert!(!tiny.violates(DEFAULT_REL_TOL));
        let bad = VerificationRecord::new(TheoremId::Wiener, "k", None, None, 1, 1.1, 1.0, 8.0);
        assert!(bad.violates(DEFAULT_REL_TOL));
    }

    #[test]
    fn csv_layout() {
        let mut records = vec![
            VerificationRecord::new(TheoremId::WeakType, "c", Some(0.5), None, 7, 0.25, 1.0, 4.0),
            VerificationRecord::new(TheoremId::WeakType, "c", Some(0.5), None, 8, 0.1, 1.0, 4.0),
        ];
        accumulate_worst(&mut records);
        assert_eq!(records[1].worst_ratio, 0.25);
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "theorem_id,ifs,rho,p,seed,lhs,rhs,constant,margin,worst_ratio"
        );
        assert_eq!(lines.next().unwrap(), "weak_type,c,0.5,,7,0.25,1,4,0.75,0.25");
    }
}
