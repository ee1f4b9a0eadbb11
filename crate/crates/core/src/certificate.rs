//! Text form of a bound certificate.
//!
//! ```text
//! DEJEAN-CERTIFICATE 1
//! CONFIG <hex>
//! PARAM k m p1 p2 n0
//! MODE default|truncated
//! DELTA exact|rounded
//! R num/den
//! X i num/den            (one per class)
//! MU num/den
//! RHO-RANGE a b
//! RHO d num/den          (one per shift)
//! Q q
//! ALPHA num/den
//! BASE n c_0 .. c_{s-1}  (one per length m..=n0)
//! HASH omega <hex>
//! NOTE ...               (transcript, not checked)
//! END
//! ```

use std::fmt::Write as _;

use num_rational::BigRational;
use sha2::{Digest, Sha256};

use crate::cascade::{BaseMode, RhoPolynomial};
use crate::counting::ClassCounts;
use crate::error::{Error, Result};
use crate::spectral::DeltaMode;

pub const MAGIC: &str = "DEJEAN-CERTIFICATE 1";

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCertificate {
    pub config_hash: String,
    pub k: usize,
    pub m: usize,
    pub p1: usize,
    pub p2: usize,
    pub n0: usize,
    pub mode: BaseMode,
    pub delta_mode: DeltaMode,
    pub r_hat: BigRational,
    pub x_hat: Vec<BigRational>,
    pub mu_hat: BigRational,
    pub rho: RhoPolynomial,
    pub q: usize,
    pub alpha: BigRational,
    pub base: Vec<ClassCounts>,
    pub omega_hash: String,
    pub notes: Vec<String>,
}

pub fn delta_tag(mode: DeltaMode) -> &'static str {
    match mode {
        DeltaMode::Exact => "exact",
        DeltaMode::Rounded => "rounded",
    }
}

pub fn delta_from_tag(tag: &str) -> Result<DeltaMode> {
    match tag {
        "exact" => Ok(DeltaMode::Exact),
        "rounded" => Ok(DeltaMode::Rounded),
        _ => Err(Error::Parse(format!("unknown delta mode {tag:?}"))),
    }
}

/// Hash of the parameters that determine every stage's output.
pub fn config_hash(k: usize, m: usize, p1: usize, p2: usize, n0: usize, mode: BaseMode, delta: DeltaMode) -> String {
    let text = format!("k={k} m={m} p1={p1} p2={p2} n0={n0} mode={} delta={}", mode.tag(), delta_tag(delta));
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn frac(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn parse_frac(s: &str) -> Result<BigRational> {
    let (n, d) = s
        .split_once('/')
        .ok_or_else(|| Error::Parse(format!("expected num/den, got {s:?}")))?;
    let n = n.parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let d: num_bigint::BigInt = d.parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if d <= num_bigint::BigInt::from(0) {
        return Err(Error::Parse(format!("nonpositive denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

impl BoundCertificate {
    pub fn emit(&self) -> String {
        let mut o = String::new();
        writeln!(o, "{MAGIC}").unwrap();
        writeln!(o, "CONFIG {}", self.config_hash).unwrap();
        writeln!(o, "PARAM {} {} {} {} {}", self.k, self.m, self.p1, self.p2, self.n0).unwrap();
        writeln!(o, "MODE {}", self.mode.tag()).unwrap();
        writeln!(o, "DELTA {}", delta_tag(self.delta_mode)).unwrap();
        writeln!(o, "R {}", frac(&self.r_hat)).unwrap();
        for (i, x) in self.x_hat.iter().enumerate() {
            writeln!(o, "X {} {}", i, frac(x)).unwrap();
        }
        writeln!(o, "MU {}", frac(&self.mu_hat)).unwrap();
        writeln!(o, "RHO-RANGE {} {}", self.rho.a, self.rho.b).unwrap();
        for (i, r) in self.rho.rho.iter().enumerate() {
            writeln!(o, "RHO {} {}", self.rho.a + i as i64, frac(r)).unwrap();
        }
        writeln!(o, "Q {}", self.q).unwrap();
        writeln!(o, "ALPHA {}", frac(&self.alpha)).unwrap();
        for cc in &self.base {
            write!(o, "BASE {}", cc.n).unwrap();
            for c in &cc.counts {
                write!(o, " {c}").unwrap();
            }
            o.push('\n');
        }
        writeln!(o, "HASH omega {}", self.omega_hash).unwrap();
        for n in &self.notes {
            writeln!(o, "NOTE {n}").unwrap();
        }
        writeln!(o, "END").unwrap();
        o
    }

    pub fn parse(text: &str) -> Result<BoundCertificate> {
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(Error::Parse("missing certificate header".into()));
        }
        let mut config_hash = None;
        let mut param = None;
        let mut mode = None;
        let mut delta = None;
        let mut r_hat = None;
        let mut x_hat: Vec<BigRational> = Vec::new();
        let mut mu = None;
        let mut rho_range = None;
        let mut rho: Vec<BigRational> = Vec::new();
        let mut q = None;
        let mut alpha = None;
        let mut base = Vec::new();
        let mut omega_hash = None;
        let mut notes = Vec::new();
        let mut ended = false;
        for line in lines {
            if ended {
                return Err(Error::Parse("content after END".into()));
            }
            if let Some(n) = line.strip_prefix("NOTE ") {
                notes.push(n.to_string());
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("malformed line {line:?}"));
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
            match f.first().copied() {
                Some("CONFIG") if f.len() == 2 => config_hash = Some(f[1].to_string()),
                Some("PARAM") if f.len() == 6 => {
                    param = Some((num(f[1])?, num(f[2])?, num(f[3])?, num(f[4])?, num(f[5])?))
                }
                Some("MODE") if f.len() == 2 => mode = Some(BaseMode::from_tag(f[1])?),
                Some("DELTA") if f.len() == 2 => delta = Some(delta_from_tag(f[1])?),
                Some("R") if f.len() == 2 => r_hat = Some(parse_frac(f[1])?),
                Some("X") if f.len() == 3 => {
                    if num(f[1])? != x_hat.len() {
                        return Err(Error::Parse("X entries out of order".into()));
                    }
                    x_hat.push(parse_frac(f[2])?);
                }
                Some("MU") if f.len() == 2 => mu = Some(parse_frac(f[1])?),
                Some("RHO-RANGE") if f.len() == 3 => {
                    let a: i64 = f[1].parse().map_err(|_| bad())?;
                    let b: i64 = f[2].parse().map_err(|_| bad())?;
                    rho_range = Some((a, b));
                }
                Some("RHO") if f.len() == 3 => {
                    let (a, _) = rho_range.ok_or_else(|| Error::Parse("RHO before RHO-RANGE".into()))?;
                    let d: i64 = f[1].parse().map_err(|_| bad())?;
                    if d != a + rho.len() as i64 {
                        return Err(Error::Parse("RHO entries out of order".into()));
                    }
                    rho.push(parse_frac(f[2])?);
                }
                Some("Q") if f.len() == 2 => q = Some(num(f[1])?),
                Some("ALPHA") if f.len() == 2 => alpha = Some(parse_frac(f[1])?),
                Some("BASE") if f.len() >= 2 => {
                    let n = num(f[1])?;
                    let counts = f[2..]
                        .iter()
                        .map(|c| c.parse::<u128>().map_err(|_| bad()))
                        .collect::<Result<Vec<u128>>>()?;
                    base.push(ClassCounts { n, counts });
                }
                Some("HASH") if f.len() == 3 && f[1] == "omega" => omega_hash = Some(f[2].to_string()),
                Some("END") if f.len() == 1 => ended = true,
                _ => return Err(bad()),
            }
        }
        if !ended {
            return Err(Error::Parse("missing END".into()));
        }
        let missing = |what: &str| Error::Parse(format!("missing {what}"));
        let (k, m, p1, p2, n0) = param.ok_or_else(|| missing("PARAM"))?;
        let (a, b) = rho_range.ok_or_else(|| missing("RHO-RANGE"))?;
        if rho.len() as i64 != b - a + 1 {
            return Err(Error::Parse("RHO count does not match RHO-RANGE".into()));
        }
        Ok(BoundCertificate {
            config_hash: config_hash.ok_or_else(|| missing("CONFIG"))?,
            k,
            m,
            p1,
            p2,
            n0,
            mode: mode.ok_or_else(|| missing("MODE"))?,
            delta_mode: delta.ok_or_else(|| missing("DELTA"))?,
            r_hat: r_hat.ok_or_else(|| missing("R"))?,
            x_hat,
            mu_hat: mu.ok_or_else(|| missing("MU"))?,
            rho: RhoPolynomial { a, b, rho },
            q: q.ok_or_else(|| missing("Q"))?,
            alpha: alpha.ok_or_else(|| missing("ALPHA"))?,
            base,
            omega_hash: omega_hash.ok_or_else(|| missing("HASH omega"))?,
            notes,
        })
    }
}
