use std::path::PathBuf;
use std::str::FromStr;

use forge_core::geometry::{BoxGrid, Norm};
use forge_core::Rational;
use serde::Serialize;

/// A report box `[lo, hi]^d`, given on the command line as `R` (meaning
/// `[-R, R]`) or `lo:hi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UBox {
    pub lo: Rational,
    pub hi: Rational,
}

impl UBox {
    pub fn grid(&self, d: usize, step: &Rational) -> BoxGrid {
        BoxGrid::new(vec![self.lo.clone(); d], vec![self.hi.clone(); d], step.clone())
    }
}

impl FromStr for UBox {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<Rational>().map_err(|e| e.to_string());
        let (lo, hi) = match s.split_once(':') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let r = parse(s)?;
                (-r.clone(), r)
            }
        };
        if lo >= hi {
            return Err(format!("empty box `{s}`"));
        }
        Ok(UBox { lo, hi })
    }
}

/// Everything that determines a run's outputs, written next to them.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub grid_m: u32,
    pub norm: Norm,
    pub eps_ladder: Vec<Rational>,
    pub u_box: Option<UBox>,
    pub u_res: Rational,
    pub seed: u64,
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;
    use forge_core::{q, qi};

    #[test]
    fn parses_boxes() {
        assert_eq!("3".parse::<UBox>().unwrap(), UBox { lo: qi(-3), hi: qi(3) });
        assert_eq!("-1/2:2".parse::<UBox>().unwrap(), UBox { lo: q(-1, 2), hi: qi(2) });
        assert!("2:1".parse::<UBox>().is_err());
        assert!("x".parse::<UBox>().is_err());
    }
}
