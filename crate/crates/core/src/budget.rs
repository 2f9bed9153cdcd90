use crate::error::{Error, Result};

/// Environment variable overriding the enumeration caps.
///
/// Accepted forms: a bare integer (sets `group`), or comma-separated
/// `group=N` / `t=N` pairs, e.g. `K3FM_BUDGET=group=40000,t=5000`.
pub const BUDGET_ENV: &str = "K3FM_BUDGET";

/// Caps on brute-force enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest `|A|` for which isometry groups of a finite quadratic form
    /// are enumerated.
    pub max_group_order: u64,
    /// Largest `t` for which Lagrangian elements of `A_{d,t}` are listed.
    pub max_element_t: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_group_order: 10_000,
            max_element_t: 2_000,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget {
            max_group_order: u64::MAX,
            max_element_t: u64::MAX,
        }
    }

    /// Defaults, overridden by [`BUDGET_ENV`] when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(s) => Self::parse(&s),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let mut b = Self::default();
        let bad = || Error::InvalidParameter(format!("cannot parse {BUDGET_ENV}={spec:?}"));
        let spec = spec.trim();
        if let Ok(n) = spec.parse::<u64>() {
            b.max_group_order = n;
            return Ok(b);
        }
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v: u64 = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "group" => b.max_group_order = v,
                "t" => b.max_element_t = v,
                _ => return Err(bad()),
            }
        }
        Ok(b)
    }

    pub(crate) fn check_group(&self, what: &str, order: u64) -> Result<()> {
        if order > self.max_group_order {
            return Err(Error::Capacity {
                what: what.to_string(),
                needed: format!("|A| = {order}"),
                cap: self.max_group_order,
                knob: "K3FM_BUDGET group",
            });
        }
        Ok(())
    }

    pub(crate) fn check_t(&self, what: &str, t: u64) -> Result<()> {
        if t > self.max_element_t {
            return Err(Error::Capacity {
                what: what.to_string(),
                needed: format!("t = {t}"),
                cap: self.max_element_t,
                knob: "K3FM_BUDGET t",
            });
        }
        Ok(())
    }
}
