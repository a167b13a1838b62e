//! Privacy chains: a start budget followed by transformations.
//!
//! ```toml
//! [[step]]
//! op = "gaussian"
//! sensitivity = 0.25
//! sigma = 0.5
//!
//! [[step]]
//! op = "subsample"
//! m = 16
//! n = 4096
//!
//! [[step]]
//! op = "compose"
//! times = 100
//!
//! [[step]]
//! op = "convert"
//! delta = 1e-6
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::algorithms::dpsgd_parameters;
use crate::error::{Error, Result};
use crate::privacy::{
    amplify_with_replacement, compose, dpsgd_privacy, gaussian_zcdp, group_zcdp, tcdp_subsample, to_approx,
    PrivacyBudget,
};

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AccountStep {
    Zcdp { rho: f64 },
    Tcdp { rho: f64, omega: f64 },
    Approx { eps: f64, delta: f64 },
    Gaussian { sensitivity: f64, sigma: f64 },
    /// Subsampling `m` of `n` without replacement (tCDP amplification).
    Subsample { m: u64, n: u64 },
    /// Sampling `m` of `n` with replacement (approximate DP).
    Amplify { m: u64, n: u64 },
    Compose { times: usize },
    Group { size: u64 },
    Convert { delta: f64 },
    /// The whole private-SGD chain at accuracy `alpha`.
    Dpsgd {
        alpha: f64,
        delta: f64,
        #[serde(default = "unit")]
        radius: f64,
        #[serde(default = "unit")]
        lipschitz: f64,
        d: usize,
        n: usize,
    },
    /// The schedule's rounds at a given zCDP level: per-round Gaussian then `T`-fold composition.
    DpsgdSchedule {
        alpha: f64,
        rho: f64,
        #[serde(default = "infinite")]
        mbar: f64,
        d: usize,
        #[serde(default = "unit")]
        radius: f64,
        #[serde(default = "unit")]
        lipschitz: f64,
    },
}

fn unit() -> f64 {
    1.0
}
fn infinite() -> f64 {
    f64::INFINITY
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountChain {
    pub step: Vec<AccountStep>,
}

impl AccountChain {
    pub fn parse(text: &str) -> Result<Self> {
        let chain: Self = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            message: e.message().trim().to_string(),
        })?;
        if chain.step.is_empty() {
            return Err(Error::config("privacy chain has no steps"));
        }
        Ok(chain)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Budget after every step.
    pub fn evaluate(&self) -> Result<Vec<PrivacyBudget>> {
        let mut state: Option<PrivacyBudget> = None;
        let mut out = Vec::with_capacity(self.step.len());
        for (i, step) in self.step.iter().enumerate() {
            let next = apply(state, step).map_err(|e| match e {
                Error::Config { .. } => e,
                other => Error::InvalidParameter(format!("step {}: {other}", i + 1)),
            })?;
            out.push(next);
            state = Some(next);
        }
        Ok(out)
    }
}

fn need(state: Option<PrivacyBudget>, op: &str) -> Result<PrivacyBudget> {
    state.ok_or_else(|| Error::config(format!("step {op:?} needs a preceding budget")))
}

fn apply(state: Option<PrivacyBudget>, step: &AccountStep) -> Result<PrivacyBudget> {
    Ok(match *step {
        AccountStep::Zcdp { rho } => PrivacyBudget::zcdp(rho)?,
        AccountStep::Tcdp { rho, omega } => PrivacyBudget::tcdp(rho, omega)?,
        AccountStep::Approx { eps, delta } => PrivacyBudget::approx(eps, delta)?,
        AccountStep::Gaussian { sensitivity, sigma } => gaussian_zcdp(sensitivity, sigma)?,
        AccountStep::Subsample { m, n } => {
            let (rho, omega) = need(state, "subsample")?
                .as_tcdp()
                .ok_or_else(|| Error::InvalidParameter("subsample needs a zCDP or tCDP budget".into()))?;
            tcdp_subsample(rho, omega, m, n)?
        }
        AccountStep::Amplify { m, n } => {
            let (eps, delta) = need(state, "amplify")?
                .eps_delta()
                .ok_or_else(|| Error::InvalidParameter("amplify needs an (eps, delta) budget".into()))?;
            amplify_with_replacement(eps, delta, m, n)?
        }
        AccountStep::Compose { times } => compose(&vec![need(state, "compose")?; times])?,
        AccountStep::Group { size } => {
            let rho = need(state, "group")?
                .rho()
                .filter(|_| matches!(state, Some(PrivacyBudget::Zcdp { .. })))
                .ok_or_else(|| Error::InvalidParameter("group privacy needs a zCDP budget".into()))?;
            PrivacyBudget::Zcdp {
                rho: group_zcdp(rho, size)?,
            }
        }
        AccountStep::Convert { delta } => to_approx(need(state, "convert")?, delta)?,
        AccountStep::Dpsgd {
            alpha,
            delta,
            radius,
            lipschitz,
            d,
            n,
        } => dpsgd_privacy(alpha, delta, radius, lipschitz, d, n)?.chained,
        AccountStep::DpsgdSchedule {
            alpha,
            rho,
            mbar,
            d,
            radius,
            lipschitz,
        } => {
            let c = dpsgd_parameters(alpha, rho, mbar, d, radius, lipschitz)?;
            let per_round = gaussian_zcdp(2.0 * lipschitz / c.m as f64, c.sigma)?;
            compose(&vec![per_round; c.t as usize])?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_compose_convert() {
        let chain = AccountChain::parse(
            r#"
[[step]]
op = "gaussian"
sensitivity = 1.0
sigma = 1.0
[[step]]
op = "compose"
times = 4
[[step]]
op = "convert"
delta = 1e-6
"#,
        )
        .unwrap();
        let out = chain.evaluate().unwrap();
        assert_eq!(out[0], PrivacyBudget::Zcdp { rho: 0.5 });
        assert_eq!(out[1], PrivacyBudget::Zcdp { rho: 2.0 });
        let (eps, _) = out[2].eps_delta().unwrap();
        assert!((eps - (2.0 + 2.0 * (2.0 * (1e6f64).ln()).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn group_and_amplify() {
        let chain = AccountChain::parse(
            "[[step]]\nop = \"zcdp\"\nrho = 0.5\n[[step]]\nop = \"group\"\nsize = 3\n",
        )
        .unwrap();
        assert_eq!(chain.evaluate().unwrap()[1], PrivacyBudget::Zcdp { rho: 4.5 });
        let chain = AccountChain::parse(
            "[[step]]\nop = \"approx\"\neps = 0.1\ndelta = 1e-6\n[[step]]\nop = \"amplify\"\nm = 10\nn = 100\n",
        )
        .unwrap();
        let (eps, delta) = chain.evaluate().unwrap()[1].eps_delta().unwrap();
        assert!((eps - 0.06).abs() < 1e-12);
        assert!((delta - 4.0 * 0.06f64.exp() * 1e-7).abs() < 1e-20);
    }

    #[test]
    fn errors() {
        assert!(matches!(AccountChain::parse("step = []"), Err(Error::Config { .. })));
        assert!(matches!(
            AccountChain::parse("[[step]]\nop = \"warp\"\n"),
            Err(Error::Config { line: Some(_), .. })
        ));
        let chain = AccountChain::parse("[[step]]\nop = \"compose\"\ntimes = 2\n").unwrap();
        assert!(matches!(chain.evaluate(), Err(Error::Config { .. })));
        let chain = AccountChain::parse(
            "[[step]]\nop = \"zcdp\"\nrho = 0.5\n[[step]]\nop = \"subsample\"\nm = 10\nn = 10\n",
        )
        .unwrap();
        assert!(chain.evaluate().is_err());
    }
}
