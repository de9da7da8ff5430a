use std::io::{BufRead, BufReader, Read, Write};

use serde::Serialize;

use super::stats::{ess, mean, quantile_sorted, sd};
use crate::covariance::{CovarianceSpec, Family};
use crate::error::{Error, Result};

/// Stored posterior draws. Latent values `w` are in DAG visit order.
#[derive(Clone, Debug, PartialEq)]
pub struct McmcChain {
    pub beta: Vec<Vec<f64>>,
    pub tau2: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub phi: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    /// Fraction of accepted decay proposals after burn-in.
    pub acceptance_rate: f64,
    /// Proposal scale in effect after burn-in.
    pub proposal_sd: f64,
    pub seed: u64,
    pub family: Family,
    pub nu: f64,
}

impl McmcChain {
    pub fn len(&self) -> usize {
        self.tau2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau2.is_empty()
    }

    /// Number of regression coefficients including the intercept.
    pub fn n_beta(&self) -> usize {
        self.beta.first().map_or(0, |b| b.len())
    }

    pub fn n_latent(&self) -> usize {
        self.w.first().map_or(0, |w| w.len())
    }

    /// Covariance spec of draw `t`.
    pub fn spec(&self, t: usize) -> CovarianceSpec {
        CovarianceSpec {
            family: self.family,
            sigma2: self.sigma2[t],
            phi: self.phi[t],
            nu: self.nu,
        }
    }

    /// `sigma2 * phi^(2 nu)` per draw, the identifiable combination.
    pub fn microergodic(&self) -> Vec<f64> {
        let nu = self.spec(0).smoothness();
        self.sigma2
            .iter()
            .zip(&self.phi)
            .map(|(s, p)| s * p.powf(2.0 * nu))
            .collect()
    }

    /// Posterior mean of each latent value.
    pub fn w_mean(&self) -> Vec<f64> {
        let k = self.n_latent();
        let mut out = vec![0.0; k];
        for w in &self.w {
            for (o, v) in out.iter_mut().zip(w) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o /= self.len() as f64);
        out
    }

    /// Write all draws as CSV preceded by a `# seed=...` metadata line.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        let family = match self.family {
            Family::Matern => "matern",
            Family::Exponential => "exponential",
        };
        writeln!(
            writer,
            "# seed={} family={} nu={} acceptance_rate={} proposal_sd={}",
            self.seed, family, self.nu, self.acceptance_rate, self.proposal_sd
        )?;
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["draw".to_string()];
        header.extend((0..self.n_beta()).map(|j| format!("beta{j}")));
        header.extend(["tau2", "sigma2", "phi"].map(String::from));
        header.extend((0..self.n_latent()).map(|j| format!("w{j}")));
        w.write_record(&header)?;
        for t in 0..self.len() {
            let mut row = vec![t.to_string()];
            row.extend(self.beta[t].iter().map(f64::to_string));
            row.extend([self.tau2[t], self.sigma2[t], self.phi[t]].map(|v| v.to_string()));
            row.extend(self.w[t].iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a chain written by [`McmcChain::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut reader = BufReader::new(reader);
        let mut meta = String::new();
        reader.read_line(&mut meta)?;
        let meta = meta
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("chain file must start with a '#' metadata line".into()))?;
        let mut chain = McmcChain {
            beta: Vec::new(),
            tau2: Vec::new(),
            sigma2: Vec::new(),
            phi: Vec::new(),
            w: Vec::new(),
            acceptance_rate: 0.0,
            proposal_sd: 0.0,
            seed: 0,
            family: Family::Matern,
            nu: 0.0,
        };
        let num = |v: &str| v.parse::<f64>().map_err(|e| Error::Parse(format!("{v}: {e}")));
        for kv in meta.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad metadata entry {kv}")))?;
            match k {
                "seed" => chain.seed = v.parse().map_err(|e| Error::Parse(format!("seed {v}: {e}")))?,
                "family" => {
                    chain.family = match v {
                        "matern" => Family::Matern,
                        "exponential" => Family::Exponential,
                        _ => return Err(Error::Parse(format!("unknown family {v}"))),
                    }
                }
                "nu" => chain.nu = num(v)?,
                "acceptance_rate" => chain.acceptance_rate = num(v)?,
                "proposal_sd" => chain.proposal_sd = num(v)?,
                _ => {}
            }
        }
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        let nb = header.iter().filter(|h| h.starts_with("beta")).count();
        let nw = header.iter().filter(|h| h.starts_with('w')).count();
        if header.len() != 1 + nb + 3 + nw {
            return Err(Error::Parse("unexpected chain header".into()));
        }
        for rec in rdr.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec.iter().skip(1).map(num).collect::<Result<_>>()?;
            chain.beta.push(vals[..nb].to_vec());
            chain.tau2.push(vals[nb]);
            chain.sigma2.push(vals[nb + 1]);
            chain.phi.push(vals[nb + 2]);
            chain.w.push(vals[nb + 3..].to_vec());
        }
        Ok(chain)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
    pub ess: f64,
}

impl ParamSummary {
    pub fn of(name: &str, x: &[f64]) -> Self {
        let mut s = x.to_vec();
        s.sort_by(f64::total_cmp);
        ParamSummary {
            name: name.to_string(),
            mean: mean(x),
            sd: sd(x),
            q025: quantile_sorted(&s, 0.025),
            q50: quantile_sorted(&s, 0.5),
            q975: quantile_sorted(&s, 0.975),
            ess: ess(x),
        }
    }
}

/// Summaries of the regression coefficients, variances, decay and
/// `sigma2 * phi^(2 nu)`.
pub fn summarize(chain: &McmcChain) -> Vec<ParamSummary> {
    let mut out = Vec::new();
    for j in 0..chain.n_beta() {
        let b: Vec<f64> = chain.beta.iter().map(|d| d[j]).collect();
        out.push(ParamSummary::of(&format!("beta{j}"), &b));
    }
    out.push(ParamSummary::of("tau2", &chain.tau2));
    out.push(ParamSummary::of("sigma2", &chain.sigma2));
    out.push(ParamSummary::of("phi", &chain.phi));
    out.push(ParamSummary::of("sigma2_phi_2nu", &chain.microergodic()));
    out
}
