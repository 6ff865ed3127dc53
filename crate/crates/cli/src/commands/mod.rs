pub mod asympt;
pub mod exact;
pub mod figure;
pub mod simulate;
pub mod validate;

use binsplit::exact::{ParamDomain, SplitParams};

use crate::error::CliResult;

pub(crate) fn splitting(p: &str) -> CliResult<SplitParams> {
    Ok(SplitParams::parse(p, ParamDomain::Splitting)?)
}

pub(crate) fn bernoulli(p: &str) -> CliResult<SplitParams> {
    Ok(SplitParams::parse(p, ParamDomain::Bernoulli)?)
}
