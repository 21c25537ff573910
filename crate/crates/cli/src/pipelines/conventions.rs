use ipl_core::conventions::convention_sheet;
use ipl_core::hitchin::REDUCTION_CONSTANTS;
use ipl_core::moduli::quaternion_check;

use super::PipelineResult;
use crate::config::ExperimentConfig;
use crate::report::Check;

pub const FILE: &str = "conventions.json";

pub fn run(_cfg: &ExperimentConfig, out: &mut PipelineResult) {
    let sheet = convention_sheet();
    let json = sheet.to_json();
    let parsed = serde_json::from_str::<ipl_core::conventions::ConventionSheet>(&json).map(|s| s == sheet).unwrap_or(false);
    out.check(Check::equal("sheet_round_trip", parsed as u8 as f64, 1.0));
    out.check(Check::equal("reduction_constant_c1", sheet.reduction_constants.0, REDUCTION_CONSTANTS.0));
    out.check(Check::equal("reduction_constant_c2", sheet.reduction_constants.1, REDUCTION_CONSTANTS.1));
    out.check(Check::equal("quaternion_relations", quaternion_check().holds() as u8 as f64, 1.0));
    out.files.push((FILE.to_string(), json + "\n"));
}
