pub mod cluster;
pub mod fit;
pub mod forecast;
pub mod replay;
pub mod simulate;
pub mod strength;

use std::path::Path;

use serde::Serialize;
use serde_json::json;
use trade_strength::dataset::{join_panel, load_gdp_table, load_trade_table};
use trade_strength::{CountryPanel, JoinReport, SkipReport};

use crate::failure::CmdResult;
use crate::output::diagnostic;

#[derive(Debug, Serialize)]
pub struct PanelLoad {
    #[serde(skip)]
    pub panel: CountryPanel,
    pub trade_skipped: SkipReport,
    pub gdp_skipped: SkipReport,
    pub join: JoinReport,
}

/// Loads and joins the two tables, reporting every skipped row on stderr.
pub fn load_panel(trade: &Path, gdp: &Path) -> CmdResult<PanelLoad> {
    let trade = load_trade_table(trade)?;
    let gdp = load_gdp_table(gdp)?;
    for report in [&trade.report, &gdp.report] {
        for row in &report.skipped {
            diagnostic(
                "row_skipped",
                json!({ "source": report.source, "line": row.line, "key": row.key, "reason": row.reason }),
            );
        }
    }
    let (panel, join) = join_panel(&trade.records, &gdp.records)?;
    for key in &join.unmatched_trade {
        diagnostic("unmatched", json!({ "table": "trade", "key": key }));
    }
    for key in &join.unmatched_gdp {
        diagnostic("unmatched", json!({ "table": "gdp", "key": key }));
    }
    Ok(PanelLoad {
        panel,
        trade_skipped: trade.report,
        gdp_skipped: gdp.report,
        join,
    })
}
