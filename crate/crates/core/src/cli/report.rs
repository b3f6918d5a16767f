//! Table-style CSV reports. Every row starts with the run's configuration so
//! rows from different runs can be concatenated into one grid.

use std::fmt::Write as _;
use std::path::Path;

use crate::analytics::{Analysis, Estimate};
use crate::error::Result;
use crate::inference::InferenceConfig;
use crate::io::csv_field;

pub const TABLE1: &str = "table1.csv";
pub const TABLE2: &str = "table2.csv";
pub const TABLE3: &str = "table3.csv";

const CONFIG_HEADER: &str = "kernel,theta0,r,particles,alpha_samples,seed,status";

/// One row source: a finished analysis, or the configuration of a run that
/// failed together with its error message.
#[derive(Debug, Clone)]
pub enum Row<'a> {
    Ok(&'a Analysis),
    Failed(&'a InferenceConfig, &'a str),
}

impl Row<'_> {
    fn config(&self) -> &InferenceConfig {
        match self {
            Row::Ok(a) => &a.config,
            Row::Failed(c, _) => c,
        }
    }

    fn prefix(&self) -> String {
        let c = self.config();
        let status = match self {
            Row::Ok(_) => "ok".to_owned(),
            Row::Failed(_, msg) => format!("failed: {msg}"),
        };
        format!(
            "{},{},{},{},{},{},{}",
            csv_field(&c.kernel.name),
            c.theta0,
            c.r,
            c.particles,
            c.alpha_samples,
            c.seed,
            csv_field(&status)
        )
    }
}

fn est(e: &Option<Estimate>) -> String {
    match e {
        Some(e) => format!("{},{}", e.mean, e.std),
        None => ",".into(),
    }
}

/// Topic counts, populations and entropies.
pub fn table1(rows: &[Row]) -> String {
    let mut s = format!("{CONFIG_HEADER},K,mean_population,mean_population_std,s_text,s_text_std,s_sub,s_sub_std\n");
    for row in rows {
        let body = match row {
            Row::Ok(a) => {
                let c = &a.clusters;
                format!("{},{},{},{}", c.k, est(&c.mean_population), est(&c.s_text_top), est(&c.s_sub_top))
            }
            Row::Failed(..) => ",,,,,,".into(),
        };
        let _ = writeln!(s, "{},{body}", row.prefix());
    }
    s
}

/// Interaction strengths.
pub fn table2(rows: &[Row]) -> String {
    let mut s = format!(
        "{CONFIG_HEADER},active_topics,mean_a,mean_a_std,mean_w,mean_w_std,mean_a_weighted,mean_a_weighted_std,\
         intra_extra_ratio,intra_extra_ratio_std\n"
    );
    for row in rows {
        let body = match row {
            Row::Ok(a) => {
                let t = &a.strength;
                format!(
                    "{},{},{},{},{}",
                    t.active_topics,
                    est(&t.mean_a),
                    est(&t.mean_w),
                    est(&t.mean_a_weighted),
                    est(&t.intra_extra_ratio)
                )
            }
            Row::Failed(..) => ",,,,,,,,".into(),
        };
        let _ = writeln!(s, "{},{body}", row.prefix());
    }
    s
}

/// Mean effective interaction per kernel entry, one line per entry.
pub fn table3(rows: &[Row]) -> String {
    let mut s = format!("{CONFIG_HEADER},entry,mean_lag,range\n");
    for row in rows {
        let means = row.config().kernel.kernel.means();
        match row {
            Row::Ok(a) => {
                for (l, v) in a.range.iter().enumerate() {
                    let _ = writeln!(s, "{},{},{},{v}", row.prefix(), l + 1, means[l]);
                }
            }
            Row::Failed(..) => {
                let _ = writeln!(s, "{},,,", row.prefix());
            }
        }
    }
    s
}

pub fn write_tables(dir: &Path, rows: &[Row]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(TABLE1), table1(rows))?;
    std::fs::write(dir.join(TABLE2), table2(rows))?;
    std::fs::write(dir.join(TABLE3), table3(rows))?;
    Ok(())
}
