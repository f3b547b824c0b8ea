//! Run timestamps: resolution policy and UTC formatting.
//!
//! Timestamps end up in model metadata and run manifests, so a rerun
//! must be able to pin them. Resolution order: the `--timestamp` flag,
//! then the `SOURCE_DATE_EPOCH` environment variable, then the wall
//! clock.

use std::env;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::exit::CliError;

pub fn resolve(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(secs) = flag {
        return Ok(secs);
    }
    match env::var("SOURCE_DATE_EPOCH") {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "SOURCE_DATE_EPOCH must be seconds since the Unix epoch, got `{raw}`"
            ))
        }),
        Err(env::VarError::NotPresent) => Ok(SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_err(|e| CliError::Internal(format!("system clock before the epoch: {e}")))?
            .as_secs()),
        Err(e) => Err(CliError::Usage(format!("SOURCE_DATE_EPOCH is unreadable: {e}"))),
    }
}

/// Seconds since the Unix epoch as `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_utc(secs: u64) -> String {
    let (y, m, d) = civil_from_days((secs / 86_400) as i64);
    let rem = secs % 86_400;
    format!(
        "{y:04}-{m:02}-{d:02}T{:02}:{:02}:{:02}Z",
        rem / 3_600,
        rem % 3_600 / 60,
        rem % 60
    )
}

/// Gregorian date for a day count since 1970-01-01, via era arithmetic
/// over the 146097-day / 400-year Gregorian cycle.
fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1_460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (yoe + era * 400 + i64::from(m <= 2), m, d)
}
