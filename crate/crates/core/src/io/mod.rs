//! Flat-file formats: the delimited event file and the report documents.
//!
//! Every file starts with `#` comment lines, the first two being the document
//! kind and the configuration fingerprint.

mod events;
mod report;

pub use events::{read_events, write_events, EventFile, EVENT_COLUMNS};
pub use report::{
    write_bins_csv, write_curves_csv, write_fit_table, write_fit_tree, write_manifest, write_report_csv,
    write_report_table, write_report_tree, write_scan_csv, Manifest, ScanRow,
};

use std::io::Write;

/// Writes the common comment header.
pub(crate) fn write_header<W: Write>(w: &mut W, kind: &str, fingerprint: &str) -> std::io::Result<()> {
    writeln!(w, "# lhv {kind}")?;
    writeln!(w, "# fingerprint: {fingerprint}")
}
