//! File formats: the tensor container, CSV tables, and plot output.

pub mod pgm;
pub mod svg;
pub mod tables;
pub mod tensor_file;

pub use pgm::{emit_pgm, render_pgm};
pub use svg::{emit_scatter_svg, render_scatter_svg, AxisLabels, GroupLine, ScatterPoint};
pub use tables::{
    read_accuracies, read_labels, read_metrics, read_traces, write_accuracies, write_labels,
    write_metrics, write_traces,
};
pub use tensor_file::{read_tensor, read_tensor_f64, write_tensor, write_tensor_f64};

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `contents` to `path`, creating parent directories.
pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
