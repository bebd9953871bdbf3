use std::path::Path;

use walkdet_core::evaluate::{parse_table, standard_reg};

use crate::config::{Options, Settings};
use crate::error::{CliError, CliResult};
use crate::output::{emit, write_file, Log};

pub fn run(table: &Path, opts: &Options, settings: &Settings) -> CliResult<()> {
    let file = std::fs::File::open(table).map_err(|e| CliError::Input {
        path: table.to_path_buf(),
        message: e.to_string(),
    })?;
    let rows = parse_table(file).map_err(CliError::core_at(table))?;
    let reference = opts.get::<String>("reference_study")?;
    let result = standard_reg(&rows, reference.as_deref()).map_err(CliError::core_at(table))?;
    write_file(&settings.out.join("regression.csv"), result.to_csv().as_bytes())?;
    let log = Log { quiet: settings.quiet };
    log.note(format!("{} rows used, {} dropped as incomplete", result.n, result.dropped_rows));
    log.note(&result);
    emit(&result)
}
