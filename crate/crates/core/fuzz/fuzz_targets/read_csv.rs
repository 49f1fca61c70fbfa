#![no_main]

use bch_factor::io::{read_csv, wavefunction_from_table};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = read_csv(data) {
        for row in &table.rows {
            assert_eq!(row.len(), table.columns.len());
        }
        let _ = wavefunction_from_table(&table);
    }
});
