#![no_main]

use bch_factor::cli::StateSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(spec) = text.parse::<StateSpec>() {
        assert_eq!(spec.to_string().parse::<StateSpec>(), Ok(spec));
    }
});
