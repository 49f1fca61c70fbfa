#![no_main]

use bch_factor::cli::OperatorSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(spec) = text.parse::<OperatorSpec>() {
        assert_eq!(spec.to_string().parse::<OperatorSpec>(), Ok(spec));
        let _ = spec.to_operator();
    }
});
