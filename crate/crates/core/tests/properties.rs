//! Randomized properties: parsers never panic, specs survive a print/parse
//! cycle, and grid operators are linear and respect parity.

use bch_factor::cli::{OperatorSpec, StateSpec};
use bch_factor::factors::{apply_operator, substeps_for, FactoredOperator};
use bch_factor::grid::{Grid, WaveFunction};
use bch_factor::io::{self, Format};
use bch_factor::SqueezeParameter;
use num_complex::Complex64;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-10.0..10.0, any::<f64>().prop_filter("finite", |v| v.is_finite())]
}

proptest! {
    #[test]
    fn spec_parsers_do_not_panic(s in "\\PC{0,40}") {
        let _ = s.parse::<StateSpec>();
        let _ = s.parse::<OperatorSpec>();
    }

    #[test]
    fn structured_specs_do_not_panic(
        kind in "(ground|coherent|squeezed|evenodd|squeeze|displace|time)",
        pairs in proptest::collection::vec(("(x0|p0|r|phi|s|sign|t|substeps|q)", "[-+0-9.eEnaif]{0,8}"), 0..5),
    ) {
        let body: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let s = format!("{kind}:{}", body.join(","));
        if let Ok(state) = s.parse::<StateSpec>() {
            prop_assert_eq!(state.to_string().parse::<StateSpec>(), Ok(state));
        }
        if let Ok(op) = s.parse::<OperatorSpec>() {
            prop_assert_eq!(op.to_string().parse::<OperatorSpec>(), Ok(op));
        }
    }

    #[test]
    fn specs_round_trip(x0 in finite(), p0 in finite(), r in 0.0..5.0f64, phi in finite(), t in finite(), k in proptest::option::of(1usize..100)) {
        let states = [
            StateSpec::Coherent { x0, p0 },
            StateSpec::Squeezed { x0, p0, r, phi },
        ];
        for s in states {
            prop_assert_eq!(s.to_string().parse::<StateSpec>(), Ok(s));
        }
        let ops = [
            OperatorSpec::Squeeze { r, phi },
            OperatorSpec::Displace { x0, p0 },
            OperatorSpec::Time { t, substeps: k },
        ];
        for op in ops {
            prop_assert_eq!(op.to_string().parse::<OperatorSpec>(), Ok(op));
        }
    }

    #[test]
    fn table_readers_do_not_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = io::read_csv(bytes.as_slice());
        let _ = io::read_json(bytes.as_slice());
        let _ = io::read_wavefunction(bytes.as_slice(), Format::Csv);
    }

    #[test]
    fn csv_round_trip(values in proptest::collection::vec(proptest::collection::vec(any::<f64>(), 3), 0..20)) {
        let mut table = io::Table::new(["a", "b", "c"]);
        for row in values {
            table.push(row);
        }
        let mut buf = Vec::new();
        io::write_csv(&table, &mut buf).unwrap();
        let back = io::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.rows.len(), table.rows.len());
        for (a, b) in back.rows.iter().flatten().zip(table.rows.iter().flatten()) {
            prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }
}

fn small_grid() -> Grid {
    Grid::new(-12.0, 12.0, 512).unwrap()
}

fn packet(grid: Grid, x0: f64, p0: f64, s: f64) -> WaveFunction {
    WaveFunction::from_fn(grid, |x| Complex64::from_polar((-(x - x0).powi(2) / (2.0 * s * s)).exp(), p0 * x))
}

fn operator() -> impl Strategy<Value = FactoredOperator> {
    prop_oneof![
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(x0, p0)| FactoredOperator::Displacement { x0, p0 }),
        (0.0..0.8f64, 0.0..6.3f64)
            .prop_map(|(r, phi)| FactoredOperator::Squeeze(SqueezeParameter::new(r, phi).unwrap())),
        (-3.0..3.0f64).prop_map(|t| FactoredOperator::TimeDisplacement { t, substeps: substeps_for(t) }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operators_are_linear(op in operator(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let grid = small_grid();
        let psi = packet(grid, -1.0, 0.5, 1.0);
        let phi = packet(grid, 1.5, -1.0, 0.8);
        let (ca, cb) = (Complex64::new(a, 0.3), Complex64::new(0.2, b));
        let mixed = WaveFunction::linear_combination(ca, &psi, cb, &phi).unwrap();
        let lhs = apply_operator(&mixed, &op).unwrap();
        let (u, v) = (apply_operator(&psi, &op).unwrap(), apply_operator(&phi, &op).unwrap());
        let rhs = WaveFunction::linear_combination(ca, &u, cb, &v).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn time_evolution_keeps_parity(t in -3.0..3.0f64, x0 in 0.5..2.5f64, odd in any::<bool>()) {
        let grid = small_grid();
        let spec: StateSpec = format!("evenodd:x0={x0},s=1.2,sign={}", if odd { -1 } else { 1 }).parse().unwrap();
        let sign = if odd { -1.0 } else { 1.0 };
        let out = apply_operator(&spec.sample(grid), &FactoredOperator::TimeDisplacement { t, substeps: substeps_for(t) }).unwrap();
        let v = out.samples();
        let n = v.len();
        // x_j and x_{n-j} are mirror images on this grid.
        let worst = (1..n).map(|j| (v[j] - v[n - j] * sign).norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-10, "{worst:e}");
    }
}
