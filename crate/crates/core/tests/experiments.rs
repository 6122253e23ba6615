use abcd_core::experiments::{sweep_epsilon, Horizon, SweepSpec};
use abcd_core::grid::{GridSpec, DEFAULT_LENGTH};
use abcd_core::integrator::RunConfig;
use abcd_core::model::{validate_params, AbcdParams, Classification, InitialSpec, Profile, VelocityProfile};
use abcd_core::{Error, Execution};
use proptest::prelude::*;

fn small_spec(params: AbcdParams) -> SweepSpec {
    let grid = GridSpec::one_d(64, DEFAULT_LENGTH).unwrap();
    let mut base = RunConfig::new(params, grid, 1.0);
    base.output_every = 1000;
    let mut s = SweepSpec::new(base, InitialSpec::default());
    s.epsilon_ladder = vec![0.4, 0.2];
    s.horizon = Horizon::Fixed { k: 0.4 };
    s
}

#[test]
fn sweep_is_reproducible() {
    let mut s = small_spec(AbcdParams::preset("bbm-bbm", 0.1).unwrap());
    s.initial = InitialSpec {
        eta: Profile::RandomBandLimited {
            amplitude: 0.8,
            k_max: 2.0,
            seed: None,
        },
        velocity: VelocityProfile::RandomBandLimited {
            amplitude: 0.3,
            k_max: 2.0,
            seed: None,
        },
    };
    s.seeds = vec![5, 6];
    let a = sweep_epsilon(&s, Execution::Parallel).unwrap();
    let b = sweep_epsilon(&s, Execution::Sequential).unwrap();
    assert_eq!(a.table, b.table);
    assert_eq!(a.table.rows.len(), 4);
    for (x, y) in a.runs.iter().zip(&b.runs) {
        assert_eq!(x.final_state.eta.values(), y.final_state.eta.values());
    }
}

#[test]
fn censored_rows_carry_no_existence_time() {
    for factor in [1.0 + 1e-12, 4.0] {
        let mut s = small_spec(AbcdParams::preset("bona-smith", 0.1).unwrap());
        s.base.blow_up_factor = factor;
        for r in sweep_epsilon(&s, Execution::Parallel).unwrap().table.rows {
            assert_eq!(r.censored, r.t_exist.is_none());
            assert_eq!(r.censored, r.eps_t_exist.is_none());
        }
    }
}

fn lattice() -> impl Strategy<Value = [f64; 4]> {
    // twelfths in [-1/3, 2/3], d fixed by the sum constraint
    (-4i32..=8, -4i32..=8, -4i32..=8).prop_map(|(a, b, c)| {
        let d = 4 - a - b - c;
        [a as f64 / 12.0, b as f64 / 12.0, c as f64 / 12.0, d as f64 / 12.0]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn refusal_names_the_failed_clause(q in lattice()) {
        let [a, b, c, d] = q;
        let params = validate_params(a, b, c, d, 0.1).unwrap();
        let res = sweep_epsilon(&small_spec(params), Execution::Sequential);
        match params.long_time_gate() {
            Ok(()) => {
                prop_assert_eq!(params.classification(), Classification::LongTimeAdmissible);
                prop_assert!(res.is_ok());
            }
            Err(failure) => {
                let msg = match res {
                    Err(Error::Inadmissible(m)) => m,
                    other => return Err(TestCaseError::fail(format!("not refused: {:?}", other.map(|o| o.table)))),
                };
                prop_assert!(msg.contains(&failure.to_string()), "{} lacks {}", msg, failure);
            }
        }
    }
}
