use proptest::prelude::*;
use qms_harness::generate::{generate, InstanceParameters, InstanceSpec};
use qms_harness::spec::{CheckName, Convention, GeneratorSpec, JsonMatrix, JumpSpec, ToleranceOverrides};
use qms_harness::{emit_spec, parse_spec, ProblemSpec};

fn instance(kind: &str, dim: usize, seed: u64) -> ProblemSpec {
    generate(&InstanceSpec { dim, kind: kind.into(), parameters: InstanceParameters::default(), seed }).unwrap()
}

#[test]
fn thermal_qubit_round_trips_byte_identically() {
    let bytes = emit_spec(&instance("thermal-qubit", 2, 0));
    let parsed = parse_spec(&bytes).unwrap();
    assert_eq!(emit_spec(&parsed), bytes);
}

#[test]
fn every_instance_kind_round_trips() {
    for (kind, dim) in [
        ("gksl-random", 3),
        ("raw", 2),
        ("transpose-counterexample", 3),
        ("unitary-commutant", 3),
        ("thermal-qubit", 2),
    ] {
        let bytes = emit_spec(&instance(kind, dim, 17));
        assert_eq!(emit_spec(&parse_spec(&bytes).unwrap()), bytes, "{kind}");
    }
}

#[test]
fn missing_state_sets_derivation_flag() {
    let spec = parse_spec(&emit_spec(&instance("gksl-random", 2, 1))).unwrap();
    assert!(spec.derives_state());
    let spec = parse_spec(&emit_spec(&instance("transpose-counterexample", 2, 1))).unwrap();
    assert!(!spec.derives_state());
}

#[test]
fn unknown_convention_is_rejected_with_its_path() {
    let bytes = emit_spec(&instance("raw", 2, 1));
    let text = String::from_utf8(bytes).unwrap().replace("column-stacking", "row-stacking");
    let err = parse_spec(text.as_bytes()).unwrap_err();
    assert!(err.message.contains("row-stacking"), "{err}");
    assert!(err.line.is_some());
}

#[test]
fn shape_errors_name_the_field() {
    let text = r#"{"dim": 2, "generator": {"kind": "gksl", "hamiltonian": [[[0,0],[0,0]],[[0,0],[0,0]]],
        "jumps": [{"operator": [[[1,0]]], "rate": 1.0}]}}"#;
    let err = parse_spec(text.as_bytes()).unwrap_err();
    assert_eq!(err.path, "generator.jumps[0].operator");
    assert!(err.to_string().contains("2x2"));
}

#[test]
fn malformed_input_reports_line_and_column() {
    let text = "{\n  \"dim\": 2,\n  \"generator\": {\"kind\": \"gksl\", \"hamiltonian\": [[[0,0],[0,0]],[[0,0],[0,0]]], \"jumps\": []},\n  \"checks\": [\"cp\", \"nonsense\"]\n}";
    let err = parse_spec(text.as_bytes()).unwrap_err();
    assert_eq!(err.line, Some(4));
    assert!(err.path.starts_with("checks"), "{err}");

    let err = parse_spec(b"{\"dim\": 2,").unwrap_err();
    assert!(err.line.is_some());
}

#[test]
fn non_hermitian_state_and_hamiltonian_are_schema_errors() {
    let mut spec = instance("thermal-qubit", 2, 0);
    spec.state = Some(JsonMatrix(vec![vec![[0.5, 0.0], [0.3, 0.0]], vec![[0.0, 0.0], [0.5, 0.0]]]));
    assert_eq!(spec.validate().unwrap_err().path, "state");
    let text = r#"{"dim": 1, "generator": {"kind": "gksl", "hamiltonian": [[[0, 1]]], "jumps": []}}"#;
    assert_eq!(parse_spec(text.as_bytes()).unwrap_err().path, "generator.hamiltonian");
}

#[test]
fn generation_is_deterministic() {
    assert_eq!(emit_spec(&instance("gksl-random", 3, 9)), emit_spec(&instance("gksl-random", 3, 9)));
    assert_ne!(emit_spec(&instance("gksl-random", 3, 9)), emit_spec(&instance("gksl-random", 3, 10)));
}

fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = JsonMatrix> {
    prop::collection::vec(prop::collection::vec(prop::array::uniform2(any::<f64>()), cols), rows).prop_map(|m| {
        JsonMatrix(m.into_iter().map(|r| r.into_iter().map(|[a, b]| [clean(a), clean(b)]).collect()).collect())
    })
}

/// Arbitrary finite doubles (including subnormals and extremes).
fn clean(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

fn arb_spec() -> impl Strategy<Value = ProblemSpec> {
    (1usize..=3).prop_flat_map(|n| {
        let gen = prop_oneof![
            (arb_matrix(n, n), prop::collection::vec((arb_matrix(n, n), any::<f64>()), 0..3)).prop_map(|(h, js)| {
                GeneratorSpec::Gksl {
                    hamiltonian: h,
                    jumps: js.into_iter().map(|(operator, r)| JumpSpec { operator, rate: clean(r) }).collect(),
                }
            }),
            arb_matrix(n * n, n * n)
                .prop_map(|matrix| GeneratorSpec::Superoperator { convention: Convention::ColumnStacking, matrix }),
            (arb_matrix(n * n, n * n), 0.0f64..100.0).prop_map(|(matrix, time)| GeneratorSpec::SemigroupMember {
                convention: Convention::ColumnStacking,
                matrix,
                time
            }),
        ];
        (
            gen,
            prop::option::of(arb_matrix(n, n)),
            prop::option::of(prop::sample::subsequence(CheckName::ALL.to_vec(), 0..=12)),
            prop::option::of(any::<u64>()),
            prop::option::of(prop::collection::vec(0.0f64..1e3, 1..4)),
            prop::option::of(prop::option::of(1e-14f64..1e-2)),
        )
            .prop_map(move |(generator, state, checks, seed, times, cp)| ProblemSpec {
                dim: n,
                generator,
                state,
                checks,
                tolerances: cp.map(|cp| ToleranceOverrides { cp, ..Default::default() }),
                seed,
                times,
            })
    })
}

proptest! {
    /// emit ∘ parse is the identity on emitted documents, at the JSON level
    /// (schema validation is a separate step).
    #[test]
    fn emit_parse_emit_is_stable(spec in arb_spec()) {
        let bytes = emit_spec(&spec);
        let back: ProblemSpec = qms_harness::spec::from_json(&bytes).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(emit_spec(&back), bytes);
    }
}
