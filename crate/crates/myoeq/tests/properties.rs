//! Property tests for the geometric and algebraic invariants: the retraction
//! is idempotent, nonexpansive, agrees with the exhaustive-face oracle, and
//! decomposes maximally; residuals are per-player shift invariant; envelopes
//! sandwich their input; the expression printer round-trips.

use proptest::prelude::*;

use myoeq::expr::{parse_expression, Scope};
use myoeq::matrix::envelope::{Envelope, EnvelopeKind};
use myoeq::matrix::Mat;
use myoeq::myopic::{equilibrium_residual, BimatrixFamily, FnFamily, PayoffFamily};
use myoeq::profile::{Layout, MixedProfile};
use myoeq::simplex::{face_decompose, project_simplex, SimplexPoint};

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, dim)
}

/// Exact nearest point by enumerating every face; independent oracle.
fn project_by_face_enumeration(z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let s: f64 = idx.iter().map(|&i| z[i]).sum();
        let shift = (1.0 - s) / idx.len() as f64;
        let mut x = vec![0.0; n];
        let mut ok = true;
        for &i in &idx {
            x[i] = z[i] + shift;
            if x[i] < 0.0 {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let d2: f64 = z.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(bd, _)| d2 < *bd) {
            best = Some((d2, x));
        }
    }
    best.unwrap().1
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn projection_is_idempotent(dim in 2usize..=6, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..dim).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let once = project_simplex(&z).unwrap();
        let twice = project_simplex(once.coords()).unwrap();
        prop_assert!(once.dist_inf(&twice) <= 1e-10);
    }

    #[test]
    fn projection_is_nonexpansive(a in vec_strategy(4), b in vec_strategy(4)) {
        let pa = project_simplex(&a).unwrap();
        let pb = project_simplex(&b).unwrap();
        let d_in: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let d_out: f64 = pa
            .coords()
            .iter()
            .zip(pb.coords())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        prop_assert!(d_out <= d_in + 1e-12);
    }

    #[test]
    fn projection_matches_face_oracle(z in vec_strategy(5)) {
        let got = project_simplex(&z).unwrap();
        let want = project_by_face_enumeration(&z);
        let dev = got
            .coords()
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        prop_assert!(dev <= 1e-9);
    }

    #[test]
    fn decomposition_reconstructs_and_is_maximal(z in vec_strategy(6)) {
        let d = face_decompose(&z).unwrap();
        let top = d.y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for &i in &d.support {
            prop_assert!((d.y[i] - top).abs() <= 1e-11);
        }
        for i in 0..z.len() {
            prop_assert!((d.x.get(i) + d.y[i] - z[i]).abs() <= 1e-12);
            if !d.support.contains(&i) {
                prop_assert_eq!(d.x.get(i), 0.0);
            }
        }
    }

    #[test]
    fn residual_is_shift_invariant(
        entries in prop::collection::vec(-3.0..3.0f64, 8),
        shifts in prop::collection::vec(-5.0..5.0f64, 2),
        p in 0.0..1.0f64,
        q in 0.0..1.0f64,
    ) {
        let a = Mat::new(2, 2, entries[..4].to_vec()).unwrap();
        let b = Mat::new(2, 2, entries[4..].to_vec()).unwrap();
        let base = BimatrixFamily::new(a.clone(), b.clone()).unwrap();
        let layout = Layout::new(&[2, 2]).unwrap();
        let (s1, s2) = (shifts[0], shifts[1]);
        let shifted = FnFamily::new(layout, move |x: &MixedProfile, out: &mut [f64]| {
            BimatrixFamily::new(a.clone(), b.clone()).unwrap().eval_into(x, out)?;
            out[0] += s1;
            out[1] += s1;
            out[2] += s2;
            out[3] += s2;
            Ok(())
        });
        let x = MixedProfile::new(vec![
            SimplexPoint::new(vec![p, 1.0 - p]).unwrap(),
            SimplexPoint::new(vec![q, 1.0 - q]).unwrap(),
        ]);
        let r0 = equilibrium_residual(&x, &base, 1e-9).unwrap();
        let r1 = equilibrium_residual(&x, &shifted, 1e-9).unwrap();
        prop_assert!((r0 - r1).abs() <= 1e-12);
    }

    #[test]
    fn envelopes_sandwich_their_input(values in prop::collection::vec(-3.0..3.0f64, 21)) {
        let vex = Envelope::compute(2, 20, &values, EnvelopeKind::Vex).unwrap();
        let cav = Envelope::compute(2, 20, &values, EnvelopeKind::Cav).unwrap();
        for i in 0..values.len() {
            prop_assert!(vex.values()[i] <= values[i] + 1e-10);
            prop_assert!(cav.values()[i] >= values[i] - 1e-10);
            prop_assert!(vex.values()[i] <= cav.values()[i] + 1e-10);
        }
        vex.check_invariants(1e-10).unwrap();
        cav.check_invariants(1e-10).unwrap();
        // mirror identity: cav(f) = -vex(-f)
        let neg: Vec<f64> = values.iter().map(|v| -v).collect();
        let vex_neg = Envelope::compute(2, 20, &neg, EnvelopeKind::Vex).unwrap();
        for i in 0..values.len() {
            prop_assert!((cav.values()[i] + vex_neg.values()[i]).abs() <= 1e-12);
        }
    }
}

// expression sources built from a small recursive strategy
fn expr_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..100).prop_map(|n| format!("{}", n as f64 / 10.0)),
        Just("x[1,T]".to_string()),
        Just("x[1,C]".to_string()),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("max({a}, {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("min({a}, {b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.prop_map(|a| format!("abs({a})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 150, ..ProptestConfig::default() })]

    #[test]
    fn printer_round_trip_is_idempotent(src in expr_source()) {
        let scope = Scope::for_players(vec![("1".into(), vec!["T".into(), "C".into()])]);
        let parsed = parse_expression(&src, &scope).unwrap();
        let printed = parsed.ast.pretty();
        let reparsed = parse_expression(&printed, &scope).unwrap();
        prop_assert_eq!(&parsed.ast, &reparsed.ast);
        prop_assert_eq!(printed, reparsed.ast.pretty());
    }
}
