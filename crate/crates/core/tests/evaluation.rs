mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use cubic_core::cohomology::AbelianInvariants;
use cubic_core::local_arith::evaluation::{
    brauer_allowed_fraction, local_evaluation_table, z2_table, EvaluationFunction, EvaluationOptions, LocalMassTable,
    Measure, TritangentData,
};
use cubic_core::local_arith::{p_adic_mass, Place, SurfaceModel};

use common::{general_forms, synthetic};

fn q(n: i64, d: i64) -> Measure {
    Measure::Exact(BigRational::new(n.into(), d.into()))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn published_adelic_fractions() {
    let z2 = AbelianInvariants(vec![2]);
    let t6 = [z2_table(Place::Finite(2), q(1, 1), q(1, 2)), z2_table(Place::Finite(3), q(70, 81), q(28, 81))];
    assert_eq!(brauer_allowed_fraction(&t6, &z2).unwrap(), q(4, 7));

    let k4 = AbelianInvariants(vec![2, 2]);
    let chars = [(0, 0), (1, 0), (0, 1), (1, 1)].map(|(a, b)| vec![rat(a, 2), rat(b, 2)]);
    let table = |place, ms: [Measure; 4]| LocalMassTable {
        place,
        group: k4.clone(),
        entries: chars.iter().cloned().zip(ms).collect(),
        unresolved: BigRational::zero(),
    };
    let t10 = [
        table(Place::Finite(2), [q(7, 16), q(5, 16), q(1, 4), q(1, 4)]),
        table(Place::Finite(5), [q(516, 625), q(0, 1), q(96, 625), q(0, 1)]),
    ];
    assert_eq!(brauer_allowed_fraction(&t10, &k4).unwrap(), q(111, 340));

    let approx = |v: f64| Measure::Approx { value: v, err: 5e-5 };
    let t7 = [z2_table(Place::Finite(3), q(2, 3), q(4, 9)), z2_table(Place::Infinite, approx(1.9179), approx(1.1673))];
    let f = brauer_allowed_fraction(&t7, &z2).unwrap();
    assert!((f.value() - 0.5243).abs() < 1e-3, "{f}");
}

#[test]
fn constructed_fractions() {
    let z2 = AbelianInvariants(vec![2]);
    assert_eq!(brauer_allowed_fraction(&[], &z2).unwrap(), Measure::one());
    let at_zero = [z2_table(Place::Finite(2), q(3, 2), q(0, 1)), z2_table(Place::Finite(5), q(26, 25), q(0, 1))];
    assert_eq!(brauer_allowed_fraction(&at_zero, &z2).unwrap(), Measure::one());
    let obstructed = [z2_table(Place::Finite(2), q(0, 1), q(3, 2)), z2_table(Place::Finite(5), q(26, 25), q(0, 1))];
    assert_eq!(brauer_allowed_fraction(&obstructed, &z2).unwrap(), Measure::zero());
    assert!(brauer_allowed_fraction(&at_zero, &AbelianInvariants(vec![2, 2])).is_err());
}

#[test]
fn mass_table_files_round_trip() {
    let t = z2_table(Place::Finite(3), q(70, 81), q(28, 81));
    let back: LocalMassTable = t.to_file_string().parse().unwrap();
    assert_eq!(back, t);
    let text = "mass-table v1\nplace inf\ngroup 2\nentry 0 : 1.9179+-0.0001\nentry 1/2 : 1.1673+-0.0001\n";
    let t: LocalMassTable = text.parse().unwrap();
    assert_eq!(t.place, Place::Infinite);
    assert!((t.total().value() - 3.0852).abs() < 1e-9);
    let err = "mass-table v1\nplace 3\ngroup 2\nentry 1/3 : 1/2\n".parse::<LocalMassTable>().unwrap_err();
    assert!(err.to_string().contains("order"));
    let err = "mass-table v1\nplace 3\nentry 0 1/2\n".parse::<LocalMassTable>().unwrap_err();
    assert_eq!(err.line, Some(3));
}

#[test]
fn square_functions_evaluate_to_zero() {
    // 15 forms, each used twice: F30 is a square; conjugate pairs keep it rational.
    let mut base: Vec<[(i64, i64); 4]> = Vec::new();
    for i in 0..7 {
        base.push([(1, 0), (i, 1), (1, 0), (0, 0)]);
        base.push([(1, 0), (i, -1), (1, 0), (0, 0)]);
    }
    base.push([(0, 0), (0, 0), (1, 0), (1, 0)]);
    let doubled: Vec<_> = base.iter().chain(&base).copied().collect();
    let data = synthetic(&doubled);
    let back: TritangentData = data.to_file_string().parse().unwrap();
    assert_eq!(back, data);
    let g = EvaluationFunction::new(data).unwrap();
    let s = SurfaceModel::fermat();
    let t = local_evaluation_table(&s, &g, &BigInt::from(2), 5, EvaluationOptions { max_level: 2 }).unwrap();
    assert!(t.entries[1].1.value() == 0.0);
    assert_eq!(t.total(), Measure::Exact(p_adic_mass(&s, 5).unwrap()));
}

#[test]
fn split_primes_give_constant_tables() {
    // 2 is a square modulo 7.
    let mut forms = vec![[(1, 0), (0, 0), (0, 0), (0, 0)], [(0, 0), (0, 0), (0, 0), (1, 0)]];
    forms.extend(general_forms(14).iter().flat_map(|f| [*f, *f]));
    let g = EvaluationFunction::new(synthetic(&forms)).unwrap();
    let s = SurfaceModel::fermat();
    let t = local_evaluation_table(&s, &g, &BigInt::from(2), 7, EvaluationOptions { max_level: 3 }).unwrap();
    assert!(t.is_constant() && t.entries[1].1.value() == 0.0);
    assert_eq!(t.total(), Measure::Exact(p_adic_mass(&s, 7).unwrap()));
}

/// For `g = x·w·(square)` and `Q_7(√3)` unramified, the local value is the
/// parity of `v(x) + v(w)`. The Fermat cubic has good reduction at 7, so every
/// point modulo 49 lifts; classes with `x, w ≢ 0 mod 49` have known parity.
#[test]
fn nontrivial_table_matches_counting_oracle() {
    let mut forms = vec![[(1, 0), (0, 0), (0, 0), (0, 0)], [(0, 0), (0, 0), (0, 0), (1, 0)]];
    forms.extend(general_forms(14).iter().flat_map(|f| [*f, *f]));
    let g = EvaluationFunction::new(synthetic(&forms)).unwrap();
    let s = SurfaceModel::fermat();
    let (p, m) = (7u64, 2u32);
    let table = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            local_evaluation_table(&s, &g, &BigInt::from(3), p, EvaluationOptions { max_level: 4 }).unwrap()
        })
    };
    let t = table(4);
    assert_eq!(t, table(1));
    assert_eq!(t.total(), Measure::Exact(p_adic_mass(&s, p).unwrap()));

    let qm = p.pow(m);
    let (mut odd, mut unknown) = (0u64, 0u64);
    for n in 0..qm.pow(4) {
        let x = [n % qm, n / qm % qm, n / (qm * qm) % qm, n / (qm * qm * qm)];
        if x.iter().all(|c| c % p == 0) || s.eval_mod(&x, qm) != 0 {
            continue;
        }
        if x[0] == 0 || x[3] == 0 {
            unknown += 1;
        } else if ((x[0] % p == 0) as u32 + (x[3] % p == 0) as u32) % 2 == 1 {
            odd += 1;
        }
    }
    let norm = ((qm - qm / p) * qm.pow(2)) as f64;
    let (lo, hi) = (odd as f64 / norm, (odd + unknown) as f64 / norm);
    let half = t.entries[1].1.value();
    let slack = t.unresolved.to_f64().unwrap();
    assert!(half + slack >= lo - 1e-12 && half <= hi + 1e-12, "{half} not in [{lo}, {hi}]");
    assert!(half > 0.0 && t.entries[0].1.value() > half);
}
