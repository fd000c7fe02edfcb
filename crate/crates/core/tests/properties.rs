use cmc_sir::branching::{minimal_fixed_point, FixedPointOptions, OffspringPgf, PgfEvaluator, PgfModel};
use cmc_sir::{DegreeDistribution, EpidemicModel, TransmissionLaw};
use proptest::prelude::*;

fn law_strategy() -> impl Strategy<Value = TransmissionLaw> {
    prop_oneof![
        (0.0f64..=1.0).prop_map(TransmissionLaw::PointMass),
        (0.0f64..=1.0).prop_map(TransmissionLaw::BernoulliEndpoints),
        (0.05f64..50.0).prop_map(TransmissionLaw::BetaSymmetric),
        (0.1f64..5.0).prop_map(|r| TransmissionLaw::exp_period(r).unwrap()),
        prop::collection::vec((0.0f64..=1.0, 0.01f64..1.0), 1..4).prop_map(|atoms| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            TransmissionLaw::atoms(atoms.into_iter().map(|(t, w)| (t, w / total)).collect()).unwrap()
        }),
    ]
}

fn dist_strategy() -> impl Strategy<Value = DegreeDistribution> {
    prop::collection::vec((0u32..=4, 0u32..=3, 0.01f64..1.0), 1..5)
        .prop_filter_map("needs half-edges", |mut recs| {
            let total: f64 = recs.iter().map(|r| r.2).sum();
            recs.iter_mut().for_each(|r| r.2 /= total);
            let d = DegreeDistribution::from_triples(&recs).ok()?;
            let v = d.validate();
            (v.has_single || v.has_triangle).then_some(d)
        })
}

fn model_strategy() -> impl Strategy<Value = EpidemicModel> {
    (dist_strategy(), law_strategy()).prop_map(|(d, l)| EpidemicModel::new(d, l).unwrap())
}

const KINDS: [PgfModel; 4] = [PgfModel::Forward, PgfModel::Backward, PgfModel::ForwardVacc, PgfModel::BackwardVacc];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generating_functions_are_monotone_and_fix_one(
        model in model_strategy(),
        f_v in 0.0f64..0.95,
        pts in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 3),
    ) {
        for kind in KINDS {
            let pgf = PgfEvaluator::new(&model, kind, f_v).unwrap();
            let r = pgf.dim();
            let ones = vec![1.0; r];
            prop_assert_eq!(pgf.eval(&ones), ones.clone());
            let lo: Vec<f64> = pts[..r].iter().map(|p| p.0.min(p.1)).collect();
            let hi: Vec<f64> = pts[..r].iter().map(|p| p.0.max(p.1)).collect();
            let (a, b) = (pgf.eval(&lo), pgf.eval(&hi));
            for i in 0..r {
                prop_assert!(a[i] <= b[i] + 1e-15);
                prop_assert!((-1e-15..=1.0 + 1e-15).contains(&a[i]));
            }
        }
    }

    #[test]
    fn vaccination_scales_the_mean_matrix(model in model_strategy(), f_v in 0.0f64..0.99) {
        let base = model.forward_mean_matrix(0.0).unwrap();
        let vacc = model.forward_mean_matrix(f_v).unwrap();
        for (a, b) in base.entries.iter().zip(&vacc.entries) {
            prop_assert!(((1.0 - f_v) * a - b).abs() <= 1e-14 * a.max(1.0));
        }
        let (r, rv) = (base.perron_root(), vacc.perron_root());
        prop_assert!((rv - (1.0 - f_v) * r).abs() <= 1e-10 * r.max(1.0));
    }

    #[test]
    fn extinction_is_certain_exactly_below_threshold(model in model_strategy()) {
        let r0 = model.forward_mean_matrix(0.0).unwrap().perron_root();
        prop_assume!((r0 - 1.0).abs() > 0.05);
        let pgf = PgfEvaluator::new(&model, PgfModel::Forward, 0.0).unwrap();
        let res = minimal_fixed_point(&pgf, FixedPointOptions::default()).unwrap();
        prop_assert!(res.monotone);
        let all_one = res.q.iter().all(|&q| q > 1.0 - 1e-6);
        prop_assert_eq!(all_one, r0 <= 1.0, "r0 = {}, q = {:?}", r0, res.q);
    }

    #[test]
    fn jacobian_at_one_is_the_mean_matrix(model in model_strategy()) {
        let pgf = PgfEvaluator::new(&model, PgfModel::Forward, 0.0).unwrap();
        let mm = model.forward_mean_matrix(0.0).unwrap();
        let r = pgf.dim();
        let h = 1e-6;
        for j in 0..r {
            let mut up = vec![1.0; r];
            let mut down = vec![1.0; r];
            up[j] += h;
            down[j] -= h;
            let (a, b) = (pgf.eval(&up), pgf.eval(&down));
            for i in 0..r {
                let d = (a[i] - b[i]) / (2.0 * h);
                prop_assert!((d - mm.get(i, j)).abs() <= 1e-6, "entry ({}, {}): {} vs {}", i, j, d, mm.get(i, j));
            }
        }
    }

    #[test]
    fn constant_transmission_makes_outbreak_and_final_size_agree(
        d in dist_strategy(),
        t in 0.05f64..1.0,
    ) {
        let rep = cmc_sir::analyze(&d, &TransmissionLaw::PointMass(t), 0.0).unwrap();
        prop_assume!((rep.r0 - 1.0).abs() > 0.05);
        prop_assert!((rep.outbreak_probability - rep.final_size).abs() <= 1e-9,
            "{} vs {}", rep.outbreak_probability, rep.final_size);
    }

    #[test]
    fn critical_coverage_brings_the_root_to_one(model in model_strategy()) {
        let rep = model.analyze(0.0).unwrap();
        prop_assert_eq!(rep.r_v, rep.r0);
        if rep.r0 > 1.0 {
            let at = model.forward_mean_matrix(rep.critical_coverage).unwrap().perron_root();
            prop_assert!((at - 1.0).abs() <= 1e-12 * rep.r0);
        } else {
            prop_assert_eq!(rep.critical_coverage, 0.0);
            prop_assert_eq!(rep.final_size, 0.0);
        }
    }
}
