use serde::Serialize;

use super::fixed_point::{minimal_fixed_point, FixedPointOptions};
use super::pgf::{PgfEvaluator, PgfModel};
use super::{check_coverage, EpidemicModel, MeanMatrix};
use crate::degree::DegreeDistribution;
use crate::error::Result;
use crate::transmission::TransmissionLaw;

/// Derived epidemic quantities for one degree law, transmission law and
/// vaccination coverage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub f_v: f64,
    /// Perron root of the unvaccinated forward mean matrix.
    pub r0: f64,
    /// Vaccine-associated reproduction number; equal to `r0`.
    pub r_v: f64,
    /// Perron root under coverage `f_v`.
    pub vaccinated_r: f64,
    pub critical_coverage: f64,
    pub outbreak_probability: f64,
    pub final_size: f64,
    pub subcritical: bool,
    /// Active forward types, also labelling `q_forward`.
    pub forward_types: Vec<usize>,
    pub q_forward: Vec<f64>,
    /// Active vaccinated backward types, labelling `q_backward`.
    pub backward_types: Vec<usize>,
    pub q_backward: Vec<f64>,
    pub mean_matrix: MeanMatrix,
    pub forward_iterations: usize,
    pub forward_residual: f64,
    pub backward_iterations: usize,
    pub backward_residual: f64,
    pub warnings: Vec<String>,
}

pub fn analyze(dist: &DegreeDistribution, law: &TransmissionLaw, f_v: f64) -> Result<AnalysisReport> {
    check_coverage(f_v)?;
    let model = EpidemicModel::new(dist.clone(), law.clone())?;
    model.analyze(f_v)
}

impl EpidemicModel {
    pub fn analyze(&self, f_v: f64) -> Result<AnalysisReport> {
        check_coverage(f_v)?;
        let mean_matrix = self.forward_mean_matrix(0.0)?;
        let r0 = mean_matrix.perron_root();
        let vaccinated_r = (1.0 - f_v) * r0;
        let critical_coverage = if r0 > 1.0 { 1.0 - 1.0 / r0 } else { 0.0 };
        let subcritical = vaccinated_r <= 1.0;

        let forward = PgfEvaluator::new(self, PgfModel::ForwardVacc, f_v)?;
        let backward = PgfEvaluator::new(self, PgfModel::BackwardVacc, f_v)?;
        let mut warnings = self.regularity_warnings();

        let mut report = AnalysisReport {
            f_v,
            r0,
            r_v: r0,
            vaccinated_r,
            critical_coverage,
            outbreak_probability: 0.0,
            final_size: 0.0,
            subcritical,
            forward_types: forward.types(),
            q_forward: vec![1.0; forward.types().len()],
            backward_types: backward.types(),
            q_backward: vec![1.0; backward.types().len()],
            mean_matrix,
            forward_iterations: 0,
            forward_residual: 0.0,
            backward_iterations: 0,
            backward_residual: 0.0,
            warnings: Vec::new(),
        };
        if !subcritical {
            let opts = FixedPointOptions::default();
            let qf = minimal_fixed_point(&forward, opts)?;
            let qb = minimal_fixed_point(&backward, opts)?;
            if !qf.monotone || !qb.monotone {
                warnings.push("fixed-point iterates were not monotone".into());
            }
            report.outbreak_probability = (1.0 - forward.ancestor(&qf.q)).clamp(0.0, 1.0);
            report.final_size = (1.0 - backward.ancestor(&qb.q)).clamp(0.0, 1.0);
            report.forward_iterations = qf.iterations;
            report.forward_residual = qf.residual;
            report.backward_iterations = qb.iterations;
            report.backward_residual = qb.residual;
            report.q_forward = qf.q;
            report.q_backward = qb.q;
        }
        report.warnings = warnings;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::OffspringPgf;
    use approx::assert_abs_diff_eq;

    fn dist1() -> DegreeDistribution {
        DegreeDistribution::from_triples(&[(2, 1, 1.0)]).unwrap()
    }

    // root in (0, 1) of 2u^5 + u^3 - 7u + 4, by bisection
    fn quintic_root() -> f64 {
        let p = |u: f64| 2.0 * u.powi(5) + u.powi(3) - 7.0 * u + 4.0;
        let (mut lo, mut hi) = (0.0, 1.0 - 1e-9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn desk_values() {
        let rep = analyze(&dist1(), &TransmissionLaw::PointMass(0.5), 0.0).unwrap();
        let u = quintic_root();
        assert_abs_diff_eq!(u, 0.6393, epsilon = 1e-4);
        let final_size = 1.0 - u * u * (0.25 + 0.25 * u * u + 0.5 * u.powi(4));
        assert_abs_diff_eq!(rep.r0, 1.3660, epsilon = 1e-4);
        assert_abs_diff_eq!(rep.critical_coverage, 0.2679, epsilon = 1e-4);
        assert_abs_diff_eq!(rep.final_size, final_size, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.outbreak_probability, final_size, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.final_size, 0.8219, epsilon = 1e-4);
        // q_backward is (triangle unknown, triangle, single); collapse to (single, triangle)
        assert_abs_diff_eq!(rep.q_backward[0], rep.q_backward[1], epsilon = 1e-12);
        assert_abs_diff_eq!(rep.q_backward[2], 2.0 * u - 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.q_backward[1], u * u, epsilon = 1e-9);
        assert_abs_diff_eq!(1.0 - rep.outbreak_probability, 0.1781, epsilon = 1e-4);
        assert!(!rep.subcritical);
        assert_eq!(rep.r_v, rep.r0);
    }

    #[test]
    fn two_type_backward_agrees() {
        let model = EpidemicModel::new(dist1(), TransmissionLaw::PointMass(0.5)).unwrap();
        let pgf = PgfEvaluator::new(&model, PgfModel::Backward, 0.0).unwrap();
        let res = minimal_fixed_point(&pgf, FixedPointOptions::default()).unwrap();
        let u = quintic_root();
        assert_abs_diff_eq!(res.q[0], 2.0 * u - 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(res.q[1], u * u, epsilon = 1e-9);
        assert_abs_diff_eq!(res.q[1], 0.4087, epsilon = 1e-4);
        let plain = 1.0 - pgf.ancestor(&res.q);
        let rep = model.analyze(0.0).unwrap();
        assert_abs_diff_eq!(plain, rep.final_size, epsilon = 1e-9);
    }

    #[test]
    fn subcritical_and_saturated() {
        let rep = analyze(&dist1(), &TransmissionLaw::PointMass(0.1), 0.0).unwrap();
        assert!(rep.subcritical);
        assert_eq!((rep.outbreak_probability, rep.final_size, rep.critical_coverage), (0.0, 0.0, 0.0));
        assert!(rep.q_forward.iter().all(|&q| q == 1.0));

        let model = EpidemicModel::new(dist1(), TransmissionLaw::PointMass(1.0)).unwrap();
        let pgf = PgfEvaluator::new(&model, PgfModel::Forward, 0.0).unwrap();
        assert_eq!(pgf.eval(&[0.0, 0.0, 0.0]), vec![0.0, 0.0, 0.0]);
        let res = minimal_fixed_point(&pgf, FixedPointOptions::default()).unwrap();
        assert_eq!(res.q, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn vaccination_at_critical_coverage() {
        let law = TransmissionLaw::BernoulliEndpoints(0.5);
        let rep = analyze(&dist1(), &law, 0.0).unwrap();
        assert_abs_diff_eq!(rep.r0, (0.5 + 4.25f64.sqrt()) / 2.0, epsilon = 1e-12);
        let at = analyze(&dist1(), &law, rep.critical_coverage).unwrap();
        assert_abs_diff_eq!(at.vaccinated_r, 1.0, epsilon = 1e-12);
        let partial = analyze(&dist1(), &law, 0.1).unwrap();
        assert!(partial.final_size < rep.final_size);
        assert!(partial.final_size <= 0.9);
    }
}
