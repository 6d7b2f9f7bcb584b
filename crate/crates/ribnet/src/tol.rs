//! Certification tolerances, centralized and overridable from the CLI.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// Residue conditions and BA defining properties.
    pub certification: f64,
    /// Per-component residue-theorem sums, computed from the rational form.
    pub residue_sum: f64,
    /// Evenness of the differential at sigma-paired sample points.
    pub evenness: f64,
    /// Normalized first-derivative scalar products.
    pub orthogonality: f64,
    /// Relative least-squares residual of mixed second derivatives.
    pub conjugacy: f64,
    /// Imaginary parts of quantities that must be real.
    pub realness: f64,
    /// Ribaucour transform equation residual.
    pub ribaucour: f64,
    /// Agreement of the two lambda routes.
    pub lambda: f64,
    /// Lemma identity residuals.
    pub lemma: f64,
    /// l = 1 closed-form deviation.
    pub closed_form: f64,
    /// Concircularity residual relative to circle radius.
    pub concircularity: f64,
    /// Analytic vs finite-difference first derivatives.
    pub gradient: f64,
    /// Central-difference step for gradient cross-checks.
    pub fd_step: f64,
    /// Analytic vs finite-difference second derivatives.
    pub second_gradient: f64,
    /// Condition-number ceiling before a solve is flagged degenerate.
    pub cond_max: f64,
    /// |delta x|^2 below which a pair point is degenerate.
    pub degenerate_dx: f64,
    /// |phi_alpha - 1| below which the connection coefficient blows up.
    pub phi_one: f64,
    /// Fraction of flagged grid points above which synthesis aborts.
    pub flagged_fraction_max: f64,
    /// Relative pivot threshold in the rectangular eliminations.
    pub solve_rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            certification: 1e-10,
            residue_sum: 1e-12,
            evenness: 1e-10,
            orthogonality: 1e-8,
            conjugacy: 1e-6,
            realness: 1e-10,
            ribaucour: 1e-8,
            lambda: 1e-8,
            lemma: 1e-8,
            closed_form: 1e-10,
            concircularity: 1e-6,
            gradient: 1e-6,
            fd_step: 1e-5,
            second_gradient: 1e-4,
            cond_max: 1e12,
            degenerate_dx: 1e-14,
            phi_one: 1e-12,
            flagged_fraction_max: 0.10,
            solve_rank: 1e-8,
        }
    }
}

impl Tolerances {
    /// CLI override by key name; returns false for an unknown key.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "certification" => &mut self.certification,
            "residue_sum" => &mut self.residue_sum,
            "evenness" => &mut self.evenness,
            "orthogonality" => &mut self.orthogonality,
            "conjugacy" => &mut self.conjugacy,
            "realness" => &mut self.realness,
            "ribaucour" => &mut self.ribaucour,
            "lambda" => &mut self.lambda,
            "lemma" => &mut self.lemma,
            "closed_form" => &mut self.closed_form,
            "concircularity" => &mut self.concircularity,
            "gradient" => &mut self.gradient,
            "fd_step" => &mut self.fd_step,
            "second_gradient" => &mut self.second_gradient,
            "cond_max" => &mut self.cond_max,
            "degenerate_dx" => &mut self.degenerate_dx,
            "phi_one" => &mut self.phi_one,
            "flagged_fraction_max" => &mut self.flagged_fraction_max,
            "solve_rank" => &mut self.solve_rank,
            _ => return false,
        };
        *slot = value;
        true
    }
}
