// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON writers. Floats are written with 17 significant digits and
//! lines end in LF, so files round-trip and compare byte for byte.

use std::fmt::Write as _;

use semiflow::harness::{InstabilityRow, LemmaReport, RateReport};

pub const RATE_HEADER: &str =
    "problem_id,scheme,dim1,dim2,t,n,error_op,error_weighted,norm_power,bound_rhs,wall_ns";

pub const LEMMA_HEADER: &str =
    "problem_id,lemma_id,max_ratio,explicit,measured_constant,refined_constant,slope,pass";

pub const INSTABILITY_HEADER: &str =
    "beta,n,norm_of_power,lower_bound,scalar_norm_power,scalar_lambda_power";

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// Rows of every report, in the order given.
pub fn rate_csv(reports: &[RateReport]) -> String {
    let mut out = String::from(RATE_HEADER);
    out.push('\n');
    for r in reports {
        for row in &r.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.problem_id,
                r.scheme.name(),
                r.dims.0,
                r.dims.1,
                real(r.t),
                row.n,
                real(row.error_op),
                real(row.error_weighted),
                real(row.norm_of_power),
                real(row.bound_rhs),
                row.wall_ns
            );
        }
    }
    out
}

pub fn lemma_csv(reports: &[LemmaReport]) -> String {
    let mut out = String::from(LEMMA_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.problem_id,
            r.lemma_id.name(),
            real(r.max_ratio),
            r.explicit,
            optional(r.measured_constant),
            optional(r.refined_constant),
            optional(r.slope),
            r.pass
        );
    }
    out
}

pub fn instability_csv(rows: &[InstabilityRow]) -> String {
    let mut out = String::from(INSTABILITY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            real(r.beta),
            r.n,
            real(r.norm_of_power),
            real(r.lower_bound),
            real(r.scalar_norm_power),
            real(r.scalar_lambda_power)
        );
    }
    out
}

pub fn json<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
