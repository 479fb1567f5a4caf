use serde::Serialize;

use hbern::domain::Interval;
use hbern::error::Result;
use hbern::instability::{certify_instability, InstabilityCertificate};

use super::{quad_spec, Report};
use crate::config::RunConfig;
use crate::surface::build_strip;

#[derive(Serialize)]
struct InstabilityReport {
    command: &'static str,
    status: &'static str,
    surface: String,
    branch: &'static str,
    certificate: InstabilityCertificate,
}

pub fn run(rc: &RunConfig) -> Result<Report> {
    let strip = build_strip(rc)?;
    let j = match rc.list("J", 2)? {
        Some(v) => Some(Interval::new(v[0], v[1])?),
        None => None,
    };
    let branch = if strip.branch == hbern::surfaces::Branch::X { "x" } else { "y" };
    // the Y-form strip is the X-form one with x and y swapped; the certificate is the same
    let x_form = strip.to_x_form();
    let certificate = certify_instability(&x_form, j, &quad_spec(rc)?)?;
    let mut csv = String::from("k,lhs,rhs,ratio,error,dominated\n");
    for s in &certificate.trace {
        csv.push_str(&format!("{},{:e},{:e},{:e},{:e},{}\n", s.k, s.lhs, s.rhs, s.ratio(), s.error, s.dominated));
    }
    let report = InstabilityReport {
        command: "instability",
        status: "unstable",
        surface: x_form.g.describe(),
        branch,
        certificate,
    };
    Report::new(&report, Some(csv))
}
