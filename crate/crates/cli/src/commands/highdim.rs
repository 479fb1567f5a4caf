use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hbern::error::{Error, Result};
use hbern::gexpr::ScalarFn;
use hbern::highdim::{
    coord_names, cylinder_hmean, cylinder_perimeter_check, negative_example_nu, CylinderPatch, CylinderSurface,
    GraphCylinder, PerimeterCheck, TensorRule, MAX_N,
};

use super::Report;
use crate::config::RunConfig;

#[derive(Serialize)]
struct SphereTable {
    radius: f64,
    expected: f64,
    samples: usize,
    max_abs_error: f64,
}

#[derive(Serialize)]
struct PerimeterRow {
    params: Vec<(f64, f64)>,
    t: (f64, f64),
    #[serde(flatten)]
    check: PerimeterCheck,
}

#[derive(Serialize)]
struct NegativeTable {
    graph: String,
    samples: usize,
    max_abs_div: f64,
    max_norm_defect: f64,
    max_t_derivative: f64,
}

#[derive(Serialize)]
struct CurvatureTable {
    h: String,
    samples: usize,
    min: f64,
    max: f64,
}

#[derive(Serialize)]
struct HighdimReport {
    command: &'static str,
    n: usize,
    coordinates: Vec<String>,
    sphere: SphereTable,
    perimeter: Vec<PerimeterRow>,
    negative_example: NegativeTable,
    curvature: Option<CurvatureTable>,
}

const PERIMETER_WINDOWS: usize = 3;

/// Grid points per axis so that a `dims`-dimensional grid stays near a few thousand points.
fn per_axis(dims: usize) -> usize {
    ((4000f64).powf(1.0 / dims as f64).floor() as usize).clamp(2, 9)
}

fn sum_of_squares(names: &[String]) -> String {
    names.iter().map(|v| format!("{v}^2")).collect::<Vec<_>>().join(" + ")
}

pub fn run(rc: &RunConfig) -> Result<Report> {
    let n: usize = rc.get("n")?.unwrap_or(2);
    if !(1..=MAX_N).contains(&n) {
        return Err(Error::invalid(format!("n = {n} is outside 1..={MAX_N}")));
    }
    let radius: f64 = rc.get("radius")?.unwrap_or(1.3);
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    let alpha: f64 = rc.get("alpha")?.unwrap_or(1e-3);
    let names = coord_names(n);
    let m = 2 * n;

    // sphere ∂B_R(0) × ℝ
    let sphere_src = format!("{} - {}", sum_of_squares(&names), radius * radius);
    let sphere = CylinderSurface::parse(n, &sphere_src, vec![(-1.5 * radius, 1.5 * radius); m], alpha)?;
    let pts = sphere.surface_samples(per_axis(m))?;
    sphere.min_gradient(&pts)?;
    let expected = (2 * n - 1) as f64 / radius;
    let mut max_abs_error = 0.0f64;
    for z in &pts {
        max_abs_error = max_abs_error.max((cylinder_hmean(&sphere, z)? - expected).abs());
    }
    let sphere_table = SphereTable { radius, expected, samples: pts.len(), max_abs_error };

    // perimeter on windows of the upper cap z_{2n} = √(R² − Σ others²)
    let nodes: usize = rc.get("nodes")?.unwrap_or(match n {
        1 => 12,
        2 => 6,
        3 => 4,
        4 => 3,
        _ => 2,
    });
    let rule = TensorRule { nodes, panels: 1 };
    let others: Vec<&str> = names[..m - 1].iter().map(String::as_str).collect();
    let others_owned: Vec<String> = others.iter().map(|s| s.to_string()).collect();
    let cap = ScalarFn::parse(&format!("sqrt({} - ({}))", radius * radius, sum_of_squares(&others_owned)), &others)?;
    // every window coordinate stays below s, so Σ others² ≤ R²/4
    let s = 0.5 * radius / ((m - 1) as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(rc.seed()?);
    let mut perimeter = Vec::with_capacity(PERIMETER_WINDOWS);
    for _ in 0..PERIMETER_WINDOWS {
        let params: Vec<(f64, f64)> = (0..m - 1)
            .map(|_| {
                let lo = rng.gen_range(-s..s / 3.0);
                (lo, lo + rng.gen_range(s / 6.0..2.0 * s / 3.0))
            })
            .collect();
        let t0 = rng.gen_range(-1.0..1.0);
        let t = (t0, t0 + 0.5);
        let patch = CylinderPatch::new(n, m - 1, cap.clone(), params.clone(), t)?;
        let check = cylinder_perimeter_check(&sphere, &patch, &rule)?;
        perimeter.push(PerimeterRow { params, t, check });
    }

    // unit horizontal field of a minimal graph cylinder
    let (graph_src, bounds): (String, Vec<(f64, f64)>) = match rc.raw("graph") {
        Some(g) => (g.trim().to_string(), vec![(-0.5, 0.5); m - 1]),
        None if n == 1 => ("0.5*x + 1".to_string(), vec![(-1.0, 1.0)]),
        None => {
            let gn = GraphCylinder::graph_names(n);
            let (xs, ys) = gn.split_at(n);
            let src = if ys.is_empty() {
                format!("sqrt({})", sum_of_squares(xs))
            } else {
                format!("sqrt({} - ({}))", sum_of_squares(xs), sum_of_squares(ys))
            };
            let mut b = vec![(0.6, 1.5); n];
            b.extend(vec![(-0.5, 0.5); n - 1]);
            (src, b)
        }
    };
    let graph = GraphCylinder::parse(n, &graph_src)?;
    let k = per_axis(m - 1);
    let total = k.pow((m - 1) as u32);
    let (mut max_div, mut max_norm, mut max_t) = (0.0f64, 0.0f64, 0.0f64);
    for mut i in 0..total {
        let mut z: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi)| {
                let j = i % k;
                i /= k;
                lo + (hi - lo) * j as f64 / (k - 1) as f64
            })
            .collect();
        z.push(0.0);
        let v = negative_example_nu(&graph, &z)?;
        max_div = max_div.max(v.div_h.abs());
        max_norm = max_norm.max((v.norm - 1.0).abs());
        max_t = max_t.max(v.t_derivative.abs());
    }
    let negative_example = NegativeTable {
        graph: graph_src,
        samples: total,
        max_abs_div: max_div,
        max_norm_defect: max_norm,
        max_t_derivative: max_t,
    };

    let curvature = match rc.raw("h") {
        Some(h) => {
            let c = CylinderSurface::parse(n, h, vec![(-2.0, 2.0); m], alpha)?;
            let pts = c.surface_samples(per_axis(m))?;
            c.min_gradient(&pts)?;
            let hs: Vec<f64> = pts.iter().map(|z| cylinder_hmean(&c, z)).collect::<Result<_>>()?;
            Some(CurvatureTable {
                h: h.to_string(),
                samples: hs.len(),
                min: hs.iter().copied().fold(f64::INFINITY, f64::min),
                max: hs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
        }
        None => None,
    };

    let mut csv = String::from("window,sigma_h,hausdorff,rel_diff,error\n");
    for (i, r) in perimeter.iter().enumerate() {
        csv.push_str(&format!(
            "{i},{:.15e},{:.15e},{:e},{:e}\n",
            r.check.sigma_h, r.check.hausdorff, r.check.rel_diff, r.check.error
        ));
    }
    let report = HighdimReport {
        command: "highdim",
        n,
        coordinates: names,
        sphere: sphere_table,
        perimeter,
        negative_example,
        curvature,
    };
    Report::new(&report, Some(csv))
}
