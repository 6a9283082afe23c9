use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use ztel_core::algebra::DEFAULT_BALL_BUDGET;
use ztel_core::boundary_action::{convergence_check, probe_sequences, BoundaryAction};
use ztel_core::coarse::{psi_inv_from_star, qi_constants, star, ControlFunction};
use ztel_core::compactification::build_psi;
use ztel_core::nullity::{decay_experiment, eta_estimate, euclidean_baseline, Family, FamilySpec};
use ztel_core::telescope::{act, fundamental_domain, u_map, v_map};
use ztel_core::{
    Automorphism, DecayCurve, EtaTable, ExperimentConfig, FundamentalDomain, Group, GroupElement, ProductPoint, PsiSpec,
    TelescopePoint,
};

use crate::plot::{Chart, Series};
use crate::{core_error, Experiment, Fatal};

/// Largest tolerated final deviation for a probe sequence.
const BOUNDARY_TOLERANCE: f64 = 0.05;
const ALGEBRA_CASES: usize = 1000;
const TELESCOPE_CASES: usize = 500;
const ROUND_TRIPS: usize = 10_000;

pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub plot: bool,
}

pub struct Outcome {
    pub pass: bool,
    pub summary: String,
}

trait Core<T> {
    fn core(self) -> Result<T, Fatal>;
}

impl<T> Core<T> for ztel_core::Result<T> {
    fn core(self) -> Result<T, Fatal> {
        self.map_err(core_error)
    }
}

pub fn run(experiment: Experiment, ctx: &Context) -> Result<Outcome, Fatal> {
    match experiment {
        Experiment::Group => group(ctx),
        Experiment::Telescope => telescope(ctx),
        Experiment::Nullity => nullity(ctx),
        Experiment::Baseline => baseline(ctx),
        Experiment::Coarse => coarse(ctx),
        Experiment::Boundary => boundary(ctx),
        Experiment::DemoHeisenberg => demo(ctx),
    }
}

impl Context {
    fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), Fatal> {
        let mut w = csv::Writer::from_path(self.out.join(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn json(&self, name: &str, value: &serde_json::Value) -> Result<(), Fatal> {
        let mut f = File::create(self.out.join(name))?;
        serde_json::to_writer_pretty(&mut f, value)?;
        writeln!(f)?;
        Ok(())
    }

    fn svg(&self, name: &str, chart: Chart) -> Result<(), Fatal> {
        if self.plot {
            std::fs::write(self.out.join(name), chart.render())?;
        }
        Ok(())
    }

    fn aut(&self) -> &Automorphism {
        &self.cfg.automorphism
    }

    fn n(&self) -> usize {
        self.cfg.automorphism.dim()
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed)
    }

    fn pipeline(&self) -> Result<(FundamentalDomain, EtaTable, PsiSpec), Fatal> {
        let domain = fundamental_domain(self.aut(), self.cfg.step).core()?;
        let eta = eta_estimate(self.aut(), &domain, self.cfg.kmax);
        let spec = build_psi(self.aut(), eta.as_slice(), self.cfg.mode).core()?;
        Ok((domain, eta, spec))
    }

    fn write_eta(&self, eta: &EtaTable) -> Result<(), Fatal> {
        self.csv("eta.csv", &["k", "eta"], eta.as_slice().iter().enumerate().map(|(k, e)| vec![k.to_string(), e.to_string()]))
    }
}

fn curve_rows(curve: &DecayCurve) -> impl Iterator<Item = Vec<String>> + '_ {
    curve.entries.iter().map(|e| vec![e.family.clone(), e.scale.to_string(), e.delta.to_string()])
}

fn curve_chart(title: &str, y_label: &str, curve: &DecayCurve) -> Chart {
    Chart {
        title: title.into(),
        x_label: "scale".into(),
        y_label: y_label.into(),
        log_x: true,
        log_y: true,
        series: curve.labels().into_iter().map(|l| Series { points: curve.series(&l), label: l }).collect(),
    }
}

fn random_element(rng: &mut ChaCha8Rng, n: usize, kmax: i64, gmax: i64) -> GroupElement {
    GroupElement::new(rng.gen_range(-kmax..=kmax), (0..n).map(|_| rng.gen_range(-gmax..=gmax)).collect())
}

/// A multiple of `2⁻¹⁰` in `[−bound, bound]`, so sums and integer-matrix
/// products stay exact.
fn dyadic(rng: &mut ChaCha8Rng, bound: i64) -> f64 {
    rng.gen_range(-bound * 1024..=bound * 1024) as f64 / 1024.0
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0)).fold(0.0, f64::max)
}

fn group(ctx: &Context) -> Result<Outcome, Fatal> {
    let n = ctx.n();
    let g = Group::new(ctx.aut().clone());
    let radius = ctx.cfg.max_radius;
    let counts = g.growth_series(radius, DEFAULT_BALL_BUDGET).core()?;
    let flat = Group::new(Automorphism::identity(n)).growth_series(radius, DEFAULT_BALL_BUDGET).core()?;
    let mut ball = 0;
    ctx.csv(
        "growth.csv",
        &["r", "count", "ball"],
        counts.iter().enumerate().map(|(r, &c)| {
            ball += c;
            vec![r.to_string(), c.to_string(), ball.to_string()]
        }),
    )?;
    ctx.csv(
        "growth_comparison.csv",
        &["r", "group", "flat"],
        counts.iter().zip(&flat).enumerate().map(|(r, (c, f))| vec![r.to_string(), c.to_string(), f.to_string()]),
    )?;

    let mut rng = ctx.rng();
    let mut failures = 0usize;
    for _ in 0..ALGEBRA_CASES {
        let (a, b, c) = (random_element(&mut rng, n, 6, 50), random_element(&mut rng, n, 6, 50), random_element(&mut rng, n, 6, 50));
        let assoc = g.multiply(&g.multiply(&a, &b).core()?, &c).core()? == g.multiply(&a, &g.multiply(&b, &c).core()?).core()?;
        let inv = g.multiply(&g.inverse(&a).core()?, &a).core()?.is_identity();
        let h = GroupElement::translation(a.g.clone());
        let lhs = g.multiply(&g.multiply(&GroupElement::t_power(n, -1), &h).core()?, &GroupElement::t_power(n, 1)).core()?;
        let relator = lhs == GroupElement::translation(ctx.aut().apply(1, &a.g).core()?);
        failures += usize::from(!(assoc && inv && relator));
    }
    ctx.json(
        "group.json",
        &json!({
            "name": ctx.cfg.name,
            "max_radius": radius,
            "spheres": counts,
            "flat_spheres": flat,
            "random_cases": ALGEBRA_CASES,
            "seed": ctx.cfg.seed,
            "failures": failures,
        }),
    )?;
    let as_points = |v: &[u64]| v.iter().enumerate().map(|(r, &c)| (r as f64, c as f64)).collect();
    ctx.svg(
        "growth.svg",
        Chart {
            title: format!("sphere sizes, {}", ctx.cfg.name),
            x_label: "r".into(),
            y_label: "|S(r)|".into(),
            log_x: false,
            log_y: true,
            series: vec![
                Series { label: ctx.cfg.name.clone(), points: as_points(&counts) },
                Series { label: format!("Z^{}", n + 1), points: as_points(&flat) },
            ],
        },
    )?;
    Ok(Outcome {
        pass: failures == 0,
        summary: format!(
            "group {}: |S({radius})| = {} (flat {}), {failures}/{ALGEBRA_CASES} algebra failures",
            ctx.cfg.name,
            counts[radius as usize],
            flat[radius as usize]
        ),
    })
}

fn telescope(ctx: &Context) -> Result<Outcome, Fatal> {
    let n = ctx.n();
    let aut = ctx.aut();
    let g = Group::new(aut.clone());
    let domain = fundamental_domain(aut, ctx.cfg.step).core()?;
    let header: Vec<String> = (0..n).map(|i| format!("x{i}")).chain(["r".to_string()]).collect();
    let header: Vec<&str> = std::iter::once("index").chain(header.iter().map(String::as_str)).collect();
    ctx.csv(
        "domain.csv",
        &header,
        domain.samples.iter().enumerate().map(|(i, p)| {
            std::iter::once(i.to_string()).chain(p.x.iter().map(f64::to_string)).chain([p.r.to_string()]).collect()
        }),
    )?;
    let eta = eta_estimate(aut, &domain, ctx.cfg.kmax);
    ctx.write_eta(&eta)?;

    let mut rng = ctx.rng();
    let (mut action_err, mut roundtrip_err) = (0.0f64, 0.0f64);
    for _ in 0..TELESCOPE_CASES {
        let a = random_element(&mut rng, n, 6, 50);
        let b = random_element(&mut rng, n, 6, 50);
        let p = TelescopePoint::new((0..n).map(|_| dyadic(&mut rng, 10)).collect(), dyadic(&mut rng, 5));
        let ab = g.multiply(&a, &b).core()?;
        let (lhs, rhs) = (act(aut, &ab, &p), act(aut, &a, &act(aut, &b, &p)));
        action_err = action_err.max(rel_err(&lhs.x, &rhs.x)).max(rel_err(&[lhs.r], &[rhs.r]));
    }
    for _ in 0..ROUND_TRIPS {
        let q = ProductPoint::new((0..n).map(|_| dyadic(&mut rng, 100)).collect(), dyadic(&mut rng, 8));
        let back = v_map(aut, &u_map(aut, &q));
        roundtrip_err = roundtrip_err.max(rel_err(&back.x, &q.x)).max((back.r - q.r).abs());
    }
    let pass = action_err <= 1e-12 && roundtrip_err <= 1e-12;
    ctx.json(
        "telescope.json",
        &json!({
            "name": ctx.cfg.name,
            "domain_samples": domain.len(),
            "action_cases": TELESCOPE_CASES,
            "action_max_error": action_err,
            "round_trips": ROUND_TRIPS,
            "roundtrip_max_error": roundtrip_err,
            "seed": ctx.cfg.seed,
        }),
    )?;
    ctx.svg(
        "eta.svg",
        Chart {
            title: format!("eta, {}", ctx.cfg.name),
            x_label: "k".into(),
            y_label: "eta(k)".into(),
            log_x: false,
            log_y: true,
            series: vec![Series {
                label: "eta".into(),
                points: eta.as_slice().iter().enumerate().map(|(k, &e)| (k as f64, e)).collect(),
            }],
        },
    )?;
    Ok(Outcome {
        pass,
        summary: format!(
            "telescope {}: {} domain samples, action error {action_err:.3e}, round-trip error {roundtrip_err:.3e}",
            ctx.cfg.name,
            domain.len()
        ),
    })
}

fn nullity(ctx: &Context) -> Result<Outcome, Fatal> {
    let (domain, eta, spec) = ctx.pipeline()?;
    ctx.write_eta(&eta)?;
    ctx.json("psi.json", &spec.to_json())?;
    let curve = decay_experiment(&spec, ctx.aut(), &domain, &ctx.cfg.families).core()?;
    ctx.csv("decay.csv", &["family", "scale", "delta"], curve_rows(&curve))?;
    let verdicts = curve.verdicts(&ctx.cfg.families, ctx.cfg.spearman);
    let pass = verdicts.iter().all(|v| v.pass);
    ctx.json("verdict.json", &json!({ "name": ctx.cfg.name, "pass": pass, "families": verdicts }))?;
    ctx.svg("decay.svg", curve_chart(&format!("smallness, {}", ctx.cfg.name), "delta", &curve))?;
    let lines: Vec<String> = verdicts
        .iter()
        .map(|v| format!("  {} {}: final {:.4}, spearman {:.3}", if v.pass { "PASS" } else { "FAIL" }, v.family, v.final_delta, v.spearman))
        .collect();
    Ok(Outcome { pass, summary: format!("nullity {}:\n{}", ctx.cfg.name, lines.join("\n")) })
}

fn baseline(ctx: &Context) -> Result<Outcome, Fatal> {
    let domain = fundamental_domain(ctx.aut(), ctx.cfg.step).core()?;
    let curve = euclidean_baseline(ctx.aut(), &domain, &ctx.cfg.families).core()?;
    ctx.csv("baseline.csv", &["family", "scale", "radius"], curve_rows(&curve))?;
    ctx.svg("baseline.svg", curve_chart(&format!("euclidean angular radius, {}", ctx.cfg.name), "radius", &curve))?;
    let finals: Vec<String> = curve
        .labels()
        .into_iter()
        .map(|l| format!("  {l}: final {:.4}", curve.series(&l).last().map_or(f64::NAN, |e| e.1)))
        .collect();
    Ok(Outcome { pass: true, summary: format!("baseline {}:\n{}", ctx.cfg.name, finals.join("\n")) })
}

fn coarse(ctx: &Context) -> Result<Outcome, Fatal> {
    let (k, eps) = qi_constants(ctx.aut());
    let slope = 3.0 * k;
    let rho = ControlFunction::linear(slope).core()?;
    let phi = rho.inverse().core()?;
    let psi_inv = psi_inv_from_star(&rho).core()?;
    let mut rows = Vec::new();
    let (mut star_gap, mut log_excess) = (0.0f64, f64::NEG_INFINITY);
    for j in 1..=200 {
        let x = 10f64.powf(j as f64 / 20.0);
        let s = star(&phi, x).core()? as f64;
        let p = psi_inv.eval(x);
        let bound = x.log(3.0) + 1.0;
        star_gap = star_gap.max((p - s).abs());
        log_excess = log_excess.max(p - bound);
        rows.push(vec![x.to_string(), s.to_string(), p.to_string(), bound.to_string()]);
    }
    ctx.csv("coarse.csv", &["x", "star", "psi_inv", "log3_bound"], rows.iter().cloned())?;
    let pass = star_gap <= 1.0 + 1e-12 && log_excess <= 1e-12;
    ctx.json(
        "coarse.json",
        &json!({
            "name": ctx.cfg.name,
            "qi_k": k,
            "qi_epsilon": eps,
            "rho_slope": slope,
            "max_star_gap": star_gap,
            "max_log3_excess": log_excess,
        }),
    )?;
    let column = |c: usize| rows.iter().map(|r| (r[0].parse().unwrap_or(f64::NAN), r[c].parse().unwrap_or(f64::NAN))).collect();
    ctx.svg(
        "coarse.svg",
        Chart {
            title: format!("psi_inv from star, rho = {slope:.3}x"),
            x_label: "x".into(),
            y_label: "value".into(),
            log_x: true,
            log_y: false,
            series: vec![
                Series { label: "star".into(), points: column(1) },
                Series { label: "psi_inv".into(), points: column(2) },
                Series { label: "log3 x + 1".into(), points: column(3) },
            ],
        },
    )?;
    Ok(Outcome {
        pass,
        summary: format!("coarse {}: K = {k:.4}, max |psi_inv - star| = {star_gap:.3}, max excess over log3 bound = {log_excess:.3}", ctx.cfg.name),
    })
}

fn boundary(ctx: &Context) -> Result<Outcome, Fatal> {
    let aut = ctx.aut();
    let (_, _, spec) = ctx.pipeline()?;
    let action = BoundaryAction::new(aut);
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut series = Vec::new();
    let mut pass = true;
    for probe in probe_sequences(&spec, aut).core()? {
        let report = convergence_check(&spec, &action, &probe.element, &probe.points, &probe.limit).core()?;
        for (i, d) in report.deviations.iter().enumerate() {
            rows.push(vec![probe.label.clone(), i.to_string(), probe.points[i].r.to_string(), d.to_string()]);
        }
        let ok = report.final_deviation < BOUNDARY_TOLERANCE;
        pass &= ok;
        reports.push(json!({
            "sequence": probe.label,
            "element": probe.element,
            "limit_mu": probe.limit.mu(),
            "final_deviation": report.final_deviation,
            "tail_max": report.tail_max,
            "pass": ok,
        }));
        series.push(Series {
            label: probe.label,
            points: report.deviations.iter().enumerate().map(|(i, &d)| (i as f64, d)).collect(),
        });
    }
    ctx.csv("boundary.csv", &["sequence", "index", "r", "deviation"], rows)?;
    ctx.json("boundary.json", &json!({ "name": ctx.cfg.name, "tolerance": BOUNDARY_TOLERANCE, "sequences": reports }))?;
    ctx.svg(
        "boundary.svg",
        Chart {
            title: format!("boundary convergence, {}", ctx.cfg.name),
            x_label: "index".into(),
            y_label: "chart deviation".into(),
            log_x: false,
            log_y: true,
            series,
        },
    )?;
    let lines: Vec<String> = reports
        .iter()
        .map(|r| format!("  {}: final deviation {:.3e}", r["sequence"].as_str().unwrap_or(""), r["final_deviation"].as_f64().unwrap_or(f64::NAN)))
        .collect();
    Ok(Outcome { pass, summary: format!("boundary {}:\n{}", ctx.cfg.name, lines.join("\n")) })
}

fn demo(ctx: &Context) -> Result<Outcome, Fatal> {
    let (domain, eta, spec) = ctx.pipeline()?;
    ctx.write_eta(&eta)?;
    ctx.json("psi.json", &spec.to_json())?;
    let t: Vec<FamilySpec> = ctx.cfg.families.iter().filter(|f| f.family == Family::TPowers).cloned().collect();
    let t = if t.is_empty() { vec![FamilySpec::new(Family::TPowers, vec![4, 8, 16, 32, 64], None)] } else { t };
    let slope = decay_experiment(&spec, ctx.aut(), &domain, &t).core()?;
    let eucl = euclidean_baseline(ctx.aut(), &domain, &t).core()?;
    ctx.csv("decay.csv", &["family", "scale", "delta"], curve_rows(&slope))?;
    ctx.csv("baseline.csv", &["family", "scale", "radius"], curve_rows(&eucl))?;
    let (s, e) = (slope.series("t"), eucl.series("t"));
    let slope_final = s.last().map_or(f64::NAN, |p| p.1);
    let eucl_final = e.last().map_or(f64::NAN, |p| p.1);
    let pass = slope_final < eucl_final;
    let as_json = |v: &[(f64, f64)]| json!({ "scales": v.iter().map(|p| p.0).collect::<Vec<_>>(), "deltas": v.iter().map(|p| p.1).collect::<Vec<_>>() });
    ctx.json(
        "summary.json",
        &json!({
            "name": ctx.cfg.name,
            "family": "t",
            "slope_compactification": as_json(&s),
            "euclidean": as_json(&e),
            "slope_final": slope_final,
            "euclidean_final": eucl_final,
            "ratio": eucl_final / slope_final,
            "pass": pass,
        }),
    )?;
    ctx.svg(
        "demo.svg",
        Chart {
            title: format!("t^k family, {}", ctx.cfg.name),
            x_label: "k".into(),
            y_label: "delta".into(),
            log_x: true,
            log_y: true,
            series: vec![Series { label: "slope".into(), points: s }, Series { label: "euclidean".into(), points: e }],
        },
    )?;
    Ok(Outcome {
        pass,
        summary: format!(
            "demo {}: final slope delta {slope_final:.4}, final euclidean radius {eucl_final:.4} (x{:.1})",
            ctx.cfg.name,
            eucl_final / slope_final
        ),
    })
}
