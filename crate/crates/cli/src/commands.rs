//! One function per subcommand; each returns a report and an exit code.

use contactq::coeffring::{MultiPoly, Vars};
use contactq::contact::calculus::r_xi;
use contactq::contact::schouten_check;
use contactq::fedosov::{FedosovData, FedosovError, Observable};
use contactq::obstruct::{
    characteristic_integral, chi_character, delta2_adjusted_form, delta2_closed_form, describe, quantize, tau_period,
};
use contactq::tensor::Tensor;

use crate::error::CliError;
use crate::report::Report;
use crate::spec::Pipeline;

pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, code: 0 }
    }
}

fn index_name(vars: &Vars, idx: &[usize]) -> String {
    let names: Vec<&str> = idx.iter().map(|&i| vars.name(i)).collect();
    format!("[{}]", names.join(","))
}

/// Nonzero components whose index satisfies `keep`.
fn components(t: &Tensor, keep: impl Fn(&[usize]) -> bool) -> Vec<(String, String)> {
    t.nonzero()
        .filter(|(i, _)| keep(i))
        .map(|(i, p)| (index_name(t.vars(), &i), p.to_string()))
        .collect()
}

fn sorted(i: &[usize]) -> bool {
    i.windows(2).all(|w| w[0] <= w[1])
}

fn passed(ok: bool) -> &'static str {
    if ok {
        "passed"
    } else {
        "FAILED"
    }
}

fn require_weight(p: &Pipeline, k: u32) -> Result<(), CliError> {
    let need = 2 * k as i64 + 1;
    if p.weight < need {
        return Err(FedosovError::Truncation {
            requested: k,
            exact: ((p.weight - 1).max(0) / 2) as u32,
        }
        .into());
    }
    Ok(())
}

pub fn validate(p: &Pipeline) -> Result<Outcome, CliError> {
    let cd = &p.cd;
    let vars = cd.vars();
    let mut r = Report::new();
    let coords: Vec<String> = (0..cd.dim())
        .map(|i| match cd.chart.period(i) {
            Some(t) => format!("{} (period {t})", vars.name(i)),
            None => vars.name(i).to_string(),
        })
        .collect();
    r.value("coords", coords.join(", "));
    let per_coord = |v: &[MultiPoly]| -> Vec<(String, String)> {
        v.iter().enumerate().map(|(i, f)| (vars.name(i).to_string(), f.to_string())).collect()
    };
    r.pairs("lambda", per_coord(&cd.lambda));
    r.pairs("xi", per_coord(&cd.xi));
    r.value("reeb_coord", cd.reeb_coord.map_or("none", |c| vars.name(c)));
    r.value("vol_density", &cd.vol_density);
    r.pairs("omega", components(&cd.omega, |i| i[0] < i[1]));
    r.pairs("pi", components(&cd.pi, |i| i[0] < i[1]));
    schouten_check(cd)?;
    r.list(
        "checks",
        vec![
            "contact form identities: passed".into(),
            "Schouten identities: passed".into(),
            "contact connection: passed".into(),
        ],
    );
    Ok(r.into())
}

pub fn geometry(p: &Pipeline) -> Result<Outcome, CliError> {
    let mut r = Report::new();
    r.value("flat", p.conn.is_flat());
    r.pairs("christoffel", components(&p.conn.gamma, |i| i[1] <= i[2]));
    r.pairs("riemann", components(&p.conn.riemann_low, |i| i[0] <= i[1] && i[2] < i[3]));
    r.pairs("r_xi", components(&r_xi(&p.cd, &p.conn), sorted));
    Ok(r.into())
}

fn check_lines(fd: &FedosovData) -> Vec<String> {
    let mut lines: Vec<String> = fd
        .checks
        .iter()
        .map(|c| format!("{}: {} (through weight {})", c.name, passed(c.passed), c.exact_through))
        .collect();
    let lead = fd.leading_terms_check();
    lines.push(format!(
        "{}: {}",
        lead.name,
        if lead.passed { "matched".to_string() } else { format!("MISMATCH {}", lead.detail) }
    ));
    lines
}

pub fn fedosov(p: &Pipeline) -> Result<Outcome, CliError> {
    let fd = p.fedosov()?;
    let mut r = Report::new();
    r.value("weight", fd.trunc);
    if fd.r.is_zero() {
        r.value("r", "0");
    } else {
        r.list("r", fd.r.to_canonical_string().lines().map(String::from).collect());
    }
    let checks = check_lines(&fd);
    let code = if fd.leading_terms_check().passed { 0 } else { 3 };
    r.list("checks", checks);
    Ok(Outcome { report: r, code })
}

pub fn star(p: &Pipeline, a: &str, b: &str) -> Result<Outcome, CliError> {
    let k = p.nu_order;
    require_weight(p, k)?;
    let fd = p.fedosov()?;
    let oa = Observable::classical(&p.poly("a", a)?, k);
    let ob = Observable::classical(&p.poly("b", b)?, k);
    let mut warnings = Vec::new();
    for (name, o) in [("a", &oa), ("b", &ob)] {
        let d = fd.delta_to_order(o, k)?;
        if !d.is_zero() {
            warnings.push(format!(
                "Delta {name} = {d} is nonzero: {name} is not a quantum observable and associativity is not guaranteed"
            ));
        }
    }
    let mut r = Report::new();
    r.value("a*b", fd.star(&oa, &ob));
    r.list("warnings", warnings);
    Ok(r.into())
}

pub fn delta(p: &Pipeline, a: &str) -> Result<Outcome, CliError> {
    let k = p.nu_order;
    require_weight(p, k)?;
    let fd = p.fedosov()?;
    let a0 = p.poly("a", a)?;
    let mut r = Report::new();
    r.value("Delta a", fd.delta_to_order(&Observable::classical(&a0, k), k)?);
    if p.cd.xi_apply(&a0).is_zero() && fd.is_canonical() {
        r.value("Delta_2 a, closed form", delta2_closed_form(&p.cd, &p.conn, &a0)?);
        r.value("Delta_2 a, adjusted closed form", delta2_adjusted_form(&p.cd, &p.conn, &a0)?);
    }
    Ok(r.into())
}

pub fn chi(p: &Pipeline) -> Result<Outcome, CliError> {
    let mut r = Report::new();
    r.value("chi", chi_character(&p.cd, &p.conn, true));
    r.value("chi, tilde-free", chi_character(&p.cd, &p.conn, false));
    Ok(r.into())
}

pub fn periods(p: &Pipeline) -> Result<Outcome, CliError> {
    let chi = chi_character(&p.cd, &p.conn, true);
    let mut tau = Vec::new();
    let mut chis = Vec::new();
    for cc in p.orbits() {
        tau.push((describe(&cc), tau_period(&cc, &p.cd)?.to_string()));
        let v = match characteristic_integral(&cc, &p.cd, &chi) {
            Ok(v) => v.to_string(),
            Err(e) => format!("undefined ({e})"),
        };
        chis.push((describe(&cc), v));
    }
    let mut r = Report::new();
    r.pairs("tau", tau).pairs("chi", chis);
    Ok(r.into())
}

pub fn quantize_cmd(p: &Pipeline, a0: &str) -> Result<Outcome, CliError> {
    let k = p.nu_order;
    require_weight(p, k)?;
    let fd = p.fedosov()?;
    let a0 = p.poly("a0", a0)?;
    let mut r = Report::new();
    match quantize(&fd, &a0, k, &p.orbits())? {
        Ok(a) => {
            let plain = a.coeffs().iter().skip(1).all(MultiPoly::is_zero);
            r.value("status", if plain { "quantized, no corrections" } else { "quantized with corrections" });
            r.value("a", a);
            Ok(r.into())
        }
        Err(rep) => {
            r.value("status", "obstructed");
            r.value("order", rep.order);
            r.value("residual", &rep.residual);
            r.pairs("psi", rep.psi_values.iter().map(|(cc, v)| (describe(cc), v.to_string())).collect());
            Ok(Outcome { report: r, code: 2 })
        }
    }
}

pub fn selftest(p: &Pipeline) -> Result<Outcome, CliError> {
    let cd = &p.cd;
    let mut lines = vec![format!("contact form identities: passed")];
    lines.push(format!("Schouten identities: {}", passed(schouten_check(cd).is_ok())));
    let fd = p.fedosov()?;
    lines.extend(check_lines(&fd));
    let mut ok = fd.checks.iter().all(|c| c.passed) && fd.leading_terms_check().passed;
    let alg = fd.algebra();
    let k = p.nu_order.min(((p.weight - 1).max(0) / 2) as u32);
    let one = Observable::classical(&MultiPoly::one(cd.vars()), k);
    let q1 = fd.quantum_lift(&one).agrees_with(&alg.one());
    lines.push(format!("Q1 = 1: {}", passed(q1)));
    let mut pq = true;
    for i in 0..cd.dim() {
        let a = Observable::classical(&MultiPoly::coord(cd.vars(), i), k);
        pq &= Observable::from_scalar_part(&alg.proj_p(&fd.quantum_lift(&a)), k).is_some_and(|b| b.agrees_with(&a));
    }
    lines.push(format!("PQ = id on coordinates: {}", passed(pq)));
    let d1 = fd.delta_to_order(&one, k)?.is_zero();
    lines.push(format!("Delta 1 = 0: {}", passed(d1)));
    ok &= q1 && pq && d1;
    if fd.is_canonical() && k >= 2 {
        let trans = cd.transverse_coords();
        let mut same = true;
        for (n, &i) in trans.iter().enumerate() {
            let j = trans[(n + 1) % trans.len()];
            let x = MultiPoly::coord(cd.vars(), i);
            let y = MultiPoly::coord(cd.vars(), j);
            let a0 = &(&x * &x) * &(&x + &y);
            let lhs = fd.delta_to_order(&Observable::classical(&a0, 2), 2)?;
            same &= lhs.coeff(2) == &delta2_adjusted_form(cd, &p.conn, &a0)?;
        }
        lines.push(format!("Delta_2 = adjusted closed form on cubic samples: {}", passed(same)));
        ok &= same;
    }
    let next = contactq::fedosov::solve_r(alg, &p.conn, &p.omega, p.weight + 1)?;
    let stable = next.r.agrees_with(&fd.r);
    lines.push(format!("r stable under weight {} -> {}: {}", p.weight, p.weight + 1, passed(stable)));
    ok &= stable;
    let mut r = Report::new();
    r.value("result", if ok { "all checks passed" } else { "FAILED" });
    r.list("checks", lines);
    Ok(Outcome {
        report: r,
        code: if ok { 0 } else { 3 },
    })
}
