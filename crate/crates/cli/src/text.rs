//! Plain-text renderings for `--format text`.

use std::fmt::Write;

use lowrank_poly::concentration::ChainVerdict;
use lowrank_poly::sphere::{FrameMax, RatioProbe, RestartSpread, SphereMax};

use crate::output::{ApproxOutput, BenchOutput, ConcentrateOutput, NormOutput, OracleOutput};

/// `x` to 12 significant digits, trailing zeros trimmed (`2.0`,
/// `0.707106781187`). Very large or small magnitudes use exponent form.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..12).contains(&mag) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - mag).max(1) as usize;
    let s = format!("{x:.decimals$}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| sig12(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn spread(s: &RestartSpread<f64>) -> String {
    format!(
        "restarts {}: min {} median {} max {}",
        s.count,
        sig12(s.min),
        sig12(s.median),
        sig12(s.max)
    )
}

pub fn norm(o: &NormOutput) -> String {
    format!(
        "bombieri {}\nmax_coeff {}\n",
        sig12(o.bombieri),
        sig12(o.max_coeff)
    )
}

pub fn oracle(o: &OracleOutput) -> String {
    format!("value {} ({})\n", sig12(o.value), o.method)
}

pub fn sphere_max(m: &SphereMax<f64>) -> String {
    format!(
        "value {}\nargmax {}\nconverged {} after {} iterations\n{}\n",
        sig12(m.value),
        vector(&m.argmax),
        m.converged,
        m.iterations_used,
        spread(&m.spread)
    )
}

pub fn frame_max(m: &FrameMax<f64>) -> String {
    let mut s = format!("value {}\nframe (columns)\n", sig12(m.value));
    let b = m.frame.basis();
    for j in 0..b.cols() {
        let _ = writeln!(s, "  {}", vector(&b.col(j)));
    }
    let _ = writeln!(
        s,
        "converged {} after {} iterations\n{}",
        m.converged,
        m.iterations_used,
        spread(&m.spread)
    );
    s
}

pub fn approx(o: &ApproxOutput) -> String {
    let a = &o.approx;
    let mut s = format!(
        "terms {} (bound {}, {})\nstop {:?}\n",
        a.terms.len(),
        o.step_bound,
        if o.within_bound { "ok" } else { "VIOLATED" },
        a.stop
    );
    for (i, t) in a.terms.iter().enumerate() {
        let _ = writeln!(s, "  {i}: lambda {} u {}", sig12(t.lambda), vector(&t.u));
    }
    let _ = writeln!(
        s,
        "residual bombieri {}\nresidual opnorm est {} (threshold {})",
        vector(&a.residual_bombieri),
        sig12(a.final_residual_opnorm()),
        sig12(a.eps * a.input_norm)
    );
    if let Some(x) = o.residual_opnorm_oracle {
        let _ = writeln!(s, "residual opnorm oracle {}", sig12(x));
    }
    s
}

pub fn verdict(v: &ChainVerdict<f64>) -> String {
    let mut s = String::new();
    for l in &v.links {
        let _ = writeln!(
            s,
            "{} {:<18} {} vs {} margin {}",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            sig12(l.left),
            sig12(l.right),
            sig12(l.margin)
        );
    }
    let _ = writeln!(
        s,
        "{} weights\n{} dim V = {} <= f(k) = {}\ntol {}\nmid4 {} eps^2 |p|^2 {} (not asserted)",
        if v.weights_ok { "PASS" } else { "FAIL" },
        if v.dims_ok { "PASS" } else { "FAIL" },
        v.values.dim_v,
        v.values.f_k,
        sig12(v.tol),
        if v.values.mid4 <= v.values.eps_sq_norm_sq {
            "<="
        } else {
            ">"
        },
        sig12(v.values.eps_sq_norm_sq)
    );
    s
}

pub fn concentrate(o: &ConcentrateOutput) -> String {
    let r = &o.report;
    let mut s = format!(
        "k {} (greedy terms {}, eps_inner {})\ndefect {}\ndefect_inf {}\n\
         defect/|p| {}  defect/|p|^2 {}  defect/(eps^2 |p|^2) {}\n",
        r.k,
        r.approx.terms.len(),
        sig12(r.eps_inner),
        sig12(r.defect),
        sig12(r.defect_inf),
        sig12(r.ratios.over_norm),
        sig12(r.ratios.over_norm_sq),
        sig12(r.ratios.over_eps_sq_norm_sq),
    );
    for a in &r.per_alpha {
        let _ = writeln!(s, "  alpha {:?}: {}", a.alpha, sig12(a.opnorm_sq));
    }
    s.push_str(&verdict(&o.verdict));
    s
}

pub fn ratio(r: &RatioProbe) -> String {
    format!(
        "d {} k {} n {}: max ratio {} (sample {}), mean {}\n",
        r.d,
        r.k,
        r.n,
        sig12(r.max_ratio),
        r.argmax_sample,
        sig12(r.mean_ratio)
    )
}

pub fn bench_csv(b: &BenchOutput) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "eps",
        "d",
        "n",
        "samples",
        "model",
        "bound",
        "mean_terms",
        "max_terms",
        "violations",
        "residual_violations",
        "defect_over_norm",
        "defect_over_norm_sq",
        "defect_over_eps_sq_norm_sq",
    ])?;
    let opt = |x: Option<f64>| x.map(sig12).unwrap_or_default();
    for c in &b.cells {
        w.write_record([
            c.eps.to_string(),
            c.d.to_string(),
            c.n.to_string(),
            c.samples.to_string(),
            c.model.clone(),
            c.bound.to_string(),
            sig12(c.mean_terms),
            c.max_terms.to_string(),
            c.violations.to_string(),
            c.residual_violations.to_string(),
            opt(c.mean_defect_over_norm),
            opt(c.mean_defect_over_norm_sq),
            opt(c.mean_defect_over_eps_sq_norm_sq),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
